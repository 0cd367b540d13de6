//! Deterministic report emission: an insertion-ordered JSON value with
//! fixed float formatting, plus the run manifest written next to outputs.
//!
//! Reports must be byte-identical across reruns with the same seed, so
//! nothing here depends on hash ordering, locale or time. Floats are
//! printed with 17 significant digits (shortest representation that
//! round-trips every finite f64).

use crate::error::{FracError, Result};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;

/// Format a float with 17 significant digits in scientific notation.
/// `parse::<f64>()` of the output reproduces the input bit-for-bit.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    format!("{:.16e}", x)
}

/// JSON value with insertion-ordered object keys.
#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    UInt(u64),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    Object(Vec<(String, Json)>),
}

impl Json {
    pub fn f(x: f64) -> Json {
        Json::Float(x)
    }
    pub fn i(x: i64) -> Json {
        Json::Int(x)
    }
    pub fn u(x: u64) -> Json {
        Json::UInt(x)
    }
    pub fn s(x: impl Into<String>) -> Json {
        Json::Str(x.into())
    }
    pub fn b(x: bool) -> Json {
        Json::Bool(x)
    }
    pub fn arr(items: Vec<Json>) -> Json {
        Json::Array(items)
    }
    pub fn floats(items: &[f64]) -> Json {
        Json::Array(items.iter().copied().map(Json::Float).collect())
    }
    pub fn obj(fields: Vec<(&str, Json)>) -> Json {
        Json::Object(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    /// Append a field to an object; panics on non-objects (builder misuse).
    pub fn push(&mut self, key: &str, value: Json) {
        match self {
            Json::Object(fields) => fields.push((key.to_string(), value)),
            _ => panic!("push on non-object json"),
        }
    }

    /// Render with 2-space indentation and a trailing newline.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::UInt(u) => {
                let _ = write!(out, "{u}");
            }
            Json::Float(x) => {
                // JSON has no NaN/Inf literals; report them as null.
                if x.is_finite() {
                    out.push_str(&fmt_f64(*x));
                } else {
                    out.push_str("null");
                }
            }
            Json::Str(s) => write_json_string(out, s),
            Json::Array(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    item.write(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push(']');
            }
            Json::Object(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    write_json_string(out, k);
                    out.push_str(": ");
                    v.write(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push('}');
            }
        }
    }
}

fn write_json_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// SHA-256 digest of a file, hex-encoded.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| FracError::io(format!("{}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hex::encode(hasher.finalize()))
}

/// Everything needed to reproduce a run: tool version, subcommand,
/// flat parameter list, seed, input digests, output paths.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Vec<(String, String)>,
    pub seed: u64,
    pub inputs: Vec<(String, String)>, // (path, sha256)
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: u64) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            params: Vec::new(),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.params.push((key.to_string(), value.to_string()));
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs
            .push((path.display().to_string(), file_digest(path)?));
        Ok(())
    }

    pub fn to_json(&self) -> Json {
        Json::obj(vec![
            ("tool", Json::s("fracest")),
            ("version", Json::s(env!("CARGO_PKG_VERSION"))),
            ("subcommand", Json::s(&self.subcommand)),
            (
                "params",
                Json::Object(
                    self.params
                        .iter()
                        .map(|(k, v)| (k.clone(), Json::s(v)))
                        .collect(),
                ),
            ),
            ("seed", Json::u(self.seed)),
            (
                "inputs",
                Json::Array(
                    self.inputs
                        .iter()
                        .map(|(p, d)| {
                            Json::obj(vec![("path", Json::s(p)), ("sha256", Json::s(d))])
                        })
                        .collect(),
                ),
            ),
            (
                "outputs",
                Json::Array(self.outputs.iter().map(Json::s).collect()),
            ),
        ])
    }

    /// Write `<output>.manifest.json` next to the given output file.
    pub fn write_alongside(&self, output: &Path) -> Result<()> {
        let mut path = output.as_os_str().to_owned();
        path.push(".manifest.json");
        std::fs::write(&path, self.to_json().render())
            .map_err(|e| FracError::io(e.to_string()))
    }
}
