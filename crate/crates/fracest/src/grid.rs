//! Grid functions: a curve tabulated on a strictly increasing node set,
//! together with the mesh metadata needed to reproduce it.
//!
//! Fractional kernels concentrate error where the integrand is steep, so
//! the operators in [`crate::fraccalc`] are mesh-driven rather than
//! step-driven. Two families are supported:
//!
//! * uniform nodes on `[a, b]`,
//! * power-graded nodes `node_k = b * (k/N)^r`, which cluster near the
//!   origin where kernels of the form `x^(-a)` blow up.
//!
//! Serialization is a two-column CSV `node,value` with a single header
//! line `# grid=<uniform|graded:r> alpha=<a>`. Floats are written with 17
//! significant digits, so read-back reproduces the struct bit-for-bit.

use crate::error::{FracError, Result};
use crate::report::fmt_f64;

/// Mesh family metadata. `Graded(r)` means `node_k = b * (k/N)^r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    Uniform,
    Graded(f64),
}

impl Grading {
    pub fn label(&self) -> String {
        match self {
            Grading::Uniform => "uniform".to_string(),
            Grading::Graded(r) => format!("graded:{}", fmt_f64(*r)),
        }
    }

    pub fn parse(s: &str) -> Result<Grading> {
        if s == "uniform" {
            return Ok(Grading::Uniform);
        }
        if let Some(rest) = s.strip_prefix("graded:") {
            let r: f64 = rest
                .parse()
                .map_err(|_| FracError::invalid(format!("bad grading exponent `{rest}`")))?;
            if !(r >= 1.0) {
                return Err(FracError::invalid(format!(
                    "grading exponent must be >= 1, got {r}"
                )));
            }
            return Ok(Grading::Graded(r));
        }
        Err(FracError::invalid(format!(
            "bad grid spec `{s}`, expected `uniform` or `graded:<r>`"
        )))
    }
}

/// Default grading exponent for estimation order `alpha`: strong enough
/// that the first-cell error of `(x - t)^(-alpha)` kernels is O(h^2).
pub fn default_grading_exponent(alpha: f64) -> f64 {
    2.0 / (1.0 - alpha)
}

/// A function tabulated on strictly increasing nodes. `alpha` records the
/// fractional order the values refer to (0 when not applicable); it rides
/// along so serialized curves are self-describing.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
    grading: Grading,
    alpha: f64,
}

impl GridFunction {
    pub fn new(
        nodes: Vec<f64>,
        values: Vec<f64>,
        grading: Grading,
        alpha: f64,
    ) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(FracError::invalid(format!(
                "nodes/values length mismatch: {} vs {}",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.len() < 2 {
            return Err(FracError::invalid("grid needs at least 2 nodes"));
        }
        if !nodes[0].is_finite() || nodes[0] < 0.0 {
            return Err(FracError::invalid(format!(
                "first node must be finite and >= 0, got {}",
                nodes[0]
            )));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(FracError::invalid(format!(
                    "nodes must be strictly increasing and finite, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        for &v in &values {
            if !v.is_finite() {
                return Err(FracError::invalid(format!("non-finite value {v}")));
            }
        }
        Ok(GridFunction {
            nodes,
            values,
            grading,
            alpha,
        })
    }

    /// Tabulate `f` on uniform nodes over `[0, b]`.
    pub fn tabulate_uniform(b: f64, n: usize, alpha: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let nodes = uniform_nodes(0.0, b, n)?;
        let values = nodes.iter().map(|&x| f(x)).collect();
        GridFunction::new(nodes, values, Grading::Uniform, alpha)
    }

    /// Tabulate `f` on graded nodes `b (k/N)^r` for `k = 0..=N`.
    pub fn tabulate_graded(
        b: f64,
        n: usize,
        r: f64,
        alpha: f64,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let nodes = graded_nodes(b, n, r)?;
        let values = nodes.iter().map(|&x| f(x)).collect();
        GridFunction::new(nodes, values, Grading::Graded(r), alpha)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires >= 2 nodes
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn set_alpha(&mut self, alpha: f64) {
        self.alpha = alpha;
    }

    /// Replace values with `g(node, value)`, keeping the mesh.
    pub fn map(&self, g: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| g(x, v))
            .collect();
        GridFunction::new(self.nodes.clone(), values, self.grading, self.alpha)
    }

    /// Piecewise-linear interpolation, constant extrapolation past the ends.
    pub fn value_at(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return self.values[0];
        }
        if x >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        let i = match self
            .nodes
            .binary_search_by(|a| a.partial_cmp(&x).unwrap())
        {
            Ok(i) => return self.values[i],
            Err(i) => i,
        };
        let (x0, x1) = (self.nodes[i - 1], self.nodes[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    /// Trapezoid integral of the tabulated values over the full mesh.
    pub fn trapezoid(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.nodes.len() {
            acc += 0.5 * (self.values[i] + self.values[i - 1]) * (self.nodes[i] - self.nodes[i - 1]);
        }
        acc
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# grid={} alpha={}\n",
            self.grading.label(),
            fmt_f64(self.alpha)
        ));
        for (x, v) in self.nodes.iter().zip(&self.values) {
            out.push_str(&fmt_f64(*x));
            out.push(',');
            out.push_str(&fmt_f64(*v));
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let header = lines
            .next()
            .ok_or_else(|| FracError::invalid("empty grid file"))?;
        let rest = header
            .strip_prefix("# grid=")
            .ok_or_else(|| FracError::invalid("missing `# grid=` header line"))?;
        let mut parts = rest.split_whitespace();
        let grading = Grading::parse(
            parts
                .next()
                .ok_or_else(|| FracError::invalid("empty grid header"))?,
        )?;
        let alpha_part = parts
            .next()
            .ok_or_else(|| FracError::invalid("header missing alpha=<a>"))?;
        let alpha: f64 = alpha_part
            .strip_prefix("alpha=")
            .ok_or_else(|| FracError::invalid(format!("bad header token `{alpha_part}`")))?
            .parse()
            .map_err(|_| FracError::invalid(format!("bad alpha in header `{alpha_part}`")))?;

        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (a, b) = line.split_once(',').ok_or_else(|| {
                FracError::invalid(format!("row {}: expected `node,value`", lineno + 2))
            })?;
            let x: f64 = a.trim().parse().map_err(|_| {
                FracError::invalid(format!("row {}: bad node `{a}`", lineno + 2))
            })?;
            let v: f64 = b.trim().parse().map_err(|_| {
                FracError::invalid(format!("row {}: bad value `{b}`", lineno + 2))
            })?;
            nodes.push(x);
            values.push(v);
        }
        GridFunction::new(nodes, values, grading, alpha)
    }
}

/// `n + 1` uniform nodes on `[a, b]`.
pub fn uniform_nodes(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if !(b > a) {
        return Err(FracError::invalid(format!("need b > a, got [{a}, {b}]")));
    }
    if n < 1 {
        return Err(FracError::invalid("need at least 1 interval"));
    }
    Ok((0..=n)
        .map(|k| a + (b - a) * (k as f64) / (n as f64))
        .collect())
}

/// `n + 1` power-graded nodes `b (k/n)^r` for `k = 0..=n`; node 0 is 0.
pub fn graded_nodes(b: f64, n: usize, r: f64) -> Result<Vec<f64>> {
    if !(b > 0.0) {
        return Err(FracError::invalid(format!("need b > 0, got {b}")));
    }
    if n < 1 {
        return Err(FracError::invalid("need at least 1 interval"));
    }
    if !(r >= 1.0) {
        return Err(FracError::invalid(format!(
            "grading exponent must be >= 1, got {r}"
        )));
    }
    Ok((0..=n)
        .map(|k| b * ((k as f64) / (n as f64)).powf(r))
        .collect())
}

/// Mesh on `[0, b]` refined to the right of each jump point: a uniform
/// backbone plus, after every `h` in `jumps`, a graded cluster
/// `h + (b - h) (k/m)^r`. Kernels applied to data with an atom at `h`
/// are singular just past `h`; the cluster keeps that error local.
pub fn jump_adapted_nodes(b: f64, n: usize, jumps: &[f64], r: f64) -> Result<Vec<f64>> {
    for &h in jumps {
        if !(h >= 0.0 && h < b) {
            return Err(FracError::invalid(format!(
                "jump {h} outside [0, {b})"
            )));
        }
    }
    let backbone = n / 2;
    let mut nodes = uniform_nodes(0.0, b, backbone.max(2))?;
    if !jumps.is_empty() {
        let per_jump = (n - backbone) / jumps.len();
        for &h in jumps {
            if per_jump < 2 {
                break;
            }
            let span = b - h;
            for k in 1..=per_jump {
                nodes.push(h + span * ((k as f64) / (per_jump as f64)).powf(r));
            }
            if h > 0.0 {
                nodes.push(h);
            }
        }
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON * b.abs().max(1.0));
    Ok(nodes)
}
