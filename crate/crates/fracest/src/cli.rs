//! Command-line front end: argument parsing, sample ingestion, the
//! Monte-Carlo experiment registry and deterministic report emission.
//!
//! Exit codes: 0 success, 1 validation error (including usage errors),
//! 2 numerical or I/O failure. Reports are byte-identical across reruns
//! with the same arguments and seed; every run that writes a file also
//! writes a `<file>.manifest.json` next to it.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

use crate::error::{FracError, Result};
use crate::fraccalc::{
    self, indicator_summand, uniform_reliability_frac_derivative, ClosedForm, FractionalOrder,
};
use crate::grid::{graded_nodes, uniform_nodes, Grading, GridFunction};
use crate::lq::{self, CovKernel};
use crate::mc::{self, McConfig, McReport};
use crate::mixed::{self, mixed_summand, MixedLaw, MixedOrder, Regime, Sample2D};
use crate::point::{self, PointMcReport, Sample};
use crate::report::{fmt_f64, Json, RunManifest};
use crate::spectral::{self, GaussianSeries, SpectralModel, ThetaVariant};

const TWO_PI: f64 = 2.0 * PI;

/// Seed used when neither `--seed` nor `FRACEST_SEED` is given.
const DEFAULT_SEED: u64 = 1;

/// Parse `std::env::args` and run; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; everything else is
            // a usage error and lands on stderr with exit code 1.
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { 0 } else { 1 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[derive(Parser)]
#[command(
    name = "fracest",
    version,
    about = "Fractional derivative estimation for distribution and spectral functions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Point estimate of G^(a)(x) from a one-column sample
    Point(PointArgs),
    /// Estimate G^(a) on a grid of evaluation points
    Curve(CurveArgs),
    /// Empirical L_q loss W_{q,n} with the deterministic bound check
    Loss(LossArgs),
    /// Tail probability of the limit-process L_q norm
    Limit(LimitArgs),
    /// Spectral derivative estimate with a uniform confidence band
    Spectral(SpectralArgs),
    /// Mixed fractional derivative from a two-column sample
    Mixed(MixedArgs),
    /// Run a registered Monte-Carlo experiment from a key=value config
    Mc(McArgs),
    /// Fast closed-form consistency checks
    Selftest,
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Point(a) => cmd_point(a),
        Cmd::Curve(a) => cmd_curve(a),
        Cmd::Loss(a) => cmd_loss(a),
        Cmd::Limit(a) => cmd_limit(a),
        Cmd::Spectral(a) => cmd_spectral(a),
        Cmd::Mixed(a) => cmd_mixed(a),
        Cmd::Mc(a) => cmd_mc(a),
        Cmd::Selftest => cmd_selftest(),
    }
}

// ======================================================================
// Output plumbing
// ======================================================================

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Force JSON; an optional path doubles as --out
    #[arg(long, value_name = "PATH", num_args = 0..=1, default_missing_value = "-")]
    json: Option<PathBuf>,
}

impl OutputArgs {
    fn resolve(&self) -> (Format, Option<PathBuf>) {
        match &self.json {
            Some(p) if p.as_os_str() == "-" => (Format::Json, self.out.clone()),
            Some(p) => (Format::Json, Some(p.clone())),
            None => (self.format, self.out.clone()),
        }
    }
}

/// Collects the report body and any extra output files, then writes
/// everything at once. The manifest lists every output path and is
/// written alongside each of them; stdout-only runs write no manifest.
struct Emitter {
    format: Format,
    out: Option<PathBuf>,
    manifest: RunManifest,
    extra_files: Vec<(PathBuf, String)>,
}

impl Emitter {
    fn new(args: &OutputArgs, manifest: RunManifest) -> Emitter {
        let (format, out) = args.resolve();
        Emitter {
            format,
            out,
            manifest,
            extra_files: Vec::new(),
        }
    }

    fn add_file(&mut self, path: PathBuf, body: String) {
        self.extra_files.push((path, body));
    }

    /// Emit `report`, rendering CSV via the flat key,value mapping.
    fn finish(self, report: &Json) -> Result<()> {
        let body = match self.format {
            Format::Json => report.render(),
            Format::Csv => render_csv(report),
        };
        self.finish_raw(body)
    }

    /// Emit a pre-rendered body (curve CSV keeps the GridFunction format).
    fn finish_raw(mut self, body: String) -> Result<()> {
        let mut written: Vec<PathBuf> = Vec::new();
        if let Some(path) = self.out.clone() {
            write_file(&path, &body)?;
            written.push(path);
        } else {
            print!("{body}");
        }
        for (path, content) in std::mem::take(&mut self.extra_files) {
            write_file(&path, &content)?;
            written.push(path);
        }
        if written.is_empty() {
            return Ok(());
        }
        for path in &written {
            self.manifest.outputs.push(path.display().to_string());
        }
        for path in &written {
            self.manifest.write_alongside(path)?;
        }
        Ok(())
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| FracError::io(format!("{}: {e}", path.display())))
}

/// Flatten a report to `key,value` rows with dotted paths for nested
/// objects and zero-based indices for arrays.
fn render_csv(report: &Json) -> String {
    let mut rows = Vec::new();
    flatten_json("", report, &mut rows);
    let mut out = String::new();
    for (k, v) in rows {
        out.push_str(&k);
        out.push(',');
        out.push_str(&v);
        out.push('\n');
    }
    out
}

fn flatten_json(prefix: &str, value: &Json, rows: &mut Vec<(String, String)>) {
    let key = |part: &str| {
        if prefix.is_empty() {
            part.to_string()
        } else {
            format!("{prefix}.{part}")
        }
    };
    match value {
        Json::Object(fields) => {
            for (k, v) in fields {
                flatten_json(&key(k), v, rows);
            }
        }
        Json::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_json(&key(&i.to_string()), v, rows);
            }
        }
        Json::Float(x) => rows.push((prefix.to_string(), fmt_f64(*x))),
        Json::Int(i) => rows.push((prefix.to_string(), i.to_string())),
        Json::UInt(u) => rows.push((prefix.to_string(), u.to_string())),
        Json::Bool(b) => rows.push((prefix.to_string(), b.to_string())),
        Json::Str(s) => rows.push((prefix.to_string(), s.clone())),
        Json::Null => rows.push((prefix.to_string(), String::new())),
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("FRACEST_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| {
            FracError::invalid(format!(
                "FRACEST_SEED must be an unsigned 64-bit integer, got `{v}`"
            ))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

// ======================================================================
// Sample ingestion
// ======================================================================

pub enum Ingested {
    One(Sample),
    Two(Sample2D),
}

/// Read a comma-separated sample file: one column gives a [`Sample`],
/// two columns a [`Sample2D`]. Blank lines and `#` comments are skipped;
/// ragged rows, non-numeric fields, negative or non-finite values are
/// rejected with 1-based line numbers.
pub fn ingest_sample(path: &Path) -> Result<Ingested> {
    let text = fs::read_to_string(path)
        .map_err(|e| FracError::io(format!("{}: {e}", path.display())))?;
    let mut columns: Option<usize> = None;
    let mut ones: Vec<f64> = Vec::new();
    let mut twos: Vec<(f64, f64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match columns {
            None if fields.len() <= 2 => columns = Some(fields.len()),
            None => {
                return Err(FracError::invalid(format!(
                    "line {row}: expected 1 or 2 columns, got {}",
                    fields.len()
                )));
            }
            Some(k) if k != fields.len() => {
                return Err(FracError::invalid(format!(
                    "line {row}: expected {k} columns, got {}",
                    fields.len()
                )));
            }
            Some(_) => {}
        }
        let parse = |v: &str| -> Result<f64> {
            let x: f64 = v
                .parse()
                .map_err(|_| FracError::invalid(format!("line {row}: bad observation `{v}`")))?;
            if !x.is_finite() || x < 0.0 {
                return Err(FracError::invalid(format!(
                    "line {row}: observations must be finite and >= 0, got {v}"
                )));
            }
            Ok(x)
        };
        if fields.len() == 1 {
            ones.push(parse(fields[0])?);
        } else {
            twos.push((parse(fields[0])?, parse(fields[1])?));
        }
    }
    match columns {
        None => Err(FracError::invalid(format!(
            "{}: no observations",
            path.display()
        ))),
        Some(1) => Ok(Ingested::One(Sample::new(ones)?)),
        Some(_) => Ok(Ingested::Two(Sample2D::new(twos)?)),
    }
}

fn ingest_one(path: &Path) -> Result<Sample> {
    match ingest_sample(path)? {
        Ingested::One(s) => Ok(s),
        Ingested::Two(_) => Err(FracError::invalid(format!(
            "{}: expected a one-column sample, found two columns",
            path.display()
        ))),
    }
}

fn ingest_two(path: &Path) -> Result<Sample2D> {
    match ingest_sample(path)? {
        Ingested::Two(s) => Ok(s),
        Ingested::One(_) => Err(FracError::invalid(format!(
            "{}: expected a two-column sample, found one column",
            path.display()
        ))),
    }
}

/// Parse a Gaussian series file: one value per line, any sign allowed.
fn parse_series_text(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let x: f64 = line.parse().map_err(|_| {
            FracError::invalid(format!("line {}: bad series value `{line}`", i + 1))
        })?;
        if !x.is_finite() {
            return Err(FracError::invalid(format!(
                "line {}: series values must be finite",
                i + 1
            )));
        }
        values.push(x);
    }
    Ok(values)
}

fn ks_json(ks: &mc::KsResult) -> Json {
    Json::obj(vec![
        ("statistic", Json::f(ks.statistic)),
        ("p_value", Json::f(ks.p_value)),
        ("n_effective", Json::f(ks.n_effective)),
        ("low_power", Json::b(ks.low_power)),
    ])
}

// ======================================================================
// point / curve
// ======================================================================

#[derive(Args)]
struct PointArgs {
    /// Sample file, one observation per line
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Derivative order, must lie in (0, 1/2)
    #[arg(long)]
    alpha: f64,
    /// Evaluation point
    #[arg(long)]
    x: f64,
    /// Confidence level of the normal-theory interval
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_point(a: PointArgs) -> Result<()> {
    let order = FractionalOrder::for_estimation(a.alpha)?;
    let sample = ingest_one(&a.input)?;
    let est = point::estimate_point(&sample, order, a.x)?;
    let ci = est.confidence_interval(a.level)?;

    let mut manifest = RunManifest::new("point", 0);
    manifest.input(&a.input)?;
    manifest.param("alpha", a.alpha);
    manifest.param("x", a.x);
    manifest.param("level", a.level);

    let report = Json::obj(vec![
        ("estimate", Json::f(est.estimate)),
        ("stderr", Json::f(est.se)),
        ("ci", Json::floats(&[ci.0, ci.1])),
        ("n", Json::u(est.n as u64)),
        ("alpha", Json::f(est.alpha)),
        ("x", Json::f(est.x)),
        ("level", Json::f(a.level)),
        ("sigma2", Json::f(est.sigma2)),
        ("sigma2_clamped", Json::b(est.sigma2_clamped)),
    ]);
    Emitter::new(&a.output, manifest).finish(&report)
}

#[derive(Args)]
struct CurveArgs {
    /// Sample file, one observation per line
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Derivative order, must lie in (0, 1/2)
    #[arg(long)]
    alpha: f64,
    /// Right endpoint of the evaluation interval (0, b]
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Number of grid cells
    #[arg(long, default_value_t = 128)]
    grid: usize,
    /// Node spacing: `uniform` or `graded:<r>`
    #[arg(long, default_value = "graded:2")]
    grading: String,
    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_curve(a: CurveArgs) -> Result<()> {
    let order = FractionalOrder::for_estimation(a.alpha)?;
    let grading = Grading::parse(&a.grading)?;
    if !(a.b > 0.0 && a.b.is_finite()) {
        return Err(FracError::invalid(format!(
            "curve endpoint must be positive, got {}",
            a.b
        )));
    }
    let nodes = match grading {
        Grading::Uniform => uniform_nodes(0.0, a.b, a.grid)?,
        Grading::Graded(r) => graded_nodes(a.b, a.grid, r)?,
    };
    let sample = ingest_one(&a.input)?;
    let curve = point::estimate_curve(&sample, order, &nodes, grading)?;

    let mut manifest = RunManifest::new("curve", 0);
    manifest.input(&a.input)?;
    manifest.param("alpha", a.alpha);
    manifest.param("b", a.b);
    manifest.param("grid", a.grid);
    manifest.param("grading", &a.grading);

    let emitter = Emitter::new(&a.output, manifest);
    if emitter.format == Format::Csv {
        return emitter.finish_raw(curve.to_csv_string());
    }
    let report = Json::obj(vec![
        ("alpha", Json::f(a.alpha)),
        ("n", Json::u(sample.len() as u64)),
        ("b", Json::f(a.b)),
        ("grading", Json::s(&a.grading)),
        ("nodes", Json::floats(curve.nodes())),
        ("values", Json::floats(curve.values())),
    ]);
    emitter.finish(&report)
}

// ======================================================================
// loss / limit
// ======================================================================

#[derive(Args)]
struct LossArgs {
    /// Derivative order, must lie in (0, 1/2)
    #[arg(long)]
    alpha: f64,
    /// Loss exponent q >= 1
    #[arg(long)]
    q: f64,
    /// Sample size per replication
    #[arg(long)]
    n: usize,
    /// Replications
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Covariance kernel of the limit-process comparison: exact or paper
    #[arg(long, default_value = "exact")]
    kernel: String,
    /// Gaussian paths for the limit-process comparison
    #[arg(long, default_value_t = 512)]
    paths: usize,
    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_loss(a: LossArgs) -> Result<()> {
    let order = FractionalOrder::for_estimation(a.alpha)?;
    let kernel = CovKernel::parse(&a.kernel)?;
    let seed = resolve_seed(a.seed)?;
    let loss = lq::empirical_loss(order, a.q, a.n, a.reps, seed)?;

    // Limit-process counterpart W_q on the same loss exponent: the
    // finite-n value should approach it from the law convergence.
    let grid = lq::limit_grid(64, 4.0);
    let norms = lq::limit_lq_samples(order, a.q, kernel, &grid, a.paths, mc::derive_seed(seed, 1))?;
    let mean_power = norms.iter().map(|v| v.powf(a.q)).sum::<f64>() / norms.len() as f64;
    let w_q_limit = mean_power.powf(1.0 / a.q);

    let mut manifest = RunManifest::new("loss", seed);
    manifest.param("alpha", a.alpha);
    manifest.param("q", a.q);
    manifest.param("n", a.n);
    manifest.param("reps", a.reps);
    manifest.param("kernel", kernel.label());
    manifest.param("paths", a.paths);

    let mut report = Json::obj(vec![
        ("alpha", Json::f(loss.alpha)),
        ("q", Json::f(loss.q)),
        ("n", Json::u(loss.n as u64)),
        ("reps", Json::u(loss.reps as u64)),
        ("seed", Json::u(loss.seed)),
        ("w_qn", Json::f(loss.w_qn)),
        ("w_qn_stderr", Json::f(loss.w_se)),
        ("bound", Json::f(loss.bound_product)),
        ("k_alpha_q", Json::f(loss.bound_k)),
        ("k_rosenthal", Json::f(loss.rosenthal)),
        ("pass", Json::b(loss.within_bound)),
        ("mean_power", Json::f(loss.mean_power)),
        ("se_power", Json::f(loss.se_power)),
        ("kernel", Json::s(kernel.label())),
        ("w_q_limit", Json::f(w_q_limit)),
    ]);
    if (a.q - 2.0).abs() < 1e-12 {
        report.push("w2_analytic", Json::f(lq::analytic_w2(a.alpha)));
    }
    Emitter::new(&a.output, manifest).finish(&report)
}

#[derive(Args)]
struct LimitArgs {
    /// Derivative order, must lie in (0, 1/2)
    #[arg(long)]
    alpha: f64,
    /// Norm exponent q >= 1
    #[arg(long)]
    q: f64,
    /// Exceedance level u >= 0
    #[arg(long)]
    u: f64,
    /// Covariance kernel: exact or paper
    #[arg(long, default_value = "exact")]
    kernel: String,
    /// Number of grid points on (0, 1]
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Grid grading exponent
    #[arg(long, default_value_t = 4.0)]
    r: f64,
    /// Gaussian paths
    #[arg(long, default_value_t = 4000)]
    paths: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_limit(a: LimitArgs) -> Result<()> {
    let order = FractionalOrder::for_estimation(a.alpha)?;
    let kernel = CovKernel::parse(&a.kernel)?;
    let seed = resolve_seed(a.seed)?;
    if a.grid < 2 {
        return Err(FracError::invalid("limit grid needs at least 2 points"));
    }
    let grid = lq::limit_grid(a.grid, a.r);
    let tail = lq::simulate_limit_tail(order, a.q, kernel, a.u, &grid, a.paths, seed)?;

    let mut manifest = RunManifest::new("limit", seed);
    manifest.param("alpha", a.alpha);
    manifest.param("q", a.q);
    manifest.param("u", a.u);
    manifest.param("kernel", kernel.label());
    manifest.param("grid", a.grid);
    manifest.param("r", a.r);
    manifest.param("paths", a.paths);

    let report = Json::obj(vec![
        ("alpha", Json::f(tail.alpha)),
        ("q", Json::f(tail.q)),
        ("kernel", Json::s(kernel.label())),
        ("u", Json::f(tail.u)),
        ("grid", Json::u(a.grid as u64)),
        ("r", Json::f(a.r)),
        ("paths", Json::u(tail.paths as u64)),
        ("seed", Json::u(tail.seed)),
        ("probability", Json::f(tail.probability)),
    ]);
    Emitter::new(&a.output, manifest).finish(&report)
}

// ======================================================================
// spectral
// ======================================================================

#[derive(Args)]
struct SpectralArgs {
    /// Spectral model: white or ar1:<rho>
    #[arg(long)]
    model: String,
    /// Derivative order, must lie in (0, 1/2)
    #[arg(long)]
    alpha: f64,
    /// Series length
    #[arg(long)]
    n: usize,
    /// Replications for the variance ratio
    #[arg(long, default_value_t = 200)]
    reps: usize,
    /// Number of frequency grid points 2 pi k / M
    #[arg(long = "lambda-grid", default_value_t = 32)]
    lambda_grid: usize,
    /// Band confidence level
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Gaussian paths for the band quantile
    #[arg(long, default_value_t = 4000)]
    paths: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the analyzed series here, one value per line
    #[arg(long = "series-out", value_name = "PATH")]
    series_out: Option<PathBuf>,
    /// Analyze this series instead of simulating one
    #[arg(long = "series-in", value_name = "PATH")]
    series_in: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_spectral(a: SpectralArgs) -> Result<()> {
    let model = SpectralModel::parse(&a.model)?;
    let order = FractionalOrder::for_estimation(a.alpha)?;
    let seed = resolve_seed(a.seed)?;
    if a.lambda_grid < 2 {
        return Err(FracError::invalid("lambda grid needs at least 2 points"));
    }
    if a.reps < 2 {
        return Err(FracError::invalid("variance ratio needs reps >= 2"));
    }
    let grid = spectral::frequency_grid(a.lambda_grid);

    let mut manifest = RunManifest::new("spectral", seed);
    manifest.param("model", model.label());
    manifest.param("alpha", a.alpha);
    manifest.param("n", a.n);
    manifest.param("reps", a.reps);
    manifest.param("lambda_grid", a.lambda_grid);
    manifest.param("level", a.level);
    manifest.param("paths", a.paths);

    // Estimate leg: one series, either imported or simulated here.
    let series = match &a.series_in {
        Some(path) => {
            manifest.input(path)?;
            let text = fs::read_to_string(path)
                .map_err(|e| FracError::io(format!("{}: {e}", path.display())))?;
            let values = parse_series_text(&text)?;
            if values.len() != a.n {
                return Err(FracError::invalid(format!(
                    "--series-in has {} values but --n is {}",
                    values.len(),
                    a.n
                )));
            }
            GaussianSeries {
                values,
                model,
                seed,
            }
        }
        None => spectral::generate_series(model, a.n, mc::derive_seed(seed, 0))?,
    };
    let band = spectral::uniform_confidence_band(
        model,
        order,
        a.n,
        a.level,
        &grid,
        a.paths,
        mc::derive_seed(seed, 1),
    )?;
    let est = spectral::estimate_spectral_frac_derivative(&series, order, &grid)?;

    // Bias leg is deterministic: exact finite-n expectations on a ladder
    // of series lengths, compared to the model target at lambda = pi.
    let probe = PI;
    let truth_probe = model.frac_spectral_derivative(order, probe)?;
    let mut ladder: Vec<usize> = [a.n / 16, a.n / 4, a.n]
        .iter()
        .map(|&m| m.max(16))
        .collect();
    ladder.dedup();
    let mut biases = Vec::with_capacity(ladder.len());
    for &m in &ladder {
        biases.push(spectral::exact_mean_estimate(model, order, m, probe)? - truth_probe);
    }
    let exact_zero = biases
        .iter()
        .all(|b| b.abs() <= 1e-12 * truth_probe.abs().max(1.0));
    let bias_slope = if exact_zero || ladder.len() < 3 {
        Json::Null
    } else {
        let xs: Vec<f64> = ladder.iter().map(|&m| (m as f64).ln()).collect();
        let ys: Vec<f64> = biases.iter().map(|b| b.abs().ln()).collect();
        Json::f(mc::slope_fit(&xs, &ys)?.slope)
    };

    // Variance leg: replicated estimates at the probe frequency against
    // the limit covariance Theta(pi, pi).
    let theta = spectral::theta_covariance(model, order, ThetaVariant::Exact, probe, probe)?;
    let var_master = mc::derive_seed(seed, 2);
    let values = mc::run_replications(var_master, a.reps, |_, rep| -> Result<f64> {
        let s = spectral::generate_series(model, a.n, mc::derive_seed(var_master, rep as u64))?;
        Ok(spectral::estimate_spectral_frac_derivative(&s, order, &[probe])?.values[0])
    });
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    let moments = mc::pairwise_moments(&values);
    let var_ratio = moments.variance() * a.n as f64 / theta;

    let report = Json::obj(vec![
        ("model", Json::s(model.label())),
        ("alpha", Json::f(a.alpha)),
        ("n", Json::u(a.n as u64)),
        ("reps", Json::u(a.reps as u64)),
        ("level", Json::f(a.level)),
        ("seed", Json::u(seed)),
        (
            "estimate_curve",
            Json::obj(vec![
                ("lambda", Json::floats(&est.lambda_grid)),
                ("values", Json::floats(&est.values)),
            ]),
        ),
        (
            "band",
            Json::obj(vec![
                ("u0", Json::f(band.u0)),
                ("halfwidth", Json::f(band.halfwidth)),
                ("sigma2_max", Json::f(band.sigma2_max)),
                ("paths", Json::u(band.paths as u64)),
                ("level", Json::f(band.level)),
            ]),
        ),
        ("bias_slope", bias_slope),
        (
            "bias",
            Json::obj(vec![
                ("lambda", Json::f(probe)),
                ("truth", Json::f(truth_probe)),
                (
                    "lengths",
                    Json::Array(ladder.iter().map(|&m| Json::u(m as u64)).collect()),
                ),
                ("values", Json::floats(&biases)),
                ("exact_zero", Json::b(exact_zero)),
            ]),
        ),
        ("var_ratio", Json::f(var_ratio)),
        (
            "variance",
            Json::obj(vec![
                ("lambda", Json::f(probe)),
                ("theta", Json::f(theta)),
                ("scaled", Json::f(moments.variance() * a.n as f64)),
                ("reps", Json::u(values.len() as u64)),
            ]),
        ),
    ]);

    let mut emitter = Emitter::new(&a.output, manifest);
    if let Some(path) = &a.series_out {
        let mut body = String::new();
        for v in &series.values {
            body.push_str(&fmt_f64(*v));
            body.push('\n');
        }
        emitter.add_file(path.clone(), body);
    }
    if emitter.format == Format::Csv {
        let curve = GridFunction::new(
            est.lambda_grid.clone(),
            est.values.clone(),
            Grading::Uniform,
            a.alpha,
        )?;
        return emitter.finish_raw(curve.to_csv_string());
    }
    emitter.finish(&report)
}

// ======================================================================
// mixed
// ======================================================================

#[derive(Args)]
struct MixedArgs {
    /// Sample file, one comma-separated pair per line
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// First derivative order, must lie in (0, 1/2)
    #[arg(long)]
    alpha: f64,
    /// Second derivative order, must lie in (0, 1/2)
    #[arg(long)]
    beta: f64,
    /// First evaluation coordinate
    #[arg(long)]
    x: f64,
    /// Second evaluation coordinate
    #[arg(long)]
    y: f64,
    /// Also emit the centered loss field S_n on a graded grid
    #[arg(long)]
    field: bool,
    /// Field grid cells per axis
    #[arg(long, default_value_t = 32)]
    grid: usize,
    /// Centering law for the field: independent or comonotone
    #[arg(long)]
    law: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_mixed(a: MixedArgs) -> Result<()> {
    let order = MixedOrder::new(a.alpha, a.beta)?;
    let sample = ingest_two(&a.input)?;
    let estimate = mixed::estimate_mixed(&sample, a.x, a.y, order)?;
    let regime = match order.regime() {
        Regime::BetaLtAlpha => "beta<alpha",
        Regime::BetaEqAlpha => "beta=alpha",
        Regime::BetaGtAlpha => "beta>alpha",
    };

    let mut manifest = RunManifest::new("mixed", 0);
    manifest.input(&a.input)?;
    manifest.param("alpha", a.alpha);
    manifest.param("beta", a.beta);
    manifest.param("x", a.x);
    manifest.param("y", a.y);

    let mut report = Json::obj(vec![
        ("alpha", Json::f(a.alpha)),
        ("beta", Json::f(a.beta)),
        ("regime", Json::s(regime)),
        ("n", Json::u(sample.len() as u64)),
        ("x", Json::f(a.x)),
        ("y", Json::f(a.y)),
        ("estimate", Json::f(estimate)),
    ]);

    let mut field_csv: Option<String> = None;
    if a.field {
        let law = match &a.law {
            Some(l) => MixedLaw::parse(l)?,
            None => {
                return Err(FracError::invalid(
                    "--field centers against a known law; pass --law independent or --law comonotone",
                ));
            }
        };
        manifest.param("law", law.label());
        manifest.param("grid", a.grid);
        let nodes = graded_nodes(1.0, a.grid, 4.0)?[1..].to_vec();
        let field = mixed::mixed_loss_field(&sample, order, law, &nodes, &nodes)?;
        let l2 = mixed::lq_norm_2d(&field, 2.0)?;
        report.push(
            "field",
            Json::obj(vec![
                ("law", Json::s(law.label())),
                ("l2_norm", Json::f(l2)),
                ("x_nodes", Json::floats(&field.x_nodes)),
                ("y_nodes", Json::floats(&field.y_nodes)),
                ("values", Json::floats(&field.values)),
            ]),
        );
        let mut csv = format!(
            "# field law={} alpha={} beta={}\n",
            law.label(),
            fmt_f64(a.alpha),
            fmt_f64(a.beta)
        );
        for (i, &x) in field.x_nodes.iter().enumerate() {
            for (j, &y) in field.y_nodes.iter().enumerate() {
                csv.push_str(&fmt_f64(x));
                csv.push(',');
                csv.push_str(&fmt_f64(y));
                csv.push(',');
                csv.push_str(&fmt_f64(field.value_at(i, j)));
                csv.push('\n');
            }
        }
        field_csv = Some(csv);
    }

    let emitter = Emitter::new(&a.output, manifest);
    if emitter.format == Format::Csv {
        if let Some(csv) = field_csv {
            return emitter.finish_raw(csv);
        }
    }
    emitter.finish(&report)
}

// ======================================================================
// mc: the experiment registry
// ======================================================================

#[derive(Args)]
struct McArgs {
    /// Registered experiment name
    #[arg(long)]
    experiment: String,
    /// Flat key=value config file
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker count recorded in the config; results are worker-independent
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    output: OutputArgs,
}

const EXPERIMENTS: &[&str] = &[
    "clt",
    "coverage",
    "field-moment",
    "loss",
    "spectral-bias",
    "tail-slope",
    "unbiasedness",
    "variance-law",
];

fn cmd_mc(a: McArgs) -> Result<()> {
    let seed = resolve_seed(a.seed)?;
    let mut kv = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| FracError::io(format!("{}: {e}", path.display())))?;
            Kv::parse(&text)?
        }
        None => Kv::default(),
    };

    let mut manifest = RunManifest::new("mc", seed);
    manifest.param("experiment", &a.experiment);
    manifest.param("workers", a.workers);
    if let Some(path) = &a.config {
        manifest.input(path)?;
    }

    let body = match a.experiment.as_str() {
        "unbiasedness" => exp_point_estimator(&mut kv, seed, a.workers, PointCheck::Unbiasedness)?,
        "variance-law" => exp_point_estimator(&mut kv, seed, a.workers, PointCheck::VarianceLaw)?,
        "clt" => exp_point_estimator(&mut kv, seed, a.workers, PointCheck::Clt)?,
        "loss" => exp_loss(&mut kv, seed)?,
        "tail-slope" => exp_tail_slope(&mut kv, seed)?,
        "coverage" => exp_coverage(&mut kv, seed, a.workers)?,
        "spectral-bias" => exp_spectral_bias(&mut kv)?,
        "field-moment" => exp_field_moment(&mut kv, seed, a.workers)?,
        other => {
            return Err(FracError::invalid(format!(
                "unknown experiment `{other}`; registered: {}",
                EXPERIMENTS.join(", ")
            )));
        }
    };
    kv.finish()?;
    for (k, v) in &kv.entries {
        manifest.param(k, v);
    }

    let mut report = Json::obj(vec![
        ("experiment", Json::s(&a.experiment)),
        ("seed", Json::u(seed)),
        ("workers", Json::u(a.workers as u64)),
    ]);
    if let Json::Object(fields) = body {
        for (k, v) in fields {
            report.push(&k, v);
        }
    }
    Emitter::new(&a.output, manifest).finish(&report)
}

/// Flat key=value config with duplicate and unknown-key rejection.
#[derive(Default)]
struct Kv {
    entries: Vec<(String, String)>,
    used: std::collections::BTreeSet<String>,
}

impl Kv {
    fn parse(text: &str) -> Result<Kv> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                FracError::invalid(format!("line {}: expected key=value, got `{line}`", i + 1))
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(FracError::invalid(format!("line {}: empty key", i + 1)));
            }
            if entries.iter().any(|(e, _)| e == k) {
                return Err(FracError::invalid(format!(
                    "line {}: duplicate key `{k}`",
                    i + 1
                )));
            }
            entries.push((k.to_string(), v.to_string()));
        }
        Ok(Kv {
            entries,
            used: Default::default(),
        })
    }

    fn raw(&mut self, key: &str) -> Option<String> {
        let hit = self
            .entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone());
        if hit.is_some() {
            self.used.insert(key.to_string());
        }
        hit
    }

    fn str(&mut self, key: &str, default: &str) -> String {
        self.raw(key).unwrap_or_else(|| default.to_string())
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| FracError::invalid(format!("config key {key}: bad number `{v}`"))),
        }
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| FracError::invalid(format!("config key {key}: bad integer `{v}`"))),
        }
    }

    /// Reject keys no experiment consumed; typos must not pass silently.
    fn finish(&self) -> Result<()> {
        for (k, _) in &self.entries {
            if !self.used.contains(k) {
                return Err(FracError::invalid(format!(
                    "unknown config key `{k}` for this experiment"
                )));
            }
        }
        Ok(())
    }
}

enum PointCheck {
    Unbiasedness,
    VarianceLaw,
    Clt,
}

fn point_mc_json(r: &PointMcReport) -> Json {
    Json::obj(vec![
        ("law", Json::s(r.law.label())),
        ("alpha", Json::f(r.alpha)),
        ("x", Json::f(r.x)),
        ("n", Json::u(r.n as u64)),
        ("reps", Json::u(r.reps as u64)),
        ("truth", Json::f(r.truth)),
        ("mean_estimate", Json::f(r.mean_estimate)),
        ("mean_stderr", Json::f(r.mean_se)),
        ("scaled_variance", Json::f(r.scaled_variance)),
        ("theory_variance", Json::f(r.theory_variance)),
        ("ks", ks_json(&r.ks)),
    ])
}

fn exp_point_estimator(kv: &mut Kv, seed: u64, _workers: usize, check: PointCheck) -> Result<Json> {
    let law = ClosedForm::parse(&kv.str("law", "uniform"))?;
    let alpha = kv.f64("alpha", 0.25)?;
    let x = kv.f64("x", 0.5)?;
    let n = kv.usize("n", 1000)?;
    let reps = kv.usize("reps", 20000)?;
    let order = FractionalOrder::for_estimation(alpha)?;
    let r = point::point_estimator_mc(&law, order, x, n, reps, seed)?;

    let mut json = point_mc_json(&r);
    match check {
        PointCheck::Unbiasedness => {
            let dev = (r.mean_estimate - r.truth).abs();
            json.push("abs_error", Json::f(dev));
            json.push("pass", Json::b(dev <= 3.0 * r.mean_se));
        }
        PointCheck::VarianceLaw => {
            let tol = kv.f64("tol", 0.05)?;
            let ratio = r.scaled_variance / r.theory_variance;
            json.push("variance_ratio", Json::f(ratio));
            json.push("tol", Json::f(tol));
            json.push("pass", Json::b((ratio - 1.0).abs() <= tol));
        }
        PointCheck::Clt => {
            let p_min = kv.f64("p_min", 0.01)?;
            json.push("p_min", Json::f(p_min));
            json.push("pass", Json::b(r.ks.p_value > p_min && !r.ks.low_power));
        }
    }
    Ok(json)
}

fn exp_loss(kv: &mut Kv, seed: u64) -> Result<Json> {
    let alpha = kv.f64("alpha", 0.25)?;
    let q = kv.f64("q", 2.0)?;
    let n = kv.usize("n", 100)?;
    let reps = kv.usize("reps", 200)?;
    let order = FractionalOrder::for_estimation(alpha)?;
    let loss = lq::empirical_loss(order, q, n, reps, seed)?;
    Ok(Json::obj(vec![
        ("alpha", Json::f(loss.alpha)),
        ("q", Json::f(loss.q)),
        ("n", Json::u(loss.n as u64)),
        ("reps", Json::u(loss.reps as u64)),
        ("w_qn", Json::f(loss.w_qn)),
        ("bound", Json::f(loss.bound_product)),
        ("k_alpha_q", Json::f(loss.bound_k)),
        ("k_rosenthal", Json::f(loss.rosenthal)),
        ("pass", Json::b(loss.within_bound)),
    ]))
}

fn exp_tail_slope(kv: &mut Kv, seed: u64) -> Result<Json> {
    let alpha = kv.f64("alpha", 0.25)?;
    let delta = kv.f64("delta", 1.0)?;
    let c1 = kv.f64("c1", 1.0)?;
    let lo = kv.f64("level_lo", 2.0)?;
    let hi = kv.f64("level_hi", 20.0)?;
    let count = kv.usize("levels", 5)?;
    let reps = kv.usize("reps", 200000)?;
    let tol = kv.f64("tol", 0.3)?;
    let order = FractionalOrder::for_estimation(alpha)?;
    let law = if (delta - 1.0).abs() < 1e-15 && (c1 - 1.0).abs() < 1e-15 {
        ClosedForm::Uniform
    } else {
        ClosedForm::PowerCdf { delta, c1 }
    };
    let levels = point::geometric_levels(lo, hi, count)?;
    let diag = point::tail_diagnostic(&law, order, &levels, reps, seed)?;
    Ok(Json::obj(vec![
        ("law", Json::s(law.label())),
        ("alpha", Json::f(diag.alpha)),
        ("delta", Json::f(diag.delta)),
        ("reps", Json::u(reps as u64)),
        ("levels", Json::floats(&diag.levels)),
        ("exceed_prob", Json::floats(&diag.exceed_prob)),
        ("slope", Json::f(diag.fit.slope)),
        ("theoretical_slope", Json::f(diag.theoretical_slope)),
        ("tol", Json::f(tol)),
        (
            "pass",
            Json::b((diag.fit.slope - diag.theoretical_slope).abs() <= tol),
        ),
    ]))
}

fn exp_coverage(kv: &mut Kv, seed: u64, workers: usize) -> Result<Json> {
    let model = SpectralModel::parse(&kv.str("model", "white"))?;
    let alpha = kv.f64("alpha", 0.25)?;
    let n = kv.usize("n", 512)?;
    let level = kv.f64("level", 0.95)?;
    let points = kv.usize("lambda_grid", 16)?;
    let band_paths = kv.usize("band_paths", 2000)?;
    let reps = kv.usize("reps", 500)?;
    let tol = kv.f64("tol", 0.03)?;
    let order = FractionalOrder::for_estimation(alpha)?;
    let grid = spectral::frequency_grid(points);
    let band = spectral::uniform_confidence_band(
        model,
        order,
        n,
        level,
        &grid,
        band_paths,
        mc::derive_seed(seed, 1),
    )?;
    let cfg = McConfig::new(reps, mc::derive_seed(seed, 2), workers, n)?;
    let cov = spectral::band_coverage_mc(model, order, &band, &cfg)?;
    Ok(Json::obj(vec![
        ("model", Json::s(model.label())),
        ("alpha", Json::f(alpha)),
        ("n", Json::u(n as u64)),
        ("level", Json::f(level)),
        ("lambda_grid", Json::u(points as u64)),
        ("band_paths", Json::u(band_paths as u64)),
        ("reps", Json::u(cov.reps as u64)),
        ("u0", Json::f(band.u0)),
        ("halfwidth", Json::f(band.halfwidth)),
        ("coverage", Json::f(cov.coverage)),
        ("tol", Json::f(tol)),
        ("pass", Json::b((cov.coverage - level).abs() <= tol)),
    ]))
}

fn exp_spectral_bias(kv: &mut Kv) -> Result<Json> {
    let model = SpectralModel::parse(&kv.str("model", "ar1:0.7"))?;
    let alpha = kv.f64("alpha", 0.25)?;
    let lambda = kv.f64("lambda", PI)?;
    let n1 = kv.usize("n1", 256)?;
    let n2 = kv.usize("n2", 1024)?;
    let n3 = kv.usize("n3", 4096)?;
    let tol = kv.f64("tol", 0.4)?;
    let order = FractionalOrder::for_estimation(alpha)?;
    if !(lambda > 0.0 && lambda <= TWO_PI) {
        return Err(FracError::invalid(format!(
            "lambda must lie in (0, 2pi], got {lambda}"
        )));
    }
    let truth = model.frac_spectral_derivative(order, lambda)?;
    let lengths = [n1, n2, n3];
    let mut biases = Vec::with_capacity(3);
    for &m in &lengths {
        biases.push(spectral::exact_mean_estimate(model, order, m, lambda)? - truth);
    }
    let exact_zero = biases
        .iter()
        .all(|b| b.abs() <= 1e-12 * truth.abs().max(1.0));
    let mut json = Json::obj(vec![
        ("model", Json::s(model.label())),
        ("alpha", Json::f(alpha)),
        ("lambda", Json::f(lambda)),
        (
            "lengths",
            Json::Array(lengths.iter().map(|&m| Json::u(m as u64)).collect()),
        ),
        ("truth", Json::f(truth)),
        ("bias", Json::floats(&biases)),
        ("exact_zero", Json::b(exact_zero)),
        ("tol", Json::f(tol)),
    ]);
    if exact_zero {
        json.push("slope", Json::Null);
        json.push("pass", Json::b(true));
    } else {
        let xs: Vec<f64> = lengths.iter().map(|&m| (m as f64).ln()).collect();
        let ys: Vec<f64> = biases.iter().map(|b| b.abs().ln()).collect();
        let fit = mc::slope_fit(&xs, &ys)?;
        json.push("slope", Json::f(fit.slope));
        json.push("pass", Json::b((fit.slope + 1.0).abs() <= tol));
    }
    Ok(json)
}

fn exp_field_moment(kv: &mut Kv, seed: u64, workers: usize) -> Result<Json> {
    let law = MixedLaw::parse(&kv.str("law", "comonotone"))?;
    let alpha = kv.f64("alpha", 0.45)?;
    let beta = kv.f64("beta", 0.45)?;
    let eps = kv.f64("eps", 0.1)?;
    let grid = kv.usize("grid", 64)?;
    let n = kv.usize("n", 2)?;
    let reps = kv.usize("reps", 60)?;
    let order = MixedOrder::new(alpha, beta)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(FracError::invalid(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let q = (1.0 - eps) / alpha.max(beta);
    if q < 1.0 {
        return Err(FracError::invalid(format!(
            "eps {eps} puts the exponent below 1 at orders ({alpha}, {beta})"
        )));
    }
    let cfg = McConfig::new(reps, seed, workers, n)?;
    let r = mixed::field_moment_mc(law, order, q, grid, &cfg)?;
    let mut json = Json::obj(vec![
        ("law", Json::s(law.label())),
        ("alpha", Json::f(alpha)),
        ("beta", Json::f(beta)),
        ("eps", Json::f(eps)),
        ("q", Json::f(q)),
        ("grid", Json::u(grid as u64)),
    ]);
    if let Json::Object(fields) = r.to_json() {
        for (k, v) in fields {
            json.push(&k, v);
        }
    }
    Ok(json)
}

// ======================================================================
// selftest
// ======================================================================

fn approx(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn cmd_selftest() -> Result<()> {
    type Check = (&'static str, fn() -> Result<bool>);
    let checks: &[Check] = &[
        ("indicator summand on a point mass", || {
            let v = indicator_summand(0.25, 0.3, 1.0);
            let w = 1.0 - 0.7f64.powf(-0.25);
            Ok(approx(v, w, 1e-15) && indicator_summand(0.25, 2.0, 1.0) == 1.0)
        }),
        ("uniform target closed form and its root", || {
            let v = uniform_reliability_frac_derivative(0.25, 1.0)?;
            let w = (1.0 - 1.0 / 0.75) / crate::special::gamma(0.75);
            let root = uniform_reliability_frac_derivative(0.25, 0.75)?;
            Ok(approx(v, w, 1e-15) && root.abs() <= 1e-12)
        }),
        ("point estimate matches the hand sum", || {
            let order = FractionalOrder::for_estimation(0.3)?;
            let sample = Sample::new(vec![0.2, 0.6])?;
            let est = point::estimate_point(&sample, order, 0.9)?;
            let hand = (indicator_summand(0.3, 0.2, 0.9) + indicator_summand(0.3, 0.6, 0.9))
                / (2.0 * order.gamma_complement());
            Ok(approx(est.estimate, hand, 1e-15))
        }),
        ("confidence interval brackets the estimate", || {
            let order = FractionalOrder::for_estimation(0.3)?;
            let sample = Sample::new(vec![0.2, 0.6])?;
            let est = point::estimate_point(&sample, order, 0.9)?;
            let (lo, hi) = est.confidence_interval(0.95)?;
            Ok(lo < est.estimate && est.estimate < hi)
        }),
        ("tanh-sinh integrates an endpoint singularity", || {
            let v = fraccalc::tanh_sinh(0.0, 1.0, 0.12, |x| x.powf(-0.5));
            Ok(approx(v, 2.0, 1e-10))
        }),
        ("abel inversion round trip", || {
            let order = FractionalOrder::for_estimation(0.3)?;
            let nodes = graded_nodes(1.0, 256, 2.0)?;
            let values: Vec<f64> = nodes.iter().map(|&x| x * x).collect();
            let f = GridFunction::new(nodes, values, Grading::Graded(2.0), 0.0)?;
            let back = fraccalc::frac_integral(&fraccalc::frac_derivative(&f, order)?, order)?;
            let err = f
                .nodes()
                .iter()
                .zip(f.values())
                .zip(back.values())
                .filter(|((x, _), _)| **x >= 0.5)
                .map(|((_, v), w)| (v - w).abs())
                .fold(0.0f64, f64::max);
            Ok(err <= 1e-3)
        }),
        ("single replication leaves stderr undefined", || {
            let cfg = McConfig::new(1, 7, 1, 1)?;
            let r = McReport::from_values("t", &cfg, &[2.5])?;
            Ok(r.mean == 2.5 && !r.stderr_defined)
        }),
        ("identical seeds give identical streams", || {
            let a = mc::run_replications(5, 100, |rng, _| rng.gen::<f64>());
            let b = mc::run_replications(5, 100, |rng, _| rng.gen::<f64>());
            Ok(a == b)
        }),
        ("ks rejects a constant sample", || {
            let r = mc::ks_standard_normal(&vec![0.3; 200])?;
            Ok(r.p_value < 0.01)
        }),
        ("slope fit recovers an exact line", || {
            let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
            let ys: Vec<f64> = xs.iter().map(|x| -4.0 * x + 1.0).collect();
            let fit = mc::slope_fit(&xs, &ys)?;
            Ok(approx(fit.slope, -4.0, 1e-12))
        }),
        ("parseval on a short series", || {
            let series = spectral::generate_series(SpectralModel::White, 64, 3)?;
            let (lhs, rhs) = spectral::parseval_sides(&series)?;
            Ok(approx(lhs, rhs, 1e-12 * rhs.abs().max(1.0)))
        }),
        ("white spectral target closed form", || {
            let order = FractionalOrder::for_estimation(0.25)?;
            let v = SpectralModel::White.frac_spectral_derivative(order, PI)?;
            let w = PI.powf(0.75) / (TWO_PI * crate::special::gamma(1.75));
            Ok(approx(v, w, 1e-14))
        }),
        ("mixed summand squares the univariate value", || {
            let order = MixedOrder::new(0.25, 0.25)?;
            let h = mixed_summand(0.5, 0.5, 0.25, 0.25, order)?;
            Ok(approx(h, 2.0, 1e-14))
        }),
        ("mixed estimate is symmetric under a full swap", || {
            let order = MixedOrder::new(0.2, 0.3)?;
            let s = Sample2D::new(vec![(0.2, 0.7), (0.5, 0.4), (0.9, 0.1)])?;
            let t = Sample2D::new(vec![(0.7, 0.2), (0.4, 0.5), (0.1, 0.9)])?;
            let a = mixed::estimate_mixed(&s, 0.6, 0.8, order)?;
            let b = mixed::estimate_mixed(&t, 0.8, 0.6, order.swapped())?;
            Ok(approx(a, b, 1e-14))
        }),
        ("analytic w2 is positive and finite", || {
            let w = lq::analytic_w2(0.25);
            Ok(w.is_finite() && w > 0.0)
        }),
    ];
    for (name, f) in checks {
        match f() {
            Ok(true) => println!("ok {name}"),
            Ok(false) => {
                return Err(FracError::numerical(format!(
                    "selftest check failed: {name}"
                )));
            }
            Err(e) => {
                return Err(FracError::numerical(format!(
                    "selftest check errored: {name}: {e}"
                )));
            }
        }
    }
    println!("selftest: {} checks passed", checks.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(name: &str, content: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("fracest-cli-unit");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        fs::write(&path, content).unwrap();
        path
    }

    fn ingest_err(path: &Path) -> String {
        match ingest_sample(path) {
            Ok(_) => panic!("expected an ingestion error"),
            Err(e) => e.to_string(),
        }
    }

    #[test]
    fn ingest_detects_columns_and_rows() {
        let p = write_tmp("one.csv", "# header\n0.1\n0.2\n");
        match ingest_sample(&p).unwrap() {
            Ingested::One(s) => assert_eq!(s.len(), 2),
            _ => panic!("expected 1-D"),
        }
        let p = write_tmp("two.csv", "0.1,0.2\n0.3,0.4\n");
        match ingest_sample(&p).unwrap() {
            Ingested::Two(s) => assert_eq!(s.len(), 2),
            _ => panic!("expected 2-D"),
        }
        let p = write_tmp("ragged.csv", "0.1,0.2\n0.3\n");
        let err = ingest_err(&p);
        assert!(err.contains("line 2"), "{err}");
        let p = write_tmp("neg.csv", "0.1\n-1\n");
        let err = ingest_err(&p);
        assert!(err.contains("line 2"), "{err}");
        let p = write_tmp("wide.csv", "1,2,3\n");
        let err = ingest_err(&p);
        assert!(err.contains("1 or 2 columns"), "{err}");
        let p = write_tmp("empty.csv", "# nothing\n");
        assert!(ingest_sample(&p).is_err());
    }

    #[test]
    fn kv_parsing_and_unknown_keys() {
        let mut kv = Kv::parse("# c\nalpha = 0.3\nn=50\n").unwrap();
        assert_eq!(kv.f64("alpha", 0.0).unwrap(), 0.3);
        assert_eq!(kv.usize("n", 0).unwrap(), 50);
        assert!(kv.finish().is_ok());

        let mut kv = Kv::parse("alpha=0.3\ntypo=1\n").unwrap();
        let _ = kv.f64("alpha", 0.0).unwrap();
        let err = kv.finish().unwrap_err().to_string();
        assert!(err.contains("typo"), "{err}");

        assert!(Kv::parse("a=1\na=2\n").is_err());
        assert!(Kv::parse("nonsense\n").is_err());
    }

    #[test]
    fn csv_flatten_is_stable() {
        let j = Json::obj(vec![
            ("a", Json::f(0.5)),
            ("b", Json::obj(vec![("c", Json::u(3)), ("d", Json::Null)])),
            ("e", Json::floats(&[1.0, 2.0])),
            ("f", Json::b(true)),
        ]);
        let csv = render_csv(&j);
        let expect = format!(
            "a,{}\nb.c,3\nb.d,\ne.0,{}\ne.1,{}\nf,true\n",
            fmt_f64(0.5),
            fmt_f64(1.0),
            fmt_f64(2.0)
        );
        assert_eq!(csv, expect);
    }

    #[test]
    fn selftest_passes() {
        cmd_selftest().unwrap();
    }

    #[test]
    fn seed_resolution_prefers_flag() {
        assert_eq!(resolve_seed(Some(9)).unwrap(), 9);
    }

    #[test]
    fn series_text_accepts_signed_values() {
        let v = parse_series_text("# s\n1.5\n-0.25\n").unwrap();
        assert_eq!(v, vec![1.5, -0.25]);
        assert!(parse_series_text("x\n").is_err());
        assert!(parse_series_text("inf\n").is_err());
    }
}
