//! Monte-Carlo harness: reproducible replication driving, streaming
//! moments, Kolmogorov-Smirnov tests, quantiles and slope fits.
//!
//! Reproducibility contract: every replication draws from its own
//! generator, seeded from `(master_seed, rep_index)` through a SplitMix64
//! finalizer. Results are therefore independent of evaluation order, and
//! aggregation uses a fixed pairwise reduction tree, so reports are
//! byte-identical across reruns and across any future scheduling change.

use crate::error::{FracError, Result};
use crate::report::Json;
use crate::special::{kolmogorov_tail, norm_cdf};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ======================================================================
// Seeding
// ======================================================================

/// SplitMix64 finalizer step. Advances `state` and returns the output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-derived per-replication seed: element `index` of the
/// SplitMix64 stream started at `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut state = master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    splitmix64(&mut state)
}

/// Generator for one replication.
pub fn rep_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}

/// Run `reps` replications, each on its own counter-seeded generator.
/// The result vector is indexed by replication, so any consumer that
/// folds it with a fixed-shape reduction is schedule-independent.
pub fn run_replications<T>(
    master: u64,
    reps: usize,
    mut f: impl FnMut(&mut ChaCha8Rng, usize) -> T,
) -> Vec<T> {
    let mut out = Vec::with_capacity(reps);
    for i in 0..reps {
        let mut rng = rep_rng(master, i as u64);
        out.push(f(&mut rng, i));
    }
    out
}

/// Replication plan: `reps` independent replications from `seed`, each
/// internally of size `n`, executed on `workers` threads. The report is
/// a pure function of everything except `workers`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub reps: usize,
    pub seed: u64,
    pub workers: usize,
    pub n: usize,
}

impl McConfig {
    pub fn new(reps: usize, seed: u64, workers: usize, n: usize) -> Result<Self> {
        if reps == 0 || workers == 0 || n == 0 {
            return Err(FracError::invalid(
                "replication config needs reps >= 1, workers >= 1, n >= 1",
            ));
        }
        Ok(McConfig {
            reps,
            seed,
            workers,
            n,
        })
    }
}

// Salt for the one retry a failed replication is granted.
const RETRY_SALT: u64 = 0x5AFE_5EED_0DD5_EED5;

fn run_one_with_retry<T>(
    master: u64,
    index: usize,
    f: &(impl Fn(&mut ChaCha8Rng, usize) -> Result<T> + Sync),
) -> Result<T> {
    let mut rng = rep_rng(master, index as u64);
    match f(&mut rng, index) {
        Ok(v) => Ok(v),
        Err(first) => {
            let mut retry = rep_rng(master ^ RETRY_SALT, index as u64);
            f(&mut retry, index).map_err(|second| {
                FracError::numerical(format!(
                    "replication {index} failed twice: {first}; retry: {second}"
                ))
            })
        }
    }
}

/// Run fallible replications across `cfg.workers` threads. A failed
/// replication is retried once on a fresh derived seed before the whole
/// run errors out. Output order and content are independent of the
/// worker count: replication `i` always uses the generator derived from
/// `(seed, i)`.
pub fn run_replications_retry<T: Send>(
    cfg: &McConfig,
    f: impl Fn(&mut ChaCha8Rng, usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let reps = cfg.reps;
    let workers = cfg.workers.min(reps);
    if workers <= 1 {
        return (0..reps)
            .map(|i| run_one_with_retry(cfg.seed, i, &f))
            .collect();
    }
    let chunk = reps.div_ceil(workers);
    let mut out: Vec<Result<Vec<T>>> = Vec::with_capacity(workers);
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        for w in 0..workers {
            let lo = w * chunk;
            let hi = ((w + 1) * chunk).min(reps);
            let f = &f;
            handles.push(scope.spawn(move || {
                (lo..hi)
                    .map(|i| run_one_with_retry(cfg.seed, i, f))
                    .collect::<Result<Vec<T>>>()
            }));
        }
        for h in handles {
            out.push(h.join().expect("replication worker panicked"));
        }
    });
    let mut all = Vec::with_capacity(reps);
    for part in out {
        all.extend(part?);
    }
    Ok(all)
}

// ======================================================================
// Streaming moments
// ======================================================================

/// Streaming count/mean/variance/extremes (Welford update, Chan merge).
#[derive(Debug, Clone, Copy)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl Default for Moments {
    fn default() -> Self {
        Moments::new()
    }
}

impl Moments {
    pub fn new() -> Self {
        Moments {
            n: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn merge(a: Moments, b: Moments) -> Moments {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let n = a.n + b.n;
        let d = b.mean - a.mean;
        let mean = a.mean + d * (b.n as f64 / n as f64);
        let m2 = a.m2 + b.m2 + d * d * (a.n as f64 * b.n as f64 / n as f64);
        Moments {
            n,
            mean,
            m2,
            min: a.min.min(b.min),
            max: a.max.max(b.max),
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; 0 for fewer than two points.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sd() / (self.n as f64).sqrt()
        }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }
}

/// Fold a slice into moments with a balanced pairwise tree. The tree
/// shape depends only on the length, so the result is bit-reproducible
/// no matter how the values were produced.
pub fn pairwise_moments(xs: &[f64]) -> Moments {
    if xs.len() <= 64 {
        let mut m = Moments::new();
        for &x in xs {
            m.push(x);
        }
        return m;
    }
    let mid = xs.len() / 2;
    Moments::merge(pairwise_moments(&xs[..mid]), pairwise_moments(&xs[mid..]))
}

// ======================================================================
// Empirical distribution utilities
// ======================================================================

/// Linear-interpolation quantile of unsorted data, `p` in [0, 1].
pub fn quantile(data: &[f64], p: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(FracError::invalid("quantile of empty data"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(FracError::invalid(format!("quantile level {p} outside [0, 1]")));
    }
    let mut s: Vec<f64> = data.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = p * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    Ok(s[lo] * (1.0 - w) + s[hi] * w)
}

/// Kolmogorov-Smirnov outcome. `p_value` uses the asymptotic Kolmogorov
/// law at `sqrt(n_effective) * statistic`. Below 100 effective values
/// the test has little power and `low_power` is raised instead of
/// rejecting the input.
#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_effective: f64,
    pub low_power: bool,
}

impl KsResult {
    fn from_statistic(d: f64, n_eff: f64) -> KsResult {
        KsResult {
            statistic: d,
            p_value: kolmogorov_tail(n_eff.sqrt() * d),
            n_effective: n_eff,
            low_power: n_eff < 100.0,
        }
    }
}

/// One-sample KS statistic of `sample` against a continuous CDF.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(FracError::invalid("KS test on empty sample"));
    }
    let n = sample.len();
    let mut s: Vec<f64> = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut d = 0.0f64;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n as f64 - f);
        d = d.max(f - i as f64 / n as f64);
    }
    Ok(KsResult::from_statistic(d, n as f64))
}

/// One-sample KS against the standard normal law.
pub fn ks_standard_normal(zs: &[f64]) -> Result<KsResult> {
    ks_test(zs, norm_cdf)
}

/// Two-sample KS with effective size `na nb / (na + nb)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(FracError::invalid("KS test on empty sample"));
    }
    let mut sa: Vec<f64> = a.to_vec();
    let mut sb: Vec<f64> = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (sa.len(), sb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < na && j < nb {
        let xa = sa[i];
        let xb = sb[j];
        let x = xa.min(xb);
        while i < na && sa[i] <= x {
            i += 1;
        }
        while j < nb && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let n_eff = (na * nb) as f64 / (na + nb) as f64;
    Ok(KsResult::from_statistic(d, n_eff))
}

// ======================================================================
// Least-squares slope
// ======================================================================

/// Ordinary least squares fit `y ~ intercept + slope x`.
#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residual variance.
    pub slope_se: f64,
    pub r2: f64,
}

impl SlopeFit {
    /// Normal-approximation confidence interval for the slope.
    pub fn slope_interval(&self, z: f64) -> (f64, f64) {
        (self.slope - z * self.slope_se, self.slope + z * self.slope_se)
    }
}

pub fn slope_fit(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.len() != y.len() {
        return Err(FracError::invalid("slope fit needs equal-length vectors"));
    }
    let n = x.len();
    if n < 3 {
        return Err(FracError::invalid("slope fit needs at least 3 points"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for k in 0..n {
        let dx = x[k] - mx;
        let dy = y[k] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return Err(FracError::invalid("slope fit with degenerate abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = (syy - slope * sxy).max(0.0);
    let slope_se = (ss_res / ((nf - 2.0) * sxx)).sqrt();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(SlopeFit {
        slope,
        intercept,
        slope_se,
        r2,
    })
}

// ======================================================================
// Report assembly
// ======================================================================

/// Aggregated outcome of one Monte-Carlo experiment. `stderr` is
/// `sqrt(variance / reps)`; with a single replication the variance is
/// not estimable and `stderr_defined` is false.
#[derive(Debug, Clone)]
pub struct McReport {
    pub statistic: String,
    pub reps: usize,
    pub n: usize,
    pub seed: u64,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    pub stderr_defined: bool,
    pub ks: Option<KsResult>,
    pub slope: Option<SlopeFit>,
    /// Experiment-specific named scalars, in emission order.
    pub extra: Vec<(String, f64)>,
}

impl McReport {
    /// Aggregate per-replication values of the named statistic.
    pub fn from_values(statistic: &str, cfg: &McConfig, values: &[f64]) -> Result<McReport> {
        if values.len() != cfg.reps {
            return Err(FracError::invalid(format!(
                "expected {} replication values, got {}",
                cfg.reps,
                values.len()
            )));
        }
        let m = pairwise_moments(values);
        let defined = values.len() >= 2;
        Ok(McReport {
            statistic: statistic.to_string(),
            reps: cfg.reps,
            n: cfg.n,
            seed: cfg.seed,
            mean: m.mean(),
            variance: m.variance(),
            stderr: if defined { m.sem() } else { 0.0 },
            stderr_defined: defined,
            ks: None,
            slope: None,
            extra: Vec::new(),
        })
    }

    pub fn with_ks(mut self, ks: KsResult) -> Self {
        self.ks = Some(ks);
        self
    }

    pub fn with_slope(mut self, slope: SlopeFit) -> Self {
        self.slope = Some(slope);
        self
    }

    pub fn push_extra(&mut self, key: &str, value: f64) {
        self.extra.push((key.to_string(), value));
    }

    pub fn to_json(&self) -> Json {
        let mut obj = Json::obj(vec![]);
        obj.push("statistic", Json::s(&self.statistic));
        obj.push("reps", Json::u(self.reps as u64));
        obj.push("n", Json::u(self.n as u64));
        obj.push("seed", Json::u(self.seed));
        obj.push("mean", Json::f(self.mean));
        obj.push("variance", Json::f(self.variance));
        obj.push(
            "stderr",
            if self.stderr_defined {
                Json::f(self.stderr)
            } else {
                Json::Null
            },
        );
        obj.push("stderr_defined", Json::b(self.stderr_defined));
        if let Some(ks) = &self.ks {
            let mut k = Json::obj(vec![]);
            k.push("statistic", Json::f(ks.statistic));
            k.push("p_value", Json::f(ks.p_value));
            k.push("n_effective", Json::f(ks.n_effective));
            k.push("low_power", Json::b(ks.low_power));
            obj.push("ks", k);
        }
        if let Some(s) = &self.slope {
            let mut v = Json::obj(vec![]);
            v.push("slope", Json::f(s.slope));
            v.push("intercept", Json::f(s.intercept));
            v.push("slope_se", Json::f(s.slope_se));
            v.push("r2", Json::f(s.r2));
            obj.push("slope", v);
        }
        if !self.extra.is_empty() {
            let mut e = Json::obj(vec![]);
            for (k, v) in &self.extra {
                e.push(k, Json::f(*v));
            }
            obj.push("extra", e);
        }
        obj
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::RngCore;

    #[test]
    fn splitmix64_reference_stream() {
        // stream from state 0
        let mut s = 0u64;
        assert_eq!(splitmix64(&mut s), 0xE220A8397B1DCDAF);
        assert_eq!(splitmix64(&mut s), 0x6E789E6AA1B965F4);
        assert_eq!(splitmix64(&mut s), 0x06C45D188009454F);
    }

    #[test]
    fn derive_seed_matches_stream_and_separates() {
        // element k of the stream started at master
        let master = 0u64;
        assert_eq!(derive_seed(master, 0), 0xE220A8397B1DCDAF);
        assert_eq!(derive_seed(master, 1), 0x6E789E6AA1B965F4);
        assert_ne!(derive_seed(1, 0), derive_seed(0, 0));
        let mut r0 = rep_rng(7, 0);
        let mut r1 = rep_rng(7, 1);
        assert_ne!(r0.next_u64(), r1.next_u64());
    }

    #[test]
    fn replications_are_reproducible() {
        let a = run_replications(42, 10, |rng, _| rng.next_u64());
        let b = run_replications(42, 10, |rng, _| rng.next_u64());
        let c = run_replications(43, 10, |rng, _| rng.next_u64());
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn welford_matches_two_pass() {
        let data: Vec<f64> = run_replications(1, 500, |rng, _| {
            (rng.next_u64() as f64 / u64::MAX as f64) * 10.0 - 3.0
        });
        let m = pairwise_moments(&data);
        let mean = data.iter().sum::<f64>() / data.len() as f64;
        let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (data.len() - 1) as f64;
        assert!((m.mean() - mean).abs() < 1e-12 * mean.abs().max(1.0));
        assert!((m.variance() - var).abs() < 1e-12 * var);
        assert_eq!(m.count(), 500);
        assert_eq!(m.min(), data.iter().cloned().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn merge_equals_sequential() {
        let data: Vec<f64> = (0..137).map(|i| (i as f64).sin()).collect();
        let mut seq = Moments::new();
        for &x in &data {
            seq.push(x);
        }
        let tree = pairwise_moments(&data);
        assert_eq!(seq.count(), tree.count());
        assert!((seq.mean() - tree.mean()).abs() < 1e-14);
        assert!((seq.variance() - tree.variance()).abs() < 1e-14);
    }

    #[test]
    fn ks_statistic_on_midpoint_grid() {
        // F(x_i) = (i - 1/2)/n gives D = 1/(2n) exactly
        let n = 50usize;
        let sample: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        let ks = ks_test(&sample, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((ks.statistic - 1.0 / (2.0 * n as f64)).abs() < 1e-15);
        assert!(ks.p_value > 0.999);
        assert!(ks.low_power);
        let big: Vec<f64> = (1..=200).map(|i| (i as f64 - 0.5) / 200.0).collect();
        assert!(!ks_test(&big, |x| x.clamp(0.0, 1.0)).unwrap().low_power);
    }

    #[test]
    fn ks_normal_power_and_degeneracy() {
        // well standardized draws pass; a unit mean shift fails at n=1000
        let zs: Vec<f64> = run_replications(5, 1000, |rng, _| {
            let (a, b) = (rng.next_u64(), rng.next_u64());
            let u1 = (a >> 11) as f64 / (1u64 << 53) as f64;
            let u2 = (b >> 11) as f64 / (1u64 << 53) as f64;
            (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        });
        let ok = ks_standard_normal(&zs).unwrap();
        assert!(ok.p_value > 0.01, "p = {}", ok.p_value);
        let shifted: Vec<f64> = zs.iter().map(|z| z + 1.0).collect();
        let bad = ks_standard_normal(&shifted).unwrap();
        assert!(bad.p_value < 0.01, "p = {}", bad.p_value);
        // constant input is maximally non-normal
        let constant = vec![0.3; 1000];
        assert!(ks_standard_normal(&constant).unwrap().p_value < 1e-10);
    }

    #[test]
    fn retry_uses_fresh_seed_then_errors() {
        use std::sync::Mutex;
        let cfg = McConfig::new(6, 11, 1, 1).unwrap();
        // replication 3 fails on its first attempt only
        let attempts = Mutex::new([0u8; 6]);
        let vals = run_replications_retry(&cfg, |rng, i| {
            let mut a = attempts.lock().unwrap();
            a[i] += 1;
            if i == 3 && a[i] == 1 {
                return Err(FracError::numerical("transient"));
            }
            Ok(rng.next_u64())
        })
        .unwrap();
        assert_eq!(attempts.lock().unwrap()[3], 2);
        // the retried replication ran on the salted seed
        assert_eq!(vals[3], rep_rng(11 ^ RETRY_SALT, 3).next_u64());
        assert_eq!(vals[0], rep_rng(11, 0).next_u64());
        // persistent failure surfaces as an error naming the replication
        let err = run_replications_retry(&cfg, |_, i| -> Result<u64> {
            if i == 5 {
                Err(FracError::numerical("broken"))
            } else {
                Ok(0)
            }
        })
        .unwrap_err();
        assert!(err.to_string().contains("replication 5 failed twice"));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mk = |workers| {
            let cfg = McConfig::new(103, 77, workers, 4).unwrap();
            run_replications_retry(&cfg, |rng, _| Ok(rng.next_u64())).unwrap()
        };
        let one = mk(1);
        assert_eq!(one, mk(3));
        assert_eq!(one, mk(16));
        assert!(McConfig::new(0, 1, 1, 1).is_err());
    }

    #[test]
    fn report_aggregates_and_flags_single_rep() {
        let cfg = McConfig::new(4, 9, 1, 2).unwrap();
        let vals = [1.0, 2.0, 3.0, 4.0];
        let rep = McReport::from_values("demo", &cfg, &vals).unwrap();
        assert_eq!(rep.mean, 2.5);
        assert!((rep.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((rep.stderr - (rep.variance / 4.0).sqrt()).abs() < 1e-15);
        assert!(rep.stderr_defined);
        let single_cfg = McConfig::new(1, 9, 1, 2).unwrap();
        let single = McReport::from_values("demo", &single_cfg, &[7.25]).unwrap();
        assert_eq!(single.mean, 7.25);
        assert!(!single.stderr_defined);
        let rendered = single.to_json().render();
        assert!(rendered.contains("\"stderr\": null"));
        assert!(rendered.contains("\"stderr_defined\": false"));
        assert!(McReport::from_values("demo", &cfg, &[1.0]).is_err());
    }

    #[test]
    fn ks_two_sample_identical_is_zero() {
        let a: Vec<f64> = (0..40).map(|i| (i as f64).cos()).collect();
        let ks = ks_two_sample(&a, &a).unwrap();
        assert_eq!(ks.statistic, 0.0);
        let b: Vec<f64> = a.iter().map(|x| x + 10.0).collect();
        let ks2 = ks_two_sample(&a, &b).unwrap();
        assert!((ks2.statistic - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_interpolates() {
        let data = vec![4.0, 1.0, 3.0, 2.0, 5.0];
        assert_eq!(quantile(&data, 0.5).unwrap(), 3.0);
        assert_eq!(quantile(&data, 0.0).unwrap(), 1.0);
        assert_eq!(quantile(&data, 1.0).unwrap(), 5.0);
        assert!((quantile(&data, 0.625).unwrap() - 3.5).abs() < 1e-15);
    }

    #[test]
    fn slope_fit_exact_line_and_noise() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let fit = slope_fit(&x, &y).unwrap();
        assert!((fit.slope - 2.5).abs() < 1e-12);
        assert!((fit.intercept + 1.0).abs() < 1e-12);
        assert!(fit.slope_se < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        let (lo, hi) = fit.slope_interval(1.96);
        assert!(lo <= 2.5 && 2.5 <= hi);
        assert!(slope_fit(&x[..2], &y[..2]).is_err());
    }
}
