//! Mixed fractional derivative `D^a_x D^b_y` of a bivariate reliability
//! function, estimated from a two dimensional nonnegative sample, with
//! the centered random field and its L_q analysis in both exponent
//! regimes.
//!
//! # Estimator
//!
//! For pairs `(xi_i, eta_i)` the factorized summand
//!
//! `h(xi, eta, x, y) = f_{a,xi}(x) f_{b,eta}(y)`
//!
//! satisfies `G(1-a) G(1-b) D^a_x D^b_y [H] = h` for the single-pair
//! reliability `H`, so the sample mean of `h` over the data, divided by
//! `G(1-a) G(1-b)`, is exactly unbiased for the mixed derivative of the
//! joint reliability `G(x, y) = P(xi >= x, eta >= y)`. The coordinates
//! need not be independent.
//!
//! # Centered field
//!
//! `S_n(x, y) = n^(-1/2) sum_i (h(xi_i, eta_i, x, y) - GG G^(a,b)(x, y))`
//!
//! has mean zero pointwise. Its L_q norms over the unit square are
//! finite for `q < 1/max(a, b)` and diverge at and beyond that exponent;
//! the q-th moment blows up like `(1 - aq)^(-1)` for `b < a` and like
//! `(1 - aq)^(-2)` for `b = a` as `q` approaches `1/a`, which is the
//! observable dichotomy between the two regimes.
//!
//! # Truths
//!
//! Two laws carry closed or semi-closed mixed derivatives and are used
//! as oracles throughout:
//!
//! * independent uniform coordinates: the derivative factorizes into
//!   `g_a(x) g_b(y) / (G(1-a) G(1-b))`;
//! * comonotone uniform coordinates (`eta = xi`): with
//!   `G(x, y) = 1 - max(x, y)`,
//!
//!   `GG D^a_x D^b_y[G] = x^(-a) g_b(y) - x^(1-a) y^(-b)/(1-a)
//!                        + Int_0^(x^y) (x-s)^(-a) (y-s)^(-b) ds`,
//!
//!   which is symmetric in `(x, a) <-> (y, b)` even though the operators
//!   do not commute in general. A nested application of the univariate
//!   numerical operators reproduces the same values and is kept as an
//!   independent route.

use crate::error::{FracError, Result};
use crate::fraccalc::{frac_derivative, indicator_summand, tanh_sinh, FractionalOrder};
use crate::grid::{graded_nodes, jump_adapted_nodes, GridFunction};
use crate::lq::g_alpha;
use crate::mc::{self, McConfig, McReport, SlopeFit};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A two dimensional sample of nonnegative pairs, held in lexicographic
/// order so that all summations run in a canonical order.
#[derive(Debug, Clone)]
pub struct Sample2D {
    sorted: Vec<(f64, f64)>,
}

impl Sample2D {
    pub fn new(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(FracError::invalid("sample is empty"));
        }
        for &(a, b) in &pairs {
            if !(a.is_finite() && b.is_finite() && a >= 0.0 && b >= 0.0) {
                return Err(FracError::invalid(format!(
                    "pair coordinates must be finite and >= 0, got ({a}, {b})"
                )));
            }
        }
        pairs.sort_by(|p, q| p.partial_cmp(q).unwrap());
        Ok(Sample2D { sorted: pairs })
    }

    /// Parse one comma-separated pair per line; blank lines and `#`
    /// comments are skipped. Errors carry 1-based line numbers.
    pub fn from_text(s: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',');
            let (a, b) = match (cols.next(), cols.next(), cols.next()) {
                (Some(a), Some(b), None) => (a.trim(), b.trim()),
                _ => {
                    return Err(FracError::invalid(format!(
                        "line {}: expected two comma-separated values, got `{line}`",
                        i + 1
                    )));
                }
            };
            let parse = |v: &str| -> Result<f64> {
                v.parse().map_err(|_| {
                    FracError::invalid(format!("line {}: bad coordinate `{v}`", i + 1))
                })
            };
            pairs.push((parse(a)?, parse(b)?));
        }
        Sample2D::new(pairs)
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty samples
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.sorted
    }
}

/// Pair of estimation orders with the regime classifier.
#[derive(Debug, Clone, Copy)]
pub struct MixedOrder {
    pub alpha: FractionalOrder,
    pub beta: FractionalOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    BetaLtAlpha,
    BetaEqAlpha,
    BetaGtAlpha,
}

impl MixedOrder {
    /// Both orders in the estimation range (0, 1/2).
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        Ok(MixedOrder {
            alpha: FractionalOrder::for_estimation(alpha)?,
            beta: FractionalOrder::for_estimation(beta)?,
        })
    }

    pub fn regime(&self) -> Regime {
        let (a, b) = (self.alpha.get(), self.beta.get());
        if b < a {
            Regime::BetaLtAlpha
        } else if b == a {
            Regime::BetaEqAlpha
        } else {
            Regime::BetaGtAlpha
        }
    }

    /// `G(1-a) G(1-b)`.
    pub fn gamma_product(&self) -> f64 {
        self.alpha.gamma_complement() * self.beta.gamma_complement()
    }

    pub fn swapped(&self) -> MixedOrder {
        MixedOrder {
            alpha: self.beta,
            beta: self.alpha,
        }
    }
}

/// `h(xi, eta, x, y) = f_{a,xi}(x) f_{b,eta}(y)`, the product of the two
/// univariate summands.
pub fn mixed_summand(xi: f64, eta: f64, x: f64, y: f64, order: MixedOrder) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(FracError::invalid(format!(
            "evaluation point must have positive coordinates, got ({x}, {y})"
        )));
    }
    Ok(indicator_summand(order.alpha.get(), xi, x) * indicator_summand(order.beta.get(), eta, y))
}

/// `G_{a,b,n}(x, y)`: mean of the mixed summands over the sample,
/// divided by `G(1-a) G(1-b)`. The factorized summand is symmetric
/// under `(x, a, xi) <-> (y, b, eta)`, so the `b > a` case needs no
/// separate path: the coordinate swap reproduces it term by term.
pub fn estimate_mixed(s: &Sample2D, x: f64, y: f64, order: MixedOrder) -> Result<f64> {
    let mut acc = 0.0;
    for &(xi, eta) in s.pairs() {
        acc += mixed_summand(xi, eta, x, y, order)?;
    }
    Ok(acc / (s.len() as f64 * order.gamma_product()))
}

// ======================================================================
// Oracle laws
// ======================================================================

/// Bivariate laws on the unit square with known mixed derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedLaw {
    /// Independent uniform coordinates.
    IndependentUniform,
    /// `eta = xi`, uniform: `G(x, y) = 1 - max(x, y)`.
    ComonotoneUniform,
}

impl MixedLaw {
    pub fn parse(s: &str) -> Result<MixedLaw> {
        match s {
            "independent" => Ok(MixedLaw::IndependentUniform),
            "comonotone" => Ok(MixedLaw::ComonotoneUniform),
            _ => Err(FracError::invalid(format!(
                "unknown bivariate law `{s}`; expected independent or comonotone"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            MixedLaw::IndependentUniform => "independent",
            MixedLaw::ComonotoneUniform => "comonotone",
        }
    }

    pub fn sample_pair(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        match self {
            MixedLaw::IndependentUniform => (rng.gen(), rng.gen()),
            MixedLaw::ComonotoneUniform => {
                let u: f64 = rng.gen();
                (u, u)
            }
        }
    }

    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Sample2D> {
        Sample2D::new((0..n).map(|_| self.sample_pair(rng)).collect())
    }

    /// `G^(a,b)(x, y)` on the open unit square.
    pub fn truth(&self, order: MixedOrder, x: f64, y: f64) -> Result<f64> {
        check_unit_square(x, y)?;
        match self {
            MixedLaw::IndependentUniform => independent_uniform_truth(order, x, y),
            MixedLaw::ComonotoneUniform => comonotone_uniform_truth(order, x, y),
        }
    }
}

fn check_unit_square(x: f64, y: f64) -> Result<()> {
    if !(x > 0.0 && x <= 1.0 && y > 0.0 && y <= 1.0) {
        return Err(FracError::invalid(format!(
            "oracle laws live on the unit square; got ({x}, {y})"
        )));
    }
    Ok(())
}

/// Factorized truth `g_a(x) g_b(y) / (G(1-a) G(1-b))`.
pub fn independent_uniform_truth(order: MixedOrder, x: f64, y: f64) -> Result<f64> {
    check_unit_square(x, y)?;
    Ok(g_alpha(order.alpha.get(), x) * g_alpha(order.beta.get(), y) / order.gamma_product())
}

/// Semi-closed truth for `G(x, y) = 1 - max(x, y)`: two closed terms
/// plus one singular product-kernel integral, evaluated in distance
/// form so the quadrature sees the singularity at its left endpoint.
pub fn comonotone_uniform_truth(order: MixedOrder, x: f64, y: f64) -> Result<f64> {
    check_unit_square(x, y)?;
    let (a, b) = (order.alpha.get(), order.beta.get());
    let lo = x.min(y);
    let (dx, dy) = (x - lo, y - lo);
    let cross = tanh_sinh(0.0, lo, 0.1, |d| (d + dx).powf(-a) * (d + dy).powf(-b));
    let head = x.powf(-a) * g_alpha(b, y) - x.powf(1.0 - a) * y.powf(-b) / (1.0 - a);
    Ok((head + cross) / order.gamma_product())
}

/// Independent second route for the comonotone truth: the univariate
/// operator `D^a` applied in `x` on a kink-adapted mesh for each node of
/// a `y` mesh, then `D^b` in `y` of the tabulated intermediate. Both
/// passes treat their input as piecewise linear; the first pass is exact
/// for this `G`, the second carries interpolation error concentrated at
/// the `s = x` kink, which the mesh refines toward.
pub fn nested_operator_truth(
    order: MixedOrder,
    x: f64,
    y: f64,
    nodes_per_axis: usize,
) -> Result<f64> {
    check_unit_square(x, y)?;
    let inner_kinks: Vec<f64> = [x].iter().cloned().filter(|&k| k < y).collect();
    let y_mesh = jump_adapted_nodes(y, nodes_per_axis, &inner_kinks, 3.0)?;
    let mut inner = Vec::with_capacity(y_mesh.len());
    for &s in &y_mesh {
        let kinks: Vec<f64> = [s].iter().cloned().filter(|&k| k < x).collect();
        let x_mesh = jump_adapted_nodes(x, nodes_per_axis, &kinks, 3.0)?;
        let g = GridFunction::new(
            x_mesh.iter().cloned().collect(),
            x_mesh.iter().map(|&t| 1.0 - t.max(s)).collect(),
            crate::grid::Grading::Graded(3.0),
            order.alpha.get(),
        )?;
        let d = frac_derivative(&g, order.alpha)?;
        inner.push(*d.values().last().unwrap());
    }
    let g = GridFunction::new(
        y_mesh,
        inner,
        crate::grid::Grading::Graded(3.0),
        order.beta.get(),
    )?;
    let d = frac_derivative(&g, order.beta)?;
    Ok(*d.values().last().unwrap())
}

// ======================================================================
// Centered field
// ======================================================================

/// Tabulated field on a tensor grid; `values[i * y_nodes.len() + j]`
/// sits at `(x_nodes[i], y_nodes[j])`.
#[derive(Debug, Clone)]
pub struct Field2D {
    pub x_nodes: Vec<f64>,
    pub y_nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl Field2D {
    pub fn value_at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.y_nodes.len() + j]
    }
}

/// `S_n` on the grid: `n^(-1/2) sum_i (h_i - GG truth)` at every tensor
/// node. The truth comes from the law, so the field is exactly centered
/// in expectation.
pub fn mixed_loss_field(
    s: &Sample2D,
    order: MixedOrder,
    law: MixedLaw,
    x_nodes: &[f64],
    y_nodes: &[f64],
) -> Result<Field2D> {
    for &v in x_nodes.iter().chain(y_nodes) {
        if !(v > 0.0 && v <= 1.0) {
            return Err(FracError::invalid(format!(
                "field grid must lie in (0, 1], got node {v}"
            )));
        }
    }
    let gg = order.gamma_product();
    let scale = 1.0 / (s.len() as f64).sqrt();
    let (a, b) = (order.alpha.get(), order.beta.get());
    // factorized accumulation: per observation, one pass of univariate
    // summands per axis, then the rank-1 update
    let mut values = vec![0.0; x_nodes.len() * y_nodes.len()];
    let mut fx = vec![0.0; x_nodes.len()];
    let mut fy = vec![0.0; y_nodes.len()];
    for &(xi, eta) in s.pairs() {
        for (i, &x) in x_nodes.iter().enumerate() {
            fx[i] = indicator_summand(a, xi, x);
        }
        for (j, &y) in y_nodes.iter().enumerate() {
            fy[j] = indicator_summand(b, eta, y);
        }
        for i in 0..x_nodes.len() {
            for j in 0..y_nodes.len() {
                values[i * y_nodes.len() + j] += fx[i] * fy[j];
            }
        }
    }
    for (i, &x) in x_nodes.iter().enumerate() {
        for (j, &y) in y_nodes.iter().enumerate() {
            let t = law.truth(order, x, y)?;
            let cell = &mut values[i * y_nodes.len() + j];
            *cell = scale * (*cell - s.len() as f64 * gg * t);
        }
    }
    Ok(Field2D {
        x_nodes: x_nodes.to_vec(),
        y_nodes: y_nodes.to_vec(),
        values,
    })
}

/// `(Int Int |field|^q dx dy)^(1/q)` by tensor trapezoid over the node
/// box, the two dimensional analogue of the curve L_q norm.
pub fn lq_norm_2d(field: &Field2D, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(FracError::invalid(format!("q must be >= 1, got {q}")));
    }
    let wx = trapezoid_weights(&field.x_nodes);
    let wy = trapezoid_weights(&field.y_nodes);
    let ny = field.y_nodes.len();
    let mut acc = 0.0;
    for i in 0..field.x_nodes.len() {
        let mut row = 0.0;
        for j in 0..ny {
            row += wy[j] * field.values[i * ny + j].abs().powf(q);
        }
        acc += wx[i] * row;
    }
    Ok(acc.powf(1.0 / q))
}

fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 1..n {
        let h = 0.5 * (nodes[i] - nodes[i - 1]);
        w[i - 1] += h;
        w[i] += h;
    }
    w
}

/// Field L_q norms of one fixed sample across a ladder of grid
/// refinements; feeds the same divergence predicate as the curve case.
pub fn field_refinement_norms(
    law: MixedLaw,
    order: MixedOrder,
    n_obs: usize,
    q: f64,
    sizes: &[usize],
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = mc::rep_rng(seed, 0);
    let s = law.sample(n_obs, &mut rng)?;
    let mut out = Vec::with_capacity(sizes.len());
    for &m in sizes {
        // graded mesh without its 0 node; the field lives on (0, 1]
        let nodes = graded_nodes(1.0, m, 4.0)?[1..].to_vec();
        let field = mixed_loss_field(&s, order, law, &nodes, &nodes)?;
        out.push(lq_norm_2d(&field, q)?);
    }
    Ok(out)
}

// ======================================================================
// Summand L_q structure and pole orders
// ======================================================================

/// `Int_0^1 |f_{a,xi}(x)|^q dx`, the single-coordinate q-th power of the
/// summand norm. The head below `xi` is closed form; the tail is the
/// substitution `tau = u^(1-aq)` whose Jacobian cancels the singular
/// factor exactly, leaving a bounded integrand:
///
/// `xi^(1-aq)/(1-aq)
///  + (1/p) Int_0^((1-xi)^p) (1 - (u/(xi+u))^a)^q dtau`, `u = tau^(1/p)`,
///
/// with `p = 1 - aq`. For `xi >= 1` the tail is empty and the head
/// integral runs to 1 exactly.
pub fn summand_lq_power(alpha: FractionalOrder, xi: f64, q: f64) -> Result<f64> {
    let a = alpha.get();
    if !(q >= 1.0) {
        return Err(FracError::invalid(format!("q must be >= 1, got {q}")));
    }
    if !(a * q < 1.0) {
        return Err(FracError::invalid(format!(
            "need aq < 1 for a finite coordinate norm, got aq = {}",
            a * q
        )));
    }
    if !(xi >= 0.0) {
        return Err(FracError::invalid(format!(
            "observation must be >= 0, got {xi}"
        )));
    }
    let p = 1.0 - a * q;
    if xi >= 1.0 {
        return Ok(1.0 / p);
    }
    let head = xi.powf(p) / p;
    if xi == 0.0 {
        // f_{a,0} vanishes identically
        return Ok(0.0);
    }
    let hi = (1.0 - xi).powf(p);
    let tail = tanh_sinh(0.0, hi, 0.12, |tau| {
        let u = tau.powf(1.0 / p);
        (1.0 - (u / (xi + u)).powf(a)).powf(q)
    }) / p;
    Ok(head + tail)
}

/// `||h||_{q,r}` of the factorized summand under Lebesgue measure on the
/// unit square: the mixed norm splits into the product of coordinate
/// norms.
pub fn summand_mixed_norm(
    order: MixedOrder,
    xi: f64,
    eta: f64,
    q: f64,
    r: f64,
) -> Result<f64> {
    let fa = summand_lq_power(order.alpha, xi, q)?;
    let fb = summand_lq_power(order.beta, eta, r)?;
    Ok(fa.powf(1.0 / q) * fb.powf(1.0 / r))
}

/// Deterministic `E ||h||_{q,q}^q` over an oracle law: the expectation
/// over the data runs through the coordinate norms, so it reduces to a
/// one dimensional integral in the uniform variable.
pub fn mixed_moment(law: MixedLaw, order: MixedOrder, q: f64) -> Result<f64> {
    match law {
        MixedLaw::IndependentUniform => {
            let ma = tanh_sinh(0.0, 1.0, 0.08, |t| {
                summand_lq_power(order.alpha, t, q).unwrap_or(f64::NAN)
            });
            let mb = tanh_sinh(0.0, 1.0, 0.08, |t| {
                summand_lq_power(order.beta, t, q).unwrap_or(f64::NAN)
            });
            let v = ma * mb;
            if !v.is_finite() {
                return Err(FracError::numerical("moment integrand failed"));
            }
            Ok(v)
        }
        MixedLaw::ComonotoneUniform => {
            let v = tanh_sinh(0.0, 1.0, 0.08, |t| {
                let fa = summand_lq_power(order.alpha, t, q).unwrap_or(f64::NAN);
                let fb = summand_lq_power(order.beta, t, q).unwrap_or(f64::NAN);
                fa * fb
            });
            if !v.is_finite() {
                return Err(FracError::numerical("moment integrand failed"));
            }
            Ok(v)
        }
    }
}

/// Blow-up exponent of the summand moment as `q` approaches `1/a` from
/// below: fits `ln E ||h||_{q,q}^q` against `-ln(1 - aq)` on the ladder
/// `q = (1 - eps)/a`. Requires `b <= a` so the pole location is `1/a`.
pub fn pole_order_fit(law: MixedLaw, order: MixedOrder, eps_ladder: &[f64]) -> Result<SlopeFit> {
    if order.regime() == Regime::BetaGtAlpha {
        return Err(FracError::invalid(
            "pole fit needs beta <= alpha; swap the coordinates",
        ));
    }
    if eps_ladder.len() < 2 {
        return Err(FracError::invalid("need at least 2 ladder points"));
    }
    let a = order.alpha.get();
    let mut xs = Vec::with_capacity(eps_ladder.len());
    let mut ys = Vec::with_capacity(eps_ladder.len());
    for &eps in eps_ladder {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(FracError::invalid(format!(
                "ladder values must lie in (0, 1), got {eps}"
            )));
        }
        let q = (1.0 - eps) / a;
        if q < 1.0 {
            return Err(FracError::invalid(format!(
                "ladder point eps = {eps} puts q = {q} below 1; use a finer ladder"
            )));
        }
        xs.push(-eps.ln());
        ys.push(mixed_moment(law, order, q)?.ln());
    }
    mc::slope_fit(&xs, &ys)
}

// ======================================================================
// Monte-Carlo drivers
// ======================================================================

/// Replicated mixed-derivative estimates at a point against the law's
/// truth.
#[derive(Debug, Clone)]
pub struct MixedMcReport {
    pub law: MixedLaw,
    pub alpha: f64,
    pub beta: f64,
    pub x: f64,
    pub y: f64,
    pub truth: f64,
    pub report: McReport,
}

pub fn mixed_mc(
    law: MixedLaw,
    order: MixedOrder,
    x: f64,
    y: f64,
    cfg: &McConfig,
) -> Result<MixedMcReport> {
    let truth = law.truth(order, x, y)?;
    let vals = mc::run_replications_retry(cfg, |rng, _| {
        let s = law.sample(cfg.n, rng)?;
        estimate_mixed(&s, x, y, order)
    })?;
    let report = McReport::from_values("mixed_estimate", cfg, &vals)?;
    Ok(MixedMcReport {
        law,
        alpha: order.alpha.get(),
        beta: order.beta.get(),
        x,
        y,
        truth,
        report,
    })
}

/// Replicated field moments `E ||S_n||_{q,q}^q` on a fixed graded grid.
pub fn field_moment_mc(
    law: MixedLaw,
    order: MixedOrder,
    q: f64,
    grid_nodes: usize,
    cfg: &McConfig,
) -> Result<McReport> {
    let nodes = graded_nodes(1.0, grid_nodes, 5.0)?[1..].to_vec();
    let vals = mc::run_replications_retry(cfg, |rng, _| {
        let s = law.sample(cfg.n, rng)?;
        let field = mixed_loss_field(&s, order, law, &nodes, &nodes)?;
        Ok(lq_norm_2d(&field, q)?.powf(q))
    })?;
    McReport::from_values("field_lq_moment", cfg, &vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(a: f64, b: f64) -> MixedOrder {
        MixedOrder::new(a, b).unwrap()
    }

    #[test]
    fn sample2d_parsing_and_canonical_order() {
        let s = Sample2D::from_text("0.5, 0.25\n# comment\n\n0.1,0.9\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.pairs()[0], (0.1, 0.9));
        let e = Sample2D::from_text("0.5,0.25\n0.3\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = Sample2D::from_text("0.5,0.25,0.1\n").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
        let e = Sample2D::from_text("0.5,-0.25\n").unwrap_err().to_string();
        assert!(e.contains("-0.25"), "{e}");
        assert!(Sample2D::from_text("# only comments\n").is_err());
    }

    #[test]
    fn regime_classifier() {
        assert_eq!(order(0.3, 0.15).regime(), Regime::BetaLtAlpha);
        assert_eq!(order(0.3, 0.3).regime(), Regime::BetaEqAlpha);
        assert_eq!(order(0.15, 0.3).regime(), Regime::BetaGtAlpha);
        assert!(MixedOrder::new(0.5, 0.3).is_err());
        assert!(MixedOrder::new(0.3, 0.0).is_err());
    }

    #[test]
    fn mixed_summand_cases() {
        // square of the univariate value: f_{1/4,1/2}(1/4) = 4^{1/4} = sqrt 2
        let h = mixed_summand(0.5, 0.5, 0.25, 0.25, order(0.25, 0.25)).unwrap();
        assert!((h - 2.0).abs() < 1e-14, "{h}");
        // y <= eta branch with x > xi
        let o = order(0.3, 0.2);
        let h = mixed_summand(0.25, 0.9, 0.5, 0.5, o).unwrap();
        let expect = (0.5f64.powf(-0.3) - 0.25f64.powf(-0.3)) * 0.5f64.powf(-0.2);
        assert!((h - expect).abs() < 1e-14);
        // orders near zero reduce to the bivariate survival indicator
        let tiny = order(1e-9, 1e-9);
        let inside = mixed_summand(0.5, 0.7, 0.4, 0.6, tiny).unwrap();
        let outside = mixed_summand(0.5, 0.7, 0.6, 0.6, tiny).unwrap();
        assert!((inside - 1.0).abs() < 1e-6, "{inside}");
        assert!(outside.abs() < 1e-6, "{outside}");
        assert!(mixed_summand(0.5, 0.5, 0.0, 0.5, tiny).is_err());
        assert!(mixed_summand(0.5, 0.5, 0.5, -1.0, tiny).is_err());
    }

    #[test]
    fn estimate_reductions_and_invariances() {
        let o = order(0.3, 0.15);
        // n = 1 reduces to the summand over the gamma product
        let s1 = Sample2D::new(vec![(0.4, 0.6)]).unwrap();
        let e = estimate_mixed(&s1, 0.5, 0.5, o).unwrap();
        let h = mixed_summand(0.4, 0.6, 0.5, 0.5, o).unwrap();
        assert_eq!(e, h / o.gamma_product());
        // permutation invariance is exact: construction sorts the pairs
        let fwd = Sample2D::new(vec![(0.9, 0.1), (0.2, 0.8), (0.5, 0.5)]).unwrap();
        let rev = Sample2D::new(vec![(0.5, 0.5), (0.9, 0.1), (0.2, 0.8)]).unwrap();
        assert_eq!(
            estimate_mixed(&fwd, 0.3, 0.7, o).unwrap(),
            estimate_mixed(&rev, 0.3, 0.7, o).unwrap()
        );
        // coordinate swap reproduces the beta > alpha case exactly
        let swapped = Sample2D::new(fwd.pairs().iter().map(|&(a, b)| (b, a)).collect()).unwrap();
        assert_eq!(
            estimate_mixed(&fwd, 0.3, 0.7, o).unwrap(),
            estimate_mixed(&swapped, 0.7, 0.3, o.swapped()).unwrap()
        );
    }

    #[test]
    fn frozen_truth_values() {
        // semi-closed comonotone and factorized independent values on
        // the oracle grid
        let o1 = order(0.3, 0.15);
        let o2 = order(0.3, 0.3);
        let cases = [
            (o1, 0.5, 0.7, 0.22206459561582949, 0.045348372476049015),
            (o1, 0.6, 0.3, 0.17503210191066736, 0.089381015356540842),
            (o2, 0.5, 0.7, 0.12250224459394096, 0.0),
            (o2, 0.6, 0.3, 0.19281535042651984, 0.081039312574244852),
        ];
        for &(o, x, y, com, ind) in &cases {
            let c = comonotone_uniform_truth(o, x, y).unwrap();
            let i = independent_uniform_truth(o, x, y).unwrap();
            assert!((c - com).abs() < 1e-12, "com({x},{y}): {c} vs {com}");
            assert!((i - ind).abs() < 1e-14, "ind({x},{y}): {i} vs {ind}");
        }
        // the semi-closed form is symmetric under (x,a) <-> (y,b)
        let fwd = comonotone_uniform_truth(o1, 0.5, 0.7).unwrap();
        let swp = comonotone_uniform_truth(o1.swapped(), 0.7, 0.5).unwrap();
        assert!((fwd - swp).abs() < 1e-12, "{fwd} vs {swp}");
        assert!(comonotone_uniform_truth(o1, 1.5, 0.5).is_err());
    }

    #[test]
    fn nested_operator_route_agrees() {
        for &(a, b, x, y) in &[
            (0.3, 0.15, 0.5, 0.7),
            (0.3, 0.15, 0.6, 0.3),
            (0.3, 0.3, 0.5, 0.7),
        ] {
            let o = order(a, b);
            let semi = comonotone_uniform_truth(o, x, y).unwrap();
            let nested = nested_operator_truth(o, x, y, 256).unwrap();
            assert!(
                (nested - semi).abs() < 5e-3 * semi.abs().max(0.1),
                "({a},{b},{x},{y}): nested {nested} vs semi {semi}"
            );
        }
    }

    #[test]
    fn estimator_unbiased_on_both_laws() {
        let o = order(0.3, 0.15);
        for (law, x, y) in [
            (MixedLaw::IndependentUniform, 0.5, 0.7),
            (MixedLaw::ComonotoneUniform, 0.5, 0.7),
            (MixedLaw::ComonotoneUniform, 0.6, 0.3),
        ] {
            let cfg = McConfig::new(2000, 17, 1, 200).unwrap();
            let rep = mixed_mc(law, o, x, y, &cfg).unwrap();
            let dev = (rep.report.mean - rep.truth).abs();
            assert!(
                dev < 3.0 * rep.report.stderr.max(1e-12),
                "{} ({x},{y}): mean {} truth {} se {}",
                law.label(),
                rep.report.mean,
                rep.truth,
                rep.report.stderr
            );
        }
    }

    #[test]
    fn field_is_centered_pointwise() {
        let o = order(0.3, 0.3);
        let law = MixedLaw::ComonotoneUniform;
        let nodes = [0.3, 0.65, 1.0];
        let cfg = McConfig::new(1500, 29, 1, 50).unwrap();
        let draws = mc::run_replications_retry(&cfg, |rng, _| {
            let s = law.sample(cfg.n, rng)?;
            let f = mixed_loss_field(&s, o, law, &nodes, &nodes)?;
            Ok(f.value_at(1, 2))
        })
        .unwrap();
        let m = mc::pairwise_moments(&draws);
        assert!(
            m.mean().abs() < 3.0 * m.sem(),
            "field mean {} se {}",
            m.mean(),
            m.sem()
        );
        // grid validation
        let s = law.sample(5, &mut mc::rep_rng(1, 0)).unwrap();
        assert!(mixed_loss_field(&s, o, law, &[0.0, 0.5], &nodes).is_err());
    }

    #[test]
    fn lq_norm_2d_constant_and_separable() {
        // unit-measure box: constant field c has norm |c|
        let xs: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        let field = Field2D {
            x_nodes: xs.clone(),
            y_nodes: xs.clone(),
            values: vec![-1.5; 81],
        };
        assert!((lq_norm_2d(&field, 2.5).unwrap() - 1.5).abs() < 1e-14);
        assert!(lq_norm_2d(&field, 0.5).is_err());
        // separable field factorizes into the two curve norms
        let u = |x: f64| 1.0 + x * x;
        let v = |y: f64| (2.0 * y).sin() + 2.0;
        let mut values = Vec::new();
        for &x in &xs {
            for &y in &xs {
                values.push(u(x) * v(y));
            }
        }
        let field = Field2D {
            x_nodes: xs.clone(),
            y_nodes: xs.clone(),
            values,
        };
        let q = 3.0;
        let gu = GridFunction::new(
            xs.clone(),
            xs.iter().map(|&x| u(x)).collect(),
            crate::grid::Grading::Uniform,
            0.0,
        )
        .unwrap();
        let gv = GridFunction::new(
            xs.clone(),
            xs.iter().map(|&y| v(y)).collect(),
            crate::grid::Grading::Uniform,
            0.0,
        )
        .unwrap();
        let prod = crate::lq::lq_norm(&gu, q).unwrap() * crate::lq::lq_norm(&gv, q).unwrap();
        let got = lq_norm_2d(&field, q).unwrap();
        assert!((got - prod).abs() < 1e-13, "{got} vs {prod}");
    }

    #[test]
    fn summand_lq_power_branches_and_brute_force() {
        let a = FractionalOrder::for_estimation(0.3).unwrap();
        // beyond the window the summand is the pure power
        assert!((summand_lq_power(a, 1.0, 2.0).unwrap() - 2.5).abs() < 1e-14);
        assert!((summand_lq_power(a, 7.0, 2.0).unwrap() - 2.5).abs() < 1e-14);
        assert_eq!(summand_lq_power(a, 0.0, 2.0).unwrap(), 0.0);
        assert!(summand_lq_power(a, 0.5, 0.9).is_err());
        assert!(summand_lq_power(a, 0.5, 4.0).is_err());
        assert!(summand_lq_power(a, -0.5, 2.0).is_err());
        // cross-check: closed-form head below xi plus a graded Riemann
        // sum of the tail, substituted so the u = 0 singularity is
        // polynomial
        let q = 2.0;
        let xi = 0.5f64;
        let m = 200000usize;
        let p = 1.0 - 0.3 * q;
        let mut brute = xi.powf(p) / p;
        for k in 0..m {
            let w = (k as f64 + 0.5) / m as f64;
            let u = (1.0 - xi) * w * w * w;
            let jac = 3.0 * (1.0 - xi) * w * w / m as f64;
            brute += u.powf(-0.6) * (1.0 - (u / (xi + u)).powf(0.3)).powi(2) * jac;
        }
        let got = summand_lq_power(a, xi, q).unwrap();
        assert!((got - brute).abs() < 1e-6, "{got} vs {brute}");
    }

    #[test]
    fn mixed_norm_scaling_shape() {
        // ||h||_{q,q} tracks (1-aq)^{-1/q} (1-bq)^{-1/q} up to bounded
        // factors along the ladder toward the pole
        let o = order(0.3, 0.3);
        let mut ratios = Vec::new();
        for eps in [0.3, 0.1, 0.03, 0.01] {
            let q = (1.0 - eps) / 0.3;
            let norm = summand_mixed_norm(o, 0.6, 0.35, q, q).unwrap();
            let shape = (1.0 - 0.3 * q).powf(-1.0 / q) * (1.0 - 0.3 * q).powf(-1.0 / q);
            ratios.push(norm / shape);
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        assert!(lo > 0.05 && hi < 20.0 && hi / lo < 4.0, "{ratios:?}");
    }

    #[test]
    fn pole_orders_separate_the_regimes() {
        // the moment corrections decay only logarithmically, so the
        // ladder sits deep in the pole neighborhood
        let ladder = [0.05, 0.03, 0.018, 0.011, 0.0065];
        for law in [MixedLaw::IndependentUniform, MixedLaw::ComonotoneUniform] {
            let single = pole_order_fit(law, order(0.3, 0.15), &ladder).unwrap();
            let double = pole_order_fit(law, order(0.3, 0.3), &ladder).unwrap();
            eprintln!(
                "pole fits [{}]: single {} double {}",
                law.label(),
                single.slope,
                double.slope
            );
            assert!(
                (single.slope - 1.0).abs() < 0.4,
                "{} single pole: {}",
                law.label(),
                single.slope
            );
            assert!(
                (double.slope - 2.0).abs() < 0.4,
                "{} double pole: {}",
                law.label(),
                double.slope
            );
            assert!(double.slope - single.slope > 0.5);
        }
        assert!(pole_order_fit(MixedLaw::IndependentUniform, order(0.15, 0.3), &ladder).is_err());
        assert!(pole_order_fit(MixedLaw::IndependentUniform, order(0.3, 0.3), &[0.1]).is_err());
    }

    #[test]
    fn field_norms_diverge_past_the_critical_exponent() {
        let o = order(0.3, 0.15);
        // coarse grids still uncover integrable spike mass, so the
        // stability window starts where that resolution climb has
        // saturated
        let sizes = [64, 128, 256, 512];
        let sub = field_refinement_norms(MixedLaw::IndependentUniform, o, 4, 2.0, &sizes, 3)
            .unwrap();
        eprintln!("field norms sub {sub:?}");
        assert!(
            !crate::lq::diverges(&sub, 1.1),
            "subcritical norms should stabilize: {sub:?}"
        );
        let last_step = (sub[3] - sub[2]).abs() / sub[3];
        assert!(last_step < 0.05, "{sub:?}");
        // comfortably past the 1/max(a, b) threshold the divergence is
        // visible on the same budget; the marginal offset case is
        // exercised by the univariate refinement ladder
        let sup = field_refinement_norms(MixedLaw::IndependentUniform, o, 4, 4.5, &sizes, 3)
            .unwrap();
        eprintln!("field norms sup {sup:?}");
        assert!(
            crate::lq::diverges(&sup, 1.3),
            "supercritical norms should grow: {sup:?}"
        );
    }

    #[test]
    fn field_moment_mc_dichotomy() {
        // MC field moments on the eps ladder separate the pole orders
        let ladder = [0.3, 0.18, 0.1];
        let mut slopes = Vec::new();
        for o in [order(0.3, 0.15), order(0.3, 0.3)] {
            let (xs, ys): (Vec<f64>, Vec<f64>) = ladder
                .iter()
                .map(|&eps| {
                    let q = (1.0 - eps) / 0.3;
                    let cfg = McConfig::new(60, 41, 1, 2).unwrap();
                    let rep =
                        field_moment_mc(MixedLaw::IndependentUniform, o, q, 64, &cfg).unwrap();
                    (-eps.ln(), rep.mean.ln())
                })
                .unzip();
            slopes.push(mc::slope_fit(&xs, &ys).unwrap().slope);
        }
        eprintln!("mc field moment slopes {slopes:?}");
        assert!(
            slopes[1] - slopes[0] > 0.45,
            "expected a visible pole-order gap: {slopes:?}"
        );
        assert!((slopes[0] - 1.0).abs() < 0.8, "single pole: {slopes:?}");
        assert!((slopes[1] - 2.0).abs() < 0.9, "double pole: {slopes:?}");
    }
}
