//! The mixed estimator on bivariate laws with known targets: pointwise
//! estimates against the independent product form and the comonotone
//! semi-closed form, then the moment blow-up that separates the two
//! dependence regimes by pole order as q approaches 1/max(alpha, beta).
//!
//! Run with `cargo run --release --example mixed_derivative`.

use fracest::mc::rep_rng;
use fracest::mixed::{estimate_mixed, mixed_moment, pole_order_fit, MixedLaw, MixedOrder};

fn main() -> Result<(), fracest::FracError> {
    let order = MixedOrder::new(0.25, 0.3)?;
    let n = 20000;

    println!("pointwise estimates, n = {n}, alpha = 0.25, beta = 0.3");
    println!(
        "{:>12} {:>5} {:>5} {:>12} {:>12} {:>8}",
        "law", "x", "y", "estimate", "truth", "|dev|"
    );
    for law in [MixedLaw::IndependentUniform, MixedLaw::ComonotoneUniform] {
        let sample = law.sample(n, &mut rep_rng(0xD0E, 0))?;
        for &(x, y) in &[(0.3, 0.5), (0.75, 0.75), (0.9, 0.4)] {
            let est = estimate_mixed(&sample, x, y, order)?;
            let truth = law.truth(order, x, y)?;
            println!(
                "{:>12} {x:>5.2} {y:>5.2} {est:>12.6} {truth:>12.6} {:>8.4}",
                law.label(),
                (est - truth).abs()
            );
        }
    }

    // moment blow-up as q approaches 1/alpha from below: the pole order
    // of E||h||^q in eps = 1 - alpha q separates the order regimes,
    // first order for beta < alpha, second for beta = alpha
    let single_order = MixedOrder::new(0.3, 0.15)?;
    let double_order = MixedOrder::new(0.3, 0.3)?;
    println!("\nsummand moment E||h||^q at q = (1 - eps)/0.3, comonotone law");
    println!("{:>6} {:>16} {:>16}", "eps", "beta 0.15", "beta 0.30");
    for &eps in &[0.05, 0.03, 0.018] {
        let q = (1.0 - eps) / 0.3;
        println!(
            "{eps:>6.3} {:>16.4} {:>16.4}",
            mixed_moment(MixedLaw::ComonotoneUniform, single_order, q)?,
            mixed_moment(MixedLaw::ComonotoneUniform, double_order, q)?
        );
    }
    let deep = [0.05, 0.03, 0.018, 0.011, 0.0065];
    println!("fitted pole orders in eps (deep ladder {deep:?}):");
    for law in [MixedLaw::ComonotoneUniform, MixedLaw::IndependentUniform] {
        let single = pole_order_fit(law, single_order, &deep)?;
        let double = pole_order_fit(law, double_order, &deep)?;
        println!(
            "  {:>12}: beta < alpha {:.3} (single), beta = alpha {:.3} (double)",
            law.label(),
            single.slope,
            double.slope
        );
    }
    Ok(())
}
