//! The point estimator end to end on the uniform law: single-sample
//! estimates with confidence intervals against the closed-form target,
//! then a replication study checking unbiasedness, the variance law and
//! asymptotic normality.
//!
//! Run with `cargo run --release --example point_estimate`.

use fracest::fraccalc::ClosedForm;
use fracest::mc::rep_rng;
use fracest::point::{estimate_point, point_estimator_mc, Sample};
use fracest::FractionalOrder;

fn main() -> Result<(), fracest::FracError> {
    let law = ClosedForm::Uniform;
    let alpha = 0.25;
    let order = FractionalOrder::for_estimation(alpha)?;

    let sample = Sample::from_law(&law, 2000, &mut rep_rng(0x9027, 0))?;
    println!("single sample, n = 2000, alpha = {alpha}");
    println!(
        "{:>5} {:>12} {:>12} {:>10} {:>24}",
        "x", "estimate", "truth", "stderr", "95% interval"
    );
    for &x in &[0.2, 0.5, 0.75, 0.9] {
        let est = estimate_point(&sample, order, x)?;
        let truth = law.frac_reliability_derivative(order, x)?;
        let (lo, hi) = est.confidence_interval(0.95)?;
        println!(
            "{x:>5.2} {:>12.6} {truth:>12.6} {:>10.6} [{lo:>10.6}, {hi:>10.6}]{}",
            est.estimate,
            est.se,
            if lo <= truth && truth <= hi { "" } else { "  MISS" }
        );
    }

    println!("\nreplication study, n = 2000, 2000 reps");
    println!(
        "{:>5} {:>5} {:>10} {:>10} {:>8} {:>10} {:>10} {:>8}",
        "alpha", "x", "mean", "truth", "|z|", "nVar", "theory", "KS p"
    );
    for &a in &[0.1, 0.25, 0.4] {
        let order = FractionalOrder::for_estimation(a)?;
        for &x in &[0.2, 0.9] {
            let r = point_estimator_mc(&law, order, x, 2000, 2000, 0xB0B + a.to_bits())?;
            println!(
                "{a:>5.2} {x:>5.2} {:>10.6} {:>10.6} {:>8.2} {:>10.5} {:>10.5} {:>8.3}",
                r.mean_estimate,
                r.truth,
                (r.mean_estimate - r.truth).abs() / r.mean_se,
                r.scaled_variance,
                r.theory_variance,
                r.ks.p_value
            );
        }
    }
    println!("\n|z| is the mean deviation in standard errors; nVar should match theory.");
    println!("At alpha 0.4 the summand has infinite fourth moment (4a > 1), so the");
    println!("empirical variance converges slowly and the KS p-value, standardized");
    println!("with the theory sd, is only calibrated for smaller orders.");
    Ok(())
}
