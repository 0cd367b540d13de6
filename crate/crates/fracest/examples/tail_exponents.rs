//! Large-deviation exponents of the point estimator under power-law
//! CDFs F(t) = t^d: the exceedance probability of the one-sample error
//! decays like a power of the level with exponent -d/a, steeper laws
//! and smaller orders giving faster decay.
//!
//! Run with `cargo run --release --example tail_exponents`.

use fracest::fraccalc::ClosedForm;
use fracest::point::{geometric_levels, tail_diagnostic};
use fracest::FractionalOrder;

fn main() -> Result<(), fracest::FracError> {
    // the ladder has to sit high enough that the x^(d-a) transient in
    // the window size has died off, yet shallow enough that the top
    // level still sees exceedances at this budget
    let levels = geometric_levels(2.5, 8.0, 5)?;
    let reps = 400_000;
    println!("exceedance slope of ln P(error > y) against ln y, {reps} draws per level");
    println!(
        "{:>5} {:>5} {:>10} {:>10} {:>8}",
        "delta", "alpha", "slope", "-d/a", "dev"
    );
    for &(delta, alpha) in &[(1.0, 0.25), (0.5, 0.25), (0.75, 0.25), (1.0, 0.4)] {
        let order = FractionalOrder::for_estimation(alpha)?;
        let law = if delta == 1.0 {
            ClosedForm::Uniform
        } else {
            ClosedForm::PowerCdf { delta, c1: 1.0 }
        };
        let d = tail_diagnostic(&law, order, &levels, reps, 0x7A11 + delta.to_bits())?;
        println!(
            "{delta:>5.2} {alpha:>5.2} {:>10.4} {:>10.4} {:>8.4}",
            d.fit.slope,
            d.theoretical_slope,
            (d.fit.slope - d.theoretical_slope).abs()
        );
    }
    println!("\nlevels used: {levels:?}");
    Ok(())
}
