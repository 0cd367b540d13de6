//! Monte-Carlo loss W_{q,n} of the fractional-derivative estimator under
//! the uniform law, against the deterministic envelope K(a, q) and the
//! Rosenthal-type product bound K(a, q) K_{R,a}.
//!
//! Run with `cargo run --release --example loss_bounds`.

use fracest::fraccalc::FractionalOrder;
use fracest::lq::{analytic_w2, empirical_loss};

fn main() -> Result<(), fracest::FracError> {
    let seed = 0x5EED_10_55u64;
    println!(
        "{:>6} {:>6} {:>6} {:>10} {:>10} {:>10} {:>10}  {}",
        "alpha", "q", "n", "W_qn", "se", "K(a,q)", "K*K_R", "within"
    );
    for &alpha in &[0.1, 0.25, 0.4] {
        let order = FractionalOrder::for_estimation(alpha)?;
        let q_hi = 0.95 / alpha;
        for &q in &[2.0, 0.5 * (2.0 + q_hi), q_hi] {
            for &n in &[1usize, 10, 100, 1000] {
                let reps = (4000 / n).clamp(40, 400);
                let t0 = std::time::Instant::now();
                let rep = empirical_loss(order, q, n, reps, seed)?;
                println!(
                    "{:>6.2} {:>6.3} {:>6} {:>10.5} {:>10.5} {:>10.5} {:>10.5}  {} ({} reps, {:.2?})",
                    alpha,
                    q,
                    n,
                    rep.w_qn,
                    rep.w_se,
                    rep.bound_k,
                    rep.bound_product,
                    if rep.within_bound { "yes" } else { "NO" },
                    reps,
                    t0.elapsed()
                );
            }
        }
        println!(
            "  exact W_2 (any n) at alpha {:.2}: {:.12}",
            alpha,
            analytic_w2(alpha)
        );
    }
    Ok(())
}
