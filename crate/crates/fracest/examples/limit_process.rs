//! The Gaussian limit process of the normalized estimation error: L_q
//! norms under the exact covariance kernel and under the min-power
//! comparison kernel, convergence of the finite-n loss to the limit
//! value, and the tail functional Q(u).
//!
//! Run with `cargo run --release --example limit_process`.

use fracest::lq::{
    analytic_w2, finite_n_lq_samples, limit_grid, limit_lq_samples, simulate_limit_tail, CovKernel,
};
use fracest::FractionalOrder;

fn mean_norm(norms: &[f64], q: f64) -> f64 {
    let p = norms.iter().map(|v| v.powf(q)).sum::<f64>() / norms.len() as f64;
    p.powf(1.0 / q)
}

fn main() -> Result<(), fracest::FracError> {
    let alpha = 0.25;
    let order = FractionalOrder::for_estimation(alpha)?;
    let q = 2.0;
    let grid = limit_grid(128, 4.0);
    let paths = 4000;

    println!("limit-process W_q at alpha {alpha}, q {q}, {paths} paths");
    for kernel in [CovKernel::Exact, CovKernel::MinPower] {
        let norms = limit_lq_samples(order, q, kernel, &grid, paths, 0xCAFE)?;
        println!("  kernel {:>8}: W_q = {:.6}", kernel.label(), mean_norm(&norms, q));
    }
    println!("  analytic W_2      = {:.6} (exact kernel, any n)", analytic_w2(alpha));

    println!("\nfinite-n loss approaching the limit (exact kernel)");
    println!("{:>6} {:>10}", "n", "W_qn");
    for &n in &[10usize, 100, 1000] {
        let reps = (20000 / n).clamp(20, 2000);
        let norms = finite_n_lq_samples(order, q, &grid, n, reps, 0xF00D)?;
        println!("{n:>6} {:>10.6}", mean_norm(&norms, q));
    }

    println!("\ntail functional Q(u) = P(||zeta||_q > u), exact kernel");
    println!("{:>5} {:>12}", "u", "Q(u)");
    for &u in &[0.4, 0.8, 1.2, 1.6] {
        let t = simulate_limit_tail(order, q, CovKernel::Exact, u, &grid, paths, 0xBEEF)?;
        println!("{u:>5.1} {:>12.5}", t.probability);
    }
    Ok(())
}
