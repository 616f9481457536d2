//! Thresholds `k(α)` and one coupling matrix with its marginals.
//!
//! `cargo run --release --example coupling`

use splitfactor::coupling::{build_coupling_default, min_lambda_nonneg, split_count};
use splitfactor::randomness::{poisson_ln_pmf, reproduce};
use splitfactor::UnitValue;

fn main() -> splitfactor::Result<()> {
    for alpha in [0.05, 0.1, 0.25, 0.5, 0.75] {
        println!("k({alpha}) = {}", min_lambda_nonneg(alpha)?);
    }

    let alpha = 0.5;
    let lambda = min_lambda_nonneg(alpha)? + 5.0;
    let q = build_coupling_default(alpha, lambda)?;
    println!("\nalpha = {alpha}, lambda = {lambda}, truncation {}", q.truncation());
    println!("corner of the matrix:");
    for i in 0..6 {
        let row: Vec<String> = (0..6).map(|j| format!("{:9.2e}", q.get(i, j))).collect();
        println!("  {}", row.join(" "));
    }
    let mut worst: f64 = 0.0;
    for k in 0..40 {
        worst = worst.max((q.row_sum(k) - poisson_ln_pmf(alpha * lambda, k).exp()).abs());
        worst = worst.max((q.col_sum(k) - poisson_ln_pmf((1.0 - alpha) * lambda, k).exp()).abs());
        worst = worst.max((q.antidiagonal_sum(k) - poisson_ln_pmf(lambda, k).exp()).abs());
    }
    println!("largest marginal error over the first 40 indices: {worst:e}");
    println!("q(1,0) = {}, q(0,1) = {}, q(0,2) = {}", q.get(1, 0), q.get(0, 1), q.get(0, 2));

    // split of a total count n: the first coordinate
    let u = UnitValue::from_f64(0.42);
    for n in [1, 2, 10, 20, 30] {
        println!("F({n}, .) over five draws: {:?}", (0..5).map(|i| split_count(n, reproduce(u, i), &q)).collect::<Vec<_>>());
    }
    Ok(())
}
