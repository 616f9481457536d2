//! The deterministic splitting factor on a configuration with planted
//! globes, its translation equivariance, and the randomized splitting on a
//! plain Poisson sample.
//!
//! `cargo run --release --example splitting_factor`

use splitfactor::factor::{evaluate_splitting_factor, randomized_split, splitting_factor, FactorConfig, FactorMode};
use splitfactor::point_process::sample_poisson;
use splitfactor::selection::SelectionConfig;
use splitfactor::verification::equivariance::transform_set;
use splitfactor::verification::suites::planted_line;
use splitfactor::{Cuboid, Isometry, UnitValue};

fn main() -> splitfactor::Result<()> {
    // globes large enough for the coupling at λ = 6, λ' = 3
    let sel = SelectionConfig::desk_with_radius(1.45);
    let mut cfg = FactorConfig::new(6.0, 3.0, sel.clone(), FactorMode::SplitFactor);
    cfg.validate(1)?;
    cfg.margin = 140.0;

    let mu = planted_line(&sel, 60, 13.0, cfg.lambda, UnitValue::from_f64(0.3141));
    let eval = evaluate_splitting_factor(&mu, &cfg)?;
    println!(
        "{} points, {} globes: {} red, {} blue, {} undetermined keys inside the margin",
        mu.len(),
        eval.outcome.globes.len(),
        eval.split.red.len(),
        eval.split.blue.len(),
        eval.undetermined.len()
    );
    let split = splitting_factor(&mu, &cfg)?;

    // shifting by a multiple of the scan resolution shifts the output
    let shift = Isometry::translation(&[1234.0 * sel.scan_resolution]);
    let moved = splitting_factor(&transform_set(&mu, &shift), &cfg)?;
    let inner = mu.window().shrink(cfg.margin).expect("window wider than the margins");
    let count = |s: &splitfactor::PointSet, t: f64| s.points().iter().filter(|p| inner.contains(&splitfactor::Point::new(vec![p.coords()[0] - t]))).count();
    println!("red points inside the margin: {} before, {} after the shift", count(&split.red, 0.0), count(&moved.red, shift.translation[0]));

    // the randomized splitting needs no planted structure
    let plain = sample_poisson(&Cuboid::cube(1, -1000.0, 1000.0), 6.0, UnitValue::from_f64(0.5));
    let r = randomized_split(&plain, UnitValue::from_f64(0.77), &cfg)?;
    println!("randomized: {} points -> {} red, {} blue", plain.len(), r.red.len(), r.blue.len());
    Ok(())
}
