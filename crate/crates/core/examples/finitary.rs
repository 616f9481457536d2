//! Estimates the finitary radius of the homomorphism on a few samples.
//!
//! `cargo run --release --example finitary`

use splitfactor::factor::{FactorConfig, FactorMode};
use splitfactor::selection::SelectionConfig;
use splitfactor::verification::finitary_study;
use splitfactor::UnitValue;

fn main() -> splitfactor::Result<()> {
    let cfg = FactorConfig::new(6.0, 3.0, SelectionConfig::desk(), FactorMode::Homomorphism);
    let est = finitary_study(UnitValue::from_f64(0.1729), 4, 1, 800.0, 2000.0, &cfg)?;
    for s in &est.samples {
        println!("estimate {:?}, cube-counter bound {:?}", s.estimate, s.bound);
    }
    println!("mean {:.1}, exhausted {}, bound violations {}", est.mean, est.flagged_infinite, est.bound_violations());
    Ok(())
}
