//! Maps a Poisson line of intensity 6 to one of intensity 9, in both the
//! isometry and the translation mode.
//!
//! `cargo run --release --example thickening`

use splitfactor::factor::{evaluate_homomorphism, FactorConfig, FactorMode};
use splitfactor::point_process::sample_poisson;
use splitfactor::selection::SelectionConfig;
use splitfactor::{Cuboid, UnitValue};

fn main() -> splitfactor::Result<()> {
    let window = Cuboid::cube(1, -1000.0, 1000.0);
    let mu = sample_poisson(&window, 6.0, UnitValue::from_f64(0.4142));
    for mode in [FactorMode::Homomorphism, FactorMode::TranslationHomomorphism] {
        let mut cfg = FactorConfig::new(6.0, 9.0, SelectionConfig::desk(), mode);
        cfg.margin = 400.0;
        cfg.validate(1)?;
        let eval = evaluate_homomorphism(&mu, &cfg)?;
        let inner = window.shrink(cfg.margin).expect("margin below half the window");
        let inside: Vec<bool> =
            eval.output.points().iter().zip(&eval.determined).filter(|(p, _)| inner.contains(p)).map(|(_, &d)| d).collect();
        println!(
            "{mode:?}: {} input points, {} output points from {} cells; {} of {} outputs inside the margin are determined",
            mu.len(),
            eval.output.len(),
            eval.cells.len(),
            inside.iter().filter(|&&d| d).count(),
            inside.len()
        );
        println!("  output density inside the margin: {:.3}", inside.len() as f64 / inner.volume());
    }
    Ok(())
}
