//! Samples a Poisson process on a box, writes it with its window sidecar and
//! reads it back.
//!
//! `cargo run --release --example simulate`

use splitfactor::point_process::{read_points, sample_poisson, sidecar_path, write_points};
use splitfactor::{Cuboid, UnitValue};

fn main() -> splitfactor::Result<()> {
    let window = Cuboid::cube(2, -10.0, 10.0);
    let seed: UnitValue = "0.123".parse()?;
    let mu = sample_poisson(&window, 1.5, seed);
    println!("{} points on {:?} x {:?} (mean {})", mu.len(), window.lo.coords(), window.hi.coords(), 1.5 * window.volume());

    let dir = std::env::temp_dir().join("splitfactor-simulate");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("points.csv");
    write_points(&path, &mu)?;
    let back = read_points(&path)?;
    println!("wrote {} and {}", path.display(), sidecar_path(&path).display());
    println!("round trip exact: {}", back == mu);

    // the same seed gives the same configuration
    assert_eq!(sample_poisson(&window, 1.5, seed), mu);
    Ok(())
}
