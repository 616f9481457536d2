//! Finite-volume splitting of a square and the standard coin splitting.
//!
//! `cargo run --release --example finite_split`

use splitfactor::factor::{coupling_for_volume, gamma_split, standard_split};
use splitfactor::point_process::sample_poisson;
use splitfactor::randomness::{reproduce, SamplingRegion};
use splitfactor::{Cuboid, UnitValue};

fn main() -> splitfactor::Result<()> {
    let (lambda, lambda_prime) = (1.0, 0.5);
    let side = 20f64.sqrt();
    let square = Cuboid::cube(2, 0.0, side);
    let q = coupling_for_volume(lambda, lambda_prime, square.volume())?;
    let region = SamplingRegion::Cuboid(square.clone());

    let master = UnitValue::from_f64(0.61803);
    let runs = 2000;
    let (mut red, mut blue) = (0usize, 0usize);
    for i in 0..runs {
        let u = reproduce(master, i);
        let mu = sample_poisson(&square, lambda, reproduce(u, 0));
        let split = gamma_split(&region, &mu, reproduce(u, 1), &q)?;
        assert!(split.red.len() + split.blue.len() == mu.len());
        red += split.red.len();
        blue += split.blue.len();
    }
    println!("mean red {:.3}, mean blue {:.3} (both should be near 10)", red as f64 / runs as f64, blue as f64 / runs as f64);

    // one point always stays blue, two always turn red
    let one = sample_poisson(&square, lambda, master);
    let single = one.select(&[0]);
    let pair = one.select(&[0, 1]);
    println!("one point -> {} red; two points -> {} red", gamma_split(&region, &single, master, &q)?.red.len(), gamma_split(&region, &pair, master, &q)?.red.len());

    let coin = standard_split(&one, master, lambda, lambda_prime);
    println!("coin splitting of {} points: {} red, {} blue", one.len(), coin.red.len(), coin.blue.len());
    Ok(())
}
