//! Selects globes on a Poisson line and evaluates the assignment function.
//!
//! `cargo run --release --example globes`

use splitfactor::assignment::{assign_all, KeyRef};
use splitfactor::point_process::sample_poisson;
use splitfactor::selection::{select_globes, SelectionConfig, Special};
use splitfactor::{Cuboid, UnitValue};

fn main() -> splitfactor::Result<()> {
    let sel = SelectionConfig::desk();
    let mu = sample_poisson(&Cuboid::cube(1, -500.0, 500.0), 6.0, UnitValue::from_f64(0.2718));
    let outcome = select_globes(&mu, &sel);
    let ones = outcome.special_globes(Special::One).count();
    let twos = outcome.special_globes(Special::Two).count();
    println!("{} points, {} globes ({ones} one-special, {twos} two-special), {} ether points", mu.len(), outcome.globes.len(), outcome.ether.len());
    for g in outcome.globes.iter().take(5) {
        println!("  globe at {:.4}: {} points, {:?}", g.center.coords()[0], g.count, g.special);
    }

    let table = assign_all(&outcome, &mu, &sel);
    let determined = table.all().iter().filter(|k| k.determined).count();
    println!("{} keys, {determined} determined by the window", table.all().len());
    for key in table.all().iter().filter(|k| matches!(k.key, KeyRef::Globe(_))).take(5) {
        println!(
            "  {:?}: partners {:?}, ranks {:?}, U = {}",
            key.key, key.partners, key.ranks, key.value
        );
    }
    Ok(())
}
