//! Empirical coding radius of the factor maps and the cube-counter bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{evaluate_homomorphism_near, evaluate_splitting_factor, FactorConfig, FactorMode};
use crate::geometry::{Cuboid, Point};
use crate::point_process::{sample_poisson, PointSet};
use crate::randomness::{reproduce, UnitValue};
use crate::selection::{select_globes, Special};
use crate::verification::stats::replicate_seed;

/// Independent resamplings tried per candidate radius.
pub const RESAMPLINGS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinitarySample {
    /// Smallest radius found to fix the output near the origin; `None` when
    /// the window is exhausted.
    pub estimate: Option<f64>,
    /// Cube-counter bound; `None` when the window does not contain enough
    /// special globes to evaluate it.
    pub bound: Option<f64>,
    pub seed: UnitValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinitaryEstimate {
    /// Finite per-sample estimates.
    pub radii: Vec<f64>,
    /// Mean of `radii`.
    pub mean: f64,
    pub flagged_infinite: usize,
    pub samples: Vec<FinitarySample>,
}

impl FinitaryEstimate {
    pub fn from_samples(samples: Vec<FinitarySample>) -> Self {
        let radii: Vec<f64> = samples.iter().filter_map(|s| s.estimate).collect();
        let mean = if radii.is_empty() { f64::NAN } else { radii.iter().sum::<f64>() / radii.len() as f64 };
        FinitaryEstimate { flagged_infinite: samples.len() - radii.len(), radii, mean, samples }
    }

    /// Samples with a finite estimate exceeding their bound, or whose bound
    /// could not be evaluated.
    pub fn bound_violations(&self) -> usize {
        self.samples
            .iter()
            .filter(|s| match (s.estimate, s.bound) {
                (Some(e), Some(b)) => e > b,
                (Some(_), None) => true,
                _ => false,
            })
            .count()
    }
}

fn unit_box(dim: usize) -> Cuboid {
    Cuboid::cube(dim, -1.0, 1.0)
}

/// Output of the configured map inside `B(0, 1)`, as sorted coordinate bits.
pub fn output_near_origin(mu: &PointSet, cfg: &FactorConfig) -> Result<Vec<Vec<u64>>> {
    let near = |p: &Point| p.norm() <= 1.0;
    let pts: Vec<Point> = match cfg.mode {
        FactorMode::SplitFactor => evaluate_splitting_factor(mu, cfg)?.split.red.into_points(),
        _ => match evaluate_homomorphism_near(mu, cfg, Some(&unit_box(mu.dim()))) {
            Ok(e) => e.output.into_points(),
            Err(Error::NoGlobes) => Vec::new(),
            Err(e) => return Err(e),
        },
    };
    let mut bits: Vec<Vec<u64>> =
        pts.iter().filter(|p| near(p)).map(|p| p.coords().iter().map(|c| c.to_bits()).collect()).collect();
    bits.sort();
    Ok(bits)
}

/// `μ` inside `B̄(0, n)`, fresh Poisson points outside.
fn resample_outside(mu: &PointSet, n: f64, lambda: f64, seed: UnitValue) -> PointSet {
    let window = mu.window();
    let mut pts: Vec<Point> = mu.points().iter().filter(|p| p.norm() <= n).cloned().collect();
    // fresh points in the slabs of the window outside [-n, n]^d and in the
    // cube itself, kept outside the ball
    let d = mu.dim();
    let mut pieces = Vec::new();
    let mut lo = window.lo.coords().to_vec();
    let mut hi = window.hi.coords().to_vec();
    for k in 0..d {
        if lo[k] < -n {
            let mut top = hi.clone();
            top[k] = -n;
            pieces.push(Cuboid::new(Point::new(lo.clone()), Point::new(top)));
            lo[k] = -n;
        }
        if hi[k] > n {
            let mut bottom = lo.clone();
            bottom[k] = n;
            pieces.push(Cuboid::new(Point::new(bottom), Point::new(hi.clone())));
            hi[k] = n;
        }
    }
    pieces.push(Cuboid::new(Point::new(lo), Point::new(hi)));
    for (k, piece) in pieces.iter().enumerate() {
        if (0..d).any(|j| piece.side(j) <= 0.0) {
            continue;
        }
        let fresh = sample_poisson(piece, lambda, reproduce(seed, k as u64));
        pts.extend(fresh.into_points().into_iter().filter(|p| p.norm() > n));
    }
    PointSet::new(mu.dim(), pts, mu.window().clone()).expect("valid resampled configuration")
}

/// Side of the counting cubes: `max(2ℓ, 1)`, `ℓ` the locality radius.
pub fn cube_side(cfg: &FactorConfig) -> f64 {
    (2.0 * cfg.selection.locality_radius()).max(1.0)
}

/// `8r Σ_j Σ_k (T_{j,+}^k + T_{j,-}^k)`, where `T_{j,±}^k` is the index of the
/// third cube along `±e_j` holding the center of a `k`-special globe. Only
/// cubes inside the reliable region count.
pub fn constructive_bound(mu: &PointSet, cfg: &FactorConfig) -> Option<f64> {
    let outcome = select_globes(mu, &cfg.selection);
    let reliable = outcome.reliable.clone()?;
    let r = cube_side(cfg);
    let d = mu.dim();
    let cube_of = |p: &Point| -> Vec<i64> { p.coords().iter().map(|c| (c / r + 0.5).floor() as i64).collect() };
    let mut occupied: [std::collections::HashSet<Vec<i64>>; 2] = Default::default();
    for g in &outcome.globes {
        let k = match g.special {
            Special::One => 0,
            Special::Two => 1,
            Special::None => continue,
        };
        occupied[k].insert(cube_of(&g.center));
    }
    let mut total = 0i64;
    for occ in &occupied {
        for j in 0..d {
            for dir in [1i64, -1] {
                let mut hits = 0;
                let mut n = 0i64;
                loop {
                    n += 1;
                    let mut idx = vec![0i64; d];
                    idx[j] = dir * n;
                    let center = Point::new(idx.iter().map(|&i| i as f64 * r).collect());
                    let half = Cuboid::new(center.sub(&Point::new(vec![r / 2.0; d])), center.add(&Point::new(vec![r / 2.0; d])));
                    if !reliable.contains(&half.lo) || !reliable.contains(&half.hi) {
                        return None;
                    }
                    if occ.contains(&idx) {
                        hits += 1;
                        if hits == 3 {
                            break;
                        }
                    }
                }
                total += n;
            }
        }
    }
    Some(8.0 * r * total as f64)
}

/// Smallest integer radius `n` such that [`RESAMPLINGS`] resamplings outside
/// `B̄(0, n)` leave the output in `B(0, 1)` unchanged, with the cube-counter
/// bound alongside. The search assumes stability is monotone in `n`; the
/// estimate is `None` when even the largest radius inside the window fails.
pub fn finitary_radius(mu: &PointSet, cfg: &FactorConfig, resample_seed: UnitValue) -> Result<FinitarySample> {
    let window = mu.window();
    if window.center().norm() > 1e-9 {
        return Err(Error::InvalidInput("the window must be centered at the origin".into()));
    }
    let half = (0..mu.dim()).map(|k| window.side(k) / 2.0).fold(f64::INFINITY, f64::min);
    let n_max = (half - cfg.selection.locality_radius()).floor() as i64;
    let bound = constructive_bound(mu, cfg);
    let base = output_near_origin(mu, cfg)?;
    let stable = |n: i64| -> Result<bool> {
        let step = reproduce(resample_seed, n as u64);
        for j in 0..RESAMPLINGS {
            let other = resample_outside(mu, n as f64, cfg.lambda, reproduce(step, j as u64));
            if output_near_origin(&other, cfg)? != base {
                return Ok(false);
            }
        }
        Ok(true)
    };
    if n_max < 1 || !stable(n_max)? {
        return Ok(FinitarySample { estimate: None, bound, seed: resample_seed });
    }
    let (mut lo, mut hi) = (1i64, n_max);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if stable(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(FinitarySample { estimate: Some(lo as f64), bound, seed: resample_seed })
}

/// Runs [`finitary_radius`] on `samples` independent configurations in
/// `[-half, half]^d`, replicate `i` seeded from `master`. Each configuration
/// is drawn in `[-bound_half, bound_half]^d` (`bound_half >= half`), which is
/// used for the cube-counter bound and restricted for the radius search.
pub fn finitary_study(
    master: UnitValue,
    samples: usize,
    dim: usize,
    half: f64,
    bound_half: f64,
    cfg: &FactorConfig,
) -> Result<FinitaryEstimate> {
    if bound_half < half {
        return Err(Error::InvalidInput("bound window smaller than search window".into()));
    }
    let big = Cuboid::cube(dim, -bound_half, bound_half);
    let window = Cuboid::cube(dim, -half, half);
    let results: Result<Vec<FinitarySample>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let wide = sample_poisson(&big, cfg.lambda, replicate_seed(master, 2 * i as u64));
            let inside = wide.points().iter().filter(|p| window.contains(p)).cloned().collect();
            let mu = PointSet::new(dim, inside, window.clone())?;
            let mut s = finitary_radius(&mu, cfg, replicate_seed(master, 2 * i as u64 + 1))?;
            s.bound = constructive_bound(&wide, cfg);
            Ok(s)
        })
        .collect();
    Ok(FinitaryEstimate::from_samples(results?))
}
