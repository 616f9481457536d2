//! Equivariance checks by optimal point matching.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::factor::{evaluate_homomorphism, evaluate_splitting_factor, FactorConfig};
use crate::geometry::{Cuboid, Isometry, Point};
use crate::point_process::PointSet;
use crate::randomness::UnitValue;
use crate::verification::stats::TestReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    SplittingFactor,
    Homomorphism,
}

/// Smallest `t` such that the points can be paired with all distances at
/// most `t`; `None` when the cardinalities differ.
pub fn bottleneck_distance(a: &[Point], b: &[Point]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    if a.is_empty() {
        return Some(0.0);
    }
    if a[0].dim() == 1 {
        // sorted pairing is optimal on the line
        let mut xa: Vec<f64> = a.iter().map(|p| p.coords()[0]).collect();
        let mut xb: Vec<f64> = b.iter().map(|p| p.coords()[0]).collect();
        xa.sort_by(f64::total_cmp);
        xb.sort_by(f64::total_cmp);
        return Some(xa.iter().zip(&xb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
    }
    let n = a.len();
    let dist: Vec<Vec<f64>> = a.iter().map(|p| b.iter().map(|q| p.dist(q)).collect()).collect();
    let mut cands: Vec<f64> = dist.iter().flatten().copied().collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let perfect = |t: f64| -> bool {
        let mut owner: Vec<Option<usize>> = vec![None; n];
        fn augment(i: usize, t: f64, dist: &[Vec<f64>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
            for j in 0..dist.len() {
                if dist[i][j] <= t && !seen[j] {
                    seen[j] = true;
                    if owner[j].is_none_or(|k| augment(k, t, dist, seen, owner)) {
                        owner[j] = Some(i);
                        return true;
                    }
                }
            }
            false
        }
        (0..n).all(|i| augment(i, t, &dist, &mut vec![false; n], &mut owner))
    };
    // the largest of the per-point nearest distances is a lower bound
    let lower = dist.iter().map(|row| row.iter().copied().fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    let (mut lo, mut hi) = (cands.partition_point(|&c| c < lower), cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect(cands[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(cands[lo])
}

/// Image of a configuration; the window becomes the image box, or the
/// bounding box of the image corners for general rotations.
pub fn transform_set(mu: &PointSet, theta: &Isometry) -> PointSet {
    let window = theta.apply_box(mu.window()).unwrap_or_else(|| {
        let corners: Vec<Point> = mu.window().corners().iter().map(|c| theta.apply(c)).collect();
        let d = mu.dim();
        let lo = (0..d).map(|k| corners.iter().map(|c| c.coords()[k]).fold(f64::INFINITY, f64::min)).collect();
        let hi = (0..d).map(|k| corners.iter().map(|c| c.coords()[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
        Cuboid::new(Point::new(lo), Point::new(hi))
    });
    let points = mu.points().iter().map(|p| theta.apply(p)).filter(|p| window.contains(p)).collect();
    PointSet::new(mu.dim(), points, window).expect("isometric image of a valid configuration")
}

/// Outputs of the chosen map: one list for the homomorphism, red and blue for
/// the splitting factor.
fn outputs(kind: MapKind, mu: &PointSet, cfg: &FactorConfig) -> Result<Vec<Vec<Point>>> {
    Ok(match kind {
        MapKind::SplittingFactor => {
            let e = evaluate_splitting_factor(mu, cfg)?;
            vec![e.split.red.into_points(), e.split.blue.into_points()]
        }
        MapKind::Homomorphism => vec![evaluate_homomorphism(mu, cfg)?.output.into_points()],
    })
}

/// Compares `map(θμ)` with `θ(map(μ))` inside `θ(I)`, `I` the window shrunk by
/// `cfg.margin`. The statistic is the largest bottleneck distance over all
/// isometries (infinite on a cardinality mismatch).
pub fn equivariance_report(
    kind: MapKind,
    mu: &PointSet,
    isometries: &[Isometry],
    cfg: &FactorConfig,
    tol: f64,
) -> Result<TestReport> {
    let inner = mu.window().shrink(cfg.margin);
    let base = outputs(kind, mu, cfg)?;
    let mut worst: f64 = 0.0;
    let mut mismatches = 0usize;
    for theta in isometries {
        let inv = theta.inverse();
        let keep = |p: &Point| inner.as_ref().is_some_and(|i| i.contains(&inv.apply(p)));
        let moved = outputs(kind, &transform_set(mu, theta), cfg)?;
        for (orig, img) in base.iter().zip(&moved) {
            let expected: Vec<Point> = orig.iter().map(|p| theta.apply(p)).filter(keep).collect();
            let got: Vec<Point> = img.iter().filter(|p| keep(p)).cloned().collect();
            match bottleneck_distance(&expected, &got) {
                Some(d) => worst = worst.max(d),
                None => {
                    mismatches += 1;
                    worst = f64::INFINITY;
                }
            }
        }
    }
    let name = match kind {
        MapKind::SplittingFactor => "equivariance of the splitting factor",
        MapKind::Homomorphism => "equivariance of the homomorphism",
    };
    let mut report = TestReport::bound(name, worst, tol, isometries.len());
    report.pass = mismatches == 0 && worst <= tol;
    Ok(report.with_seed(UnitValue::ZERO))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[[f64; 2]]) -> Vec<Point> {
        v.iter().map(|c| Point::new(c.to_vec())).collect()
    }

    #[test]
    fn bottleneck_in_the_plane() {
        let a = pts(&[[0.0, 0.0], [1.0, 0.0]]);
        let b = pts(&[[1.1, 0.0], [0.0, 0.2]]);
        assert!((bottleneck_distance(&a, &b).unwrap() - 0.2).abs() < 1e-12);
        assert!(bottleneck_distance(&a, &b[..1]).is_none());
        assert_eq!(bottleneck_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn bottleneck_prefers_global_pairing() {
        // greedy nearest pairing would match a0-b0 and leave a1 far from b1
        let a = pts(&[[0.0, 0.0], [1.0, 0.0]]);
        let b = pts(&[[0.6, 0.0], [-0.5, 0.0]]);
        assert!((bottleneck_distance(&a, &b).unwrap() - 0.5).abs() < 1e-12);
    }
}
