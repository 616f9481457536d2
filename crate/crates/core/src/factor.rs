//! Splitting maps and homomorphisms: finite-volume splitting `Γ_A`, the coin
//! and standard splitting `Π`, the randomized splitting `Φ`, the factor `Φ*`,
//! and the thickening homomorphisms `Φ**` (isometries) and `Φ'` (translations).

use serde::{Deserialize, Serialize};

use crate::assignment::{assign_all, assign_globes, AssignmentTable, KeyRef};
use crate::coupling::{build_coupling_default, min_lambda_nonneg, split_count, CouplingMatrix};
use crate::error::{Error, Result};
use crate::geometry::{for_each_grid_node, unit_ball_volume, Ball, Cuboid, Isometry, Point};
use crate::point_process::{centric_enumeration, distances_tie, radial_order, PointSet};
use crate::randomness::{poisson_process_from_uniform, reproduce, unrank_subset, SamplingRegion, UnitValue};
use crate::selection::{SelectionConfig, SelectionOutcome, Special};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorMode {
    SplitFactor,
    Homomorphism,
    TranslationHomomorphism,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorConfig {
    pub lambda: f64,
    pub lambda_prime: f64,
    pub selection: SelectionConfig,
    pub mode: FactorMode,
    /// Keys closer than this to the window boundary are never reported as
    /// errors when undetermined.
    pub margin: f64,
}

impl FactorConfig {
    pub fn new(lambda: f64, lambda_prime: f64, selection: SelectionConfig, mode: FactorMode) -> Self {
        FactorConfig { lambda, lambda_prime, selection, mode, margin: 200.0 }
    }

    /// Mean count of a globe, `λ·vol(B_R)`.
    pub fn globe_mean(&self, dim: usize) -> f64 {
        self.lambda * unit_ball_volume(dim) * self.selection.radius.powi(dim as i32)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite() && self.lambda_prime > 0.0 && self.lambda_prime.is_finite()) {
            return Err(Error::InvalidConfig("intensities must be positive and finite".into()));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::InvalidConfig("margin must be nonnegative".into()));
        }
        self.selection.validate()?;
        self.selection.check_separation(dim).map_err(Error::InvalidConfig)?;
        if self.mode == FactorMode::SplitFactor {
            if self.lambda_prime >= self.lambda {
                return Err(Error::InvalidConfig("splitting needs lambda_prime < lambda".into()));
            }
            let k = min_lambda_nonneg(blue_share(self.lambda, self.lambda_prime))?;
            let mean = self.globe_mean(dim);
            if mean <= k {
                return Err(Error::RegionTooSmall { mean, threshold: k });
            }
        }
        Ok(())
    }
}

/// A split of `μ` into red and blue; `red_mask[i]` refers to input point `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitResult {
    pub red: PointSet,
    pub blue: PointSet,
    pub red_mask: Vec<bool>,
}

impl SplitResult {
    pub fn from_mask(mu: &PointSet, red_mask: Vec<bool>) -> Self {
        let red: Vec<usize> = (0..mu.len()).filter(|&i| red_mask[i]).collect();
        let blue: Vec<usize> = (0..mu.len()).filter(|&i| !red_mask[i]).collect();
        SplitResult { red: mu.select(&red), blue: mu.select(&blue), red_mask }
    }
}

/// Share of the blue process, `(λ - λ')/λ`. The first coordinate of the
/// coupling counts blue points, so one point stays blue and two turn red.
pub fn blue_share(lambda: f64, lambda_prime: f64) -> f64 {
    (lambda - lambda_prime) / lambda
}

/// Coupling for a region of the given volume, or `RegionTooSmall`.
pub fn coupling_for_volume(lambda: f64, lambda_prime: f64, volume: f64) -> Result<CouplingMatrix> {
    let alpha = blue_share(lambda, lambda_prime);
    let mean = lambda * volume;
    let threshold = min_lambda_nonneg(alpha).unwrap_or(f64::INFINITY);
    if mean <= threshold {
        return Err(Error::RegionTooSmall { mean, threshold });
    }
    build_coupling_default(alpha, mean).map_err(|e| match e {
        Error::NegativeMass { .. } => Error::RegionTooSmall { mean, threshold },
        e => e,
    })
}

/// `Γ_A(μ, u)`: blue count `F(n, g₁(u))` under the coupling built with the
/// blue share, blue positions from the subset of centric indices unranked
/// from `g₂(u)`; the rest of `μ|_A` is red.
pub fn gamma_split(region: &SamplingRegion, mu: &PointSet, u: UnitValue, coupling: &CouplingMatrix) -> Result<SplitResult> {
    let mut mask = vec![false; mu.len()];
    let enumeration = match centric_enumeration(mu, region) {
        Ok(e) => e,
        Err(Error::EmptyRegion) => return Ok(SplitResult::from_mask(mu, mask)),
        Err(e) => return Err(e),
    };
    if enumeration.degenerate_tie {
        return Ok(SplitResult::from_mask(mu, mask));
    }
    let n = enumeration.order.len();
    let j = split_count(n, reproduce(u, 1), coupling);
    for &i in &enumeration.order {
        mask[i] = true;
    }
    for k in unrank_subset(n, j, reproduce(u, 2))? {
        mask[enumeration.order[k - 1]] = false;
    }
    Ok(SplitResult::from_mask(mu, mask))
}

/// The coin `π(x, u)`: red iff `u ≤ λ'/λ`.
pub fn coin(u: UnitValue, lambda: f64, lambda_prime: f64) -> bool {
    lambda_prime >= lambda || u.to_f64() <= lambda_prime / lambda
}

/// `Π(μ, u)`: the `i`-th point in radial order (from 1) flips the coin with
/// `g_i(u)`.
pub fn standard_split(mu: &PointSet, u: UnitValue, lambda: f64, lambda_prime: f64) -> SplitResult {
    let mut mask = vec![false; mu.len()];
    for (i, idx) in radial_order(mu.points()).into_iter().enumerate() {
        mask[idx] = coin(reproduce(u, i as u64 + 1), lambda, lambda_prime);
    }
    SplitResult::from_mask(mu, mask)
}

fn globe_region(outcome: &SelectionOutcome, g: usize) -> SamplingRegion {
    SamplingRegion::Ball(outcome.globes[g].ball())
}

/// Points of `μ` inside globe `g`, as a configuration of their own.
fn globe_config(mu: &PointSet, outcome: &SelectionOutcome, g: usize) -> PointSet {
    mu.select(&outcome.globes[g].members)
}

fn randomized_split_with(mu: &PointSet, u: UnitValue, cfg: &FactorConfig, only_special: bool) -> Result<SplitResult> {
    let outcome = crate::selection::select_globes(mu, &cfg.selection);
    let mut mask = vec![false; mu.len()];
    let mut pi_indices: Vec<usize> = outcome.ether.clone();
    let coupling = if outcome.globes.is_empty() {
        None
    } else {
        Some(coupling_for_volume(cfg.lambda, cfg.lambda_prime, outcome.globes[0].ball().volume())?)
    };
    for (g, globe) in outcome.globes.iter().enumerate() {
        if only_special && globe.special == Special::None {
            pi_indices.extend(&globe.members);
            continue;
        }
        let local = globe_config(mu, &outcome, g);
        let split = gamma_split(&globe_region(&outcome, g), &local, reproduce(u, g as u64 + 1), coupling.as_ref().unwrap())?;
        for (k, &m) in globe.members.iter().enumerate() {
            mask[m] = split.red_mask[k];
        }
    }
    pi_indices.sort_unstable();
    let rest = mu.select(&pi_indices);
    let pi = standard_split(&rest, reproduce(u, 0), cfg.lambda, cfg.lambda_prime);
    for (k, &m) in pi_indices.iter().enumerate() {
        mask[m] = pi.red_mask[k];
    }
    Ok(SplitResult::from_mask(mu, mask))
}

/// `Φ(X, U)`: `Γ` on the `i`-th globe with `g_i(U)` (from 1) and the standard
/// splitting on the ether with `g₀(U)`.
pub fn randomized_split(mu: &PointSet, u: UnitValue, cfg: &FactorConfig) -> Result<SplitResult> {
    randomized_split_with(mu, u, cfg, false)
}

/// Variant applying `Γ` only on special globes and `Π` elsewhere. This is not
/// a splitting; it exists as a negative control.
pub fn randomized_split_special_only(mu: &PointSet, u: UnitValue, cfg: &FactorConfig) -> Result<SplitResult> {
    randomized_split_with(mu, u, cfg, true)
}

/// Full evaluation of `Φ*` on a window.
#[derive(Clone, Debug)]
pub struct FactorEvaluation {
    pub split: SplitResult,
    pub outcome: SelectionOutcome,
    pub table: AssignmentTable,
    /// Whether the color of each input point is fixed by the window.
    pub point_determined: Vec<bool>,
    /// Undetermined keys inside the margin interior.
    pub undetermined: Vec<KeyRef>,
}

fn interior(mu: &PointSet, margin: f64) -> Option<Cuboid> {
    mu.window().shrink(margin)
}

fn undetermined_inside(mu: &PointSet, outcome: &SelectionOutcome, table: &AssignmentTable, margin: f64) -> Vec<KeyRef> {
    let Some(inner) = interior(mu, margin) else {
        return Vec::new();
    };
    table
        .all()
        .into_iter()
        .filter(|a| !a.determined)
        .filter(|a| match a.key {
            KeyRef::Globe(g) => inner.contains(&outcome.globes[g].center),
            KeyRef::EtherPoint(i) => inner.contains(&mu.points()[i]),
        })
        .map(|a| a.key)
        .collect()
}

/// Evaluates `Φ*` everywhere in the window and reports which parts of the
/// output the window determines.
pub fn evaluate_splitting_factor(mu: &PointSet, cfg: &FactorConfig) -> Result<FactorEvaluation> {
    let outcome = crate::selection::select_globes(mu, &cfg.selection);
    let table = assign_all(&outcome, mu, &cfg.selection);
    let mut mask = vec![false; mu.len()];
    let mut point_determined = vec![false; mu.len()];
    if !outcome.globes.is_empty() {
        let coupling = coupling_for_volume(cfg.lambda, cfg.lambda_prime, outcome.globes[0].ball().volume())?;
        for (g, globe) in outcome.globes.iter().enumerate() {
            let key = &table.globes[g];
            let local = globe_config(mu, &outcome, g);
            let split = gamma_split(&globe_region(&outcome, g), &local, key.value, &coupling)?;
            for (k, &m) in globe.members.iter().enumerate() {
                mask[m] = split.red_mask[k];
                point_determined[m] = key.determined;
            }
        }
    }
    for &i in &outcome.ether {
        let key = &table.ether[&i];
        mask[i] = coin(key.value, cfg.lambda, cfg.lambda_prime);
        point_determined[i] = key.determined;
    }
    let undetermined = undetermined_inside(mu, &outcome, &table, cfg.margin);
    Ok(FactorEvaluation { split: SplitResult::from_mask(mu, mask), outcome, table, point_determined, undetermined })
}

/// `Φ*(μ)`, failing with `UndeterminedKeys` when a key inside the margin
/// interior depends on input outside the window.
pub fn splitting_factor(mu: &PointSet, cfg: &FactorConfig) -> Result<SplitResult> {
    let eval = evaluate_splitting_factor(mu, cfg)?;
    if !eval.undetermined.is_empty() {
        return Err(Error::UndeterminedKeys(eval.undetermined));
    }
    Ok(eval.split)
}

/// Index of the strictly nearest center; `None` when the two nearest tie.
pub fn voronoi_cell_index(x: &Point, centers: &[Point]) -> Option<usize> {
    assert!(!centers.is_empty(), "no centers");
    let mut best = (f64::INFINITY, 0usize);
    let mut second = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = x.dist(c);
        if d < best.0 {
            second = best.0;
            best = (d, i);
        } else if d < second {
            second = d;
        }
    }
    if second.is_finite() && distances_tie(best.0, second) {
        None
    } else {
        Some(best.1)
    }
}

fn zigzag(z: i64) -> u128 {
    if z >= 0 {
        2 * z as u128
    } else {
        (-2 * z - 1) as u128
    }
}

/// Stream index of the lattice cube at `z`.
pub fn lattice_index(z: &[i64]) -> u64 {
    let mut acc = zigzag(z[0]);
    for &c in &z[1..] {
        let b = zigzag(c);
        acc = (acc + b) * (acc + b + 1) / 2 + b;
    }
    u64::try_from(acc).expect("lattice index overflow")
}

/// Points of the lattice process `Z_U = ∪_z Θ_{[z, z+1)}(g_{idx(z)}(U))`
/// in every unit cube meeting `cover`.
pub fn lattice_process(u: UnitValue, intensity: f64, cover: &Cuboid) -> Vec<Point> {
    let d = cover.dim();
    let lo: Vec<i64> = cover.lo.coords().iter().map(|x| x.floor() as i64).collect();
    let hi: Vec<i64> = cover.hi.coords().iter().map(|x| x.floor() as i64).collect();
    let mut out = Vec::new();
    let mut z = lo.clone();
    loop {
        let cube = Cuboid::new(
            Point::new(z.iter().map(|&c| c as f64).collect()),
            Point::new(z.iter().map(|&c| c as f64 + 1.0).collect()),
        );
        let pts = poisson_process_from_uniform(&SamplingRegion::Cuboid(cube), intensity, reproduce(u, lattice_index(&z)))
            .expect("boxes never reject");
        out.extend(pts.into_points());
        let mut k = 0;
        loop {
            if k == d {
                return out;
            }
            z[k] += 1;
            if z[k] <= hi[k] {
                break;
            }
            z[k] = lo[k];
            k += 1;
        }
    }
}

/// Output of one Voronoi cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellOutput {
    pub globe: usize,
    pub points: Vec<Point>,
    pub determined: Vec<bool>,
}

/// Full evaluation of `Φ**` or `Φ'` on a window.
#[derive(Clone, Debug)]
pub struct HomomorphismEvaluation {
    pub output: PointSet,
    /// Per output point, in the order of `output`.
    pub determined: Vec<bool>,
    pub cells: Vec<CellOutput>,
    pub outcome: SelectionOutcome,
    pub table: AssignmentTable,
}

/// Voronoi cell of a center restricted to the window, as an interval (`d = 1`),
/// with flags for ends clipped by the window.
fn cell_interval(order: &[usize], pos: usize, centers: &[Point], window: &Cuboid) -> (f64, f64, bool, bool) {
    let x = |k: usize| centers[order[k]].coords()[0];
    let (wlo, whi) = (window.lo.coords()[0], window.hi.coords()[0]);
    let a = if pos == 0 { None } else { Some(0.5 * (x(pos - 1) + x(pos))) };
    let b = if pos + 1 == order.len() { None } else { Some(0.5 * (x(pos) + x(pos + 1))) };
    let (a, ca) = match a {
        Some(a) if a > wlo => (a, false),
        _ => (wlo, true),
    };
    let (b, cb) = match b {
        Some(b) if b < whi => (b, false),
        _ => (whi, true),
    };
    (a, b, ca, cb)
}

/// Evaluates the homomorphism in the configured mode (`Φ**` for
/// [`FactorMode::Homomorphism`], `Φ'` for
/// [`FactorMode::TranslationHomomorphism`]) at intensity `λ'`.
pub fn evaluate_homomorphism(mu: &PointSet, cfg: &FactorConfig) -> Result<HomomorphismEvaluation> {
    evaluate_homomorphism_near(mu, cfg, None)
}

/// As [`evaluate_homomorphism`], skipping in one dimension the cells that do
/// not meet `focus`.
pub fn evaluate_homomorphism_near(mu: &PointSet, cfg: &FactorConfig, focus: Option<&Cuboid>) -> Result<HomomorphismEvaluation> {
    let outcome = crate::selection::select_globes(mu, &cfg.selection);
    let table = assign_globes(&outcome, mu, &cfg.selection);
    let translation_mode = cfg.mode == FactorMode::TranslationHomomorphism;
    let usable = |g: usize| translation_mode || table.tags[g].fixing.is_some();
    if !(0..outcome.globes.len()).any(usable) {
        return Err(Error::NoGlobes);
    }
    let window = mu.window();
    let d = mu.dim();
    let centers = outcome.centers();
    let reliable = outcome.reliable.clone();
    let order = crate::point_process::radial_order(&centers);
    // sorted positions for d = 1
    let mut line: Vec<usize> = (0..centers.len()).collect();
    if d == 1 {
        line.sort_by(|&a, &b| centers[a].coords()[0].total_cmp(&centers[b].coords()[0]));
    }
    let mut pos_in_line = vec![0usize; centers.len()];
    for (k, &g) in line.iter().enumerate() {
        pos_in_line[g] = k;
    }
    let far_corner = |c: &Point| window.corners().iter().map(|q| q.dist(c)).fold(0.0, f64::max);
    let res = cfg.selection.scan_resolution;

    let cells: Vec<CellOutput> = order
        .iter()
        .filter(|&&g| usable(g))
        .filter(|&&g| match focus {
            Some(f) if d == 1 => {
                let (a, b, _, _) = cell_interval(&line, pos_in_line[g], &centers, window);
                a <= f.hi.coords()[0] && f.lo.coords()[0] <= b
            }
            _ => true,
        })
        .map(|&g| {
            let c = &centers[g];
            let key_ok = table.globes[g].determined;
            // membership of generated points in the cell of g
            let in_cell = |y: &Point| -> bool {
                if !window.contains(y) {
                    return false;
                }
                if d == 1 {
                    let k = pos_in_line[g];
                    let lo = k.saturating_sub(1);
                    let hi = (k + 1).min(line.len() - 1);
                    let near: Vec<Point> = line[lo..=hi].iter().map(|&i| centers[i].clone()).collect();
                    voronoi_cell_index(y, &near).map(|i| line[lo + i]) == Some(g)
                } else {
                    voronoi_cell_index(y, &centers) == Some(g)
                }
            };
            // frame: σ in iso mode, θ_{centroid} in translation mode
            let (frame, cover_radius, cell_ok): (Isometry, f64, bool) = if translation_mode {
                let (m, radius, whole) = if d == 1 {
                    let (a, b, ca, cb) = cell_interval(&line, pos_in_line[g], &centers, window);
                    let whole = !ca
                        && !cb
                        && reliable.as_ref().is_some_and(|r| {
                            r.contains_ball(&Point::new(vec![a]), (a - c.coords()[0]).abs())
                                && r.contains_ball(&Point::new(vec![b]), (b - c.coords()[0]).abs())
                        });
                    let m = 0.5 * (a + b);
                    (Point::new(vec![m]), 0.5 * (b - a) + (m - c.coords()[0]).abs() + 1e-9, whole)
                } else {
                    let search = Ball::closed(c.clone(), far_corner(c));
                    let mut sum = vec![0.0; d];
                    let mut n = 0usize;
                    let mut rmax: f64 = 0.0;
                    for_each_grid_node(&search.bounding_box(), res, |y| {
                        if in_cell(y) {
                            for k in 0..d {
                                sum[k] += y.coords()[k];
                            }
                            n += 1;
                            rmax = rmax.max(y.dist(c));
                        }
                    });
                    let m = if n == 0 { c.clone() } else { Point::new(sum.iter().map(|s| s / n as f64).collect()) };
                    let spread = rmax + res * (d as f64).sqrt();
                    let whole = reliable.as_ref().is_some_and(|r| r.contains_ball(c, 2.0 * spread));
                    let radius = m.dist(c) + spread;
                    (m, radius, whole)
                };
                let shift: Vec<f64> = m.coords().iter().map(|x| -x).collect();
                (Isometry::translation(&shift), radius, whole)
            } else {
                let sigma = table.tags[g].fixing.clone().expect("usable globe has a fixing isometry");
                let radius = if d == 1 {
                    let (a, b, _, _) = cell_interval(&line, pos_in_line[g], &centers, window);
                    (a - c.coords()[0]).abs().max((b - c.coords()[0]).abs()) + 1e-9
                } else {
                    far_corner(c)
                };
                (sigma, radius, true)
            };
            let image_center = frame.apply(c);
            let cover = Ball::closed(image_center, cover_radius).bounding_box();
            let back = frame.inverse();
            let u = table.globes[g].value;
            let mut points = Vec::new();
            let mut determined = Vec::new();
            for z in lattice_process(u, cfg.lambda_prime, &cover) {
                let y = back.apply(&z);
                if in_cell(&y) {
                    let ok = key_ok
                        && cell_ok
                        && reliable.as_ref().is_some_and(|r| r.contains_ball(&y, y.dist(c)));
                    points.push(y);
                    determined.push(ok);
                }
            }
            CellOutput { globe: g, points, determined }
        })
        .collect();

    let mut all = Vec::new();
    let mut flags = Vec::new();
    for cell in &cells {
        all.extend(cell.points.iter().cloned());
        flags.extend(cell.determined.iter().copied());
    }
    let output = PointSet::new_unchecked(d, all, window.clone());
    Ok(HomomorphismEvaluation { output, determined: flags, cells, outcome, table })
}

/// `Φ**(μ)` (or `Φ'(μ)` in translation mode).
pub fn homomorphism_factor(mu: &PointSet, cfg: &FactorConfig) -> Result<PointSet> {
    evaluate_homomorphism(mu, cfg).map(|e| e.output)
}
