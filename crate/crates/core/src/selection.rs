//! The R-selection rule: pre-seeds, clusters, seeds, globes.
//!
//! A pre-seed is a location whose outer shell is empty and whose halo is
//! densely filled. Nearby pre-seeds form clusters, each cluster's center of
//! mass is a seed, and each seed carries a closed globe of radius `R`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{for_each_grid_node, Ball, Cuboid, Point};
use crate::point_process::{radial_order, PointSet};
use crate::spatial::PointIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Paper,
    Desk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Globe radius `R`.
    pub radius: f64,
    pub halo_inner: f64,
    pub halo_outer: f64,
    pub shell_outer: f64,
    /// Radius of the balls that must each meet the halo.
    pub density_radius: f64,
    /// Pre-seeds at most this far apart are related.
    pub link_distance: f64,
    /// Grid spacing of the scan in `d >= 2`.
    pub scan_resolution: f64,
    pub profile: Profile,
}

impl SelectionConfig {
    /// The constants `R+80, R+90+d, R+100+d`, density radius 1/2, link 2.
    pub fn paper(dim: usize, radius: f64) -> Self {
        let d = dim as f64;
        SelectionConfig {
            radius,
            halo_inner: radius + 80.0,
            halo_outer: radius + 90.0 + d,
            shell_outer: radius + 100.0 + d,
            density_radius: 0.5,
            link_distance: 2.0,
            scan_resolution: 0.05,
            profile: Profile::Paper,
        }
    }

    /// Scaled-down one-dimensional profile where seeds are common at
    /// intensity 6 (roughly 0.07 seeds per unit length).
    pub fn desk() -> Self {
        SelectionConfig {
            radius: 0.05,
            halo_inner: 0.10,
            halo_outer: 0.12,
            shell_outer: 0.37,
            density_radius: 0.01,
            link_distance: 0.02,
            scan_resolution: 0.001,
            profile: Profile::Desk,
        }
    }

    /// The desk shape rescaled around a larger globe radius, keeping the
    /// separation guarantees in one dimension.
    pub fn desk_with_radius(radius: f64) -> Self {
        let rho = 0.01;
        let link = 2.0 * rho;
        let halo_inner = radius + link + 2.0 * rho + 0.01;
        let halo_outer = halo_inner + 2.0 * rho;
        let shell_outer = halo_outer + 2.0 * halo_inner + 4.0 * rho + 0.01;
        SelectionConfig {
            radius,
            halo_inner,
            halo_outer,
            shell_outer,
            density_radius: rho,
            link_distance: link,
            scan_resolution: 0.001,
            profile: Profile::Desk,
        }
    }

    /// Hard invariants: `R < r_in < r_out < r_shell`, `ρ <= (r_out - r_in)/2`.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.radius > 0.0
            && self.radius < self.halo_inner
            && self.halo_inner < self.halo_outer
            && self.halo_outer < self.shell_outer)
        {
            return bad("need 0 < R < halo_inner < halo_outer < shell_outer");
        }
        if !(self.density_radius > 0.0 && self.density_radius <= (self.halo_outer - self.halo_inner) / 2.0 * (1.0 + GAP_TOL)) {
            return bad("need 0 < density_radius <= (halo_outer - halo_inner)/2");
        }
        if !(self.link_distance > 0.0) {
            return bad("link_distance must be positive");
        }
        if !(self.scan_resolution > 0.0) {
            return bad("scan_resolution must be positive");
        }
        Ok(())
    }

    /// Radius around a globe center outside of which the input cannot change
    /// the globe's status.
    pub fn locality_radius(&self) -> f64 {
        self.shell_outer + self.link_distance + 2.0 * self.density_radius
    }

    /// Checks the geometric conditions under which globes are disjoint, seeds
    /// are well separated, and the rule only looks outside its globes.
    pub fn check_separation(&self, dim: usize) -> std::result::Result<(), String> {
        let (r, rho, link) = (self.radius, self.density_radius, self.link_distance);
        let (hi, h, s) = (self.halo_inner, self.halo_outer, self.shell_outer);
        if link < 2.0 * rho {
            return Err(format!("link distance {link} is below 2ρ = {}", 2.0 * rho));
        }
        if hi < r + link + 2.0 * rho {
            return Err(format!("halo_inner {hi} is below R + link + 2ρ = {}", r + link + 2.0 * rho));
        }
        let far = r + link + s;
        if dim >= 2 {
            if h - hi < 2.0 * rho * (1.0 - GAP_TOL) || s - h < 2.0 * rho * (1.0 - GAP_TOL) {
                return Err("halo and empty shell must each be at least 2ρ wide".into());
            }
            if s + h - 2.0 * rho < far {
                return Err(format!("pre-seeds may coexist at distance {} < {far}", s + h - 2.0 * rho));
            }
        } else {
            // scan distances: every distance in [2ρ, far] must be impossible
            let step = rho / 50.0;
            let mut delta = 2.0 * rho;
            while delta <= far + step {
                if !pair_excluded_1d(delta, self) {
                    return Err(format!("two pre-seeds may sit {delta:.4} apart in one dimension"));
                }
                delta += step;
            }
        }
        if link >= far {
            return Err("link distance exceeds the separation of clusters".into());
        }
        Ok(())
    }
}

/// Whether two one-dimensional pre-seeds at distance `delta` would force an
/// empty shell to swallow a whole density ball of the other's halo.
fn pair_excluded_1d(delta: f64, cfg: &SelectionConfig) -> bool {
    let (hi, h, s, rho) = (cfg.halo_inner, cfg.halo_outer, cfg.shell_outer, cfg.density_radius);
    let xe = [(-s, -h), (h, s)];
    let xh = [(-h, -hi), (hi, h)];
    let ye = [(delta - s, delta - h), (delta + h, delta + s)];
    let yh = [(delta - h, delta - hi), (delta + hi, delta + h)];
    let hits = |e: &[(f64, f64)], hh: &[(f64, f64)]| {
        e.iter().any(|a| hh.iter().any(|b| a.1.min(b.1) - a.0.max(b.0) >= 2.0 * rho * (1.0 - 1e-9)))
    };
    hits(&xe, &yh) || hits(&ye, &xh)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Special {
    None,
    One,
    Two,
}

impl Special {
    pub fn from_count(count: usize) -> Self {
        match count {
            1 => Special::One,
            2 => Special::Two,
            _ => Special::None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Globe {
    pub center: Point,
    pub radius: f64,
    pub count: usize,
    pub special: Special,
    /// Indices of the input points in the closed globe.
    pub members: Vec<usize>,
    /// The seed's cluster touched the edge of the scanned region.
    pub truncated: bool,
}

impl Globe {
    pub fn ball(&self) -> Ball {
        Ball::closed(self.center.clone(), self.radius)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionOutcome {
    /// Globes in radial order of their centers.
    pub globes: Vec<Globe>,
    pub seeds: Vec<Point>,
    /// Indices of input points outside every globe.
    pub ether: Vec<usize>,
    pub ether_points: PointSet,
    /// Globe of each input point, if any.
    pub membership: Vec<Option<usize>>,
    /// No seed was found; the window surrogate of an empty selection.
    pub no_globes: bool,
    /// Region in which globe status is fully determined by the window.
    pub reliable: Option<Cuboid>,
}

impl SelectionOutcome {
    pub fn special_globes(&self, kind: Special) -> impl Iterator<Item = usize> + '_ {
        self.globes.iter().enumerate().filter(move |(_, g)| g.special == kind).map(|(i, _)| i)
    }

    pub fn centers(&self) -> Vec<Point> {
        self.globes.iter().map(|g| g.center.clone()).collect()
    }
}

fn sorted_coords_1d(mu: &PointSet) -> Vec<f64> {
    let mut xs: Vec<f64> = mu.points().iter().map(|p| p.coords()[0]).collect();
    xs.sort_unstable_by(f64::total_cmp);
    xs
}

/// Points of `xs` (sorted) in the open interval `(a, b)`.
/// Relative slack on gap lengths, so a halo exactly `2ρ` wide is not
/// reported dense by rounding.
const GAP_TOL: f64 = 1e-9;

fn open_slice(xs: &[f64], a: f64, b: f64) -> &[f64] {
    let i = xs.partition_point(|&x| x <= a);
    let j = xs.partition_point(|&x| x < b);
    &xs[i..j.max(i)]
}

fn any_in_closed(xs: &[f64], a: f64, b: f64) -> bool {
    let i = xs.partition_point(|&x| x < a);
    i < xs.len() && xs[i] <= b
}

/// Every open interval of length `2ρ` inside `[a, b]` holds a point.
fn densely_filled_1d(xs: &[f64], a: f64, b: f64, rho: f64) -> bool {
    let inner = open_slice(xs, a, b);
    let limit = 2.0 * rho * (1.0 - GAP_TOL);
    let mut prev = a;
    for &x in inner {
        if x - prev >= limit {
            return false;
        }
        prev = x;
    }
    b - prev < limit
}

fn preseed_1d(xs: &[f64], x: f64, cfg: &SelectionConfig) -> bool {
    let (hi, h, s, rho) = (cfg.halo_inner, cfg.halo_outer, cfg.shell_outer, cfg.density_radius);
    !any_in_closed(xs, x - s, x - h)
        && !any_in_closed(xs, x + h, x + s)
        && densely_filled_1d(xs, x + hi, x + h, rho)
        && densely_filled_1d(xs, x - h, x - hi, rho)
}

/// Conservative density test in `d >= 2`: grid balls of radius
/// `ρ - spacing·√d/2` inside the halo must each hold a point. A reported
/// pre-seed is always a true pre-seed.
fn halo_dense_grid(index: &PointIndex, x: &Point, cfg: &SelectionConfig) -> bool {
    let d = x.dim();
    let spacing = cfg.scan_resolution;
    let shrunk = cfg.density_radius - spacing * (d as f64).sqrt() / 2.0;
    if shrunk <= 0.0 {
        return false;
    }
    let (lo, hi) = (cfg.halo_inner + shrunk, cfg.halo_outer - shrunk);
    if lo > hi {
        return true;
    }
    let bbox = Ball::closed(x.clone(), hi).bounding_box();
    let mut dense = true;
    for_each_grid_node(&bbox, spacing, |y| {
        if !dense {
            return;
        }
        let r = y.dist(x);
        if lo <= r && r <= hi && !index.any_in_open_ball(y, shrunk) {
            dense = false;
        }
    });
    dense
}

/// Whether `x` is a pre-seed: the outer shell is empty and the halo is
/// densely filled. Exact in one dimension.
pub fn is_preseed(mu: &PointSet, x: &Point, cfg: &SelectionConfig) -> Result<bool> {
    if !mu.window().contains_ball(x, cfg.shell_outer) {
        return Err(Error::OutsideMargin { radius: cfg.shell_outer });
    }
    if mu.dim() == 1 {
        return Ok(preseed_1d(&sorted_coords_1d(mu), x.coords()[0], cfg));
    }
    let index = PointIndex::new(mu.points(), cfg.shell_outer.max(cfg.scan_resolution));
    Ok(is_preseed_indexed(&index, x, cfg))
}

fn is_preseed_indexed(index: &PointIndex, x: &Point, cfg: &SelectionConfig) -> bool {
    !index.any_in_shell(x, cfg.halo_outer, cfg.shell_outer) && halo_dense_grid(index, x, cfg)
}

/// A seed with bookkeeping about its cluster.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedInfo {
    pub center: Point,
    /// Lebesgue measure (d = 1) or node count (d >= 2) of the cluster.
    pub mass: f64,
    pub truncated: bool,
}

/// Exact pre-seed set in one dimension as a sorted union of intervals.
pub fn preseed_intervals_1d(mu: &PointSet, cfg: &SelectionConfig) -> Vec<(f64, f64)> {
    let xs = sorted_coords_1d(mu);
    let (lo, hi) = (mu.window().lo.coords()[0], mu.window().hi.coords()[0]);
    let (a0, b0) = (lo + cfg.shell_outer, hi - cfg.shell_outer);
    if a0 >= b0 {
        return Vec::new();
    }
    let (rin, rout, s, rho) = (cfg.halo_inner, cfg.halo_outer, cfg.shell_outer, cfg.density_radius);
    let offsets = [
        rin,
        -rin,
        rout,
        -rout,
        s,
        -s,
        -rin - 2.0 * rho,
        rin + 2.0 * rho,
        -rout + 2.0 * rho,
        rout - 2.0 * rho,
    ];
    let mut cuts = vec![a0, b0];
    // candidates need an empty right shell: a gap of length s - r_out
    let mut gaps_ok = Vec::new();
    for w in xs.windows(2) {
        if w[1] - w[0] > s - rout {
            gaps_ok.push((w[0] - rout, w[1] - s));
        }
    }
    if let (Some(&first), Some(&last)) = (xs.first(), xs.last()) {
        gaps_ok.push((f64::NEG_INFINITY, first - s));
        gaps_ok.push((last - rout, f64::INFINITY));
    } else {
        gaps_ok.push((f64::NEG_INFINITY, f64::INFINITY));
    }
    // both ends increase along the sorted list, so the last gap starting
    // before `x` reaches farthest
    gaps_ok.sort_by(|p, q| p.0.total_cmp(&q.0));
    let near = |x: f64| {
        let k = gaps_ok.partition_point(|&(a, _)| a - 2.0 * s <= x);
        k > 0 && x <= gaps_ok[k - 1].1 + 2.0 * s
    };
    for &p in &xs {
        for c in offsets {
            let t = p + c;
            if t > a0 && t < b0 && near(t) {
                cuts.push(t);
            }
        }
    }
    cuts.sort_unstable_by(f64::total_cmp);
    cuts.dedup();
    let mut out: Vec<(f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 <= t0 {
            continue;
        }
        if preseed_1d(&xs, 0.5 * (t0 + t1), cfg) {
            match out.last_mut() {
                Some(last) if last.1 == t0 => last.1 = t1,
                _ => out.push((t0, t1)),
            }
        }
    }
    out
}

fn seeds_1d(mu: &PointSet, cfg: &SelectionConfig) -> Vec<SeedInfo> {
    let intervals = preseed_intervals_1d(mu, cfg);
    let (lo, hi) = (mu.window().lo.coords()[0], mu.window().hi.coords()[0]);
    let (a0, b0) = (lo + cfg.shell_outer, hi - cfg.shell_outer);
    let mut seeds = Vec::new();
    let mut i = 0;
    while i < intervals.len() {
        let mut j = i;
        while j + 1 < intervals.len() && intervals[j + 1].0 - intervals[j].1 <= cfg.link_distance {
            j += 1;
        }
        let cluster = &intervals[i..=j];
        let mass: f64 = cluster.iter().map(|(a, b)| b - a).sum();
        let moment: f64 = cluster.iter().map(|(a, b)| 0.5 * (a + b) * (b - a)).sum();
        let truncated = cluster[0].0 <= a0 || cluster[cluster.len() - 1].1 >= b0;
        seeds.push(SeedInfo { center: Point::new(vec![moment / mass]), mass, truncated });
        i = j + 1;
    }
    seeds
}

fn seeds_grid(mu: &PointSet, cfg: &SelectionConfig) -> Vec<SeedInfo> {
    let Some(scan) = mu.window().shrink(cfg.shell_outer) else {
        return Vec::new();
    };
    let index = PointIndex::new(mu.points(), cfg.shell_outer.max(cfg.scan_resolution));
    let res = cfg.scan_resolution;
    let mut nodes: Vec<Point> = Vec::new();
    for_each_grid_node(&scan, res, |x| {
        if is_preseed_indexed(&index, x, cfg) {
            nodes.push(x.clone());
        }
    });
    // union-find over nodes within the link distance
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let node_index = PointIndex::new(&nodes, cfg.link_distance.max(res));
    for (i, x) in nodes.iter().enumerate() {
        for j in node_index.in_ball(x, cfg.link_distance) {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..nodes.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let edge = scan.shrink(res * 1.5);
    groups
        .into_values()
        .map(|members| {
            let d = mu.dim();
            let mut sum = vec![0.0; d];
            for &m in &members {
                for (s, c) in sum.iter_mut().zip(nodes[m].coords()) {
                    *s += c;
                }
            }
            let n = members.len() as f64;
            let truncated = match &edge {
                Some(e) => members.iter().any(|&m| !e.contains(&nodes[m])),
                None => true,
            };
            SeedInfo { center: Point::new(sum.into_iter().map(|s| s / n).collect()), mass: n, truncated }
        })
        .collect()
}

/// Seeds with cluster bookkeeping, in radial order.
pub fn find_seed_info(mu: &PointSet, cfg: &SelectionConfig) -> Vec<SeedInfo> {
    let mut seeds = if mu.dim() == 1 { seeds_1d(mu, cfg) } else { seeds_grid(mu, cfg) };
    let centers: Vec<Point> = seeds.iter().map(|s| s.center.clone()).collect();
    let order = radial_order(&centers);
    let mut sorted = Vec::with_capacity(seeds.len());
    let mut taken: Vec<Option<SeedInfo>> = seeds.drain(..).map(Some).collect();
    for i in order {
        sorted.push(taken[i].take().expect("permutation"));
    }
    sorted
}

/// Centers of mass of the pre-seed clusters, in radial order.
pub fn find_seeds(mu: &PointSet, cfg: &SelectionConfig) -> Vec<Point> {
    find_seed_info(mu, cfg).into_iter().map(|s| s.center).collect()
}

/// Globes `B̄(seed, R)`, their special classes, and the ether.
pub fn select_globes(mu: &PointSet, cfg: &SelectionConfig) -> SelectionOutcome {
    let seeds = find_seed_info(mu, cfg);
    let index = PointIndex::new(mu.points(), cfg.radius.max(1e-9) * 2.0);
    let mut membership = vec![None; mu.len()];
    let mut globes = Vec::with_capacity(seeds.len());
    for (gi, seed) in seeds.iter().enumerate() {
        let members = index.in_ball(&seed.center, cfg.radius);
        for &m in &members {
            debug_assert!(membership[m].is_none(), "globes overlap");
            membership[m] = Some(gi);
        }
        globes.push(Globe {
            center: seed.center.clone(),
            radius: cfg.radius,
            count: members.len(),
            special: Special::from_count(members.len()),
            members,
            truncated: seed.truncated,
        });
    }
    let ether: Vec<usize> = (0..mu.len()).filter(|&i| membership[i].is_none()).collect();
    SelectionOutcome {
        no_globes: globes.is_empty(),
        ether_points: mu.select(&ether),
        seeds: seeds.into_iter().map(|s| s.center).collect(),
        globes,
        ether,
        membership,
        reliable: mu.window().shrink(cfg.locality_radius()),
    }
}
