//! Distribution of randomness from special globes: encodings, tags, d-tags,
//! fixing isometries, partners, ranks and the assignment function `U`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{qr_positive_diagonal, Isometry, Point, SINGULAR_TOL};
use crate::point_process::{distances_tie, radial_cmp, PointSet};
use crate::randomness::{add_mod1, ball_position_to_uniform, mix64, reproduce, UnitValue};
use crate::selection::{Globe, SelectionConfig, SelectionOutcome, Special};
use crate::spatial::PointIndex;

/// A key of the assignment function: a globe or an ether point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum KeyRef {
    /// Index into `SelectionOutcome::globes`.
    Globe(usize),
    /// Index of the point in the input configuration.
    EtherPoint(usize),
}

/// Input points in the closed halo `A(c; r_in, r_out)` of a globe.
pub fn halo_points(mu: &PointSet, globe: &Globe, cfg: &SelectionConfig) -> Vec<usize> {
    mu.points()
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            let r = p.dist(&globe.center);
            cfg.halo_inner <= r && r <= cfg.halo_outer
        })
        .map(|(i, _)| i)
        .collect()
}

/// The tag of a globe.
///
/// With three or more halo points: the mutually closest pair, then the member
/// nearer to the nearest halo point outside the pair. With two: the member
/// nearer to the center. With one: that point. Exact ties fall back to the
/// center. An empty halo is an error.
///
/// Two halo points at equal distance from the center (the usual case on the
/// line, where the seed is their midpoint) are separated by the nearest input
/// point beyond `r_out`; see [`tie_witness`].
pub fn compute_tag(mu: &PointSet, globe: &Globe, cfg: &SelectionConfig) -> Result<Point> {
    let halo: Vec<&Point> = halo_points(mu, globe, cfg).into_iter().map(|i| &mu.points()[i]).collect();
    let witness = needs_witness(&halo, &globe.center).then(|| tie_witness(mu, globe, cfg)).flatten();
    tag_of_with(&halo, &globe.center, witness.as_ref().map(|w| &w.0))
}

/// Nearest input point farther than `r_out` from the center, with its
/// distance. It lies outside every globe ball.
pub fn tie_witness(mu: &PointSet, globe: &Globe, cfg: &SelectionConfig) -> Option<(Point, f64)> {
    mu.points()
        .iter()
        .map(|p| (p, p.dist(&globe.center)))
        .filter(|&(_, r)| r > cfg.halo_outer)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(p, r)| (p.clone(), r))
}

fn needs_witness(halo: &[&Point], center: &Point) -> bool {
    halo.len() == 2 && distances_tie(halo[0].dist(center), halo[1].dist(center))
}

#[cfg(test)]
fn tag_of(halo: &[&Point], center: &Point) -> Result<Point> {
    tag_of_with(halo, center, None)
}

fn tag_of_with(halo: &[&Point], center: &Point, witness: Option<&Point>) -> Result<Point> {
    match halo.len() {
        0 => Err(Error::TooFewHaloPoints(0)),
        1 => Ok(halo[0].clone()),
        2 => {
            let (mut da, mut db) = (halo[0].dist(center), halo[1].dist(center));
            if distances_tie(da, db) {
                if let Some(w) = witness {
                    (da, db) = (halo[0].dist(w), halo[1].dist(w));
                }
            }
            Ok(if distances_tie(da, db) {
                center.clone()
            } else if da < db {
                halo[0].clone()
            } else {
                halo[1].clone()
            })
        }
        n => {
            let mut best = (f64::INFINITY, 0, 0);
            let mut second = f64::INFINITY;
            for i in 0..n {
                for j in i + 1..n {
                    let d = halo[i].dist(halo[j]);
                    if d < best.0 {
                        second = best.0;
                        best = (d, i, j);
                    } else if d < second {
                        second = d;
                    }
                }
            }
            if distances_tie(best.0, second) {
                return Ok(center.clone());
            }
            let (_, a, b) = best;
            let nearest_other = |m: usize| {
                (0..n).filter(|&k| k != a && k != b).map(|k| halo[m].dist(halo[k])).fold(f64::INFINITY, f64::min)
            };
            let (da, db) = (nearest_other(a), nearest_other(b));
            Ok(if distances_tie(da, db) {
                center.clone()
            } else if da < db {
                halo[a].clone()
            } else {
                halo[b].clone()
            })
        }
    }
}

/// Columns of the d-tag: the tag, then repeatedly the nearest unused halo
/// point. Degenerate cases give `d` copies of the center.
pub fn compute_dtag(mu: &PointSet, globe: &Globe, cfg: &SelectionConfig) -> Result<Vec<Point>> {
    let halo: Vec<&Point> = halo_points(mu, globe, cfg).into_iter().map(|i| &mu.points()[i]).collect();
    let witness = needs_witness(&halo, &globe.center).then(|| tie_witness(mu, globe, cfg)).flatten();
    dtag_of(&halo, &globe.center, witness.as_ref().map(|w| &w.0))
}

fn dtag_of(halo: &[&Point], center: &Point, witness: Option<&Point>) -> Result<Vec<Point>> {
    let d = center.dim();
    if halo.len() < d {
        return Err(Error::TooFewHaloPoints(halo.len()));
    }
    let tag = tag_of_with(halo, center, witness)?;
    let degenerate = vec![center.clone(); d];
    if tag == *center {
        return Ok(degenerate);
    }
    let mut cols = vec![tag];
    while cols.len() < d {
        let prev = cols.last().expect("nonempty");
        let mut cands: Vec<(f64, &Point)> =
            halo.iter().filter(|p| !cols.contains(p)).map(|p| (p.dist(prev), *p)).collect();
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));
        match cands.as_slice() {
            [] => return Ok(degenerate),
            [(d0, _), (d1, _), ..] if distances_tie(*d0, *d1) => return Ok(degenerate),
            [(_, p), ..] => {
                let p = (*p).clone();
                cols.push(p);
            }
        }
    }
    Ok(cols)
}

/// Tag, d-tag and fixing isometry of one globe.
#[derive(Clone, Debug, PartialEq)]
pub struct TagRecord {
    pub tag: Point,
    pub dtag: Vec<Point>,
    /// `σ` with `σ(center) = 0` and `σ(d-tag)` upper triangular with positive
    /// diagonal; absent when the d-tag is singular.
    pub fixing: Option<Isometry>,
    pub halo_size: usize,
    /// Radius around the center read to compute the tag: `r_out`, or the
    /// distance of the tie witness when one was used.
    pub reach: f64,
}

/// The unique isometry sending the center to the origin and the d-tag to
/// upper triangular form with positive diagonal.
pub fn fixing_from_dtag(center: &Point, dtag: &[Point]) -> Option<Isometry> {
    let d = center.dim();
    let mut a = DMatrix::zeros(d, d);
    for (k, col) in dtag.iter().enumerate() {
        let v = col.sub(center);
        for i in 0..d {
            a[(i, k)] = v.coords()[i];
        }
    }
    let (q, _) = qr_positive_diagonal(&a, SINGULAR_TOL).ok()?;
    let rot = q.transpose();
    let t: DVector<f64> = -(&rot * center.to_vector());
    Some(Isometry { rotation: rot, translation: t })
}

pub fn fixing_isometry(mu: &PointSet, globe: &Globe, cfg: &SelectionConfig) -> Option<Isometry> {
    let dtag = compute_dtag(mu, globe, cfg).ok()?;
    fixing_from_dtag(&globe.center, &dtag)
}

pub fn tag_record(mu: &PointSet, globe: &Globe, cfg: &SelectionConfig) -> TagRecord {
    tag_record_indexed(&PointIndex::new(mu.points(), cfg.halo_outer), globe, cfg)
}

/// Nearest indexed point farther than `r_out` from `c`.
fn witness_indexed(index: &PointIndex, c: &Point, cfg: &SelectionConfig) -> Option<(Point, f64)> {
    let pts = index.points();
    let mut r = 2.0 * cfg.shell_outer;
    loop {
        let best = index
            .in_ball(c, r)
            .into_iter()
            .map(|i| (i, pts[i].dist(c)))
            .filter(|&(_, d)| d > cfg.halo_outer)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((i, d)) = best {
            return Some((pts[i].clone(), d));
        }
        if index.in_ball(c, r).len() == pts.len() {
            return None;
        }
        r *= 2.0;
    }
}

fn tag_record_indexed(index: &PointIndex, globe: &Globe, cfg: &SelectionConfig) -> TagRecord {
    let halo_idx = index.in_shell(&globe.center, cfg.halo_inner, cfg.halo_outer);
    let halo: Vec<&Point> = halo_idx.iter().map(|&i| &index.points()[i]).collect();
    let witness = needs_witness(&halo, &globe.center).then(|| witness_indexed(index, &globe.center, cfg)).flatten();
    let w = witness.as_ref().map(|w| &w.0);
    let tag = tag_of_with(&halo, &globe.center, w).unwrap_or_else(|_| globe.center.clone());
    let dtag = dtag_of(&halo, &globe.center, w).unwrap_or_else(|_| vec![globe.center.clone(); globe.center.dim()]);
    let fixing = fixing_from_dtag(&globe.center, &dtag);
    let reach = witness.map_or(cfg.halo_outer, |w| w.1);
    TagRecord { tag, dtag, fixing, halo_size: halo.len(), reach }
}

/// Bits of `f_b` kept by [`encode`].
pub const ENCODING_BITS: u32 = 20;

/// Rounds down to [`ENCODING_BITS`] bits, so that rounding noise from an
/// isometry does not reach the stream.
pub fn quantize(u: UnitValue) -> UnitValue {
    let drop = 64 - ENCODING_BITS;
    UnitValue::from_bits((u.bits() >> drop) << drop)
}

/// Simplified encoding `ĥ`: `f_b(x)` for one-special globes,
/// `f_b(x¹) ⊕ f_b(x²)` for two-special globes, `0` otherwise, each `f_b`
/// quantized and the result passed through a bijective mixer.
pub fn encode(mu: &PointSet, globe: &Globe) -> UnitValue {
    let raw = encode_raw(mu, globe);
    UnitValue::from_bits(mix64(raw.bits()))
}

/// [`encode`] before mixing.
pub fn encode_raw(mu: &PointSet, globe: &Globe) -> UnitValue {
    let ball = globe.ball();
    let f = |i: usize| quantize(ball_position_to_uniform(&ball, &mu.points()[i]).expect("member lies in its globe"));
    match globe.special {
        Special::One => f(globe.members[0]),
        Special::Two => {
            // x¹ is the radially smaller member; ⊕ is commutative anyway
            let (a, b) = (globe.members[0], globe.members[1]);
            let (x1, x2) = if radial_cmp(&mu.points()[a], &mu.points()[b]).is_le() { (a, b) } else { (b, a) };
            add_mod1(f(x1), f(x2))
        }
        Special::None => UnitValue::ZERO,
    }
}

/// Entry `r` of the stream `h(μ, b)`.
pub fn stream_entry(encoding: UnitValue, r: u64) -> UnitValue {
    reproduce(encoding, r)
}

/// Everything the assignment function computed for one key.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeyAssignment {
    pub key: KeyRef,
    /// Globe indices of the one-partner and two-partner; `None` stands for
    /// the key itself in the degenerate case.
    pub partners: (Option<usize>, Option<usize>),
    pub ranks: (u64, u64),
    pub value: UnitValue,
    /// Distance from the key's tag to the farther partner's tag.
    pub partner_distance: f64,
    pub determined: bool,
    pub degenerate_tie: bool,
}

/// Assignment function evaluated on every key of a window.
#[derive(Clone, Debug)]
pub struct AssignmentTable {
    pub tags: Vec<TagRecord>,
    pub encodings: Vec<UnitValue>,
    pub globes: Vec<KeyAssignment>,
    pub ether: HashMap<usize, KeyAssignment>,
    /// No one-special or no two-special globe in the window.
    pub degenerate: bool,
}

impl AssignmentTable {
    pub fn get(&self, key: KeyRef) -> Option<&KeyAssignment> {
        match key {
            KeyRef::Globe(g) => self.globes.get(g),
            KeyRef::EtherPoint(i) => self.ether.get(&i),
        }
    }

    /// Keys in a stable order: globes first, then ether points by index.
    pub fn all(&self) -> Vec<&KeyAssignment> {
        let mut ether: Vec<&KeyAssignment> = self.ether.values().collect();
        ether.sort_by_key(|k| k.key);
        self.globes.iter().chain(ether).collect()
    }
}

struct Nearest {
    index: usize,
    dist: f64,
    tie: bool,
}

fn nearest_tag(from: &Point, candidates: &[usize], tags: &[TagRecord]) -> Option<Nearest> {
    let mut best: Option<Nearest> = None;
    for &g in candidates {
        let d = from.dist(&tags[g].tag);
        match &mut best {
            None => best = Some(Nearest { index: g, dist: d, tie: false }),
            Some(b) => {
                if distances_tie(d, b.dist) {
                    b.tie = true;
                    if radial_cmp(&tags[g].tag, &tags[b.index].tag).is_lt() {
                        b.index = g;
                        b.dist = d;
                    }
                } else if d < b.dist {
                    *b = Nearest { index: g, dist: d, tie: false };
                }
            }
        }
    }
    best
}

/// Evaluates partners, ranks and `U` for every globe and ether point.
pub fn assign_all(outcome: &SelectionOutcome, mu: &PointSet, cfg: &SelectionConfig) -> AssignmentTable {
    assign_keys(outcome, mu, cfg, true)
}

/// [`assign_all`] restricted to globe keys; `ether` stays empty. Globes are
/// ranked among globes only, so their entries agree with [`assign_all`].
pub fn assign_globes(outcome: &SelectionOutcome, mu: &PointSet, cfg: &SelectionConfig) -> AssignmentTable {
    assign_keys(outcome, mu, cfg, false)
}

fn assign_keys(outcome: &SelectionOutcome, mu: &PointSet, cfg: &SelectionConfig, with_ether: bool) -> AssignmentTable {
    let index = PointIndex::new(mu.points(), cfg.halo_outer);
    let tags: Vec<TagRecord> = outcome.globes.iter().map(|g| tag_record_indexed(&index, g, cfg)).collect();
    let encodings: Vec<UnitValue> = outcome.globes.iter().map(|g| encode(mu, g)).collect();
    let ones: Vec<usize> = outcome.special_globes(Special::One).collect();
    let twos: Vec<usize> = outcome.special_globes(Special::Two).collect();
    let degenerate = ones.is_empty() || twos.is_empty();

    let keys: Vec<(KeyRef, Point)> = (0..outcome.globes.len())
        .map(|g| (KeyRef::Globe(g), tags[g].tag.clone()))
        .chain(outcome.ether.iter().filter(|_| with_ether).map(|&i| (KeyRef::EtherPoint(i), mu.points()[i].clone())))
        .collect();

    if degenerate {
        let zero_or_self = |key: KeyRef| match key {
            KeyRef::Globe(g) => add_mod1(stream_entry(encodings[g], 0), stream_entry(encodings[g], 0)),
            KeyRef::EtherPoint(_) => UnitValue::ZERO,
        };
        let entries = keys.iter().map(|(key, _)| KeyAssignment {
            key: *key,
            partners: (None, None),
            ranks: (0, 0),
            value: zero_or_self(*key),
            partner_distance: f64::INFINITY,
            determined: false,
            degenerate_tie: false,
        });
        let (mut globes, mut ether) = (Vec::new(), HashMap::new());
        for e in entries {
            match e.key {
                KeyRef::Globe(_) => globes.push(e),
                KeyRef::EtherPoint(i) => {
                    ether.insert(i, e);
                }
            }
        }
        return AssignmentTable { tags, encodings, globes, ether, degenerate, };
    }

    let nearest: Vec<(Nearest, Nearest)> = keys
        .iter()
        .map(|(_, t)| (nearest_tag(t, &ones, &tags).expect("ones nonempty"), nearest_tag(t, &twos, &tags).expect("twos nonempty")))
        .collect();

    // rank = 2n (globes) or 2n + 1 (ether) among keys of the same kind and partner
    let rank_side = |side: usize| -> Vec<u64> {
        let mut groups: HashMap<(usize, bool), Vec<usize>> = HashMap::new();
        for (k, (key, _)) in keys.iter().enumerate() {
            let p = if side == 0 { nearest[k].0.index } else { nearest[k].1.index };
            groups.entry((p, matches!(key, KeyRef::Globe(_)))).or_default().push(k);
        }
        let mut ranks = vec![0u64; keys.len()];
        for ((_, is_globe), mut members) in groups {
            let dist = |k: usize| if side == 0 { nearest[k].0.dist } else { nearest[k].1.dist };
            members.sort_by(|&a, &b| dist(a).total_cmp(&dist(b)).then_with(|| radial_cmp(&keys[a].1, &keys[b].1)));
            for (n, k) in members.into_iter().enumerate() {
                ranks[k] = if is_globe { 2 * n as u64 } else { 2 * n as u64 + 1 };
            }
        }
        ranks
    };
    let ranks1 = rank_side(0);
    let ranks2 = rank_side(1);

    // ties among rank competitors
    let mut rank_tie = vec![false; keys.len()];
    for side in 0..2 {
        let mut groups: HashMap<(usize, bool), Vec<(f64, usize)>> = HashMap::new();
        for (k, (key, _)) in keys.iter().enumerate() {
            let n = if side == 0 { &nearest[k].0 } else { &nearest[k].1 };
            groups.entry((n.index, matches!(key, KeyRef::Globe(_)))).or_default().push((n.dist, k));
        }
        for members in groups.values_mut() {
            members.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in members.windows(2) {
                if distances_tie(w[0].0, w[1].0) {
                    rank_tie[w[0].1] = true;
                    rank_tie[w[1].1] = true;
                }
            }
        }
    }

    let reach = |d: f64| 3.0 * d + cfg.halo_outer;
    let mut globes = Vec::with_capacity(outcome.globes.len());
    let mut ether = HashMap::with_capacity(outcome.ether.len());
    for (k, (key, tag)) in keys.iter().enumerate() {
        let (n1, n2) = &nearest[k];
        let value = add_mod1(
            stream_entry(encodings[n1.index], ranks1[k]),
            stream_entry(encodings[n2.index], ranks2[k]),
        );
        let partner_distance = n1.dist.max(n2.dist);
        let determined = outcome.reliable.as_ref().is_some_and(|r| {
            r.contains_ball(tag, reach(partner_distance))
                && [n1.index, n2.index]
                    .iter()
                    .all(|&p| r.contains_ball(&outcome.globes[p].center, tags[p].reach))
                && match key {
                    KeyRef::Globe(g) => r.contains_ball(&outcome.globes[*g].center, tags[*g].reach),
                    KeyRef::EtherPoint(_) => true,
                }
        });
        let entry = KeyAssignment {
            key: *key,
            partners: (Some(n1.index), Some(n2.index)),
            ranks: (ranks1[k], ranks2[k]),
            value,
            partner_distance,
            determined,
            degenerate_tie: n1.tie || n2.tie || rank_tie[k],
        };
        match key {
            KeyRef::Globe(_) => globes.push(entry),
            KeyRef::EtherPoint(i) => {
                ether.insert(*i, entry);
            }
        }
    }
    AssignmentTable { tags, encodings, globes, ether, degenerate }
}

/// Partners `(one-partner, two-partner)` with their ranks.
pub fn partners_and_ranks(
    outcome: &SelectionOutcome,
    mu: &PointSet,
    key: KeyRef,
    cfg: &SelectionConfig,
) -> Option<((Option<usize>, u64), (Option<usize>, u64))> {
    let table = assign_all(outcome, mu, cfg);
    table.get(key).map(|a| ((a.partners.0, a.ranks.0), (a.partners.1, a.ranks.1)))
}

/// `U(μ, key) = h(p₁)_{r₁} ⊕ h(p₂)_{r₂}`.
pub fn assign(outcome: &SelectionOutcome, mu: &PointSet, key: KeyRef, cfg: &SelectionConfig) -> Option<UnitValue> {
    assign_all(outcome, mu, cfg).get(key).map(|a| a.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Cuboid;
    use crate::selection::select_globes;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec())
    }

    #[test]
    fn tag_on_a_line() {
        let pts = [p(&[0.0]), p(&[1.0]), p(&[2.1])];
        let refs: Vec<&Point> = pts.iter().collect();
        assert_eq!(tag_of(&refs, &p(&[-5.0])).unwrap(), p(&[1.0]));
    }

    #[test]
    fn tag_tie_falls_back_to_center() {
        let pts = [p(&[-1.0]), p(&[0.0]), p(&[1.0])];
        let refs: Vec<&Point> = pts.iter().collect();
        assert_eq!(tag_of(&refs, &p(&[7.0])).unwrap(), p(&[7.0]));
    }

    #[test]
    fn small_halos() {
        let c = p(&[0.0]);
        assert!(matches!(tag_of(&[], &c), Err(Error::TooFewHaloPoints(0))));
        let a = p(&[0.3]);
        assert_eq!(tag_of(&[&a], &c).unwrap(), a);
        let b = p(&[-0.31]);
        assert_eq!(tag_of(&[&a, &b], &c).unwrap(), a);
    }

    #[test]
    fn globe_entries_do_not_depend_on_ether_keys() {
        let w = crate::geometry::Cuboid::cube(1, 0.0, 300.0);
        let mu = crate::point_process::sample_poisson(&w, 6.0, UnitValue::from_f64(0.31));
        let cfg = SelectionConfig::desk();
        let out = select_globes(&mu, &cfg);
        let (all, globes) = (assign_all(&out, &mu, &cfg), assign_globes(&out, &mu, &cfg));
        assert!(!all.degenerate);
        assert_eq!(all.globes, globes.globes);
        assert!(globes.ether.is_empty());
    }

    #[test]
    fn symmetric_pair_uses_the_witness() {
        let (a, b) = (p(&[0.3]), p(&[-0.3]));
        assert_eq!(tag_of(&[&a, &b], &p(&[0.0])).unwrap(), p(&[0.0]));
        assert_eq!(tag_of_with(&[&a, &b], &p(&[0.0]), Some(&p(&[-2.0]))).unwrap(), b);
        assert_eq!(tag_of_with(&[&a, &b], &p(&[0.0]), Some(&p(&[1.5]))).unwrap(), a);
    }

    #[test]
    fn dtag_in_two_dimensions() {
        let pts = [p(&[2.0, 0.0]), p(&[2.1, 0.0]), p(&[0.0, 2.0])];
        let refs: Vec<&Point> = pts.iter().collect();
        let cols = dtag_of(&refs, &p(&[0.0, 0.0]), None).unwrap();
        assert_eq!(cols[0], tag_of(&refs, &p(&[0.0, 0.0])).unwrap());
        assert_eq!(cols.len(), 2);
        assert!(cols.contains(&p(&[2.0, 0.0])) && cols.contains(&p(&[2.1, 0.0])));
    }

    #[test]
    fn fixing_sends_center_to_origin() {
        let c = p(&[1.0, -2.0]);
        let dtag = [p(&[1.5, -1.0]), p(&[3.0, -2.5])];
        let sigma = fixing_from_dtag(&c, &dtag).unwrap();
        assert!(sigma.apply(&c).norm() < 1e-12);
        let a = sigma.apply(&dtag[0]);
        let b = sigma.apply(&dtag[1]);
        assert!(a.coords()[1].abs() < 1e-9 && a.coords()[0] > 0.0 && b.coords()[1] > 0.0);
    }

    #[test]
    fn fixing_for_swapped_axes() {
        let c = p(&[0.0, 0.0]);
        let dtag = [p(&[0.0, 1.0]), p(&[1.0, 0.0])];
        let sigma = fixing_from_dtag(&c, &dtag).unwrap();
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((sigma.rotation.clone() - swap).amax() < 1e-12);
    }

    #[test]
    fn singular_dtag_has_no_fixing() {
        let c = p(&[0.0, 0.0]);
        assert!(fixing_from_dtag(&c, &[p(&[1.0, 1.0]), p(&[1.0, 1.0])]).is_none());
        assert!(fixing_from_dtag(&c, &[c.clone(), c.clone()]).is_none());
    }

    fn planted(c: f64, inside: &[f64]) -> Vec<f64> {
        let mut v: Vec<f64> = [-0.115, -0.104, 0.106, 0.117].iter().map(|o| c + o).collect();
        v.extend(inside.iter().map(|o| c + o));
        v
    }

    fn world() -> (PointSet, SelectionOutcome, SelectionConfig) {
        let cfg = SelectionConfig::desk();
        let mut xs = planted(2.0, &[0.01]);
        xs.extend(planted(3.0, &[-0.02, 0.03]));
        xs.extend(planted(4.0, &[]));
        xs.extend([2.5, 3.5, 4.5]);
        let mu = PointSet::new(1, xs.into_iter().map(|x| p(&[x])).collect(), Cuboid::cube(1, 0.0, 6.0)).unwrap();
        let out = select_globes(&mu, &cfg);
        (mu, out, cfg)
    }

    #[test]
    fn encodings_follow_the_three_cases() {
        let (mu, out, _) = world();
        assert_eq!(out.globes.len(), 3);
        let g = &out.globes;
        assert_eq!(encode(&mu, &g[2]), UnitValue::ZERO);
        let f = |x: f64, c: f64| quantize(UnitValue::from_f64((x - c).abs() / 0.05));
        let one = encode_raw(&mu, &g[0]);
        assert_eq!(one, f(2.01, g[0].center.coords()[0]));
        assert_eq!(encode(&mu, &g[0]).bits(), mix64(one.bits()));
        let two = encode_raw(&mu, &g[1]);
        let c = g[1].center.coords()[0];
        assert_eq!(two, add_mod1(f(2.98, c), f(3.03, c)));
    }

    #[test]
    fn ranks_and_partners() {
        let (mu, out, cfg) = world();
        let t = assign_all(&out, &mu, &cfg);
        assert!(!t.degenerate);
        // the non-special globe: unique globe partnered with the one-special besides itself
        let g2 = &t.globes[2];
        assert_eq!(g2.partners, (Some(0), Some(1)));
        assert_eq!(t.globes[0].ranks.0, 0);
        assert_eq!(t.globes[1].ranks.1, 0);
        // globe ranks even, ether ranks odd, no gaps per partner
        let mut by_partner: HashMap<(usize, bool), Vec<u64>> = HashMap::new();
        for a in t.all() {
            by_partner.entry((a.partners.0.unwrap(), matches!(a.key, KeyRef::Globe(_)))).or_default().push(a.ranks.0);
        }
        for ((_, is_globe), mut r) in by_partner {
            r.sort();
            for (n, v) in r.into_iter().enumerate() {
                assert_eq!(v, if is_globe { 2 * n as u64 } else { 2 * n as u64 + 1 });
            }
        }
    }

    #[test]
    fn no_special_globes_gives_zero() {
        let cfg = SelectionConfig::desk();
        let xs = planted(2.0, &[]);
        let mu = PointSet::new(1, xs.into_iter().map(|x| p(&[x])).collect(), Cuboid::cube(1, 0.0, 4.0)).unwrap();
        let out = select_globes(&mu, &cfg);
        let t = assign_all(&out, &mu, &cfg);
        assert!(t.degenerate);
        assert!(t.all().iter().all(|a| a.value == UnitValue::ZERO && a.ranks == (0, 0)));
    }
}
