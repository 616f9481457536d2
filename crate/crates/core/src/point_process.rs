//! Finite point configurations with their sampling window.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Ball, Cuboid, Point, Shell};
use crate::randomness::{poisson_process_from_uniform, SamplingRegion, UnitValue};

/// Relative tolerance under which two distances count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// A simple point configuration inside a box-shaped window.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Point>,
    window: Cuboid,
}

impl PointSet {
    /// Checks dimensions, finiteness, window membership and simplicity.
    pub fn new(dim: usize, points: Vec<Point>, window: Cuboid) -> Result<Self> {
        if window.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: window.dim() });
        }
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
            if !p.is_finite() {
                return Err(Error::InvalidInput("non-finite coordinate".into()));
            }
            if !window.contains(p) {
                return Err(Error::InvalidInput(format!("point {:?} lies outside the window", p.coords())));
            }
            if !seen.insert(bit_key(p)) {
                return Err(Error::InvalidInput(format!("duplicate point {:?}", p.coords())));
            }
        }
        Ok(PointSet { dim, points, window })
    }

    pub(crate) fn new_unchecked(dim: usize, points: Vec<Point>, window: Cuboid) -> Self {
        PointSet { dim, points, window }
    }

    pub fn empty(window: Cuboid) -> Self {
        PointSet { dim: window.dim(), points: Vec::new(), window }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn window(&self) -> &Cuboid {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same window, selected points.
    pub fn select(&self, indices: &[usize]) -> PointSet {
        PointSet::new_unchecked(self.dim, indices.iter().map(|&i| self.points[i].clone()).collect(), self.window.clone())
    }

    pub fn with_window(self, window: Cuboid) -> PointSet {
        PointSet { window, ..self }
    }

    /// Points sorted in radial order.
    pub fn sorted(&self) -> PointSet {
        let order = radial_order(&self.points);
        self.select(&order)
    }

    /// Number of points in a region.
    pub fn count_in(&self, region: &Region) -> usize {
        self.points.iter().filter(|p| region.contains(p)).count()
    }

    /// Union of two configurations on the same window; duplicates collapse.
    pub fn superpose(&self, other: &PointSet) -> PointSet {
        let mut seen: HashSet<Vec<u64>> = self.points.iter().map(bit_key).collect();
        let mut points = self.points.clone();
        for p in &other.points {
            if seen.insert(bit_key(p)) {
                points.push(p.clone());
            }
        }
        PointSet::new_unchecked(self.dim, points, self.window.clone())
    }
}

pub(crate) fn bit_key(p: &Point) -> Vec<u64> {
    p.coords().iter().map(|c| c.to_bits()).collect()
}

/// Regions accepted by [`restrict`].
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Ball(Ball),
    Shell(Shell),
    Cuboid(Cuboid),
    Complement(std::boxed::Box<Region>),
}

impl Region {
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Region::Ball(b) => b.contains(p),
            Region::Shell(s) => s.contains(p),
            Region::Cuboid(b) => b.contains(p),
            Region::Complement(r) => !r.contains(p),
        }
    }

    pub fn complement(self) -> Region {
        Region::Complement(std::boxed::Box::new(self))
    }
}

impl From<SamplingRegion> for Region {
    fn from(r: SamplingRegion) -> Self {
        match r {
            SamplingRegion::Ball(b) => Region::Ball(b),
            SamplingRegion::Cuboid(b) => Region::Cuboid(b),
        }
    }
}

/// `μ|_A`.
pub fn restrict(mu: &PointSet, region: &Region) -> PointSet {
    let points = mu.points.iter().filter(|p| region.contains(p)).cloned().collect();
    PointSet::new_unchecked(mu.dim, points, mu.window.clone())
}

/// Radial order: by norm, ties broken lexicographically.
pub fn radial_cmp(a: &Point, b: &Point) -> Ordering {
    a.norm().total_cmp(&b.norm()).then_with(|| a.lex_cmp(b))
}

/// Permutation sorting `items` into radial order.
pub fn radial_order(items: &[Point]) -> Vec<usize> {
    let norms: Vec<f64> = items.iter().map(Point::norm).collect();
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.sort_by(|&i, &j| norms[i].total_cmp(&norms[j]).then_with(|| items[i].lex_cmp(&items[j])));
    idx
}

/// Points of a region ordered by distance to the region's center of mass.
#[derive(Clone, Debug, PartialEq)]
pub struct CentricEnumeration {
    /// Indices into the input configuration, nearest first.
    pub order: Vec<usize>,
    /// Set when two distances agree within [`TIE_TOL`]; the configuration then
    /// does not admit the enumeration.
    pub degenerate_tie: bool,
}

pub fn centric_enumeration(mu: &PointSet, region: &SamplingRegion) -> Result<CentricEnumeration> {
    let center = region.center();
    let mut inside: Vec<(usize, f64)> = mu
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| region.contains(p))
        .map(|(i, p)| (i, p.dist(&center)))
        .collect();
    if inside.is_empty() {
        return Err(Error::EmptyRegion);
    }
    inside.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| mu.points[a.0].lex_cmp(&mu.points[b.0])));
    let degenerate_tie = inside.windows(2).any(|w| distances_tie(w[0].1, w[1].1));
    Ok(CentricEnumeration { order: inside.into_iter().map(|(i, _)| i).collect(), degenerate_tie })
}

pub(crate) fn distances_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Homogeneous Poisson process on the window, read off the stream of `seed`.
pub fn sample_poisson(window: &Cuboid, intensity: f64, seed: UnitValue) -> PointSet {
    poisson_process_from_uniform(&SamplingRegion::Cuboid(window.clone()), intensity, seed)
        .expect("boxes never reject")
        .with_window(window.clone())
}

/// Window description stored next to a point CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowMeta {
    pub dim: usize,
    pub window_lo: Vec<f64>,
    pub window_hi: Vec<f64>,
}

/// `points.csv` -> `points.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the CSV (17 significant digits) and its window sidecar.
pub fn write_points(path: &Path, mu: &PointSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let header: Vec<String> = (1..=mu.dim).map(|k| format!("x{k}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for p in &mu.points {
        let row: Vec<String> = p.coords().iter().map(|c| format!("{c:.16e}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    let meta = WindowMeta {
        dim: mu.dim,
        window_lo: mu.window.lo.coords().to_vec(),
        window_hi: mu.window.hi.coords().to_vec(),
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(sidecar_path(path))?), &meta)?;
    Ok(())
}

/// Reads a CSV written by [`write_points`]. Without a sidecar the window is the
/// bounding box of the points.
pub fn read_points(path: &Path) -> Result<PointSet> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let dim = reader.headers()?.len();
    let mut points = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let coords = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::InvalidInput(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        points.push(Point::new(coords));
    }
    let meta_path = sidecar_path(path);
    let window = if meta_path.exists() {
        let meta: WindowMeta = serde_json::from_reader(BufReader::new(File::open(meta_path)?))?;
        if meta.dim != dim {
            return Err(Error::DimensionMismatch { expected: meta.dim, got: dim });
        }
        Cuboid::new(Point::new(meta.window_lo), Point::new(meta.window_hi))
    } else {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty point file without a window sidecar".into()));
        }
        let lo = (0..dim).map(|k| points.iter().map(|p| p.coords()[k]).fold(f64::INFINITY, f64::min)).collect();
        let hi = (0..dim).map(|k| points.iter().map(|p| p.coords()[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
        Cuboid::new(Point::new(lo), Point::new(hi))
    };
    PointSet::new(dim, points, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[f64]]) -> Vec<Point> {
        v.iter().map(|c| Point::new(c.to_vec())).collect()
    }

    #[test]
    fn radial_order_examples() {
        let p = pts(&[&[3.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]]);
        assert_eq!(radial_order(&p), vec![1, 2, 0]);
        let q = pts(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(radial_order(&q), vec![1, 0]);
        assert_eq!(radial_order(&pts(&[&[4.0]])), vec![0]);
    }

    #[test]
    fn restrict_examples() {
        let w = Cuboid::cube(2, -10.0, 10.0);
        let mu = PointSet::new(2, pts(&[&[0.0, 0.0], &[5.0, 5.0]]), w.clone()).unwrap();
        let ball = Region::Ball(Ball::closed(Point::origin(2), 1.0));
        assert_eq!(restrict(&mu, &ball).points(), &pts(&[&[0.0, 0.0]])[..]);
        assert_eq!(restrict(&mu, &Region::Cuboid(w)), mu);
        let far = Region::Ball(Ball::open(Point::new(vec![-8.0, -8.0]), 0.5));
        assert!(restrict(&mu, &far).is_empty());
    }

    #[test]
    fn centric_examples() {
        let w = Cuboid::cube(2, 0.0, 1.0);
        let mu = PointSet::new(2, pts(&[&[0.9, 0.5], &[0.5, 0.6]]), w.clone()).unwrap();
        let e = centric_enumeration(&mu, &SamplingRegion::Cuboid(w.clone())).unwrap();
        assert_eq!(e.order, vec![1, 0]);
        assert!(!e.degenerate_tie);
        let tie = PointSet::new(2, pts(&[&[0.4, 0.5], &[0.6, 0.5]]), w.clone()).unwrap();
        assert!(centric_enumeration(&tie, &SamplingRegion::Cuboid(w.clone())).unwrap().degenerate_tie);
        assert!(matches!(
            centric_enumeration(&PointSet::empty(w.clone()), &SamplingRegion::Cuboid(w)),
            Err(Error::EmptyRegion)
        ));
    }

    #[test]
    fn rejects_duplicates_and_strays() {
        let w = Cuboid::cube(1, 0.0, 1.0);
        assert!(PointSet::new(1, pts(&[&[0.5], &[0.5]]), w.clone()).is_err());
        assert!(PointSet::new(1, pts(&[&[1.5]]), w).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let mu = sample_poisson(&Cuboid::cube(2, -3.0, 3.0), 2.0, UnitValue::from_f64(0.4242));
        write_points(&path, &mu).unwrap();
        assert_eq!(read_points(&path).unwrap(), mu);
    }
}
