//! Euclidean primitives: points, balls, shells, boxes, isometries, QR with a
//! positive diagonal, and grid centroids.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default determinant tolerance for [`qr_positive_diagonal`].
pub const SINGULAR_TOL: f64 = 1e-10;

/// A point of R^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Point { coords }
    }

    pub fn origin(dim: usize) -> Self {
        Point { coords: vec![0.0; dim] }
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        Point::new(v.iter().copied().collect())
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn add(&self, other: &Point) -> Point {
        Point::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> Point {
        Point::new(self.coords.iter().map(|a| a * s).collect())
    }

    /// Lexicographic comparison of coordinates.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        for (a, b) in self.coords.iter().zip(&other.coords) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point::new(coords)
    }
}

/// Volume of the unit ball in R^d.
pub fn unit_ball_volume(dim: usize) -> f64 {
    let d = dim as f64;
    std::f64::consts::PI.powf(d / 2.0) / statrs::function::gamma::gamma(d / 2.0 + 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
    pub closed: bool,
}

impl Ball {
    pub fn closed(center: Point, radius: f64) -> Self {
        assert!(radius > 0.0, "ball radius must be positive");
        Ball { center, radius, closed: true }
    }

    pub fn open(center: Point, radius: f64) -> Self {
        assert!(radius > 0.0, "ball radius must be positive");
        Ball { center, radius, closed: false }
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, p: &Point) -> bool {
        let r2 = self.radius * self.radius;
        let d2 = self.center.dist2(p);
        if self.closed {
            d2 <= r2
        } else {
            d2 < r2
        }
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()) * self.radius.powi(self.dim() as i32)
    }

    pub fn bounding_box(&self) -> Cuboid {
        Cuboid::new(
            Point::new(self.center.coords().iter().map(|c| c - self.radius).collect()),
            Point::new(self.center.coords().iter().map(|c| c + self.radius).collect()),
        )
    }
}

/// Closed shell `{y : inner <= |y - center| <= outer}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub center: Point,
    pub inner: f64,
    pub outer: f64,
}

impl Shell {
    pub fn new(center: Point, inner: f64, outer: f64) -> Self {
        assert!(0.0 < inner && inner < outer, "shell needs 0 < inner < outer");
        Shell { center, inner, outer }
    }

    pub fn contains(&self, p: &Point) -> bool {
        let r = self.center.dist(p);
        self.inner <= r && r <= self.outer
    }
}

/// Closed axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cuboid {
    pub lo: Point,
    pub hi: Point,
}

impl Cuboid {
    pub fn new(lo: Point, hi: Point) -> Self {
        assert_eq!(lo.dim(), hi.dim());
        assert!(
            lo.coords().iter().zip(hi.coords()).all(|(a, b)| a < b),
            "box needs lo < hi coordinatewise"
        );
        Cuboid { lo, hi }
    }

    /// The cube `[lo, hi]^d`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Cuboid::new(Point::new(vec![lo; dim]), Point::new(vec![hi; dim]))
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.coords()
            .iter()
            .zip(self.lo.coords().iter().zip(self.hi.coords()))
            .all(|(x, (a, b))| *a <= *x && *x <= *b)
    }

    pub fn volume(&self) -> f64 {
        self.lo.coords().iter().zip(self.hi.coords()).map(|(a, b)| b - a).product()
    }

    pub fn center(&self) -> Point {
        self.lo.add(&self.hi).scale(0.5)
    }

    pub fn side(&self, k: usize) -> f64 {
        self.hi.coords()[k] - self.lo.coords()[k]
    }

    /// Box shrunk by `margin` on every side, if anything is left.
    pub fn shrink(&self, margin: f64) -> Option<Cuboid> {
        let lo: Vec<f64> = self.lo.coords().iter().map(|a| a + margin).collect();
        let hi: Vec<f64> = self.hi.coords().iter().map(|b| b - margin).collect();
        if lo.iter().zip(&hi).all(|(a, b)| a < b) {
            Some(Cuboid::new(Point::new(lo), Point::new(hi)))
        } else {
            None
        }
    }

    /// Whether the closed ball `B(c, r)` lies inside the box.
    pub fn contains_ball(&self, c: &Point, r: f64) -> bool {
        c.coords()
            .iter()
            .zip(self.lo.coords().iter().zip(self.hi.coords()))
            .all(|(x, (a, b))| *a <= x - r && x + r <= *b)
    }

    /// Distance from an interior point to the box boundary (negative outside).
    pub fn depth(&self, p: &Point) -> f64 {
        p.coords()
            .iter()
            .zip(self.lo.coords().iter().zip(self.hi.coords()))
            .map(|(x, (a, b))| (x - a).min(b - x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn intersects_box(&self, other: &Cuboid) -> bool {
        (0..self.dim()).all(|k| {
            self.lo.coords()[k] < other.hi.coords()[k] && other.lo.coords()[k] < self.hi.coords()[k]
        })
    }

    pub fn corners(&self) -> Vec<Point> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                Point::new(
                    (0..d)
                        .map(|k| if mask >> k & 1 == 1 { self.hi.coords()[k] } else { self.lo.coords()[k] })
                        .collect(),
                )
            })
            .collect()
    }
}

/// `x -> rotation * x + translation`.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    pub rotation: DMatrix<f64>,
    pub translation: DVector<f64>,
}

impl Isometry {
    pub fn new(rotation: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        let d = rotation.nrows();
        if rotation.ncols() != d || translation.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: translation.len() });
        }
        let defect = (&rotation * rotation.transpose() - DMatrix::identity(d, d)).amax();
        if defect > 1e-12 {
            return Err(Error::InvalidInput(format!("rotation is not orthogonal (defect {defect:e})")));
        }
        Ok(Isometry { rotation, translation })
    }

    pub fn identity(dim: usize) -> Self {
        Isometry { rotation: DMatrix::identity(dim, dim), translation: DVector::zeros(dim) }
    }

    pub fn translation(t: &[f64]) -> Self {
        let d = t.len();
        Isometry { rotation: DMatrix::identity(d, d), translation: DVector::from_column_slice(t) }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, p: &Point) -> Point {
        Point::from_vector(&(&self.rotation * p.to_vector() + &self.translation))
    }

    /// Applies only the linear part.
    pub fn apply_linear(&self, v: &Point) -> Point {
        Point::from_vector(&(&self.rotation * v.to_vector()))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry {
            rotation: &self.rotation * &other.rotation,
            translation: &self.rotation * &other.translation + &self.translation,
        }
    }

    pub fn inverse(&self) -> Isometry {
        let rt = self.rotation.transpose();
        let t = -(&rt * &self.translation);
        Isometry { rotation: rt, translation: t }
    }

    /// Image of an axis-aligned box, if it is again axis-aligned.
    pub fn apply_box(&self, b: &Cuboid) -> Option<Cuboid> {
        let d = self.dim();
        for i in 0..d {
            let nz = (0..d).filter(|&j| self.rotation[(i, j)] != 0.0).count();
            if nz != 1 {
                return None;
            }
        }
        let a = self.apply(&b.lo);
        let c = self.apply(&b.hi);
        let lo = a.coords().iter().zip(c.coords()).map(|(x, y)| x.min(*y)).collect();
        let hi = a.coords().iter().zip(c.coords()).map(|(x, y)| x.max(*y)).collect();
        Some(Cuboid::new(Point::new(lo), Point::new(hi)))
    }
}

/// Upper triangular factor of [`qr_positive_diagonal`].
#[derive(Clone, Debug, PartialEq)]
pub struct UpperTriangular(DMatrix<f64>);

impl UpperTriangular {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Factorizes `a = q * delta` with `q` orthogonal and `delta` upper triangular
/// with a positive diagonal (modified Gram-Schmidt).
pub fn qr_positive_diagonal(a: &DMatrix<f64>, tol: f64) -> Result<(DMatrix<f64>, UpperTriangular)> {
    let d = a.nrows();
    if a.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: a.ncols() });
    }
    let det = a.determinant();
    if !(det.abs() > tol) {
        return Err(Error::SingularMatrix { det, tol });
    }
    let mut q = a.clone();
    let mut r = DMatrix::zeros(d, d);
    for k in 0..d {
        let norm = q.column(k).norm();
        r[(k, k)] = norm;
        let col = q.column(k) / norm;
        q.set_column(k, &col);
        for j in k + 1..d {
            let proj = q.column(k).dot(&q.column(j));
            r[(k, j)] = proj;
            let updated = q.column(j) - q.column(k) * proj;
            q.set_column(j, &updated);
        }
    }
    // Gram-Schmidt norms are already positive; this guards against a caller
    // handing in a matrix for which rounding flips a sign.
    for k in 0..d {
        if r[(k, k)] < 0.0 {
            for i in 0..d {
                q[(i, k)] = -q[(i, k)];
            }
            for j in 0..d {
                r[(k, j)] = -r[(k, j)];
            }
        }
    }
    Ok((q, UpperTriangular(r)))
}

/// Arithmetic mean of the grid nodes (multiples of `resolution`) inside
/// `search` at which `indicator` holds.
pub fn grid_centroid<F>(indicator: F, search: &Ball, resolution: f64) -> Result<Point>
where
    F: Fn(&Point) -> bool,
{
    let mut sum = vec![0.0; search.dim()];
    let mut n = 0usize;
    for_each_grid_node(&search.bounding_box(), resolution, |p| {
        if search.contains(p) && indicator(p) {
            for (s, c) in sum.iter_mut().zip(p.coords()) {
                *s += c;
            }
            n += 1;
        }
    });
    if n == 0 {
        return Err(Error::EmptyRegion);
    }
    Ok(Point::new(sum.into_iter().map(|s| s / n as f64).collect()))
}

/// Visits every node `resolution * k` (k integer) of the closed box.
pub fn for_each_grid_node<F: FnMut(&Point)>(b: &Cuboid, resolution: f64, mut f: F) {
    let d = b.dim();
    let lo: Vec<i64> = b.lo.coords().iter().map(|a| (a / resolution).ceil() as i64).collect();
    let hi: Vec<i64> = b.hi.coords().iter().map(|a| (a / resolution).floor() as i64).collect();
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        return;
    }
    let mut idx = lo.clone();
    loop {
        let p = Point::new(idx.iter().map(|&k| k as f64 * resolution).collect());
        f(&p);
        let mut k = 0;
        loop {
            if k == d {
                return;
            }
            idx[k] += 1;
            if idx[k] <= hi[k] {
                break;
            }
            idx[k] = lo[k];
            k += 1;
        }
    }
}
