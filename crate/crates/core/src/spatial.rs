//! Uniform-grid bucket index for ball queries.

use std::collections::HashMap;

use crate::geometry::Point;

#[derive(Clone, Debug)]
pub struct PointIndex {
    cell: f64,
    dim: usize,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
    points: Vec<Point>,
}

impl PointIndex {
    pub fn new(points: &[Point], cell: f64) -> Self {
        assert!(cell > 0.0);
        let dim = points.first().map_or(0, Point::dim);
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(p, cell)).or_default().push(i);
        }
        PointIndex { cell, dim, buckets, points: points.to_vec() }
    }

    fn key(p: &Point, cell: f64) -> Vec<i64> {
        p.coords().iter().map(|c| (c / cell).floor() as i64).collect()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Calls `f` on every index whose bucket meets the box around `B(c, r)`;
    /// stops early when `f` returns `false`.
    fn scan<F: FnMut(usize) -> bool>(&self, c: &Point, r: f64, mut f: F) {
        if self.points.is_empty() {
            return;
        }
        let lo: Vec<i64> = c.coords().iter().map(|x| ((x - r) / self.cell).floor() as i64).collect();
        let hi: Vec<i64> = c.coords().iter().map(|x| ((x + r) / self.cell).floor() as i64).collect();
        let cells: i64 = lo.iter().zip(&hi).map(|(a, b)| b - a + 1).product();
        if cells as usize > 4 * self.buckets.len() + 16 {
            // query box dwarfs the data: walk the buckets instead
            for (k, v) in &self.buckets {
                if k.iter().zip(lo.iter().zip(&hi)).all(|(x, (a, b))| a <= x && x <= b) {
                    for &i in v {
                        if !f(i) {
                            return;
                        }
                    }
                }
            }
            return;
        }
        let mut key = lo.clone();
        loop {
            if let Some(v) = self.buckets.get(&key) {
                for &i in v {
                    if !f(i) {
                        return;
                    }
                }
            }
            let mut k = 0;
            loop {
                if k == self.dim {
                    return;
                }
                key[k] += 1;
                if key[k] <= hi[k] {
                    break;
                }
                key[k] = lo[k];
                k += 1;
            }
        }
    }

    /// Indices with `lo <= |p - c| <= hi`.
    pub fn in_shell(&self, c: &Point, lo: f64, hi: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.scan(c, hi, |i| {
            let d = self.points[i].dist(c);
            if lo <= d && d <= hi {
                out.push(i);
            }
            true
        });
        out.sort_unstable();
        out
    }

    /// Indices in the closed ball.
    pub fn in_ball(&self, c: &Point, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        let r2 = r * r;
        self.scan(c, r, |i| {
            if self.points[i].dist2(c) <= r2 {
                out.push(i);
            }
            true
        });
        out.sort_unstable();
        out
    }

    pub fn any_in_shell(&self, c: &Point, lo: f64, hi: f64) -> bool {
        let mut found = false;
        self.scan(c, hi, |i| {
            let d = self.points[i].dist(c);
            found = lo <= d && d <= hi;
            !found
        });
        found
    }

    /// Whether some point lies in the open ball.
    pub fn any_in_open_ball(&self, c: &Point, r: f64) -> bool {
        let mut found = false;
        let r2 = r * r;
        self.scan(c, r, |i| {
            found = self.points[i].dist2(c) < r2;
            !found
        });
        found
    }
}
