//! Joint law of two Poisson counts whose sum is Poisson, with no mass on
//! (0,1), (1,1) and (2,0), and the split function read off it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::randomness::{poisson_ln_pmf, poisson_truncation, UnitValue};

/// Upper end of the default search grid for [`min_lambda_nonneg`].
pub const DEFAULT_GRID_MAX: f64 = 200.0;

/// Entries this far below zero, relative to the size of the terms that
/// produced them, are rounding noise.
const RELATIVE_NEG_TOL: f64 = 1e-12;

/// `E^{s,t}`: the 3×3 stencil at rows `s..s+3`, columns `t..t+3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Perturbation {
    pub s: usize,
    pub t: usize,
}

impl Perturbation {
    pub const STENCIL: [[f64; 3]; 3] = [[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]];

    pub fn at(&self, i: usize, j: usize) -> f64 {
        if i >= self.s && i < self.s + 3 && j >= self.t && j < self.t + 3 {
            Self::STENCIL[i - self.s][j - self.t]
        } else {
            0.0
        }
    }

    /// Dense `size × size` matrix.
    pub fn materialize(&self, size: usize) -> Vec<Vec<f64>> {
        (0..size).map(|i| (0..size).map(|j| self.at(i, j)).collect()).collect()
    }
}

/// The three corrections applied to the product law, as `(coefficient, stencil)`.
fn corrections(p: impl Fn(usize, usize) -> f64) -> [(f64, Perturbation); 3] {
    let (p01, p20, p11) = (p(0, 1), p(2, 0), p(1, 1));
    [
        (p01, Perturbation { s: 0, t: 0 }),
        (-(-p01 + p20), Perturbation { s: 1, t: 0 }),
        (-(-p01 + p20 + p11), Perturbation { s: 0, t: 1 }),
    ]
}

/// Truncated joint mass function of two counts with means `αλ` and `(1 - α)λ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingMatrix {
    alpha: f64,
    lambda: f64,
    truncation: usize,
    entries: Vec<f64>,
}

impl CouplingMatrix {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Mean of the total count.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// `Q_{i,j}`; zero outside the truncated square.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let n = self.truncation + 1;
        if i < n && j < n {
            self.entries[i * n + j]
        } else {
            0.0
        }
    }

    /// `Q_{i,j}` without truncation: beyond the stored square the coupling
    /// agrees with the product law.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        if i <= self.truncation && j <= self.truncation {
            self.get(i, j)
        } else {
            product_entry(self.alpha, self.lambda, i, j)
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        (0..=self.truncation).map(|j| self.get(i, j)).sum()
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        (0..=self.truncation).map(|i| self.get(i, j)).sum()
    }

    pub fn antidiagonal_sum(&self, k: usize) -> f64 {
        (0..=k).map(|i| self.get(i, k - i)).sum()
    }

    /// Rows as dense vectors.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        let n = self.truncation + 1;
        self.entries.chunks(n).map(<[f64]>::to_vec).collect()
    }
}

fn product_entry(alpha: f64, lambda: f64, i: usize, j: usize) -> f64 {
    (poisson_ln_pmf(alpha * lambda, i) + poisson_ln_pmf((1.0 - alpha) * lambda, j)).exp()
}

/// Builds `Q = P + P01 E^{0,0} - (P20 - P01) E^{1,0} - (P20 + P11 - P01) E^{0,1}`.
pub fn build_coupling(alpha: f64, lambda: f64, truncation: usize) -> Result<CouplingMatrix> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} is outside (0,1)")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("lambda = {lambda} must be positive")));
    }
    let required = poisson_truncation(lambda);
    if truncation < required {
        return Err(Error::TruncationTooSmall { got: truncation, required });
    }
    let n = truncation + 1;
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = product_entry(alpha, lambda, i, j);
        }
    }
    let p = |i: usize, j: usize| product_entry(alpha, lambda, i, j);
    let corr = corrections(p);
    for i in 0..5.min(n) {
        for j in 0..5.min(n) {
            let base = entries[i * n + j];
            let mut value = base;
            let mut scale = base.abs();
            for (c, e) in &corr {
                let term = c * e.at(i, j);
                value += term;
                scale += term.abs();
            }
            if value < 0.0 {
                if value < -RELATIVE_NEG_TOL * scale {
                    return Err(Error::NegativeMass { i, j, value });
                }
                value = 0.0;
            }
            entries[i * n + j] = value;
        }
    }
    // the three zeros hold exactly in real arithmetic; pin them
    for (i, j) in [(0, 1), (1, 1), (2, 0)] {
        entries[i * n + j] = 0.0;
    }
    Ok(CouplingMatrix { alpha, lambda, truncation, entries })
}

/// Coupling with the default truncation `λ + 12√λ + 30`.
pub fn build_coupling_default(alpha: f64, lambda: f64) -> Result<CouplingMatrix> {
    build_coupling(alpha, lambda, poisson_truncation(lambda))
}

/// Whether every corrected entry of `Q` is nonnegative. Only entries with
/// `i, j <= 4` differ from the product law.
pub fn coupling_is_nonnegative(alpha: f64, lambda: f64) -> bool {
    let p = |i: usize, j: usize| product_entry(alpha, lambda, i, j);
    let corr = corrections(p);
    for i in 0..5 {
        for j in 0..5 {
            let base = p(i, j);
            let mut value = base;
            let mut scale = base;
            for (c, e) in &corr {
                let term = c * e.at(i, j);
                value += term;
                scale += term.abs();
            }
            if value < -RELATIVE_NEG_TOL * scale {
                return false;
            }
        }
    }
    true
}

/// Smallest λ on `{0.1, 0.2, ..., 200}` above which every grid value gives a
/// nonnegative coupling.
pub fn min_lambda_nonneg(alpha: f64) -> Result<f64> {
    min_lambda_nonneg_on_grid(alpha, DEFAULT_GRID_MAX)
}

/// As [`min_lambda_nonneg`] with the grid `{0.1, ..., grid_max}`.
pub fn min_lambda_nonneg_on_grid(alpha: f64, grid_max: f64) -> Result<f64> {
    let top = (grid_max * 10.0).round() as u64;
    let mut k = top;
    while k >= 1 && coupling_is_nonnegative(alpha, k as f64 / 10.0) {
        k -= 1;
    }
    if k == top {
        return Err(Error::NotFound { alpha, max: grid_max });
    }
    Ok((k + 1) as f64 / 10.0)
}

/// `F(n, u)`: the first-coordinate (blue) count among `n` points, by inverse transform on
/// `m -> Q_{m, n-m}`.
pub fn split_count(n: usize, u: UnitValue, coupling: &CouplingMatrix) -> usize {
    let weights: Vec<f64> = (0..=n).map(|m| coupling.weight(m, n - m)).collect();
    let total: f64 = weights.iter().sum();
    let target = u.to_f64() * total;
    let mut cum = 0.0;
    let mut last = 0;
    for (m, w) in weights.iter().enumerate() {
        if *w <= 0.0 {
            continue;
        }
        cum += w;
        last = m;
        if cum >= target {
            return m;
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_sums_vanish() {
        for (s, t) in [(0, 0), (1, 0), (0, 1), (3, 2)] {
            let e = Perturbation { s, t }.materialize(8);
            for i in 0..8 {
                assert_eq!(e[i].iter().sum::<f64>(), 0.0);
                assert_eq!((0..8).map(|r| e[r][i]).sum::<f64>(), 0.0);
            }
            for k in 0..15 {
                let s: f64 = (0..=k).filter(|i| *i < 8 && k - i < 8).map(|i| e[i][k - i]).sum();
                assert_eq!(s, 0.0);
            }
        }
    }

    #[test]
    fn zeros_and_corrected_entry() {
        let q = build_coupling_default(0.5, 25.0).unwrap();
        assert_eq!(q.get(0, 1), 0.0);
        assert_eq!(q.get(1, 1), 0.0);
        assert_eq!(q.get(2, 0), 0.0);
        let p = |i, j| product_entry(0.5, 25.0, i, j);
        assert!((q.get(1, 0) - (p(1, 0) + p(0, 1))).abs() <= 1e-15 * p(1, 0).max(1e-300));
        for (i, j) in [(5, 0), (3, 2), (0, 7), (10, 10)] {
            assert_eq!(q.get(i, j), p(i, j));
        }
    }

    #[test]
    fn small_lambda_is_negative() {
        assert!(matches!(build_coupling_default(0.5, 5.0), Err(Error::NegativeMass { .. })));
    }

    #[test]
    fn truncation_guard() {
        assert!(matches!(build_coupling(0.5, 20.0, 10), Err(Error::TruncationTooSmall { .. })));
    }

    #[test]
    fn split_count_small_cases() {
        let q = build_coupling_default(0.5, 20.0).unwrap();
        for u in [0.0, 1e-9, 0.3, 0.999, 1.0] {
            let u = UnitValue::from_f64(u);
            assert_eq!(split_count(0, u, &q), 0);
            assert_eq!(split_count(1, u, &q), 1);
            assert_eq!(split_count(2, u, &q), 0);
        }
    }
}
