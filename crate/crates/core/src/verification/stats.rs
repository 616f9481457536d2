//! Goodness-of-fit tests and small statistical helpers.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::randomness::{poisson_ln_pmf, reproduce, UnitValue};

/// Outcome of one statistical or structural check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub p_value: Option<f64>,
    pub pass: bool,
    pub samples: usize,
    pub seed: UnitValue,
}

impl TestReport {
    /// A check passing iff `statistic <= threshold`.
    pub fn bound(name: impl Into<String>, statistic: f64, threshold: f64, samples: usize) -> Self {
        TestReport {
            name: name.into(),
            statistic,
            threshold,
            p_value: None,
            pass: statistic <= threshold,
            samples,
            seed: UnitValue::ZERO,
        }
    }

    /// A check passing iff the p-value is at least `level`.
    pub fn p_value(name: impl Into<String>, statistic: f64, p: f64, level: f64, samples: usize) -> Self {
        TestReport { name: name.into(), statistic, threshold: level, p_value: Some(p), pass: p >= level, samples, seed: UnitValue::ZERO }
    }

    pub fn with_seed(mut self, seed: UnitValue) -> Self {
        self.seed = seed;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// One line: `PASS name: statistic (threshold)`.
    pub fn summary(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        match self.p_value {
            Some(p) => format!("{verdict} {}: stat = {:.4}, p = {:.4} (level {})", self.name, self.statistic, p, self.threshold),
            None => format!("{verdict} {}: stat = {:.6} (threshold {})", self.name, self.statistic, self.threshold),
        }
    }
}

/// Seed of replicate `i` under `master`.
pub fn replicate_seed(master: UnitValue, i: u64) -> UnitValue {
    reproduce(master, i)
}

pub fn bonferroni(level: f64, tests: usize) -> f64 {
    level / tests.max(1) as f64
}

/// Pearson statistic after merging adjacent bins until each expected count is
/// at least 5. Returns `(statistic, degrees of freedom)`.
pub fn chi_square_merged(observed: &[f64], expected: &[f64]) -> (f64, usize) {
    assert_eq!(observed.len(), expected.len());
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&ob, &ex) in observed.iter().zip(expected) {
        o += ob;
        e += ex;
        if e >= 5.0 {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => bins.push((o, e)),
        }
    }
    let stat = bins.iter().map(|(o, e)| if *e > 0.0 { (o - e).powi(2) / e } else if *o > 0.0 { f64::INFINITY } else { 0.0 }).sum();
    (stat, bins.len().saturating_sub(1))
}

fn chi_square_p(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    if !stat.is_finite() {
        return 0.0;
    }
    ChiSquared::new(df as f64).expect("df > 0").sf(stat)
}

/// Chi-square test of counts against Poisson(`mean`).
pub fn gof_poisson_counts(counts: &[u64], mean: f64, level: f64) -> TestReport {
    assert!(!counts.is_empty(), "no counts");
    let n = counts.len() as f64;
    let max = *counts.iter().max().expect("nonempty") as usize;
    let top = max.max((mean + 10.0 * mean.sqrt() + 10.0).ceil() as usize);
    let mut observed = vec![0.0; top + 2];
    for &c in counts {
        observed[c as usize] += 1.0;
    }
    let mut expected: Vec<f64> = (0..=top).map(|k| n * poisson_ln_pmf(mean, k).exp()).collect();
    let tail = (n - expected.iter().sum::<f64>()).max(0.0);
    expected.push(tail);
    let (stat, df) = chi_square_merged(&observed, &expected);
    TestReport::p_value(format!("poisson gof (mean {mean})"), stat, chi_square_p(stat, df), level, counts.len())
}

/// Chi-square test of bin counts against equal cell probabilities.
pub fn chi_square_uniform(counts: &[u64], level: f64) -> TestReport {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let observed: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let (stat, df) = chi_square_merged(&observed, &vec![e; counts.len()]);
    TestReport::p_value("uniform grid chi-square", stat, chi_square_p(stat, df), level, n as usize)
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        // the alternating series converges slowly here and the value is 1 to
        // double precision
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        s += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// `x` with `P(K > x) = level`.
pub fn kolmogorov_critical(level: f64) -> f64 {
    let (mut lo, mut hi) = (0.2, 5.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_survival(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One-sample Kolmogorov–Smirnov test against the uniform law on [0, 1].
pub fn ks_uniform(values: &[UnitValue], level: f64) -> TestReport {
    assert!(!values.is_empty(), "no values");
    let mut xs: Vec<f64> = values.iter().map(|u| u.to_f64()).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        d = d.max((i as f64 + 1.0) / n - x).max(x - i as f64 / n);
    }
    let sn = n.sqrt();
    let p = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
    let threshold = kolmogorov_critical(level) / sn;
    TestReport {
        name: "ks uniform".into(),
        statistic: d,
        threshold,
        p_value: Some(p),
        pass: d <= threshold,
        samples: xs.len(),
        seed: UnitValue::ZERO,
    }
}

/// Sample correlation; zero when either sample is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}
