//! Values checked against independent computations: statrs distributions,
//! brute-force enumeration and known thresholds.

use approx::assert_abs_diff_eq;
use statrs::distribution::{Discrete, DiscreteCDF, Poisson};

use splitfactor::assignment::{assign_globes, KeyRef};
use splitfactor::coupling::{build_coupling_default, min_lambda_nonneg, min_lambda_nonneg_on_grid};
use splitfactor::factor::{randomized_split, standard_split, FactorConfig, FactorMode};
use splitfactor::point_process::sample_poisson;
use splitfactor::randomness::{binomial, poisson_inverse_cdf, reproduce, unrank_subset};
use splitfactor::selection::{select_globes, SelectionConfig};
use splitfactor::verification::stats::{gof_poisson_counts, ks_uniform, replicate_seed};
use splitfactor::verification::bottleneck_distance;
use splitfactor::{Cuboid, Error, Point, UnitValue};

#[test]
fn thresholds_on_the_search_grid() {
    for (alpha, k) in [(0.25, 12.0), (0.5, 16.6), (0.75, 179.5), (0.1, 60.0), (0.05, 185.7)] {
        assert_abs_diff_eq!(min_lambda_nonneg(alpha).unwrap(), k, epsilon = 1e-9);
    }
    for alpha in [0.01, 0.99] {
        assert!(matches!(min_lambda_nonneg(alpha), Err(Error::NotFound { .. })));
    }
    // a larger grid reaches the threshold for small shares
    assert!(min_lambda_nonneg_on_grid(0.01, 2000.0).is_ok());
}

#[test]
fn coupling_marginals_match_statrs() {
    for alpha in [0.25, 0.5, 0.75] {
        let lambda = min_lambda_nonneg(alpha).unwrap() + 5.0;
        let q = build_coupling_default(alpha, lambda).unwrap();
        let first = Poisson::new(alpha * lambda).unwrap();
        let second = Poisson::new((1.0 - alpha) * lambda).unwrap();
        let total = Poisson::new(lambda).unwrap();
        for k in 0..q.truncation().min(300) {
            assert_abs_diff_eq!(q.row_sum(k), first.pmf(k as u64), epsilon = 1e-10);
            assert_abs_diff_eq!(q.col_sum(k), second.pmf(k as u64), epsilon = 1e-10);
            assert_abs_diff_eq!(q.antidiagonal_sum(k), total.pmf(k as u64), epsilon = 1e-10);
        }
    }
}

#[test]
fn inverse_cdf_brackets_u() {
    for mean in [0.3, 4.0, 20.0, 184.5] {
        let p = Poisson::new(mean).unwrap();
        for i in 0..2000 {
            let u = reproduce(UnitValue::from_f64(0.8), i);
            let k = poisson_inverse_cdf(mean, u) as u64;
            let x = u.to_f64();
            assert!(p.cdf(k) >= x - 1e-12, "mean {mean}, u {x}, k {k}");
            if k > 0 {
                assert!(p.cdf(k - 1) < x + 1e-12, "mean {mean}, u {x}, k {k}");
            }
        }
    }
}

fn all_subsets(i: usize, j: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, i: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for e in start..=i {
            cur.push(e);
            rec(e + 1, i, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, i, j, &mut Vec::new(), &mut out);
    out
}

#[test]
fn unranking_matches_enumeration() {
    for i in 0..9 {
        for j in 0..=i {
            let subsets = all_subsets(i, j);
            assert_eq!(subsets.len() as u128, binomial(i, j).unwrap());
            let c = subsets.len() as f64;
            for (r, s) in subsets.iter().enumerate() {
                let u = UnitValue::from_f64((r as f64 + 0.5) / c);
                assert_eq!(&unrank_subset(i, j, u).unwrap(), s, "i={i} j={j} r={r}");
            }
        }
    }
}

#[test]
fn poisson_counts_and_positions() {
    let window = Cuboid::cube(2, 0.0, 2.0);
    let master = UnitValue::from_f64(0.333);
    let mut counts = Vec::new();
    let mut xs = Vec::new();
    for i in 0..3000 {
        let mu = sample_poisson(&window, 2.5, replicate_seed(master, i));
        counts.push(mu.len() as u64);
        if let Some(p) = mu.points().first() {
            xs.push(UnitValue::from_f64(p.coords()[0] / 2.0));
        }
    }
    assert!(gof_poisson_counts(&counts, 10.0, 0.01).pass);
    assert!(ks_uniform(&xs, 0.01).pass);
}

#[test]
fn coin_splitting_frequency() {
    let window = Cuboid::cube(1, 0.0, 5000.0);
    let mu = sample_poisson(&window, 6.0, UnitValue::from_f64(0.11));
    let n = mu.len() as f64;
    let split = standard_split(&mu, UnitValue::from_f64(0.22), 6.0, 2.0);
    let p = 1.0 / 3.0;
    let z = (split.red.len() as f64 - n * p) / (n * p * (1.0 - p)).sqrt();
    assert!(z.abs() < 4.0, "z = {z}");
}

#[test]
fn randomized_split_counts_are_poisson() {
    let sel = SelectionConfig::desk_with_radius(1.45);
    let cfg = FactorConfig::new(6.0, 3.0, sel, FactorMode::SplitFactor);
    let window = Cuboid::cube(1, 0.0, 20.0);
    let master = UnitValue::from_f64(0.4);
    let (mut red, mut blue) = (Vec::new(), Vec::new());
    for i in 0..3000 {
        let u = replicate_seed(master, i);
        let mu = sample_poisson(&window, 6.0, reproduce(u, 0));
        let s = randomized_split(&mu, reproduce(u, 1), &cfg).unwrap();
        red.push(s.red.len() as u64);
        blue.push(s.blue.len() as u64);
    }
    assert!(gof_poisson_counts(&red, 60.0, 0.01).pass);
    assert!(gof_poisson_counts(&blue, 60.0, 0.01).pass);
}

#[test]
fn assigned_values_are_uniform() {
    // one determined globe key per independent window
    let sel = SelectionConfig::desk();
    let master = UnitValue::from_f64(0.9);
    let window = Cuboid::cube(1, -300.0, 300.0);
    let mut values = Vec::new();
    for i in 0..400 {
        let mu = sample_poisson(&window, 6.0, replicate_seed(master, i));
        let outcome = select_globes(&mu, &sel);
        let table = assign_globes(&outcome, &mu, &sel);
        if table.degenerate {
            continue;
        }
        let key = table
            .globes
            .iter()
            .filter(|k| k.determined && !k.degenerate_tie)
            .min_by(|a, b| {
                let c = |k: &splitfactor::assignment::KeyAssignment| match k.key {
                    KeyRef::Globe(g) => outcome.globes[g].center.coords()[0].abs(),
                    KeyRef::EtherPoint(_) => f64::INFINITY,
                };
                c(a).total_cmp(&c(b))
            });
        if let Some(k) = key {
            values.push(k.value);
        }
    }
    assert!(values.len() > 200, "only {} usable windows", values.len());
    assert!(ks_uniform(&values, 0.01).pass);
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn bottleneck_matches_brute_force() {
    let master = UnitValue::from_f64(0.6);
    for trial in 0..40u64 {
        let u = replicate_seed(master, trial);
        let n = 1 + (trial % 6) as usize;
        let pt = |k: u64| Point::new(vec![reproduce(u, k).to_f64() * 4.0, reproduce(u, k + 100).to_f64() * 4.0]);
        let a: Vec<Point> = (0..n as u64).map(pt).collect();
        let b: Vec<Point> = (0..n as u64).map(|k| pt(k + 50)).collect();
        let brute = permutations(n)
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| a[i].dist(&b[j])).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(bottleneck_distance(&a, &b).unwrap(), brute, epsilon = 1e-12);
    }
}
