use nalgebra::DMatrix;
use proptest::prelude::*;

use splitfactor::config::RunConfig;
use splitfactor::coupling::{build_coupling_default, split_count};
use splitfactor::factor::{gamma_split, randomized_split, FactorConfig, FactorMode};
use splitfactor::geometry::qr_positive_diagonal;
use splitfactor::point_process::{radial_order, read_points, sample_poisson, write_points};
use splitfactor::randomness::{add_mod1, reproduce, unrank_subset, SamplingRegion};
use splitfactor::selection::{select_globes, SelectionConfig};
use splitfactor::verification::equivariance::transform_set;
use splitfactor::{Ball, Cuboid, Isometry, Point, PointSet, UnitValue};

fn unit() -> impl Strategy<Value = UnitValue> {
    any::<u64>().prop_map(UnitValue::from_bits)
}

fn points_2d(max: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 0..max)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point::new(vec![x, y])).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decimal_round_trip(u in unit()) {
        let back: UnitValue = u.to_string().parse().unwrap();
        prop_assert_eq!(back, u);
    }

    #[test]
    fn addition_mod_one_is_a_group(a in unit(), b in unit(), c in unit()) {
        prop_assert_eq!(add_mod1(a, b), add_mod1(b, a));
        prop_assert_eq!(add_mod1(add_mod1(a, b), c), add_mod1(a, add_mod1(b, c)));
        prop_assert_eq!(add_mod1(a, UnitValue::ZERO), a);
    }

    #[test]
    fn reproduction_is_a_function_of_its_arguments(u in unit(), i in 0u64..1_000_000) {
        prop_assert_eq!(reproduce(u, i), reproduce(u, i));
        prop_assert!(reproduce(u, i).to_f64() < 1.0);
    }

    #[test]
    fn unranked_subsets_are_sorted_and_in_range(i in 0usize..200, frac in 0.0..1.0f64, u in unit()) {
        let j = (frac * i as f64) as usize;
        let s = unrank_subset(i, j, u).unwrap();
        prop_assert_eq!(s.len(), j);
        prop_assert!(s.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(s.iter().all(|&e| (1..=i).contains(&e)));
    }

    #[test]
    fn split_count_never_exceeds_the_total(n in 0usize..120, u in unit()) {
        let q = build_coupling_default(0.5, 25.0).unwrap();
        let f = split_count(n, u, &q);
        prop_assert!(f <= n);
        if n == 1 { prop_assert_eq!(f, 1); }
        if n == 2 { prop_assert_eq!(f, 0); }
    }

    #[test]
    fn gamma_split_partitions_the_input(pts in points_2d(40), u in unit()) {
        let window = Cuboid::cube(2, -50.0, 50.0);
        let Ok(mu) = PointSet::new(2, pts, window) else { return Ok(()) };
        let region = SamplingRegion::Ball(Ball::closed(Point::origin(2), 30.0));
        let q = build_coupling_default(0.5, 30.0).unwrap();
        let s = gamma_split(&region, &mu, u, &q).unwrap();
        prop_assert_eq!(s.red.len() + s.blue.len(), mu.len());
        for (i, p) in mu.points().iter().enumerate() {
            // only points of the region take part
            if !region.contains(p) { prop_assert!(!s.red_mask[i]); }
        }
    }

    #[test]
    fn radial_order_ignores_input_order(pts in points_2d(30), rot in 0usize..30) {
        let mut shuffled = pts.clone();
        if !shuffled.is_empty() {
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
        }
        let a: Vec<Point> = radial_order(&pts).into_iter().map(|i| pts[i].clone()).collect();
        let b: Vec<Point> = radial_order(&shuffled).into_iter().map(|i| shuffled[i].clone()).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn isometries_preserve_distances(angle in 0.0..std::f64::consts::TAU, tx in -10.0..10.0f64, ty in -10.0..10.0f64, pts in points_2d(8)) {
        let (s, c) = angle.sin_cos();
        let theta = Isometry::new(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]), nalgebra::DVector::from_vec(vec![tx, ty])).unwrap();
        let back = theta.inverse();
        for p in &pts {
            let q = back.apply(&theta.apply(p));
            prop_assert!(q.dist(p) < 1e-9);
        }
        for a in &pts {
            for b in &pts {
                prop_assert!((theta.apply(a).dist(&theta.apply(b)) - a.dist(b)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn qr_reconstructs_with_positive_diagonal(entries in prop::collection::vec(-5.0..5.0f64, 9)) {
        let a = DMatrix::from_row_slice(3, 3, &entries);
        if let Ok((q, r)) = qr_positive_diagonal(&a, 1e-9) {
            let r = r.entries().clone();
            prop_assert!((&q * &r - &a).norm() < 1e-9);
            prop_assert!((q.transpose() * &q - DMatrix::identity(3, 3)).norm() < 1e-9);
            for k in 0..3 { prop_assert!(r[(k, k)] > 0.0); }
        }
    }

    #[test]
    fn point_files_round_trip(u in unit(), dim in 1usize..4) {
        let window = Cuboid::cube(dim, -3.0, 3.0);
        let mu = sample_poisson(&window, 2.0, u);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.csv");
        write_points(&path, &mu).unwrap();
        prop_assert_eq!(read_points(&path).unwrap(), mu);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn randomized_split_is_a_thinning(seed in unit(), u in unit()) {
        let cfg = FactorConfig::new(6.0, 3.0, SelectionConfig::desk_with_radius(1.45), FactorMode::SplitFactor);
        let mu = sample_poisson(&Cuboid::cube(1, 0.0, 200.0), 6.0, seed);
        let s = randomized_split(&mu, u, &cfg).unwrap();
        prop_assert_eq!(s.red.superpose(&s.blue).sorted(), mu.sorted());
        prop_assert_eq!(randomized_split(&mu, u, &cfg).unwrap(), s);
    }

    #[test]
    fn globes_move_with_grid_translations(seed in unit(), k in -100_000i64..100_000) {
        let sel = SelectionConfig::desk();
        let mu = sample_poisson(&Cuboid::cube(1, 0.0, 300.0), 6.0, seed);
        let t = k as f64 * sel.scan_resolution;
        let moved = transform_set(&mu, &Isometry::translation(&[t]));
        let a = select_globes(&mu, &sel);
        let b = select_globes(&moved, &sel);
        prop_assert_eq!(a.globes.len(), b.globes.len());
        let mut ca: Vec<f64> = a.globes.iter().map(|g| g.center.coords()[0] + t).collect();
        let mut cb: Vec<f64> = b.globes.iter().map(|g| g.center.coords()[0]).collect();
        ca.sort_by(f64::total_cmp);
        cb.sort_by(f64::total_cmp);
        for (x, y) in ca.iter().zip(&cb) {
            prop_assert!((x - y).abs() < 1e-6, "{} vs {}", x, y);
        }
        let counts_a: Vec<usize> = { let mut v: Vec<_> = a.globes.iter().map(|g| g.count).collect(); v.sort(); v };
        let counts_b: Vec<usize> = { let mut v: Vec<_> = b.globes.iter().map(|g| g.count).collect(); v.sort(); v };
        prop_assert_eq!(counts_a, counts_b);
    }

    #[test]
    fn run_config_json_round_trip(lambda in 0.1..50.0f64, lp in 0.1..50.0f64, margin in 0.0..500.0f64, seed in unit()) {
        let cfg = RunConfig { lambda, lambda_prime: lp, margin, master_seed: seed, ..RunConfig::default() };
        prop_assert_eq!(RunConfig::from_json(&cfg.to_json().unwrap()).unwrap(), cfg);
    }
}
