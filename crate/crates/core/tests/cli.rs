use std::path::Path;
use std::process::{Command, Output};

use splitfactor::coupling::min_lambda_nonneg;
use splitfactor::point_process::{read_points, write_points};
use splitfactor::randomness::poisson_ln_pmf;
use splitfactor::verification::TestReport;
use splitfactor::{Cuboid, Point, PointSet};

fn splitfactor(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitfactor")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn simulate_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitfactor(dir.path(), &["simulate", "--dim", "1", "--lambda", "6", "--window", "-1000", "1000", "--seed", "0.123", "--out", "p.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mu = read_points(&dir.path().join("p.csv")).unwrap();
    assert_eq!(mu.window(), &Cuboid::cube(1, -1000.0, 1000.0));
    assert!((mu.len() as f64 - 12_000.0).abs() < 5.0 * 12_000f64.sqrt());

    // writing what was read gives the same bytes
    write_points(&dir.path().join("q.csv"), &mu).unwrap();
    let a = std::fs::read(dir.path().join("p.csv")).unwrap();
    let b = std::fs::read(dir.path().join("q.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cfg.json"), r#"{"selection": {"preset": "desk", "radius": 1.45}, "lambda": 6, "lambda_prime": 3}"#).unwrap();
    assert_eq!(code(&splitfactor(d, &["simulate", "--lambda", "6", "--window", "0", "500", "--seed", "0.77", "--out", "p.csv"])), 0);
    for run in ["1", "2"] {
        let red = format!("red{run}.csv");
        let blue = format!("blue{run}.csv");
        let globes = format!("globes{run}.json");
        let dump = format!("keys{run}.json");
        let s = splitfactor(d, &["split", "--mode", "randomized", "--in", "p.csv", "--config", "cfg.json", "--seed", "0.25", "--out-red", &red, "--out-blue", &blue]);
        assert_eq!(code(&s), 0, "{}", String::from_utf8_lossy(&s.stderr));
        let g = splitfactor(d, &["globes", "--in", "p.csv", "--out", &globes, "--dump-assignment", &dump]);
        assert_eq!(code(&g), 0, "{}", String::from_utf8_lossy(&g.stderr));
    }
    for (a, b) in [("red1.csv", "red2.csv"), ("blue1.csv", "blue2.csv"), ("globes1.json", "globes2.json"), ("keys1.json", "keys2.json")] {
        assert_eq!(std::fs::read(d.join(a)).unwrap(), std::fs::read(d.join(b)).unwrap(), "{a} vs {b}");
    }
    let mu = read_points(&d.join("p.csv")).unwrap();
    let red = read_points(&d.join("red1.csv")).unwrap();
    let blue = read_points(&d.join("blue1.csv")).unwrap();
    assert_eq!(red.len() + blue.len(), mu.len());

    let globes: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("globes1.json")).unwrap()).unwrap();
    for g in globes["globes"].as_array().unwrap() {
        assert_eq!(g["members"].as_array().unwrap().len() as u64, g["count"].as_u64().unwrap());
        assert!(["none", "one", "two"].contains(&g["special"].as_str().unwrap()));
    }
}

#[test]
fn factor_split_without_globes_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mu = PointSet::new(1, (0..4000).map(|k| Point::new(vec![k as f64 * 0.25 - 500.0])).collect(), Cuboid::cube(1, -500.0, 500.0)).unwrap();
    write_points(&d.join("lattice.csv"), &mu).unwrap();
    std::fs::write(d.join("cfg.json"), r#"{"selection": {"preset": "desk", "radius": 1.45}}"#).unwrap();
    let out = splitfactor(d, &["split", "--mode", "factor", "--in", "lattice.csv", "--config", "cfg.json", "--out-red", "r.csv", "--out-blue", "b.csv"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!d.join("r.csv").exists());
    let out = splitfactor(d, &["thicken", "--lambda-prime", "9", "--in", "lattice.csv", "--out", "t.csv"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn thicken_and_finite_split() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&splitfactor(d, &["simulate", "--lambda", "6", "--window", "-1000", "1000", "--seed", "0.4142", "--out", "p.csv"])), 0);
    for mode in ["iso", "translation"] {
        let out = splitfactor(d, &["thicken", "--mode", mode, "--lambda", "6", "--lambda-prime", "9", "--margin", "400", "--in", "p.csv", "--out", "t.csv"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let t = read_points(&d.join("t.csv")).unwrap();
        assert!((t.len() as f64 / 2000.0 - 9.0).abs() < 0.5, "{mode}: {}", t.len());
    }
    // a window of volume 20/6 carries mean 20 at λ = 6
    assert_eq!(code(&splitfactor(d, &["simulate", "--lambda", "6", "--window", "0", "3.3333333333333335", "--seed", "0.3", "--out", "s.csv"])), 0);
    let out = splitfactor(d, &["split", "--mode", "finite", "--lambda", "6", "--lambda-prime", "3", "--seed", "0.9", "--in", "s.csv", "--out-red", "r.csv", "--out-blue", "b.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    // a window too small for the coupling is a configuration error
    assert_eq!(code(&splitfactor(d, &["simulate", "--lambda", "6", "--window", "0", "1", "--seed", "0.3", "--out", "tiny.csv"])), 0);
    let out = splitfactor(d, &["split", "--mode", "finite", "--in", "tiny.csv", "--out-red", "r.csv", "--out-blue", "b.csv"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn coupling_csv_has_index_headers_and_marginals() {
    let dir = tempfile::tempdir().unwrap();
    let lambda = min_lambda_nonneg(0.5).unwrap() + 5.0;
    let out = splitfactor(dir.path(), &["coupling", "--alpha", "0.5", "--lambda", &lambda.to_string(), "--truncation", "120", "--out", "q.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(dir.path().join("q.csv")).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header.len(), 122);
    assert_eq!(header[0], "");
    assert_eq!(header[121], "120");
    let rows: Vec<Vec<f64>> = reader
        .records()
        .enumerate()
        .map(|(i, r)| {
            let r = r.unwrap();
            assert_eq!(r[0].parse::<usize>().unwrap(), i);
            r.iter().skip(1).map(|v| v.parse().unwrap()).collect()
        })
        .collect();
    assert_eq!(rows.len(), 121);
    for i in 0..30 {
        let sum: f64 = rows[i].iter().sum();
        assert!((sum - poisson_ln_pmf(0.5 * lambda, i).exp()).abs() < 1e-10);
    }
    assert_eq!(rows[0][1], 0.0);
    assert_eq!(rows[1][1], 0.0);
    assert_eq!(rows[2][0], 0.0);

    let bad = splitfactor(dir.path(), &["coupling", "--alpha", "0.5", "--lambda", "3", "--truncation", "50", "--out", "q.csv"]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn verify_coupling_passes_and_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitfactor(dir.path(), &["verify", "--suite", "coupling", "--seed", "0.5", "--out", "report.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let reports: Vec<TestReport> = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(reports.len() >= 13);
    assert!(reports.iter().all(|r| r.pass));
}

#[test]
fn failing_suite_exits_3() {
    // the quick factor suite includes the large-globe marginals, which fail
    // because random windows at that radius carry no globes
    let dir = tempfile::tempdir().unwrap();
    let out = splitfactor(dir.path(), &["verify", "--suite", "factor", "--quick", "--out", "report.json"]);
    assert_eq!(code(&out), 3);
    let reports: Vec<TestReport> = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(reports.iter().any(|r| !r.pass));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for args in [
        &["simulate", "--window", "0"][..],
        &["split", "--mode", "sideways", "--in", "p.csv"],
        &["verify", "--suite", "all"],
        &["bogus"],
        &["simulate", "--lambda", "-1", "--out", "p.csv"],
        &["globes", "--in", "missing.csv", "--out", "g.json"],
    ] {
        let out = splitfactor(d, args);
        assert_eq!(code(&out), 1, "{args:?}");
    }
    assert_eq!(code(&splitfactor(d, &["--version"])), 0);
    let help = splitfactor(d, &["--help"]);
    assert_eq!(code(&help), 0);
    let text = String::from_utf8_lossy(&help.stdout);
    for sub in ["simulate", "globes", "split", "thicken", "coupling", "verify"] {
        assert!(text.contains(sub));
    }
}

#[test]
fn config_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cfg.json"), r#"{"dim": 2, "lambda": 1.0, "window": [0, 10], "master_seed": "0.5", "outputs": {"points": "from_cfg.csv"}}"#).unwrap();
    assert_eq!(code(&splitfactor(d, &["simulate", "--config", "cfg.json"])), 0);
    let a = read_points(&d.join("from_cfg.csv")).unwrap();
    assert_eq!(a.dim(), 2);
    assert_eq!(code(&splitfactor(d, &["simulate", "--config", "cfg.json", "--lambda", "3", "--out", "flag.csv"])), 0);
    let b = read_points(&d.join("flag.csv")).unwrap();
    assert!(b.len() > a.len());
    std::fs::write(d.join("bad.json"), r#"{"lamda": 1.0}"#).unwrap();
    assert_eq!(code(&splitfactor(d, &["simulate", "--config", "bad.json", "--out", "x.csv"])), 1);
}
