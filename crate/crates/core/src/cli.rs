//! The `splitfactor` command line. [`run`] parses the arguments, runs one
//! subcommand and returns the process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | usage error, invalid configuration or I/O failure |
//! | 2 | undetermined keys or no globes in the window |
//! | 3 | a verification check failed |
//!
//! Flags override the values in the `--config` file.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::assignment::{assign_all, KeyAssignment, KeyRef};
use crate::config::{RunConfig, WindowSpec};
use crate::coupling::build_coupling;
use crate::error::{Error, Result};
use crate::factor::{
    coupling_for_volume, evaluate_homomorphism, evaluate_splitting_factor, gamma_split, randomized_split, FactorMode,
    SplitResult,
};
use crate::point_process::{read_points, sample_poisson, write_points, PointSet};
use crate::randomness::{SamplingRegion, UnitValue};
use crate::selection::{select_globes, Globe};
use crate::verification::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNDETERMINED: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "splitfactor", version, about = "Equivariant splitting and thickening of Poisson point processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a homogeneous Poisson process on a box.
    Simulate(SimulateArgs),
    /// Select globes and write them as JSON.
    Globes(GlobesArgs),
    /// Split a configuration into red and blue points.
    Split(SplitArgs),
    /// Map a configuration to a process of higher intensity.
    Thicken(ThickenArgs),
    /// Write the coupling matrix of two Poisson counts as CSV.
    Coupling(CouplingArgs),
    /// Run a verification suite and write its report.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct Overrides {
    /// JSON run configuration; flags below take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    lambda_prime: Option<f64>,
    /// Master seed, a decimal in [0, 1).
    #[arg(long)]
    seed: Option<UnitValue>,
    /// Distance from the window boundary inside which keys must be determined.
    #[arg(long)]
    margin: Option<f64>,
}

impl Overrides {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(l) = self.lambda {
            cfg.lambda = l;
        }
        if let Some(l) = self.lambda_prime {
            cfg.lambda_prime = l;
        }
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(m) = self.margin {
            cfg.margin = m;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Overrides,
    #[arg(long)]
    dim: Option<usize>,
    /// Window `[LO, HI]^dim`.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    window: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GlobesArgs {
    #[command(flatten)]
    common: Overrides,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write key -> (partners, ranks, value) for every key.
    #[arg(long, value_name = "PATH")]
    dump_assignment: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SplitMode {
    /// The deterministic factor.
    Factor,
    /// The randomized splitting driven by the master seed.
    Randomized,
    /// One finite-volume split of the whole window.
    Finite,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[command(flatten)]
    common: Overrides,
    #[arg(long, value_enum, default_value_t = SplitMode::Factor)]
    mode: SplitMode,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out_red: Option<PathBuf>,
    #[arg(long)]
    out_blue: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ThickenMode {
    Iso,
    Translation,
}

#[derive(Debug, Args)]
struct ThickenArgs {
    #[command(flatten)]
    common: Overrides,
    #[arg(long, value_enum, default_value_t = ThickenMode::Iso)]
    mode: ThickenMode,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CouplingArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    truncation: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    suite: Suite,
    #[arg(long, default_value = "0.5")]
    seed: UnitValue,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Smaller sample sizes.
    #[arg(long)]
    quick: bool,
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UndeterminedKeys(_) | Error::NoGlobes => EXIT_UNDETERMINED,
        _ => EXIT_USAGE,
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Globes(a) => globes(a),
        Command::Split(a) => split(a),
        Command::Thicken(a) => thicken(a),
        Command::Coupling(a) => coupling(a),
        Command::Verify(a) => verify(a),
    }
}

fn required(path: Option<PathBuf>, fallback: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    path.or_else(|| fallback.clone()).ok_or_else(|| Error::InvalidConfig(format!("{flag} is required")))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Reads the input and makes the configuration agree with its dimension.
fn load_input(cfg: &mut RunConfig, path: &Path) -> Result<PointSet> {
    let mu = read_points(path)?;
    cfg.dim = mu.dim();
    let w = mu.window();
    cfg.window = WindowSpec::Box { lo: w.lo.coords().to_vec(), hi: w.hi.coords().to_vec() };
    Ok(mu)
}

fn simulate(a: SimulateArgs) -> Result<i32> {
    let mut cfg = a.common.load()?;
    if let Some(d) = a.dim {
        cfg.dim = d;
    }
    if let Some(w) = a.window {
        cfg.window = WindowSpec::Cube([w[0], w[1]]);
    }
    cfg.validate_sampling()?;
    let out = required(a.out, &cfg.outputs.points, "--out")?;
    let mu = sample_poisson(&cfg.window()?, cfg.lambda, cfg.master_seed);
    write_points(&out, &mu)?;
    println!("{} points written to {}", mu.len(), out.display());
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct GlobesFile<'a> {
    dim: usize,
    seeds: Vec<Vec<f64>>,
    globes: &'a [Globe],
    ether_count: usize,
}

#[derive(Serialize)]
struct AssignmentDump<'a> {
    degenerate: bool,
    keys: Vec<&'a KeyAssignment>,
}

fn globes(a: GlobesArgs) -> Result<i32> {
    let mut cfg = a.common.load()?;
    let mu = load_input(&mut cfg, &a.input)?;
    let sel = cfg.selection()?;
    sel.validate()?;
    sel.check_separation(cfg.dim).map_err(Error::InvalidConfig)?;
    let out = required(a.out, &cfg.outputs.globes, "--out")?;
    let outcome = select_globes(&mu, &sel);
    let file = GlobesFile {
        dim: mu.dim(),
        seeds: outcome.seeds.iter().map(|s| s.coords().to_vec()).collect(),
        globes: &outcome.globes,
        ether_count: outcome.ether.len(),
    };
    write_json(&out, &file)?;
    println!("{} globes written to {}", outcome.globes.len(), out.display());
    if let Some(path) = a.dump_assignment {
        let table = assign_all(&outcome, &mu, &sel);
        write_json(&path, &AssignmentDump { degenerate: table.degenerate, keys: table.all() })?;
    }
    Ok(EXIT_OK)
}

fn split(a: SplitArgs) -> Result<i32> {
    let mut cfg = a.common.load()?;
    let mu = load_input(&mut cfg, &a.input)?;
    cfg.mode = FactorMode::SplitFactor;
    let out_red = required(a.out_red, &cfg.outputs.red, "--out-red")?;
    let out_blue = required(a.out_blue, &cfg.outputs.blue, "--out-blue")?;
    let result: SplitResult = match a.mode {
        SplitMode::Factor => {
            cfg.validate()?;
            let eval = evaluate_splitting_factor(&mu, &cfg.factor()?)?;
            if eval.outcome.globes.is_empty() {
                return Err(Error::NoGlobes);
            }
            if !eval.undetermined.is_empty() {
                return Err(Error::UndeterminedKeys(eval.undetermined));
            }
            eval.split
        }
        SplitMode::Randomized => {
            cfg.validate()?;
            randomized_split(&mu, cfg.master_seed, &cfg.factor()?)?
        }
        SplitMode::Finite => {
            cfg.validate_sampling()?;
            if !(cfg.lambda_prime > 0.0 && cfg.lambda_prime < cfg.lambda) {
                return Err(Error::InvalidConfig("splitting needs 0 < lambda_prime < lambda".into()));
            }
            let window = mu.window().clone();
            let q = coupling_for_volume(cfg.lambda, cfg.lambda_prime, window.volume())?;
            gamma_split(&SamplingRegion::Cuboid(window), &mu, cfg.master_seed, &q)?
        }
    };
    write_points(&out_red, &result.red)?;
    write_points(&out_blue, &result.blue)?;
    println!("{} red, {} blue", result.red.len(), result.blue.len());
    Ok(EXIT_OK)
}

fn thicken(a: ThickenArgs) -> Result<i32> {
    let mut cfg = a.common.load()?;
    let mu = load_input(&mut cfg, &a.input)?;
    cfg.mode = match a.mode {
        ThickenMode::Iso => FactorMode::Homomorphism,
        ThickenMode::Translation => FactorMode::TranslationHomomorphism,
    };
    cfg.validate()?;
    let out = required(a.out, &cfg.outputs.points, "--out")?;
    let eval = evaluate_homomorphism(&mu, &cfg.factor()?)?;
    if let Some(inner) = mu.window().shrink(cfg.margin) {
        let mut undetermined: Vec<KeyRef> = eval
            .cells
            .iter()
            .filter(|c| c.points.iter().zip(&c.determined).any(|(p, ok)| !ok && inner.contains(p)))
            .map(|c| KeyRef::Globe(c.globe))
            .collect();
        undetermined.sort();
        if !undetermined.is_empty() {
            return Err(Error::UndeterminedKeys(undetermined));
        }
    }
    write_points(&out, &eval.output)?;
    println!("{} points written to {}", eval.output.len(), out.display());
    Ok(EXIT_OK)
}

fn coupling(a: CouplingArgs) -> Result<i32> {
    let q = build_coupling(a.alpha, a.lambda, a.truncation)?;
    let n = q.truncation();
    let mut w = csv::Writer::from_path(&a.out)?;
    let mut header = vec![String::new()];
    header.extend((0..=n).map(|j| j.to_string()));
    w.write_record(&header)?;
    for (i, row) in q.rows().iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:e}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}

fn verify(a: VerifyArgs) -> Result<i32> {
    let reports = run_suite(a.suite, a.seed, !a.quick)?;
    for r in &reports {
        println!("{}", r.summary());
    }
    if let Some(out) = &a.out {
        write_json(out, &reports)?;
    }
    Ok(if reports.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_parses() {
        Cli::try_parse_from(["splitfactor", "simulate", "--dim", "1", "--lambda", "6", "--window", "-1000", "1000", "--seed", "0.123", "--out", "p.csv"]).unwrap();
        Cli::try_parse_from(["splitfactor", "split", "--mode", "finite", "--in", "p.csv", "--out-red", "r.csv", "--out-blue", "b.csv"]).unwrap();
        Cli::try_parse_from(["splitfactor", "thicken", "--mode", "translation", "--lambda-prime", "9", "--in", "p.csv", "--out", "t.csv"]).unwrap();
        Cli::try_parse_from(["splitfactor", "verify", "--suite", "coupling", "--seed", "0.5"]).unwrap();
        assert!(Cli::try_parse_from(["splitfactor", "split", "--mode", "other", "--in", "p.csv"]).is_err());
        assert!(Cli::try_parse_from(["splitfactor", "verify", "--suite", "nope"]).is_err());
    }

    #[test]
    fn usage_and_help_codes() {
        assert_eq!(run(["splitfactor"]), EXIT_USAGE);
        assert_eq!(run(["splitfactor", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["splitfactor", "--help"]), EXIT_OK);
        assert_eq!(run(["splitfactor", "simulate", "--seed", "1.5", "--out", "x.csv"]), EXIT_USAGE);
    }
}
