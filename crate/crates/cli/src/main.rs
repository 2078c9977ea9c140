//! `scalent`: profile grids, subadditive hulls, grid comparison, the
//! inequality suites, and the accuracy-sensitivity demo, all driven by
//! TOML configs and emitting deterministic CSV/JSON artifacts.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a violated
//! inequality, 2 on any config, input, or runtime error.

mod cache;
mod config;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use scalent_core::cover::DEFAULT_ORACLE_LIMIT;
use scalent_core::profile::{DEFAULT_C_MAX, DEFAULT_RATIO_CAP};
use scalent_core::{
    hull_suite, averaging_suite, preceq_check, product_bound_suite, block_average_suite, stability_diagnostic,
    subadditive_hull, ComparisonWitness, Estimator, ProfileGrid, SeqTriple, SuiteReport, System,
    SystemSpec,
};

use cache::{profile_with_cache, ProfileRun};
use config::{load_config, parse_config, ExperimentConfig, SemimetricSpec};

const DEMO_CONFIG: &str = include_str!("../../../configs/demo_unstable.toml");

/// Default instance counts for the randomized suites; the fixed
/// batteries ignore the budget except for zero, which skips everything.
const AVERAGING_DEFAULT_BUDGET: usize = 100;
const HULL_DEFAULT_BUDGET: usize = 500;
const HULL_N_MAX: usize = 64;
const VERIFY_ORACLE_LIMIT: usize = 32;

#[derive(Parser)]
#[command(
    name = "scalent",
    version,
    about = "Desk-scale laboratory for the epsilon-entropy growth of measure-preserving systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an entropy profile grid and write it as CSV and JSON.
    Profile(RunArgs),
    /// Regularize a sequence triple into its subadditive hull.
    Hull(HullArgs),
    /// Order two profile grids under the bounded-ratio comparison.
    Compare(CompareArgs),
    /// Run the inequality suites; exit 1 on any violation.
    Verify(VerifyArgs),
    /// Profile a weighted product and report its stability diagnostic.
    DemoUnstable(RunArgs),
    /// Realize the configured space and write its points and weights.
    Sample(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML). demo-unstable falls back to a built-in
    /// config when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config estimator.
    #[arg(long, value_enum)]
    estimator: Option<EstimatorArg>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Skip reading and writing the matrix cache under OUT/cache.
    #[arg(long)]
    no_cache: bool,
    /// Overrides the exact-oracle size limit.
    #[arg(long)]
    oracle_limit: Option<usize>,
}

#[derive(Args)]
struct HullArgs {
    /// JSON file with arrays "eta", "phi", "psi" of equal length.
    #[arg(long)]
    input: PathBuf,
    /// Truncate the sequences to this horizon before hulling.
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Left profile grid (JSON, as written by `profile`).
    #[arg(long)]
    left: PathBuf,
    /// Right profile grid (JSON).
    #[arg(long)]
    right: PathBuf,
    /// Largest admissible comparison constant.
    #[arg(long)]
    c_max: Option<f64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run.
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Instance count for the randomized suites; 0 checks nothing.
    #[arg(long)]
    budget: Option<usize>,
    /// Exact-oracle size limit for the suite instances.
    #[arg(long, default_value_t = VERIFY_ORACLE_LIMIT)]
    oracle_limit: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    All,
    Averaging,
    #[value(name = "block_average")]
    BlockAverage,
    Hull,
    #[value(name = "product_bound")]
    ProductBound,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Exact,
    Greedy,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Estimator {
        match e {
            EstimatorArg::Exact => Estimator::Exact,
            EstimatorArg::Greedy => Estimator::Greedy,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Profile(args) => cmd_profile(&args),
        Command::Hull(args) => cmd_hull(&args),
        Command::Compare(args) => cmd_compare(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::DemoUnstable(args) => cmd_demo_unstable(&args),
        Command::Sample(args) => cmd_sample(&args),
    }
}

/// Config plus flag overrides, flattened to what the pipeline consumes.
struct Merged {
    cfg: ExperimentConfig,
    seed: u64,
    estimator: Estimator,
    oracle_limit: usize,
}

impl Merged {
    fn new(cfg: ExperimentConfig, args: &RunArgs) -> Merged {
        let seed = args.seed.or(cfg.seed).unwrap_or(0);
        let estimator = args.estimator.map(Estimator::from).unwrap_or(cfg.estimator);
        let oracle_limit = args
            .oracle_limit
            .or(cfg.oracle_limit)
            .unwrap_or(DEFAULT_ORACLE_LIMIT);
        Merged {
            cfg,
            seed,
            estimator,
            oracle_limit,
        }
    }

    fn profile_run<'a>(&'a self, rho: &'a scalent_core::Semimetric) -> ProfileRun<'a> {
        ProfileRun {
            spec: &self.cfg.system,
            rho,
            n_grid: &self.cfg.n_grid,
            eps_grid: &self.cfg.eps_grid,
            sample_n: self.cfg.sample_n,
            seed: self.seed,
            enumerate: self.cfg.enumerate,
            estimator: self.estimator,
            oracle_limit: self.oracle_limit,
        }
    }
}

fn required_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let path = args
        .config
        .as_deref()
        .context("--config is required for this command")?;
    load_config(path)
}

fn cache_dir(args: &RunArgs) -> Option<PathBuf> {
    (!args.no_cache).then(|| args.out.join("cache"))
}

fn write_grid(grid: &ProfileGrid, out: &Path, csv: &str, json: &str) -> Result<(PathBuf, PathBuf)> {
    let csv_path = out.join(csv);
    let json_path = out.join(json);
    io::atomic_write(&csv_path, grid.to_csv().as_bytes())?;
    let mut text = grid.to_json()?;
    text.push('\n');
    io::atomic_write(&json_path, text.as_bytes())?;
    Ok((csv_path, json_path))
}

fn cmd_profile(args: &RunArgs) -> Result<ExitCode> {
    let merged = Merged::new(required_config(args)?, args);
    let rho = merged.cfg.semimetric.build()?;
    let started = Instant::now();
    let grid = profile_with_cache(&merged.profile_run(&rho), cache_dir(args).as_deref())?;
    let csv = merged.cfg.output.csv.as_deref().unwrap_or("profile.csv");
    let json = merged.cfg.output.json.as_deref().unwrap_or("profile.json");
    let (csv_path, json_path) = write_grid(&grid, &args.out, csv, json)?;
    println!(
        "profile: {} depths x {} accuracy rows, {} estimator, {:.2?}",
        grid.n_grid.len(),
        grid.eps_grid.len(),
        grid.estimator,
        started.elapsed()
    );
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(ExitCode::SUCCESS)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HullInput {
    eta: Vec<f64>,
    phi: Vec<f64>,
    psi: Vec<f64>,
}

fn cmd_hull(args: &HullArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let input: HullInput = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.input.display()))?;
    if input.eta.len() != input.phi.len() || input.phi.len() != input.psi.len() {
        bail!(
            "sequence lengths differ: eta {}, phi {}, psi {}",
            input.eta.len(),
            input.phi.len(),
            input.psi.len()
        );
    }
    let len = input.phi.len();
    let n_max = args.n_max.unwrap_or(len);
    if n_max == 0 {
        bail!("--n-max must be at least 1");
    }
    if n_max > len {
        bail!("--n-max {} exceeds the input length {}", n_max, len);
    }
    let triple = SeqTriple::new(
        input.eta[..n_max].to_vec(),
        input.phi[..n_max].to_vec(),
        input.psi[..n_max].to_vec(),
    )?;
    let hull = subadditive_hull(&triple)?;
    let path = args.out.join("hull.json");
    io::write_json(&path, &hull)?;
    let flagged = hull.horizon.iter().filter(|&&b| b).count();
    println!(
        "hull: N = {}, theta(N) = {}, {} sandwich notes, {} horizon-flagged indices",
        n_max,
        hull.theta[n_max - 1],
        hull.sandwich_notes.len(),
        flagged
    );
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CompareReport {
    left: String,
    right: String,
    c_max: f64,
    left_to_right: ComparisonWitness,
    right_to_left: ComparisonWitness,
    equivalent: bool,
}

fn read_grid(path: &Path) -> Result<ProfileGrid> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let grid: ProfileGrid =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    grid.validate()
        .with_context(|| format!("validating {}", path.display()))?;
    Ok(grid)
}

fn direction_line(label: &str, witness: &ComparisonWitness) -> String {
    if witness.ok {
        let c = witness
            .pairs
            .iter()
            .map(|p| p.c)
            .fold(0.0f64, f64::max);
        format!("{label}: holds, worst constant {c}")
    } else {
        format!(
            "{label}: fails at epsilon = {}",
            witness.failed_eps.unwrap_or(f64::NAN)
        )
    }
}

fn cmd_compare(args: &CompareArgs) -> Result<ExitCode> {
    let left = read_grid(&args.left)?;
    let right = read_grid(&args.right)?;
    let c_max = args.c_max.unwrap_or(DEFAULT_C_MAX);
    let left_to_right = preceq_check(&left, &right, c_max)?;
    let right_to_left = preceq_check(&right, &left, c_max)?;
    let report = CompareReport {
        left: args.left.display().to_string(),
        right: args.right.display().to_string(),
        c_max,
        equivalent: left_to_right.ok && right_to_left.ok,
        left_to_right,
        right_to_left,
    };
    let path = args.out.join("compare.json");
    io::write_json(&path, &report)?;
    println!(
        "{}",
        direction_line("left <= right", &report.left_to_right)
    );
    println!(
        "{}",
        direction_line("right <= left", &report.right_to_left)
    );
    println!(
        "equivalent: {} (C_max = {})",
        if report.equivalent { "yes" } else { "no" },
        c_max
    );
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let mut reports: Vec<SuiteReport> = Vec::new();
    if args.budget != Some(0) {
        let avg_budget = args.budget.unwrap_or(AVERAGING_DEFAULT_BUDGET);
        let hull_budget = args.budget.unwrap_or(HULL_DEFAULT_BUDGET);
        if matches!(args.suite, SuiteArg::All | SuiteArg::Averaging) {
            reports.push(averaging_suite(avg_budget, args.seed, args.oracle_limit)?);
        }
        if matches!(args.suite, SuiteArg::All | SuiteArg::BlockAverage) {
            reports.push(block_average_suite(args.oracle_limit)?);
        }
        if matches!(args.suite, SuiteArg::All | SuiteArg::Hull) {
            reports.push(hull_suite(hull_budget, args.seed, HULL_N_MAX)?);
        }
        if matches!(args.suite, SuiteArg::All | SuiteArg::ProductBound) {
            reports.push(product_bound_suite(args.oracle_limit)?);
        }
    }
    let path = args.out.join("verify_report.json");
    io::write_json(&path, &reports)?;
    let mut violations = 0usize;
    for report in &reports {
        violations += report.violations;
        println!(
            "  {}: {} instances, {} violations, {} skipped",
            report.name, report.instances, report.violations, report.skipped
        );
    }
    println!("wrote {}", path.display());
    if violations > 0 {
        println!("verify: FAIL ({violations} violations, {:.2?})", started.elapsed());
        Ok(ExitCode::from(1))
    } else {
        println!("verify: ok ({:.2?})", started.elapsed());
        Ok(ExitCode::SUCCESS)
    }
}

/// The demo needs the shape the diagnostic is about: at least two
/// factors, mixed with geometrically decaying weights.
fn check_demo_shape(cfg: &ExperimentConfig) -> Result<()> {
    let SystemSpec::Product { components } = &cfg.system else {
        bail!("system: demo-unstable needs a product system");
    };
    if components.len() < 2 {
        bail!("system.components: demo-unstable needs at least two factors");
    }
    let SemimetricSpec::WeightedSum { components: parts } = &cfg.semimetric else {
        bail!("semimetric: demo-unstable needs a weighted_sum over the factors");
    };
    if parts.len() != components.len() {
        bail!(
            "semimetric.components: {} distance terms for {} factors",
            parts.len(),
            components.len()
        );
    }
    for (i, part) in parts.iter().enumerate() {
        let want = 0.5f64.powi(i as i32 + 1);
        if (part.weight - want).abs() > 1e-12 {
            bail!(
                "semimetric.components[{i}].weight: demo weighting is 2^-(m+1), expected {want}, got {}",
                part.weight
            );
        }
    }
    Ok(())
}

fn cmd_demo_unstable(args: &RunArgs) -> Result<ExitCode> {
    let cfg = match args.config.as_deref() {
        Some(path) => load_config(path)?,
        None => parse_config(DEMO_CONFIG).context("built-in demo config")?,
    };
    check_demo_shape(&cfg)?;
    let ratio_cap = cfg.ratio_cap.unwrap_or(DEFAULT_RATIO_CAP);
    let merged = Merged::new(cfg, args);
    let rho = merged.cfg.semimetric.build()?;
    let grid = profile_with_cache(&merged.profile_run(&rho), cache_dir(args).as_deref())?;
    let csv = merged.cfg.output.csv.as_deref().unwrap_or("profile.csv");
    let json = merged.cfg.output.json.as_deref().unwrap_or("profile.json");
    let (csv_path, json_path) = write_grid(&grid, &args.out, csv, json)?;
    let report = stability_diagnostic(&grid, ratio_cap)?;
    let stability = merged
        .cfg
        .output
        .stability
        .as_deref()
        .unwrap_or("stability.json");
    let stability_path = args.out.join(stability);
    io::write_json(&stability_path, &report)?;
    println!("demo-unstable: {}", report.message);
    for pair in &report.pairs {
        println!(
            "  eps {} -> {}: band {:.3}, tail increasing: {}, flagged: {}",
            pair.eps_coarse, pair.eps_fine, pair.band, pair.tail_increasing, pair.flagged
        );
    }
    println!(
        "wrote {}, {}, {}",
        csv_path.display(),
        json_path.display(),
        stability_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_sample(args: &RunArgs) -> Result<ExitCode> {
    let merged = Merged::new(required_config(args)?, args);
    let system = System::build(
        &merged.cfg.system,
        merged.cfg.sample_n,
        merged.seed,
        merged.cfg.enumerate,
        1,
    )?;
    let space = &system.space;
    let mut csv = String::from("index,weight,point\n");
    for (i, (point, weight)) in space.points().iter().zip(space.weights()).enumerate() {
        let point_json = serde_json::to_string(point).context("serializing point")?;
        csv.push_str(&format!("{i},{weight},{}\n", io::csv_field(&point_json)));
    }
    let csv_name = merged.cfg.output.csv.as_deref().unwrap_or("space.csv");
    let json_name = merged.cfg.output.json.as_deref().unwrap_or("space.json");
    let csv_path = args.out.join(csv_name);
    let json_path = args.out.join(json_name);
    io::atomic_write(&csv_path, csv.as_bytes())?;
    io::write_json(&json_path, space)?;
    println!(
        "sample: {} points ({}), wrote {} and {}",
        space.len(),
        if merged.cfg.enumerate {
            "enumerated"
        } else {
            "sampled"
        },
        csv_path.display(),
        json_path.display()
    );
    Ok(ExitCode::SUCCESS)
}
