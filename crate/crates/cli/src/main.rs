//! Command-line front door: evaluate deviation bounds, sweep x-grids to CSV,
//! run seeded verification experiments, compute empirical-Bernstein
//! confidence radii from matrix files, evaluate prior-work baselines, and run
//! the library self-test suites.
//!
//! Structured output is single-line JSON on stdout; `scan` emits CSV. Every
//! usage or precondition failure prints a `{"error": ...}` object and exits
//! with code 2; an empirical bound violation in `verify` (or a failing
//! self-test check) exits with code 1.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mtb_core::bounds::{
    baseline, cor_empirical, eval_named, BaselineKind, BaselineParams, BoundResult, TailParams,
};
use mtb_core::linalg::{lambda_max, HermitianMatrix};
use mtb_core::mc::{run_experiment, SimulationConfig};
use mtb_core::scalar::Tolerance;
use mtb_core::selftest::{run_suite, suite_names};
use mtb_core::{Error, Result};

#[derive(Parser)]
#[command(name = "mtb", version, about = "Matrix-martingale tail bounds: evaluation and Monte Carlo verification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one deviation bound at a single x; prints a BoundResult JSON line
    Bound(BoundArgs),
    /// Evaluate one bound over an x-grid; prints CSV (x,deviation,failure_budget,regime,formula)
    Scan(ScanArgs),
    /// Run a seeded Monte Carlo experiment from a JSON config; exit 1 if the bound is violated
    Verify(VerifyArgs),
    /// Data-driven confidence radius around the sample mean of a matrix file
    Empirical(EmpiricalArgs),
    /// Evaluate a prior-work baseline bound
    Baseline(BaselineArgs),
    /// Run the built-in invariant check suites
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct BoundFlags {
    /// One of: thm1-ben thm1-ber thm1-mixed thm1-monotone thm2 thm3-ben
    /// thm3-ber cor-iid cor-scalar cor-cov cor-cov-lower mcd-ben mcd-ber
    #[arg(long)]
    theorem: String,
    /// Orlicz exponent of the increment norms (not used by thm2)
    #[arg(long)]
    alpha: Option<f64>,
    /// Total standard-deviation proxy sqrt(lambda_max(Sigma))
    #[arg(long)]
    sigma: f64,
    /// Root-sum-square of the per-step norms (not used by thm2)
    #[arg(long = "bigU")]
    big_u: Option<f64>,
    /// Largest per-step norm (sup-norm K for thm2)
    #[arg(long = "bigK")]
    big_k: f64,
    /// Ambient dimension (exclusive with --cov)
    #[arg(long)]
    d: Option<usize>,
    /// Covariance-proxy matrix file, JSON {"d", "re", "im"} (exclusive with --d)
    #[arg(long)]
    cov: Option<PathBuf>,
    /// Variance inflation parameter in (0, 1] for the unbounded intrinsic-dimension bound
    #[arg(long)]
    eps: Option<f64>,
    /// Step count for the i.i.d. and bounded-differences corollaries
    #[arg(long)]
    n: Option<u64>,
    /// Scan resolution for the monotone-sigma improvement
    #[arg(long, default_value_t = 64)]
    grid: u32,
    /// Evaluate the alpha < 1 log block with the literal stated constants
    /// instead of the conservative proof-side ones
    #[arg(long)]
    paper_literal: bool,
    /// Use the alpha/2 exponent reading in the covariance-corollary min block
    #[arg(long)]
    cov_half_alpha: bool,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    flags: BoundFlags,
    /// Confidence parameter: failure budget scales like e^-x
    #[arg(long)]
    x: f64,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    flags: BoundFlags,
    /// x-grid as a:b:steps (inclusive endpoints; steps is the row count)
    #[arg(long = "x-grid")]
    x_grid: String,
    /// Grid spacing: lin or log
    #[arg(long = "grid-scale", default_value = "lin")]
    grid_scale: String,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// SimulationConfig JSON file
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config and the MTB_SEED env var
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count; reports are byte-identical for any value
    #[arg(long)]
    threads: Option<usize>,
    /// Also write the report JSON here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EmpiricalArgs {
    /// JSON array of matrices in the shared {"d", "re", "im"} encoding
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    /// Declared per-step Orlicz norm bound
    #[arg(long = "bigK")]
    big_k: f64,
    #[arg(long)]
    x: f64,
}

#[derive(Args)]
struct BaselineArgs {
    /// One of: bernstein bennett freedman matrix-moment koltchinskii minsker
    /// klochkov-zhivotovskiy maurer-function maurer-norm
    #[arg(long)]
    kind: String,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long = "bigK")]
    big_k: Option<f64>,
    #[arg(long = "bigU")]
    big_u: Option<f64>,
    /// Deviation level for tail-form baselines
    #[arg(long)]
    t: Option<f64>,
    /// Confidence parameter for deviation-form baselines
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Free rate constant c (required by kinds whose source leaves it unspecified)
    #[arg(long = "const-c")]
    const_c: Option<f64>,
    /// Free prefactor constant C
    #[arg(long = "const-big-c")]
    const_big_c: Option<f64>,
    /// Free validity-threshold constant c1
    #[arg(long = "const-c1")]
    const_c1: Option<f64>,
    /// Mean covariance matrix file for the spectral-min prefactor
    #[arg(long = "mean-cov")]
    mean_cov: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Restrict to one suite: scalar linalg orlicz bounds montecarlo
    #[arg(long)]
    suite: Option<String>,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            emit_error(&e.to_string());
            return 2;
        }
    };
    let out = match cli.cmd {
        Cmd::Bound(a) => cmd_bound(&a),
        Cmd::Scan(a) => cmd_scan(&a),
        Cmd::Verify(a) => cmd_verify(&a),
        Cmd::Empirical(a) => cmd_empirical(&a),
        Cmd::Baseline(a) => cmd_baseline(&a),
        Cmd::Selftest(a) => cmd_selftest(&a),
    };
    match out {
        Ok(code) => code,
        Err(e) => {
            emit_error(&e.to_string());
            2
        }
    }
}

fn emit_error(msg: &str) {
    // Machine-readable failure on stdout so callers can parse every outcome.
    println!("{}", serde_json::json!({ "error": msg }));
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| Error::Invalid(format!("write {}: {e}", path.display())))
}

fn load_matrix(path: &Path) -> Result<HermitianMatrix> {
    HermitianMatrix::from_json(&read_file(path)?)
}

/// Builds TailParams from the shared flags; `alpha` and `bigU` are only
/// demanded by the theorems that actually use them.
fn tail_params(f: &BoundFlags, x: f64) -> Result<TailParams> {
    let alpha = f
        .alpha
        .ok_or_else(|| Error::Precondition(format!("'{}' requires --alpha", f.theorem)))?;
    let big_u = f
        .big_u
        .ok_or_else(|| Error::Precondition(format!("'{}' requires --bigU", f.theorem)))?;
    let mut p = TailParams::new(alpha, f.sigma, big_u, f.big_k, x);
    p.dim = f.d;
    p.cov = f.cov.as_deref().map(load_matrix).transpose()?;
    if let Some(eps) = f.eps {
        p.eps = eps;
    }
    p.n = f.n;
    p.literal_log_block = f.paper_literal;
    p.cov_half_alpha = f.cov_half_alpha;
    Ok(p)
}

/// Resolve flags into core parameters and dispatch on the theorem token.
/// `thm2` ignores --alpha/--bigU, so those become optional there; every other
/// token requires them up front for a precise error message.
fn eval_theorem(f: &BoundFlags, x: f64) -> Result<BoundResult> {
    let p = if f.theorem == "thm2" {
        let mut p = TailParams::new(f.alpha.unwrap_or(1.0), f.sigma, f.big_u.unwrap_or(f.big_k), f.big_k, x);
        p.dim = f.d;
        p.cov = f.cov.as_deref().map(load_matrix).transpose()?;
        if p.cov.is_none() && p.dim.is_none() {
            return Err(Error::Precondition("'thm2' needs exactly one of --d / --cov".into()));
        }
        p
    } else {
        tail_params(f, x)?
    };
    eval_named(&f.theorem, &p, f.grid, &Tolerance::default())
}

fn cmd_bound(a: &BoundArgs) -> Result<i32> {
    let res = eval_theorem(&a.flags, a.x)?;
    println!("{}", to_json(&res)?);
    Ok(0)
}

fn parse_grid(spec: &str, scale: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Invalid(format!("--x-grid must be a:b:steps, got '{spec}'")));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| Error::Invalid(format!("bad grid start '{}'", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Invalid(format!("bad grid end '{}'", parts[1])))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| Error::Invalid(format!("bad grid step count '{}'", parts[2])))?;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Invalid("grid endpoints must be finite".into()));
    }
    match scale {
        "lin" => Ok(linspace(a, b, steps)),
        "log" => {
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::Invalid("log grid needs positive endpoints".into()));
            }
            Ok(linspace(a.ln(), b.ln(), steps).into_iter().map(f64::exp).collect())
        }
        other => Err(Error::Invalid(format!("--grid-scale must be lin or log, got '{other}'"))),
    }
}

/// Inclusive grid with exact endpoints; steps is the point count.
fn linspace(a: f64, b: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![a],
        _ => (0..steps)
            .map(|i| {
                if i == steps - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    }
}

fn cmd_scan(a: &ScanArgs) -> Result<i32> {
    let grid = parse_grid(&a.x_grid, &a.grid_scale)?;
    let mut csv = String::from("x,deviation,failure_budget,regime,formula\n");
    for &x in &grid {
        let r = eval_theorem(&a.flags, x)?;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            x, r.deviation, r.failure_budget, r.regime, r.formula
        ));
    }
    match &a.out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var("MTB_SEED") {
        Ok(s) => {
            let v = s.trim().parse::<u64>().map_err(|_| {
                Error::Invalid(format!("MTB_SEED must be an unsigned integer, got '{s}'"))
            })?;
            Ok(Some(v))
        }
        Err(_) => Ok(None),
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let text = read_file(&a.config)?;
    let mut cfg: SimulationConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Invalid(format!("config {}: {e}", a.config.display())))?;
    cfg.seed = a.seed.or(cfg.seed).or(seed_from_env()?);
    cfg.threads = a.threads.or(cfg.threads);
    let report = run_experiment(&cfg)?;
    let line = to_json(&report)?;
    println!("{line}");
    if let Some(path) = &a.out {
        write_file(path, &format!("{line}\n"))?;
    }
    eprintln!("runtime_seconds: {:.3}", report.runtime_seconds);
    Ok(if report.pass { 0 } else { 1 })
}

#[derive(Serialize)]
struct EmpiricalOut {
    center_norm_bound: Option<f64>,
    sigma_hat: f64,
    z_hat: Option<f64>,
    budget: f64,
}

fn cmd_empirical(a: &EmpiricalArgs) -> Result<i32> {
    let text = read_file(&a.input)?;
    let mats: Vec<HermitianMatrix> = serde_json::from_str(&text)
        .map_err(|e| Error::Invalid(format!("input {}: {e}", a.input.display())))?;
    let n = mats.len();
    if n == 0 {
        return Err(Error::Invalid("input holds no matrices".into()));
    }
    let d = mats[0].dim();
    let inv_n = 1.0 / n as f64;
    let mut mean = HermitianMatrix::zeros(d);
    for m in &mats {
        mean.add_scaled(m, inv_n)?;
    }
    let mut cov = HermitianMatrix::zeros(d);
    for m in &mats {
        let diff = m.sub(&mean)?;
        cov.add_scaled(&diff.square(), inv_n)?;
    }
    // lambda_max of a PSD average can come out a hair negative numerically
    let sigma_hat = lambda_max(&cov)?.max(0.0).sqrt();
    let eb = cor_empirical(sigma_hat, a.big_k, a.alpha, a.x, n as u64, d)?;
    let out = EmpiricalOut {
        center_norm_bound: finite(eb.radius),
        sigma_hat,
        z_hat: finite(eb.z_hat),
        budget: eb.failure_budget,
    };
    println!("{}", to_json(&out)?);
    Ok(0)
}

/// Infinite values serialize as JSON null, matching the report convention.
fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn cmd_baseline(a: &BaselineArgs) -> Result<i32> {
    let kind = BaselineKind::from_str(&a.kind)?;
    let params = BaselineParams {
        sigma: a.sigma,
        big_k: a.big_k,
        big_u: a.big_u,
        t: a.t,
        x: a.x,
        dim: a.d,
        n: a.n,
        alpha: a.alpha,
        free_constant: a.const_c,
        free_prefactor: a.const_big_c,
        free_validity: a.const_c1,
        mean_cov: a.mean_cov.as_deref().map(load_matrix).transpose()?,
    };
    let out = baseline(kind, &params)?;
    println!("{}", to_json(&out)?);
    Ok(0)
}

fn cmd_selftest(a: &SelftestArgs) -> Result<i32> {
    let names: Vec<String> = match &a.suite {
        Some(s) => vec![s.clone()],
        None => suite_names().iter().map(|s| s.to_string()).collect(),
    };
    let mut total = 0usize;
    let mut failed = 0usize;
    for name in &names {
        let checks = run_suite(name).ok_or_else(|| {
            Error::Invalid(format!(
                "unknown suite '{name}' (expected one of {})",
                suite_names().join(", ")
            ))
        })?;
        let ok = checks.iter().filter(|c| c.pass).count();
        println!("suite {name}: {ok}/{} ok", checks.len());
        for c in checks.iter().filter(|c| !c.pass) {
            println!("  FAIL {}: {}", c.name, c.detail);
        }
        total += checks.len();
        failed += checks.len() - ok;
    }
    if failed == 0 {
        println!("selftest: PASS ({total} checks)");
        Ok(0)
    } else {
        println!("selftest: FAIL ({failed}/{total} checks failed)");
        Ok(1)
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Invalid(format!("serialize: {e}")))
}
