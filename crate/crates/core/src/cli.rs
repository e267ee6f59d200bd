//! The `dpp-moments` command line.
//!
//! Every artifact written as CSV or plain text gets a `<file>.json` sidecar
//! recording the command, its parameters, the seed and the crate version.
//! Failures are reported on stderr as one JSON object per line and mapped to
//! exit code 1 (bad input) or 2 (numeric or capability limits).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, LevelFilter};
use serde_json::{json, Value};

use crate::bounds::{self, ComplexityQuery};
use crate::cyclebasis::shortest_maximal_cycle_basis;
use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimateOptions, EstimateResult};
use crate::experiments::{self, parse_grid, Family, MomentMode, TrialConfig};
use crate::graph::UGraph;
use crate::kernel::Kernel;
use crate::linalg::SymMatrix;
use crate::sampler::{self, RngSeed, SampleSet, SamplerMethod};

/// Environment variable fixing the worker thread count.
pub const THREADS_ENV: &str = "DPP_THREADS";

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "dpp-moments", version, about = "Learn DPP kernels from samples by the method of moments")]
struct Cli {
    /// More log output (repeatable); RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw samples from a kernel file or a generated kernel.
    Sample(SampleArgs),
    /// Estimate a kernel from a samples file.
    Estimate(EstimateArgs),
    /// Shortest maximal cycle basis and cycle sparsity of a graph.
    Cyclebasis(CycleBasisArgs),
    /// Sample-size bounds and exact divergences.
    Bounds(BoundsArgs),
    /// Monte-Carlo recovery grid.
    Experiment(ExperimentArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum GenFamily {
    Cycle,
    Clique,
    Chordal,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Spectral,
    Bruteforce,
}

impl From<Method> for SamplerMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Spectral => SamplerMethod::Spectral,
            Method::Bruteforce => SamplerMethod::BruteForce,
        }
    }
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Kernel CSV file.
    #[arg(long, conflicts_with = "family", required_unless_present = "family")]
    kernel: Option<PathBuf>,
    /// Generate the kernel instead of reading it.
    #[arg(long, value_enum, requires = "dim")]
    family: Option<GenFamily>,
    /// Dimension of a generated kernel.
    #[arg(long)]
    dim: Option<usize>,
    /// Number of samples.
    #[arg(short = 'n', long = "n")]
    n: usize,
    /// Random seed; drawn from the clock when omitted and echoed either way.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "spectral")]
    method: Method,
    /// Samples file to write.
    #[arg(long)]
    out: PathBuf,
    /// Also write the generated kernel as CSV.
    #[arg(long)]
    kernel_out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum EstimateFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Samples file, one sample per line, 1-based items.
    #[arg(long)]
    samples: PathBuf,
    /// Separation parameter: smallest nonzero off-diagonal magnitude.
    #[arg(long)]
    alpha: f64,
    /// Ground-set size; read from the samples sidecar or inferred when omitted.
    #[arg(long)]
    dim: Option<usize>,
    /// Use the cycle-basis path even on chordal graphs.
    #[arg(long)]
    force_general: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: EstimateFormat,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct CycleBasisArgs {
    /// Edge list: `n m` then `m` lines `i j`, 1-based.
    #[arg(long)]
    graph: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: TextFormat,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum BoundsMode {
    Recovery,
    Estimation,
    Lower,
    Divergence,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    mode: BoundsMode,
    #[arg(long = "N")]
    n_dim: Option<usize>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Constant of the asymptotic bounds.
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
    /// First kernel CSV (divergence mode).
    #[arg(long)]
    kernel1: Option<PathBuf>,
    /// Second kernel CSV (divergence mode).
    #[arg(long)]
    kernel2: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: TextFormat,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// cycle, clique or chordal; ignored when --kernel is given.
    #[arg(long, default_value = "cycle")]
    family: String,
    /// Fixed kernel CSV used for every trial.
    #[arg(long)]
    kernel: Option<PathBuf>,
    /// Dimension grid, e.g. `4:12`, `5,8`, `4:12:2`.
    #[arg(long = "N")]
    n_dims: String,
    /// Sample-size grid, e.g. `1000:100000:log`.
    #[arg(long = "n")]
    sample_sizes: String,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Separation given to the estimator; the generator's own by default.
    #[arg(long)]
    alpha: Option<f64>,
    /// Sampler; brute force for N <= 12 and spectral above by default.
    #[arg(long, value_enum)]
    sampler: Option<Method>,
    /// Feed exact minors instead of samples.
    #[arg(long)]
    exact_moments: bool,
    #[arg(long)]
    force_general: bool,
    /// Record wall time in the `seconds` column (breaks byte-identical reruns).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", json!({ "error": "usage", "message": first, "exit_code": 1 }));
            return 1;
        }
    };
    init_logging(cli.verbose);
    configure_threads();
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            eprintln!(
                "{}",
                json!({ "error": e.kind(), "message": e.to_string(), "exit_code": code })
            );
            code
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        2 => LevelFilter::Debug,
        _ => LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
}

fn configure_threads() {
    let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) else {
        return;
    };
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        log::debug!("thread pool already initialised; {THREADS_ENV} ignored");
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Sample(a) => cmd_sample(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Cyclebasis(a) => cmd_cyclebasis(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Experiment(a) => cmd_experiment(a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Fails early if `path` cannot be created because its directory is missing.
fn check_output(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
        )),
        _ => Ok(()),
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_sidecar(artifact: &Path, mut provenance: Value) -> Result<()> {
    provenance["version"] = json!(VERSION);
    provenance["artifact"] = json!(artifact.display().to_string());
    write(&sidecar_path(artifact), &format!("{provenance:#}\n"))
}

fn read_kernel(path: &Path) -> Result<Kernel> {
    Kernel::new(SymMatrix::from_csv_str(&read(path)?)?)
}

fn effective_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0)
    })
}

fn cmd_sample(a: SampleArgs) -> Result<()> {
    check_output(&a.out)?;
    if let Some(p) = &a.kernel_out {
        check_output(p)?;
    }
    let seed = effective_seed(a.seed);
    let (k, source) = match (&a.kernel, a.family) {
        (Some(path), _) => (read_kernel(path)?, json!({ "kernel": path.display().to_string() })),
        (None, Some(fam)) => {
            let dim = a.dim.ok_or_else(|| Error::input("--family needs --dim"))?;
            let kseed = RngSeed::new(seed, 1);
            let k = match fam {
                GenFamily::Cycle => experiments::gen_cycle_kernel(dim, kseed)?,
                GenFamily::Clique => experiments::gen_clique_kernel(dim, kseed)?.0,
                GenFamily::Chordal => experiments::gen_chordal_kernel(dim, kseed)?,
            };
            let name = format!("{fam:?}").to_lowercase();
            let source = json!({ "family": name, "dim": dim, "alpha": k.alpha() });
            (k, source)
        }
        (None, None) => return Err(Error::input("give --kernel or --family")),
    };
    if a.n == 0 {
        return Err(Error::input("--n must be at least 1"));
    }
    let method: SamplerMethod = a.method.into();
    let samples = sampler::sample(&k, a.n, RngSeed::new(seed, 0), method)?;
    write(&a.out, &samples.to_text())?;
    write_sidecar(
        &a.out,
        json!({
            "command": "sample",
            "seed": seed,
            "n": a.n,
            "ground_size": k.dim(),
            "method": method.to_string(),
            "source": source,
        }),
    )?;
    if let Some(p) = &a.kernel_out {
        write(p, &k.matrix().to_csv_string())?;
        write_sidecar(p, json!({ "command": "sample", "seed": seed, "source": source }))?;
    }
    println!("{}", json!({ "seed": seed, "samples": a.n, "out": a.out.display().to_string() }));
    Ok(())
}

fn ground_from_sidecar(samples: &Path) -> Option<usize> {
    let text = fs::read_to_string(sidecar_path(samples)).ok()?;
    let v: Value = serde_json::from_str(&text).ok()?;
    v.get("ground_size")?.as_u64().map(|g| g as usize)
}

fn edges_one_based(g: &UGraph) -> Vec<[usize; 2]> {
    g.edges().iter().map(|&(u, v)| [u + 1, v + 1]).collect()
}

fn estimate_summary(r: &EstimateResult, a: &EstimateArgs, ground: usize) -> Value {
    json!({
        "command": "estimate",
        "samples": a.samples.display().to_string(),
        "alpha": a.alpha,
        "force_general": a.force_general,
        "n": r.sample_count,
        "ground_size": ground,
        "path": r.path,
        "sign_system_status": r.sign_system_status,
        "sparsity_estimate": r.sparsity_estimate,
        "warnings": r.warnings,
        "graph": { "n": r.ghat.n(), "edges": edges_one_based(&r.ghat) },
        "signs": r.signs.signs(),
        "basis": r.basis.cycles.iter()
            .map(|c| c.vertices.iter().map(|v| v + 1).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "hhat": r.hhat,
        "bhat_histogram": r.bhat_histogram,
    })
}

fn cmd_estimate(a: EstimateArgs) -> Result<()> {
    check_output(&a.out)?;
    let text = read(&a.samples)?;
    let ground = a.dim.or_else(|| ground_from_sidecar(&a.samples));
    let samples = SampleSet::from_text(&text, ground)?;
    if samples.is_empty() {
        return Err(Error::input(format!("{} contains no samples", a.samples.display())));
    }
    let opts = EstimateOptions {
        alpha: a.alpha,
        force_general: a.force_general,
    };
    let r = estimate(&samples, &opts)?;
    info!(
        "estimated {} edges, sparsity {}, {} path",
        r.ghat.m(),
        r.sparsity_estimate,
        r.path
    );
    let mut summary = estimate_summary(&r, &a, samples.ground_size());
    match a.format {
        EstimateFormat::Csv => {
            write(&a.out, &r.khat.matrix().to_csv_string())?;
            write_sidecar(&a.out, summary)?;
        }
        EstimateFormat::Json => {
            summary["khat"] = json!(r.khat.matrix().rows());
            summary["version"] = json!(VERSION);
            write(&a.out, &format!("{summary:#}\n"))?;
        }
    }
    Ok(())
}

fn cmd_cyclebasis(a: CycleBasisArgs) -> Result<()> {
    if let Some(p) = &a.out {
        check_output(p)?;
    }
    let g = UGraph::from_edge_list(&read(&a.graph)?)?;
    let basis = shortest_maximal_cycle_basis(&g)?;
    let cycles: Vec<Vec<usize>> = basis
        .cycles
        .iter()
        .map(|c| c.vertices.iter().map(|v| v + 1).collect())
        .collect();
    let body = match a.format {
        TextFormat::Text => {
            let mut s = format!("sparsity {}\nnu {}\n", basis.sparsity, basis.nu);
            for c in &cycles {
                let line: Vec<String> = c.iter().map(ToString::to_string).collect();
                s.push_str(&line.join(" "));
                s.push('\n');
            }
            s
        }
        TextFormat::Json => format!(
            "{:#}\n",
            json!({
                "sparsity": basis.sparsity,
                "nu": basis.nu,
                "contains_chorded": basis.contains_chorded,
                "cycles": cycles,
            })
        ),
    };
    match &a.out {
        Some(p) => {
            write(p, &body)?;
            if a.format == TextFormat::Text {
                write_sidecar(p, json!({ "command": "cyclebasis", "graph": a.graph.display().to_string() }))?;
            }
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn cmd_bounds(a: BoundsArgs) -> Result<()> {
    if a.mode == BoundsMode::Divergence {
        let (Some(p1), Some(p2)) = (&a.kernel1, &a.kernel2) else {
            return Err(Error::input("divergence mode needs --kernel1 and --kernel2"));
        };
        let d = bounds::divergence_exhaustive(&read_kernel(p1)?, &read_kernel(p2)?)?;
        match a.format {
            TextFormat::Text => println!("kl {}\nhellinger_sq {}", d.kl, d.hellinger_sq),
            TextFormat::Json => println!("{}", json!(d)),
        }
        return Ok(());
    }
    let need = |name: &str, v: Option<f64>| v.ok_or_else(|| Error::input(format!("--{name} is required")));
    let q = ComplexityQuery {
        n_dim: a.n_dim.ok_or_else(|| Error::input("--N is required"))?,
        ell: a.ell.ok_or_else(|| Error::input("--ell is required"))?,
        alpha: need("alpha", a.alpha)?,
        eps: a.eps,
        delta: a.delta,
        c: a.c,
    };
    let (name, b) = match a.mode {
        BoundsMode::Recovery => ("recovery", bounds::sample_bound_recovery(&q)?),
        BoundsMode::Estimation => ("estimation", bounds::sample_bound_estimation(&q)?),
        BoundsMode::Lower => ("lower", bounds::sample_bound_lower(&q)?),
        BoundsMode::Divergence => unreachable!("handled above"),
    };
    match a.format {
        TextFormat::Text => println!("{}", b.ceil),
        TextFormat::Json => println!(
            "{}",
            json!({ "mode": name, "query": q, "raw": b.raw, "ceil": b.ceil })
        ),
    }
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> Result<()> {
    check_output(&a.out)?;
    let family = match &a.kernel {
        Some(p) => {
            let mut k = read_kernel(p)?;
            if let Some(alpha) = a.alpha {
                k.set_alpha(alpha)?;
            }
            Family::File(k)
        }
        None => a.family.parse()?,
    };
    let seed = effective_seed(a.seed);
    let mut cfg = TrialConfig::new(family, parse_grid(&a.n_dims)?, parse_grid(&a.sample_sizes)?);
    cfg.trials = a.trials;
    cfg.alpha = a.alpha;
    cfg.base_seed = seed;
    cfg.sampler = a.sampler.map(Into::into);
    cfg.moments = if a.exact_moments {
        MomentMode::Exact
    } else {
        MomentMode::Sampled
    };
    cfg.force_general = a.force_general;
    cfg.timing = a.timing;
    cfg.validate()?;
    let grid = experiments::run_grid(&cfg)?;
    write(&a.out, &grid.to_csv())?;
    let failures: usize = grid.cells.iter().map(|c| c.failures).sum();
    write_sidecar(
        &a.out,
        json!({
            "command": "experiment",
            "seed": seed,
            "family": cfg.family.name(),
            "kernel": a.kernel.as_ref().map(|p| p.display().to_string()),
            "N": cfg.n_dims,
            "n": cfg.sample_sizes,
            "trials": cfg.trials,
            "alpha": cfg.alpha,
            "sampler": cfg.sampler.map(|m| m.to_string()),
            "exact_moments": a.exact_moments,
            "force_general": cfg.force_general,
            "timing": cfg.timing,
            "failed_trials": failures,
        }),
    )?;
    println!("{}", json!({ "seed": seed, "cells": grid.cells.len(), "out": a.out.display().to_string() }));
    Ok(())
}
