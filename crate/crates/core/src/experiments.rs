//! Seeded Monte-Carlo recovery grids.
//!
//! Every trial owns its random streams: the seed of the kernel draw and of
//! the sample draw are hashes of `(base, N, n, trial, role)`, so a cell's
//! results do not depend on which other cells are in the grid or on the
//! order in which a thread pool runs the trials.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use log::warn;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{self, estimate, EstimateOptions, ExactMinors};
use crate::graph::{random_chordal, UGraph};
use crate::kernel::{self, Kernel, RHO_EXACT_MAX_DIM};
use crate::linalg::{eig_sym, SymMatrix};
use crate::sampler::{sample, RngSeed, SamplerMethod};

/// Consecutive invalid clique draws tolerated before giving up.
pub const CLIQUE_MAX_ATTEMPTS: usize = 100;

/// Dimension up to which the brute-force sampler is picked automatically.
pub const AUTO_BRUTE_FORCE_MAX_DIM: usize = 12;

/// Points produced by a bare `log` grid step.
pub const DEFAULT_LOG_POINTS: usize = 8;

const ROLE_KERNEL: u64 = 1;
const ROLE_SAMPLES: u64 = 2;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one trial role, hashed from the base seed and the cell.
pub fn derive_seed(base: u64, n_dim: usize, n: usize, trial: usize, role: u64) -> RngSeed {
    let h = [n_dim as u64, n as u64, trial as u64, role]
        .into_iter()
        .fold(splitmix64(base), |h, part| splitmix64(h ^ part));
    RngSeed::new(h, role)
}

fn random_sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.gen_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

/// `½I + ¼A` with independent ±1 signs on the edges of `C_N`.
pub fn gen_cycle_kernel(n_dim: usize, seed: RngSeed) -> Result<Kernel> {
    let g = UGraph::cycle(n_dim)?;
    let mut rng = seed.rng();
    let mut m = SymMatrix::from_diagonal(&vec![0.5; n_dim])?;
    for &(i, j) in g.edges() {
        m.set(i, j, 0.25 * random_sign(&mut rng));
    }
    Kernel::with_alpha(m, 0.25)
}

/// `½I + A/(4√N)` with a full symmetric ±1 matrix `A`, redrawn on a fresh
/// stream until the spectrum lies in `[0, 1]`. Returns the kernel and the
/// number of rejected draws.
pub fn gen_clique_kernel(n_dim: usize, seed: RngSeed) -> Result<(Kernel, usize)> {
    if n_dim < 3 {
        return Err(Error::input("clique kernels need N >= 3"));
    }
    let c = 0.25 / (n_dim as f64).sqrt();
    for attempt in 0..CLIQUE_MAX_ATTEMPTS {
        let stream = seed.stream.wrapping_add((attempt as u64) << 32);
        let mut rng = RngSeed::new(seed.seed, stream).rng();
        let mut m = SymMatrix::from_diagonal(&vec![0.5; n_dim])?;
        for i in 0..n_dim {
            for j in i + 1..n_dim {
                m.set(i, j, c * random_sign(&mut rng));
            }
        }
        let eig = eig_sym(&m)?;
        let lo = eig.values.last().copied().unwrap_or(0.0);
        let hi = eig.values.first().copied().unwrap_or(0.0);
        if lo >= 0.0 && hi <= 1.0 {
            return Ok((Kernel::with_alpha(m, c)?, attempt));
        }
    }
    Err(Error::numeric(format!(
        "{CLIQUE_MAX_ATTEMPTS} consecutive clique kernels of dimension {n_dim} were invalid"
    )))
}

/// Random chordal graph (cliques of at most 4 vertices) with ±c entries,
/// where `c = min(1/4, 1/(2 λ_max(|A|)))` keeps `½I + cA` inside `[0, I]`.
pub fn gen_chordal_kernel(n_dim: usize, seed: RngSeed) -> Result<Kernel> {
    let mut rng = seed.rng();
    let g = random_chordal(n_dim, 4, 0.1, &mut rng);
    let adjacency = SymMatrix::from_fn(n_dim, |i, j| if i != j && g.has_edge(i, j) { 1.0 } else { 0.0 })?;
    let lambda = eig_sym(&adjacency)?.values.first().copied().unwrap_or(0.0);
    let c = if lambda > 0.0 { (0.5 / lambda).min(0.25) } else { 0.25 };
    let mut m = SymMatrix::from_diagonal(&vec![0.5; n_dim])?;
    for &(i, j) in g.edges() {
        m.set(i, j, c * random_sign(&mut rng));
    }
    Kernel::with_alpha(m, c)
}

/// Kernel generator of a grid.
#[derive(Clone, Debug)]
pub enum Family {
    Cycle,
    Clique,
    Chordal,
    /// A fixed kernel; the N grid must contain only its dimension.
    File(Kernel),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Cycle => "cycle",
            Family::Clique => "clique",
            Family::Chordal => "chordal",
            Family::File(_) => "file",
        }
    }

    /// Kernel for one trial, with its separation parameter.
    pub fn generate(&self, n_dim: usize, seed: RngSeed) -> Result<(Kernel, f64)> {
        let k = match self {
            Family::Cycle => gen_cycle_kernel(n_dim, seed)?,
            Family::Clique => gen_clique_kernel(n_dim, seed)?.0,
            Family::Chordal => gen_chordal_kernel(n_dim, seed)?,
            Family::File(k) => {
                if k.dim() != n_dim {
                    return Err(Error::input(format!(
                        "kernel file has dimension {}, grid asks for {n_dim}",
                        k.dim()
                    )));
                }
                k.clone()
            }
        };
        let alpha = k
            .alpha()
            .ok_or_else(|| Error::input("kernel has no separation parameter; pass alpha"))?;
        Ok((k, alpha))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the estimator's minors come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentMode {
    Sampled,
    /// Determinants of the true kernel; `n` is ignored.
    Exact,
}

#[derive(Clone, Debug)]
pub struct TrialConfig {
    pub family: Family,
    pub n_dims: Vec<usize>,
    pub sample_sizes: Vec<usize>,
    pub trials: usize,
    /// Separation given to the estimator; the generator's own when `None`.
    pub alpha: Option<f64>,
    pub base_seed: u64,
    /// `None` picks brute force up to [`AUTO_BRUTE_FORCE_MAX_DIM`].
    pub sampler: Option<SamplerMethod>,
    pub moments: MomentMode,
    pub force_general: bool,
    /// Record wall time; when off the `seconds` column is 0 so output is
    /// byte-for-byte reproducible.
    pub timing: bool,
}

impl TrialConfig {
    pub fn new(family: Family, n_dims: Vec<usize>, sample_sizes: Vec<usize>) -> Self {
        Self {
            family,
            n_dims,
            sample_sizes,
            trials: 50,
            alpha: None,
            base_seed: 0,
            sampler: None,
            moments: MomentMode::Sampled,
            force_general: false,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_dims.is_empty() || self.sample_sizes.is_empty() {
            return Err(Error::input("grids must be nonempty"));
        }
        if self.trials == 0 {
            return Err(Error::input("trials must be at least 1"));
        }
        if self.sample_sizes.contains(&0) {
            return Err(Error::input("sample sizes must be at least 1"));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::input(format!("alpha must lie in (0, 1), got {a}")));
            }
        }
        let min_dim = match self.family {
            Family::Cycle | Family::Clique => 3,
            Family::Chordal | Family::File(_) => 1,
        };
        if let Some(&d) = self.n_dims.iter().find(|&&d| d < min_dim) {
            return Err(Error::input(format!(
                "{} family needs N >= {min_dim}, got {d}",
                self.family
            )));
        }
        Ok(())
    }
}

/// One trial's outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub graph_recovered: bool,
    pub signs_recovered: bool,
    pub rho: Option<f64>,
    pub seconds: f64,
    pub error: Option<String>,
}

/// Aggregates of one `(N, n)` cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellResult {
    pub family: String,
    pub n_dim: usize,
    pub n: usize,
    pub trials: usize,
    pub graph_rate: f64,
    pub sign_rate: f64,
    /// Mean over trials that completed; NaN if none did.
    pub mean_rho: f64,
    pub seconds: f64,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridResult {
    pub cells: Vec<CellResult>,
}

impl GridResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,N,n,trials,graph_rate,sign_rate,mean_rho,seconds\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{:.3}",
                c.family, c.n_dim, c.n, c.trials, c.graph_rate, c.sign_rate, c.mean_rho, c.seconds
            );
        }
        out
    }

    pub fn cell(&self, n_dim: usize, n: usize) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.n_dim == n_dim && c.n == n)
    }
}

/// Runs one seeded trial.
pub fn run_trial(cfg: &TrialConfig, n_dim: usize, n: usize, trial: usize) -> TrialOutcome {
    let start = Instant::now();
    let result = trial_inner(cfg, n_dim, n, trial);
    let seconds = if cfg.timing {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    };
    match result {
        Ok(m) => TrialOutcome {
            graph_recovered: m.graph_recovered,
            signs_recovered: m.signs_recovered,
            rho: Some(m.rho),
            seconds,
            error: None,
        },
        Err(e) => {
            warn!("trial N={n_dim} n={n} #{trial} failed: {e}");
            TrialOutcome {
                graph_recovered: false,
                signs_recovered: false,
                rho: None,
                seconds,
                error: Some(e.to_string()),
            }
        }
    }
}

fn trial_inner(cfg: &TrialConfig, n_dim: usize, n: usize, trial: usize) -> Result<estimator::SuccessMetrics> {
    let base = cfg.base_seed;
    let (k, own_alpha) = cfg
        .family
        .generate(n_dim, derive_seed(base, n_dim, n, trial, ROLE_KERNEL))?;
    let opts = EstimateOptions {
        alpha: cfg.alpha.unwrap_or(own_alpha),
        force_general: cfg.force_general,
    };
    let result = match cfg.moments {
        MomentMode::Exact => estimate(&ExactMinors(&k), &opts)?,
        MomentMode::Sampled => {
            let method = cfg.sampler.unwrap_or(if n_dim <= AUTO_BRUTE_FORCE_MAX_DIM {
                SamplerMethod::BruteForce
            } else {
                SamplerMethod::Spectral
            });
            let samples = sample(&k, n, derive_seed(base, n_dim, n, trial, ROLE_SAMPLES), method)?;
            estimate(&samples, &opts)?
        }
    };
    let rho = if n_dim <= RHO_EXACT_MAX_DIM {
        kernel::rho(&result.khat, &k)?
    } else {
        kernel::rho_heuristic(&result.khat, &k)?
    };
    Ok(estimator::metrics_with_rho(&k, &result, rho))
}

/// Runs every `(N, n, trial)` job, in parallel on the current rayon pool,
/// and aggregates per cell in grid order.
pub fn run_grid(cfg: &TrialConfig) -> Result<GridResult> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = cfg
        .n_dims
        .iter()
        .flat_map(|&d| cfg.sample_sizes.iter().map(move |&n| (d, n)))
        .collect();
    let jobs: Vec<(usize, usize, usize)> = cells
        .iter()
        .flat_map(|&(d, n)| (0..cfg.trials).map(move |t| (d, n, t)))
        .collect();
    let outcomes: Vec<TrialOutcome> = jobs
        .par_iter()
        .map(|&(d, n, t)| run_trial(cfg, d, n, t))
        .collect();
    let cells = cells
        .iter()
        .zip(outcomes.chunks(cfg.trials))
        .map(|(&(d, n), chunk)| aggregate(cfg, d, n, chunk))
        .collect();
    Ok(GridResult { cells })
}

fn aggregate(cfg: &TrialConfig, n_dim: usize, n: usize, chunk: &[TrialOutcome]) -> CellResult {
    let trials = chunk.len();
    let frac = |count: usize| count as f64 / trials as f64;
    let rhos: Vec<f64> = chunk.iter().filter_map(|o| o.rho).collect();
    let mean_rho = if rhos.is_empty() {
        f64::NAN
    } else {
        rhos.iter().sum::<f64>() / rhos.len() as f64
    };
    CellResult {
        family: cfg.family.name().to_string(),
        n_dim,
        n,
        trials,
        graph_rate: frac(chunk.iter().filter(|o| o.graph_recovered).count()),
        sign_rate: frac(chunk.iter().filter(|o| o.signs_recovered).count()),
        mean_rho,
        seconds: chunk.iter().map(|o| o.seconds).sum(),
        failures: chunk.iter().filter(|o| o.error.is_some()).count(),
    }
}

/// Parses a grid: `a`, `a,b,c`, `a:b` (step 1), `a:b:s` (step `s`), or
/// `a:b:log` / `a:b:logK` (`K` geometrically spaced points, rounded and
/// deduplicated; [`DEFAULT_LOG_POINTS`] without `K`).
pub fn parse_grid(text: &str) -> Result<Vec<usize>> {
    let text = text.trim();
    let bad = || Error::input(format!("bad grid specification {text:?}"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    if text.contains(',') {
        return text.split(',').map(num).collect();
    }
    let parts: Vec<&str> = text.split(':').collect();
    let out = match parts[..] {
        [a] => vec![num(a)?],
        [a, b] => (num(a)?..=num(b)?).collect(),
        [a, b, step] => {
            let (lo, hi) = (num(a)?, num(b)?);
            if let Some(k) = step.trim().strip_prefix("log") {
                let points = if k.is_empty() { DEFAULT_LOG_POINTS } else { num(k)? };
                log_grid(lo, hi, points).ok_or_else(bad)?
            } else {
                let s = num(step)?;
                if s == 0 {
                    return Err(bad());
                }
                (lo..=hi).step_by(s).collect()
            }
        }
        _ => return Err(bad()),
    };
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn log_grid(lo: usize, hi: usize, points: usize) -> Option<Vec<usize>> {
    if lo == 0 || hi < lo || points == 0 {
        return None;
    }
    if points == 1 || lo == hi {
        return Some(vec![lo]);
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..points)
        .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp().round() as usize)
        .collect();
    out.dedup();
    Some(out)
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" => Ok(Family::Cycle),
            "clique" => Ok(Family::Clique),
            "chordal" | "chordal-random" => Ok(Family::Chordal),
            other => Err(Error::input(format!(
                "unknown family {other:?}; expected cycle, clique or chordal"
            ))),
        }
    }
}
