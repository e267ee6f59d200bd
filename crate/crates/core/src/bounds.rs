//! Sample-size calculators and the cycle kernels behind the lower bound.
//!
//! All logarithms are natural. Calculators return both the real value of the
//! expression and its ceiling.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{self, Kernel};
use crate::linalg::SymMatrix;
use crate::sampler::{pairwise_sum, probability_table};

/// Largest dimension accepted by [`divergence_exhaustive`].
pub const DIVERGENCE_MAX_DIM: usize = 16;

/// Largest `α` for which the two cycle kernels are guaranteed valid.
pub const LOWER_BOUND_MAX_ALPHA: f64 = 0.125;

/// Parameters shared by the sample-size calculators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexityQuery {
    pub n_dim: usize,
    pub ell: usize,
    pub alpha: f64,
    pub eps: f64,
    pub delta: f64,
    /// Unspecified constant of the asymptotic statements.
    pub c: f64,
}

impl ComplexityQuery {
    pub fn new(n_dim: usize, ell: usize, alpha: f64) -> Self {
        Self {
            n_dim,
            ell,
            alpha,
            eps: 0.1,
            delta: 0.1,
            c: 1.0,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_dim < 1 {
            return Err(Error::input("N must be at least 1"));
        }
        if self.ell < 2 {
            return Err(Error::input("cycle sparsity must be at least 2"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::input(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::input(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::input(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::input(format!("C must be positive, got {}", self.c)));
        }
        Ok(())
    }
}

/// Value of a bound expression and its ceiling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundValue {
    pub raw: f64,
    pub ceil: u64,
}

impl BoundValue {
    fn from_raw(raw: f64) -> Result<Self> {
        if !raw.is_finite() || raw > u64::MAX as f64 {
            return Err(Error::numeric(format!("bound {raw} does not fit a sample count")));
        }
        Ok(Self {
            raw,
            ceil: raw.ceil().max(0.0) as u64,
        })
    }
}

/// `log(N^{ℓ+1} / δ) / (α/4)^{2ℓ}`: samples for exact sign recovery with
/// probability `1 - δ`.
pub fn sample_bound_recovery(q: &ComplexityQuery) -> Result<BoundValue> {
    q.validate()?;
    let ell = q.ell as f64;
    let numerator = (ell + 1.0) * (q.n_dim as f64).ln() - q.delta.ln();
    let denominator = (q.alpha / 4.0).powf(2.0 * ell);
    BoundValue::from_raw(numerator / denominator)
}

/// `C (1/(α² ε²) + ℓ (4/α)^{2ℓ}) log N`: samples for `ρ(K̂, K) <= ε`.
pub fn sample_bound_estimation(q: &ComplexityQuery) -> Result<BoundValue> {
    q.validate()?;
    let ell = q.ell as f64;
    let parametric = 1.0 / (q.alpha * q.alpha * q.eps * q.eps);
    let signs = ell * (4.0 / q.alpha).powf(2.0 * ell);
    BoundValue::from_raw(q.c * (parametric + signs) * (q.n_dim as f64).ln())
}

/// `C (8^ℓ / α^{2ℓ} + log(N/ℓ) / (6α)^ℓ + log N / ε²)`, the minimax lower bound.
pub fn sample_bound_lower(q: &ComplexityQuery) -> Result<BoundValue> {
    q.validate()?;
    if q.ell < 3 || q.ell > q.n_dim {
        return Err(Error::input("the lower bound needs 3 <= ell <= N"));
    }
    if !(q.eps <= q.alpha && q.alpha <= LOWER_BOUND_MAX_ALPHA) {
        return Err(Error::input("the lower bound needs eps <= alpha <= 1/8"));
    }
    let ell = q.ell as f64;
    let n = q.n_dim as f64;
    let hellinger = 8f64.powf(ell) / q.alpha.powf(2.0 * ell);
    let fano_cycles = (n / ell).ln() / (6.0 * q.alpha).powf(ell);
    let fano_diag = n.ln() / (q.eps * q.eps);
    BoundValue::from_raw(q.c * (hellinger + fano_cycles + fano_diag))
}

/// The pair `K⁺, K⁻` of `ℓ`-cycle kernels that differ only in the sign of
/// the closing entry.
#[derive(Clone, Debug)]
pub struct LowerBoundKernelPair {
    pub kplus: Kernel,
    pub kminus: Kernel,
}

fn cycle_block(ell: usize, alpha: f64, closing: f64) -> Result<SymMatrix> {
    SymMatrix::from_fn(ell, |i, j| {
        if i == j {
            0.5
        } else if j == i + 1 {
            alpha
        } else if i == 0 && j == ell - 1 {
            closing * alpha
        } else {
            0.0
        }
    })
}

/// Diagonal `1/2`, `α` between consecutive indices, `±α` at `(1, ℓ)`.
pub fn lower_bound_kernels(ell: usize, alpha: f64) -> Result<LowerBoundKernelPair> {
    if ell < 3 {
        return Err(Error::input("cycle kernels need ell >= 3"));
    }
    if !(alpha > 0.0 && alpha <= LOWER_BOUND_MAX_ALPHA) {
        return Err(Error::input(format!("alpha must lie in (0, 1/8], got {alpha}")));
    }
    Ok(LowerBoundKernelPair {
        kplus: Kernel::with_alpha(cycle_block(ell, alpha, 1.0)?, alpha)?,
        kminus: Kernel::with_alpha(cycle_block(ell, alpha, -1.0)?, alpha)?,
    })
}

/// Exact divergences between two DPPs on the same ground set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Divergence {
    /// `Σ p log(p/q)`.
    pub kl: f64,
    /// `Σ (√p - √q)²`, without a factor 1/2.
    pub hellinger_sq: f64,
}

/// KL divergence `D(K1 ‖ K2)` and squared Hellinger distance by summing over
/// all `2^N` subsets.
pub fn divergence_exhaustive(k1: &Kernel, k2: &Kernel) -> Result<Divergence> {
    let n = k1.dim();
    if k2.dim() != n {
        return Err(Error::input(format!(
            "dimensions differ: {} vs {}",
            n,
            k2.dim()
        )));
    }
    if n > DIVERGENCE_MAX_DIM {
        return Err(Error::capability(format!(
            "exhaustive divergence is limited to N <= {DIVERGENCE_MAX_DIM}"
        )));
    }
    let p = probability_table(k1)?;
    let q = probability_table(k2)?;
    let mut kl_terms = Vec::with_capacity(p.len());
    let mut h_terms = Vec::with_capacity(p.len());
    for (mask, (&a, &b)) in p.iter().zip(&q).enumerate() {
        if a > 0.0 {
            if b <= 0.0 {
                let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
                return Err(Error::Domain(format!(
                    "subset {subset:?} has probability {a} under the first kernel and 0 under the second"
                )));
            }
            kl_terms.push(a * (a / b).ln());
        }
        h_terms.push((a.sqrt() - b.sqrt()).powi(2));
    }
    Ok(Divergence {
        kl: pairwise_sum(&kl_terms),
        hellinger_sq: pairwise_sum(&h_terms),
    })
}

/// `K⁽⁰⁾` with `⌊N/ℓ⌋` diagonal `K⁺` blocks, followed by each `K⁽ʲ⁾` that
/// swaps block `j` for `K⁻`. Indices past the last full block are padded
/// with zeros.
pub fn fano_family(n_dim: usize, ell: usize, alpha: f64) -> Result<Vec<Kernel>> {
    let pair = lower_bound_kernels(ell, alpha)?;
    let blocks = n_dim / ell;
    if blocks == 0 {
        return Err(Error::input(format!("N = {n_dim} is smaller than ell = {ell}")));
    }
    let build = |minus_block: Option<usize>| {
        let m = SymMatrix::from_fn(n_dim, |i, j| {
            let (bi, bj) = (i / ell, j / ell);
            if bi != bj || bi >= blocks {
                return 0.0;
            }
            let src = if minus_block == Some(bi) {
                &pair.kminus
            } else {
                &pair.kplus
            };
            src.get(i % ell, j % ell)
        })?;
        Kernel::with_alpha(m, alpha)
    };
    std::iter::once(None)
        .chain((0..blocks).map(Some))
        .map(build)
        .collect()
}

/// `P[Y = S]` for every subset under both kernels, by bitmask.
pub fn probability_gap(pair: &LowerBoundKernelPair) -> Result<Vec<f64>> {
    let p = probability_table(&pair.kplus)?;
    let q = probability_table(&pair.kminus)?;
    Ok(p.iter().zip(&q).map(|(a, b)| a - b).collect())
}

/// `det(K⁺_J) - det(K⁻_J)` for every `J` by bitmask.
pub fn minor_gap(pair: &LowerBoundKernelPair) -> Result<Vec<f64>> {
    let n = pair.kplus.dim();
    (0..1usize << n)
        .map(|mask| {
            let j: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            Ok(pair.kplus.minor(&j)? - pair.kminus.minor(&j)?)
        })
        .collect()
}

/// Both kernels of a pair share every off-cycle entry and the graph `C_ℓ`.
pub fn pair_graphs_match(pair: &LowerBoundKernelPair) -> bool {
    kernel::induced_graph(&pair.kplus) == kernel::induced_graph(&pair.kminus)
}
