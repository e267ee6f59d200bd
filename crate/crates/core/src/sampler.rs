//! Exact samplers for `DPP(K)`.
//!
//! [`BruteForceSampler`] tabulates `P[Y = S]` for all `2^N` subsets and draws
//! by inverse CDF; it is the reference. [`SpectralSampler`] eigendecomposes
//! `K` once and runs the sequential projection-DPP procedure per draw.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with a
//! 64-bit seed, with the ChaCha stream id selecting an independent stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::kernel::{self, Kernel};
use crate::linalg;

/// Largest ground set the probability table is built for.
pub const BRUTE_FORCE_MAX_DIM: usize = 20;

/// Eigenvalues within this distance of `[0, 1]` are clamped instead of rejected.
pub const EIGEN_CLAMP_TOLERANCE: f64 = 1e-9;

/// Gram-Schmidt residuals below this norm drop the vector.
pub const RESIDUAL_NORM_FLOOR: f64 = 1e-12;

/// `(seed, stream)` pair naming one reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// The observed subsets `Y_1, ..., Y_n` over the ground set `0..ground`.
///
/// Stored flat: `items[offsets[p]..offsets[p + 1]]` is sample `p`, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSet {
    ground: usize,
    offsets: Vec<usize>,
    items: Vec<u32>,
}

impl SampleSet {
    pub fn new(ground: usize) -> Self {
        Self {
            ground,
            offsets: vec![0],
            items: Vec::new(),
        }
    }

    pub fn with_capacity(ground: usize, samples: usize) -> Self {
        let mut s = Self::new(ground);
        s.offsets.reserve(samples);
        s.items.reserve(samples * ground.min(4));
        s
    }

    pub fn from_subsets<S: AsRef<[usize]>>(ground: usize, subsets: &[S]) -> Result<Self> {
        let mut s = Self::with_capacity(ground, subsets.len());
        for sub in subsets {
            s.push(sub.as_ref())?;
        }
        Ok(s)
    }

    /// Appends a subset; order is irrelevant, duplicates are rejected.
    pub fn push(&mut self, subset: &[usize]) -> Result<()> {
        let mut sorted = subset.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::input("sample contains a repeated item"));
        }
        if let Some(&bad) = sorted.iter().find(|&&i| i >= self.ground) {
            return Err(Error::input(format!(
                "item {} outside ground set of size {}",
                bad + 1,
                self.ground
            )));
        }
        self.items.extend(sorted.iter().map(|&i| i as u32));
        self.offsets.push(self.items.len());
        Ok(())
    }

    /// Appends the subset encoded by `mask` (bit `i` set means item `i`).
    pub(crate) fn push_mask(&mut self, mut mask: u64) {
        while mask != 0 {
            self.items.push(mask.trailing_zeros());
            mask &= mask - 1;
        }
        self.offsets.push(self.items.len());
    }

    fn push_sorted(&mut self, sorted: &[usize]) {
        self.items.extend(sorted.iter().map(|&i| i as u32));
        self.offsets.push(self.items.len());
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, p: usize) -> &[u32] {
        &self.items[self.offsets[p]..self.offsets[p + 1]]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.offsets.windows(2).map(|w| &self.items[w[0]..w[1]])
    }

    /// Bitmask of every sample; only for ground sets of at most 64 items.
    pub fn masks(&self) -> Option<Vec<u64>> {
        if self.ground > 64 {
            return None;
        }
        Some(
            self.iter()
                .map(|s| s.iter().fold(0u64, |m, &i| m | 1 << i))
                .collect(),
        )
    }

    /// Appends every sample of `other`.
    pub fn extend_from(&mut self, other: &SampleSet) -> Result<()> {
        if other.ground != self.ground {
            return Err(Error::input("ground sets differ"));
        }
        for s in other.iter() {
            self.items.extend_from_slice(s);
            self.offsets.push(self.items.len());
        }
        Ok(())
    }

    /// Samples file: one line per sample, ascending 1-based indices separated
    /// by spaces; an empty line is the empty set.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.items.len() * 3 + self.len());
        for s in self.iter() {
            for (k, &i) in s.iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                out.push_str(itoa(i as usize + 1).as_str());
            }
            out.push('\n');
        }
        out
    }

    /// Parses the samples file. Without an explicit `ground`, the ground set
    /// is `1..=max index seen`.
    pub fn from_text(text: &str, ground: Option<usize>) -> Result<Self> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let mut rows = Vec::new();
        if !text.is_empty() {
            for (lineno, line) in body.split('\n').enumerate() {
                let row = line
                    .trim_end_matches('\r')
                    .split_whitespace()
                    .map(|t| match t.parse::<usize>() {
                        Ok(v) if v >= 1 => Ok(v - 1),
                        _ => Err(Error::input(format!(
                            "line {}: bad item {t:?} (items are 1-based integers)",
                            lineno + 1
                        ))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
        }
        let seen = rows.iter().flatten().max().map_or(0, |&m| m + 1);
        let ground = match ground {
            Some(g) if g < seen => {
                return Err(Error::input(format!(
                    "sample mentions item {seen} but the ground set has {g} items"
                )))
            }
            Some(g) => g,
            None => seen,
        };
        Self::from_subsets(ground, &rows)
    }
}

fn itoa(v: usize) -> String {
    v.to_string()
}

/// Probability table sampler.
#[derive(Clone, Debug)]
pub struct BruteForceSampler {
    dim: usize,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl BruteForceSampler {
    pub fn new(k: &Kernel) -> Result<Self> {
        let n = k.dim();
        if n > BRUTE_FORCE_MAX_DIM {
            return Err(Error::capability(format!(
                "brute-force sampling is limited to N <= {BRUTE_FORCE_MAX_DIM} (got {n})"
            )));
        }
        let size = 1usize << n;
        let mut probs = Vec::with_capacity(size);
        let mut inside = vec![false; n];
        let mut buf = vec![0.0; n * n];
        for mask in 0..size {
            for (i, slot) in inside.iter_mut().enumerate() {
                *slot = mask >> i & 1 == 1;
            }
            buf.copy_from_slice(k.matrix().as_slice());
            for i in 0..n {
                if !inside[i] {
                    buf[i * n + i] -= 1.0;
                }
            }
            // signed value: (-1)^{|S^c|} det(K - I_{S^c}) must be >= 0
            let det = linalg::det_in_place(&mut buf, n);
            let outside = n - mask.count_ones() as usize;
            let p = if outside.is_multiple_of(2) { det } else { -det };
            if p < -1e-10 {
                return Err(Error::numeric(format!(
                    "negative subset probability {p} (kernel spectrum outside [0, 1])"
                )));
            }
            probs.push(p.max(0.0));
        }
        let total: f64 = pairwise_sum(&probs);
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::numeric(format!(
                "subset probabilities sum to {total}, not 1"
            )));
        }
        for p in &mut probs {
            *p /= total;
        }
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            dim: n,
            probs,
            cdf,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `P[Y = S]` indexed by the bitmask of `S`.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn draw_mask<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.gen::<f64>() * self.cdf[self.cdf.len() - 1];
        let k = self.cdf.partition_point(|&c| c <= u);
        k.min(self.cdf.len() - 1) as u64
    }

    pub fn sample(&self, n: usize, seed: RngSeed) -> SampleSet {
        let mut rng = seed.rng();
        let mut out = SampleSet::with_capacity(self.dim, n);
        for _ in 0..n {
            out.push_mask(self.draw_mask(&mut rng));
        }
        out
    }
}

pub fn sample_bruteforce(k: &Kernel, n: usize, seed: RngSeed) -> Result<SampleSet> {
    Ok(BruteForceSampler::new(k)?.sample(n, seed))
}

/// Spectral sampler holding the eigendecomposition of `K`.
#[derive(Clone, Debug)]
pub struct SpectralSampler {
    dim: usize,
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

impl SpectralSampler {
    pub fn new(k: &Kernel) -> Result<Self> {
        let eig = linalg::eig_sym(k.matrix())?;
        let mut values = Vec::with_capacity(eig.values.len());
        for &l in &eig.values {
            if !(-EIGEN_CLAMP_TOLERANCE..=1.0 + EIGEN_CLAMP_TOLERANCE).contains(&l) {
                return Err(Error::numeric(format!(
                    "kernel eigenvalue {l} outside [0, 1]"
                )));
            }
            values.push(l.clamp(0.0, 1.0));
        }
        Ok(Self {
            dim: k.dim(),
            values,
            vectors: eig.vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Clamped eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// One draw, returned sorted.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut basis: Vec<Vec<f64>> = self
            .values
            .iter()
            .zip(&self.vectors)
            .filter(|(&l, _)| rng.gen::<f64>() < l)
            .map(|(_, v)| v.clone())
            .collect();
        let n = self.dim;
        let mut out = Vec::with_capacity(basis.len());
        let mut weights = vec![0.0; n];
        while !basis.is_empty() {
            weights.iter_mut().for_each(|w| *w = 0.0);
            for v in &basis {
                for (w, x) in weights.iter_mut().zip(v) {
                    *w += x * x;
                }
            }
            let total: f64 = weights.iter().sum();
            let mut u = rng.gen::<f64>() * total;
            let mut item = n - 1;
            for (i, &w) in weights.iter().enumerate() {
                if u < w {
                    item = i;
                    break;
                }
                u -= w;
            }
            out.push(item);

            let pivot_idx = (0..basis.len())
                .max_by(|&a, &b| basis[a][item].abs().total_cmp(&basis[b][item].abs()))
                .expect("basis is nonempty");
            let pivot = basis.swap_remove(pivot_idx);
            for v in &mut basis {
                let c = v[item] / pivot[item];
                for (x, p) in v.iter_mut().zip(&pivot) {
                    *x -= c * p;
                }
                v[item] = 0.0;
            }
            let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(basis.len());
            for mut v in basis.drain(..) {
                for q in &ortho {
                    let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                    for (x, y) in v.iter_mut().zip(q) {
                        *x -= d * y;
                    }
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm >= RESIDUAL_NORM_FLOOR {
                    v.iter_mut().for_each(|x| *x /= norm);
                    ortho.push(v);
                }
            }
            basis = ortho;
        }
        out.sort_unstable();
        out
    }

    pub fn sample(&self, n: usize, seed: RngSeed) -> SampleSet {
        let mut rng = seed.rng();
        let mut out = SampleSet::with_capacity(self.dim, n);
        for _ in 0..n {
            let y = self.draw(&mut rng);
            out.push_sorted(&y);
        }
        out
    }
}

pub fn sample_spectral(k: &Kernel, n: usize, seed: RngSeed) -> Result<SampleSet> {
    Ok(SpectralSampler::new(k)?.sample(n, seed))
}

/// Which exact sampler to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SamplerMethod {
    Spectral,
    BruteForce,
}

impl std::str::FromStr for SamplerMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Self::Spectral),
            "bruteforce" | "brute-force" => Ok(Self::BruteForce),
            other => Err(Error::input(format!("unknown sampler method {other:?}"))),
        }
    }
}

impl std::fmt::Display for SamplerMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Spectral => "spectral",
            Self::BruteForce => "bruteforce",
        })
    }
}

pub fn sample(k: &Kernel, n: usize, seed: RngSeed, method: SamplerMethod) -> Result<SampleSet> {
    match method {
        SamplerMethod::Spectral => sample_spectral(k, n, seed),
        SamplerMethod::BruteForce => sample_bruteforce(k, n, seed),
    }
}

/// Full `P[Y = S]` table by bitmask, straight from determinants.
pub fn probability_table(k: &Kernel) -> Result<Vec<f64>> {
    let n = k.dim();
    if n > BRUTE_FORCE_MAX_DIM {
        return Err(Error::capability(format!(
            "probability table is limited to N <= {BRUTE_FORCE_MAX_DIM}"
        )));
    }
    let mut inside = vec![false; n];
    Ok((0..1usize << n)
        .map(|mask| {
            for (i, slot) in inside.iter_mut().enumerate() {
                *slot = mask >> i & 1 == 1;
            }
            kernel::subset_probability_mask(k, &inside)
        })
        .collect())
}

/// Sum by recursive halving, so the result does not depend on how callers
/// partition work.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        len if len <= 8 => xs.iter().sum(),
        len => {
            let (a, b) = xs.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
