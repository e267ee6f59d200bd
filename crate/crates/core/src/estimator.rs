//! Kernel recovery from empirical principal minors.
//!
//! The pipeline reads `Δ̂_S` for `|S| <= 2` to get the diagonal and the
//! squared off-diagonal magnitudes `B̂_ij = K̂_ii K̂_jj - Δ̂_ij`, thresholds
//! `B̂` at `α²/2` to get the graph, and then fixes signs. On the general
//! path each cycle `C` of a shortest maximal cycle basis contributes one
//! equation `Σ_{e ∈ C} x_e = b_C` over GF(2), where `x_e = 1` encodes a
//! positive edge and `b_C = 1` iff the estimate `Ĥ_C` of the full-cycle term
//! of `det(K_C)` is positive. On chordal graphs the signs are propagated
//! triangle by triangle along a perfect elimination ordering.
//!
//! Minors come from a [`MinorSource`]: a [`SampleSet`] counts containments,
//! [`ExactMinors`] evaluates determinants of a known kernel.

use std::collections::HashMap;
use std::fmt;

use log::{debug, warn};
use serde::Serialize;

use crate::cyclebasis::{shortest_maximal_cycle_basis, Cycle, CycleBasis};
use crate::error::{Error, Result};
use crate::gf2::{self, Gf2Vector};
use crate::graph::UGraph;
use crate::kernel::{self, Kernel, SignAssignment};
use crate::linalg::{self, SymMatrix};
use crate::sampler::SampleSet;

/// `|Ĥ|` below this is a tie and is read as positive.
pub const HHAT_TIE_TOLERANCE: f64 = 1e-12;

/// Bins of the B̂ diagnostic histogram over `[0, 1/4]`.
pub const BHAT_HISTOGRAM_BINS: usize = 20;

fn sorted_key(subset: &[usize]) -> Vec<usize> {
    let mut k = subset.to_vec();
    k.sort_unstable();
    k.dedup();
    k
}

/// Estimated containment probabilities `Δ̂_S`.
#[derive(Clone, Debug, Default)]
pub struct MomentTable {
    ground: usize,
    samples: Option<usize>,
    delta: HashMap<Vec<usize>, f64>,
}

impl MomentTable {
    pub fn new(ground: usize, samples: Option<usize>) -> Self {
        Self {
            ground,
            samples,
            delta: HashMap::new(),
        }
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    /// Number of samples behind the table; `None` for exact minors.
    pub fn sample_count(&self) -> Option<usize> {
        self.samples
    }

    /// `Δ̂_S`, with `Δ̂_∅ = 1`. Order of `subset` is irrelevant.
    pub fn get(&self, subset: &[usize]) -> Option<f64> {
        if subset.is_empty() {
            return Some(1.0);
        }
        self.delta.get(&sorted_key(subset)).copied()
    }

    pub fn require(&self, subset: &[usize]) -> Result<f64> {
        self.get(subset).ok_or_else(|| {
            let one_based: Vec<usize> = subset.iter().map(|v| v + 1).collect();
            Error::input(format!("no moment recorded for index set {one_based:?}"))
        })
    }

    pub fn insert(&mut self, subset: &[usize], value: f64) {
        self.delta.insert(sorted_key(subset), value);
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], f64)> + '_ {
        self.delta.iter().map(|(k, &v)| (k.as_slice(), v))
    }
}

/// Anything that can report principal minors `Δ_S`, exact or estimated.
pub trait MinorSource {
    fn ground_size(&self) -> usize;

    fn sample_count(&self) -> Option<usize>;

    /// `Δ` for every set of size 1 and 2.
    fn low_order(&self) -> Result<MomentTable> {
        let n = self.ground_size();
        let mut subsets: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for i in 0..n {
            for j in i + 1..n {
                subsets.push(vec![i, j]);
            }
        }
        let values = self.minors(&subsets)?;
        let mut table = MomentTable::new(n, self.sample_count());
        for (s, v) in subsets.iter().zip(values) {
            table.insert(s, v);
        }
        Ok(table)
    }

    /// `Δ_S` for each requested set, in order.
    fn minors(&self, subsets: &[Vec<usize>]) -> Result<Vec<f64>>;
}

fn check_subsets(ground: usize, subsets: &[Vec<usize>]) -> Result<()> {
    for s in subsets {
        if let Some(&bad) = s.iter().find(|&&v| v >= ground) {
            return Err(Error::input(format!(
                "index {} out of range for ground set of size {ground}",
                bad + 1
            )));
        }
    }
    Ok(())
}

/// Distinct sample bitmasks with multiplicities, sorted by mask.
fn mask_histogram(masks: &[u64]) -> Vec<(u64, u64)> {
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for &m in masks {
        *counts.entry(m).or_insert(0) += 1;
    }
    let mut hist: Vec<(u64, u64)> = counts.into_iter().collect();
    hist.sort_unstable();
    hist
}

impl MinorSource for SampleSet {
    fn ground_size(&self) -> usize {
        SampleSet::ground_size(self)
    }

    fn sample_count(&self) -> Option<usize> {
        Some(self.len())
    }

    fn low_order(&self) -> Result<MomentTable> {
        let n = SampleSet::ground_size(self);
        if self.is_empty() {
            return Err(Error::input("moment estimation needs at least one sample"));
        }
        let mut single = vec![0u64; n];
        let mut pair = vec![0u64; n * n];
        let mut tally = |items: &mut dyn Iterator<Item = usize>, weight: u64| {
            let items: Vec<usize> = items.collect();
            for (a, &i) in items.iter().enumerate() {
                single[i] += weight;
                for &j in &items[a + 1..] {
                    pair[i * n + j] += weight;
                }
            }
        };
        match self.masks() {
            Some(masks) => {
                for (mask, count) in mask_histogram(&masks) {
                    let mut bits = (0..n).filter(|&i| mask >> i & 1 == 1);
                    tally(&mut bits, count);
                }
            }
            None => {
                for s in self.iter() {
                    let mut items = s.iter().map(|&v| v as usize);
                    tally(&mut items, 1);
                }
            }
        }
        let total = self.len() as f64;
        let mut table = MomentTable::new(n, Some(self.len()));
        for i in 0..n {
            table.insert(&[i], single[i] as f64 / total);
            for j in i + 1..n {
                table.insert(&[i, j], pair[i * n + j] as f64 / total);
            }
        }
        Ok(table)
    }

    fn minors(&self, subsets: &[Vec<usize>]) -> Result<Vec<f64>> {
        let n = SampleSet::ground_size(self);
        check_subsets(n, subsets)?;
        if self.is_empty() {
            return Err(Error::input("moment estimation needs at least one sample"));
        }
        let total = self.len() as f64;
        if let Some(masks) = self.masks() {
            let hist = mask_histogram(&masks);
            return Ok(subsets
                .iter()
                .map(|s| {
                    let want = s.iter().fold(0u64, |acc, &v| acc | 1 << v);
                    let hits: u64 = hist
                        .iter()
                        .filter(|(m, _)| m & want == want)
                        .map(|(_, c)| c)
                        .sum();
                    hits as f64 / total
                })
                .collect());
        }
        let mut hits = vec![0u64; subsets.len()];
        let mut member = vec![false; n];
        for sample in self.iter() {
            for &v in sample {
                member[v as usize] = true;
            }
            for (h, s) in hits.iter_mut().zip(subsets) {
                if s.iter().all(|&v| member[v]) {
                    *h += 1;
                }
            }
            for &v in sample {
                member[v as usize] = false;
            }
        }
        Ok(hits.into_iter().map(|h| h as f64 / total).collect())
    }
}

/// Exact minors `det(K_S)` of a known kernel.
#[derive(Clone, Copy, Debug)]
pub struct ExactMinors<'a>(pub &'a Kernel);

impl MinorSource for ExactMinors<'_> {
    fn ground_size(&self) -> usize {
        self.0.dim()
    }

    fn sample_count(&self) -> Option<usize> {
        None
    }

    fn minors(&self, subsets: &[Vec<usize>]) -> Result<Vec<f64>> {
        check_subsets(self.0.dim(), subsets)?;
        subsets.iter().map(|s| self.0.minor(s)).collect()
    }
}

/// `Δ̂_S` for each requested set from one pass over the samples.
pub fn empirical_minors(samples: &SampleSet, subsets: &[Vec<usize>]) -> Result<MomentTable> {
    let values = samples.minors(subsets)?;
    let mut table = MomentTable::new(samples.ground_size(), Some(samples.len()));
    for (s, v) in subsets.iter().zip(values) {
        table.insert(s, v);
    }
    Ok(table)
}

/// Output of the thresholding step.
#[derive(Clone, Debug)]
pub struct RecoveredGraph {
    pub graph: UGraph,
    /// `K̂_ii = Δ̂_i`.
    pub diag: Vec<f64>,
    /// `B̂` on the edges of `graph`, clamped to `[0, 1]`, in edge order.
    pub bhat: Vec<f64>,
    /// Unclamped `B̂_ij` for every pair `i < j`, row-major over pairs.
    pub bhat_all: Vec<((usize, usize), f64)>,
}

/// Builds `Ĝ` with an edge wherever the raw `B̂_ij >= α²/2`.
pub fn recover_graph(moments: &MomentTable, alpha: f64) -> Result<RecoveredGraph> {
    check_alpha(alpha)?;
    let n = moments.ground_size();
    let diag = (0..n)
        .map(|i| moments.require(&[i]))
        .collect::<Result<Vec<_>>>()?;
    let threshold = alpha * alpha / 2.0;
    let mut bhat_all = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut edges = Vec::new();
    let mut mags = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let b = diag[i] * diag[j] - moments.require(&[i, j])?;
            bhat_all.push(((i, j), b));
            if b >= threshold {
                edges.push((i, j));
                mags.push(b.clamp(0.0, 1.0));
            }
        }
    }
    let graph = UGraph::new(n, edges)?;
    Ok(RecoveredGraph {
        graph,
        diag,
        bhat: mags,
        bhat_all,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::input(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// `Ĥ = Δ̂_S - det(K̃_S) + 2 (-1)^{|S|+1} Π_{e ∈ C} B̂_e^{1/2}` for the
/// vertex set `S` of `cycle`, where `K̃_S` carries `K̂_ii` on the diagonal and
/// `B̂^{1/2}` on every edge of `Ĝ` inside `S`.
pub fn compute_h(moments: &MomentTable, rec: &RecoveredGraph, cycle: &Cycle) -> Result<f64> {
    let s = cycle.vertex_set();
    let delta = moments.require(&s)?;
    let k = s.len();
    let g = &rec.graph;
    let mut buf = vec![0.0; k * k];
    for a in 0..k {
        buf[a * k + a] = rec.diag[s[a]];
        for b in a + 1..k {
            if let Some(e) = g.edge_index(s[a], s[b]) {
                let w = rec.bhat[e].sqrt();
                buf[a * k + b] = w;
                buf[b * k + a] = w;
            }
        }
    }
    let det = linalg::det_in_place(&mut buf, k);
    let product: f64 = cycle.edges.iter().map(|&e| rec.bhat[e].sqrt()).product();
    let parity = if k % 2 == 1 { 1.0 } else { -1.0 };
    Ok(delta - det + 2.0 * parity * product)
}

/// Which branch of the sign system produced the signs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignSystemStatus {
    Solved,
    FallbackAllOnes,
}

impl fmt::Display for SignSystemStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Solved => "solved",
            Self::FallbackAllOnes => "fallback_all_ones",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorPath {
    General,
    Chordal,
}

impl fmt::Display for EstimatorPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::General => "general",
            Self::Chordal => "chordal",
        })
    }
}

/// Non-fatal conditions met while estimating.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimateWarning {
    /// `|Ĥ|` of this basis cycle was below [`HHAT_TIE_TOLERANCE`].
    HhatTie { cycle: usize },
    /// The basis needed a cycle with a chord.
    ChordedBasis,
    /// `Ax = b` had no solution and all edges were set positive.
    InconsistentSignSystem,
    /// The chordal path was requested on a non-chordal graph.
    NotChordal,
}

impl fmt::Display for EstimateWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HhatTie { cycle } => write!(f, "hhat tie on basis cycle {cycle}, read as positive"),
            Self::ChordedBasis => f.write_str("cycle basis contains a chorded cycle"),
            Self::InconsistentSignSystem => {
                f.write_str("sign system inconsistent, all edges set positive")
            }
            Self::NotChordal => f.write_str("graph is not chordal, general path used"),
        }
    }
}

/// Signs from the GF(2) system.
#[derive(Clone, Debug)]
pub struct SignRecovery {
    pub signs: SignAssignment,
    pub status: SignSystemStatus,
    /// Basis cycles whose `Ĥ` was a tie.
    pub ties: Vec<usize>,
}

/// Solves `A x = b` with `A` the basis incidence matrix and `b_i = 1` iff
/// `Ĥ_i > 0`, then maps `x_e = 1` to a positive edge.
///
/// Free variables come out of [`gf2::solve`] as zero. Edges outside every
/// basis cycle carry no sign information and are set positive.
pub fn recover_signs(ghat: &UGraph, basis: &CycleBasis, hhat: &[f64]) -> Result<SignRecovery> {
    if hhat.len() != basis.cycles.len() {
        return Err(Error::input(format!(
            "{} Ĥ values for {} basis cycles",
            hhat.len(),
            basis.cycles.len()
        )));
    }
    let a = basis.incidence_matrix();
    if a.ncols() != ghat.m() {
        return Err(Error::input("cycle basis does not match the graph's edges"));
    }
    let mut ties = Vec::new();
    let bits: Vec<bool> = hhat
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            if h.abs() < HHAT_TIE_TOLERANCE {
                ties.push(i);
            }
            h > 0.0 || h.abs() < HHAT_TIE_TOLERANCE
        })
        .collect();
    let b = Gf2Vector::from_bools(&bits);
    let (x, status) = match gf2::solve(&a, &b)? {
        Some(mut x) => {
            for e in 0..ghat.m() {
                if a.column_is_zero(e) {
                    x.set(e, true);
                }
            }
            (x, SignSystemStatus::Solved)
        }
        None => (Gf2Vector::ones(ghat.m()), SignSystemStatus::FallbackAllOnes),
    };
    let signs = (0..ghat.m()).map(|e| if x.get(e) { 1 } else { -1 }).collect();
    Ok(SignRecovery {
        signs: SignAssignment::new(ghat, signs)?,
        status,
        ties,
    })
}

/// Counts of clamped `B̂` values over all pairs in equal bins on `[0, 1/4]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BhatHistogram {
    pub bin_width: f64,
    pub counts: Vec<usize>,
    /// Pairs whose raw `B̂` was negative (counted in the first bin as well).
    pub negative: usize,
}

impl BhatHistogram {
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let bin_width = 0.25 / BHAT_HISTOGRAM_BINS as f64;
        let mut counts = vec![0; BHAT_HISTOGRAM_BINS];
        let mut negative = 0;
        for b in values {
            if b < 0.0 {
                negative += 1;
            }
            let bin = ((b.max(0.0) / bin_width) as usize).min(BHAT_HISTOGRAM_BINS - 1);
            counts[bin] += 1;
        }
        Self {
            bin_width,
            counts,
            negative,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateOptions {
    pub alpha: f64,
    /// Use the cycle-basis path even when `Ĝ` is chordal.
    pub force_general: bool,
}

impl EstimateOptions {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            force_general: false,
        }
    }

    pub fn general(alpha: f64) -> Self {
        Self {
            alpha,
            force_general: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EstimateResult {
    /// Not validated: sampling noise can push it outside `0 ⪯ K ⪯ I`.
    pub khat: Kernel,
    pub ghat: UGraph,
    /// On the chordal path, the triangles used for propagation.
    pub basis: CycleBasis,
    pub hhat: Vec<f64>,
    pub signs: SignAssignment,
    pub sign_system_status: SignSystemStatus,
    /// `ℓ̂`, the sparsity of `basis`.
    pub sparsity_estimate: usize,
    pub path: EstimatorPath,
    pub warnings: Vec<EstimateWarning>,
    pub bhat_histogram: BhatHistogram,
    pub sample_count: Option<usize>,
}

/// Full pipeline; dispatches to the chordal path when `Ĝ` is chordal unless
/// `force_general` is set.
pub fn estimate<S: MinorSource + ?Sized>(source: &S, opts: &EstimateOptions) -> Result<EstimateResult> {
    let (moments, rec) = first_stage(source, opts.alpha)?;
    if !opts.force_general && rec.graph.is_chordal() {
        chordal_stage(source, moments, rec)
    } else {
        general_stage(source, moments, rec, Vec::new())
    }
}

/// Cycle-basis path regardless of chordality.
pub fn estimate_general<S: MinorSource + ?Sized>(source: &S, alpha: f64) -> Result<EstimateResult> {
    estimate(source, &EstimateOptions::general(alpha))
}

/// Elimination-ordering path; falls back to the general path, with a
/// warning, if `Ĝ` is not chordal.
pub fn estimate_chordal<S: MinorSource + ?Sized>(source: &S, alpha: f64) -> Result<EstimateResult> {
    let (moments, rec) = first_stage(source, alpha)?;
    if rec.graph.is_chordal() {
        chordal_stage(source, moments, rec)
    } else {
        general_stage(source, moments, rec, vec![EstimateWarning::NotChordal])
    }
}

fn first_stage<S: MinorSource + ?Sized>(source: &S, alpha: f64) -> Result<(MomentTable, RecoveredGraph)> {
    check_alpha(alpha)?;
    let moments = source.low_order()?;
    let rec = recover_graph(&moments, alpha)?;
    debug!(
        "recovered graph with {} vertices and {} edges",
        rec.graph.n(),
        rec.graph.m()
    );
    Ok((moments, rec))
}

fn add_minors<S: MinorSource + ?Sized>(
    source: &S,
    moments: &mut MomentTable,
    cycles: &[Cycle],
) -> Result<()> {
    let sets: Vec<Vec<usize>> = cycles.iter().map(Cycle::vertex_set).collect();
    for (s, v) in sets.iter().zip(source.minors(&sets)?) {
        moments.insert(s, v);
    }
    Ok(())
}

fn general_stage<S: MinorSource + ?Sized>(
    source: &S,
    mut moments: MomentTable,
    rec: RecoveredGraph,
    mut warnings: Vec<EstimateWarning>,
) -> Result<EstimateResult> {
    let basis = shortest_maximal_cycle_basis(&rec.graph)?;
    if basis.contains_chorded {
        warnings.push(EstimateWarning::ChordedBasis);
    }
    add_minors(source, &mut moments, &basis.cycles)?;
    let hhat = basis
        .cycles
        .iter()
        .map(|c| compute_h(&moments, &rec, c))
        .collect::<Result<Vec<_>>>()?;
    let sr = recover_signs(&rec.graph, &basis, &hhat)?;
    warnings.extend(sr.ties.iter().map(|&cycle| EstimateWarning::HhatTie { cycle }));
    if sr.status == SignSystemStatus::FallbackAllOnes {
        warn!("sign system inconsistent; all edges set positive");
        warnings.push(EstimateWarning::InconsistentSignSystem);
    }
    assemble(
        source,
        rec,
        basis,
        hhat,
        sr.signs,
        sr.status,
        EstimatorPath::General,
        warnings,
    )
}

fn chordal_stage<S: MinorSource + ?Sized>(
    source: &S,
    mut moments: MomentTable,
    rec: RecoveredGraph,
) -> Result<EstimateResult> {
    let g = &rec.graph;
    let peo = g
        .lex_bfs_peo()
        .ok_or_else(|| Error::Internal("chordal graph without a Lex-BFS PEO".into()))?;
    let pos = &peo.position;
    let mut sign: Vec<Option<i8>> = vec![None; g.m()];
    for (u, v) in peo.forest_edges() {
        sign[g.edge_index(u, v).expect("forest edges are graph edges")] = Some(1);
    }

    // Each remaining edge {i, j} with pos(i) < pos(j) is closed into the
    // triangle {i, j, i*}; the edge {i*, j} shares the larger endpoint and
    // has a larger smaller endpoint, so this order resolves it first.
    let mut pending: Vec<(usize, usize, usize)> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(e, _)| sign[*e].is_none())
        .map(|(e, &(u, v))| {
            let (i, j) = if pos[u] < pos[v] { (u, v) } else { (v, u) };
            (e, i, j)
        })
        .collect();
    pending.sort_by_key(|&(_, i, j)| std::cmp::Reverse((pos[j], pos[i])));

    let triangles = pending
        .iter()
        .map(|&(_, i, j)| {
            let star = peo.star[i].expect("a vertex with a later neighbor has a star");
            Cycle::from_vertices(g, vec![i, j, star])
        })
        .collect::<Result<Vec<_>>>()?;
    add_minors(source, &mut moments, &triangles)?;

    let mut hhat = Vec::with_capacity(triangles.len());
    let mut warnings = Vec::new();
    for (t, (&(e, i, j), tri)) in pending.iter().zip(&triangles).enumerate() {
        let star = tri.vertices[2];
        let h = compute_h(&moments, &rec, tri)?;
        let s_h: i8 = if h > 0.0 || h.abs() < HHAT_TIE_TOLERANCE {
            1
        } else {
            -1
        };
        if h.abs() < HHAT_TIE_TOLERANCE {
            warnings.push(EstimateWarning::HhatTie { cycle: t });
        }
        let known = |a: usize, b: usize| {
            sign[g.edge_index(a, b).expect("PEO neighbourhoods are cliques")]
                .ok_or_else(|| Error::Internal("chordal propagation order violated".into()))
        };
        let s = s_h * known(i, star)? * known(j, star)?;
        sign[e] = Some(s);
        hhat.push(h);
    }
    let signs = SignAssignment::new(g, sign.into_iter().map(|s| s.expect("all edges signed")).collect())?;
    let basis = CycleBasis::from_cycles(g, triangles);
    assemble(
        source,
        rec,
        basis,
        hhat,
        signs,
        SignSystemStatus::Solved,
        EstimatorPath::Chordal,
        warnings,
    )
}

#[allow(clippy::too_many_arguments)]
fn assemble<S: MinorSource + ?Sized>(
    source: &S,
    rec: RecoveredGraph,
    basis: CycleBasis,
    hhat: Vec<f64>,
    signs: SignAssignment,
    status: SignSystemStatus,
    path: EstimatorPath,
    warnings: Vec<EstimateWarning>,
) -> Result<EstimateResult> {
    let g = rec.graph;
    let mut m = SymMatrix::from_diagonal(&rec.diag)?;
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        m.set(i, j, f64::from(signs.get(e)) * rec.bhat[e].sqrt());
    }
    let bhat_histogram = BhatHistogram::from_values(rec.bhat_all.iter().map(|&(_, b)| b));
    Ok(EstimateResult {
        khat: Kernel::from_matrix_unchecked(m),
        sparsity_estimate: basis.sparsity,
        ghat: g,
        basis,
        hhat,
        signs,
        sign_system_status: status,
        path,
        warnings,
        bhat_histogram,
        sample_count: source.sample_count(),
    })
}

/// Outcome of one recovery against a known kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuccessMetrics {
    pub graph_recovered: bool,
    /// Requires `graph_recovered`.
    pub signs_recovered: bool,
    pub rho: f64,
}

/// True iff the off-diagonal signs of `a` and `b` on the edges of `g` differ
/// by a vertex sign flip, i.e. the disagreement set is a cut.
pub fn signs_match_up_to_flips(a: &Kernel, b: &Kernel, g: &UGraph) -> bool {
    let n = g.n();
    let mut d: Vec<i8> = vec![0; n];
    for root in 0..n {
        if d[root] != 0 {
            continue;
        }
        d[root] = 1;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &v in g.neighbors(u) {
                let agree: i8 = if (a.get(u, v) < 0.0) == (b.get(u, v) < 0.0) {
                    1
                } else {
                    -1
                };
                let want = d[u] * agree;
                if d[v] == 0 {
                    d[v] = want;
                    stack.push(v);
                } else if d[v] != want {
                    return false;
                }
            }
        }
    }
    true
}

/// Graph recovery, sign recovery up to vertex flips, and exact `ρ(K̂, K)`.
pub fn success_metrics(k: &Kernel, result: &EstimateResult) -> Result<SuccessMetrics> {
    let rho = kernel::rho(&result.khat, k)?;
    Ok(metrics_with_rho(k, result, rho))
}

pub(crate) fn metrics_with_rho(k: &Kernel, result: &EstimateResult, rho: f64) -> SuccessMetrics {
    let truth = kernel::induced_graph(k);
    let graph_recovered = truth.n() == result.ghat.n() && truth.edges() == result.ghat.edges();
    let signs_recovered = graph_recovered && signs_match_up_to_flips(k, &result.khat, &truth);
    SuccessMetrics {
        graph_recovered,
        signs_recovered,
        rho,
    }
}
