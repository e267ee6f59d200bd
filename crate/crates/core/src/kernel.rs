//! DPP kernels and the quantities defined directly on them.
//!
//! A kernel is identified by its DPP only up to conjugation by a diagonal
//! sign matrix `D`. [`rho`] measures distance modulo that ambiguity, and
//! [`cycle_sign`] is the invariant that survives it.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::UGraph;
use crate::linalg::{self, SymMatrix};

/// Spectrum tolerance used when validating kernels.
pub const KERNEL_TOLERANCE: f64 = 1e-9;

/// Exact `rho` enumerates `2^(N-1)` sign vectors; beyond this it refuses.
pub const RHO_EXACT_MAX_DIM: usize = 24;

/// Largest cycle handled by the explicit matchings expansion.
pub const MATCHINGS_MAX_LEN: usize = 16;

/// Symmetric matrix used as a DPP kernel, with optional separation `alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    matrix: SymMatrix,
    alpha: Option<f64>,
}

impl Kernel {
    /// Validates `0 <= K <= I` within [`KERNEL_TOLERANCE`].
    pub fn new(matrix: SymMatrix) -> Result<Self> {
        if !linalg::is_valid_kernel(&matrix, KERNEL_TOLERANCE) {
            return Err(Error::input("kernel spectrum is not contained in [0, 1]"));
        }
        Ok(Self {
            matrix,
            alpha: None,
        })
    }

    /// Validates the spectrum and that every nonzero off-diagonal entry has
    /// magnitude at least `alpha`.
    pub fn with_alpha(matrix: SymMatrix, alpha: f64) -> Result<Self> {
        let mut k = Self::new(matrix)?;
        k.set_alpha(alpha)?;
        Ok(k)
    }

    /// Wraps a matrix without checking the spectrum. Estimates and the
    /// algebraic test fixtures are not guaranteed to be valid kernels.
    pub fn from_matrix_unchecked(matrix: SymMatrix) -> Self {
        Self {
            matrix,
            alpha: None,
        }
    }

    pub fn set_alpha(&mut self, alpha: f64) -> Result<()> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::input(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let n = self.dim();
        for i in 0..n {
            for j in i + 1..n {
                let v = self.matrix.get(i, j).abs();
                if v != 0.0 && v < alpha {
                    return Err(Error::input(format!(
                        "entry ({}, {}) has magnitude {v} below alpha = {alpha}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        self.alpha = Some(alpha);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SymMatrix {
        self.matrix
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    /// `det(K_S)`; the empty minor is 1.
    pub fn minor(&self, subset: &[usize]) -> Result<f64> {
        linalg::principal_minor(&self.matrix, subset)
    }
}

/// Per-edge signs indexed by a graph's edge order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignAssignment {
    signs: Vec<i8>,
}

impl SignAssignment {
    pub fn new(graph: &UGraph, signs: Vec<i8>) -> Result<Self> {
        if signs.len() != graph.m() {
            return Err(Error::input(format!(
                "{} signs for a graph with {} edges",
                signs.len(),
                graph.m()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::input("signs must be +1 or -1"));
        }
        Ok(Self { signs })
    }

    pub fn all_positive(graph: &UGraph) -> Self {
        Self {
            signs: vec![1; graph.m()],
        }
    }

    /// Signs of the entries of `k` on the edges of `graph`; zero entries
    /// count as positive.
    pub fn of_kernel(k: &Kernel, graph: &UGraph) -> Self {
        Self {
            signs: graph
                .edges()
                .iter()
                .map(|&(i, j)| if k.get(i, j) < 0.0 { -1 } else { 1 })
                .collect(),
        }
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn get(&self, edge: usize) -> i8 {
        self.signs[edge]
    }

    /// Edge list with a sign column: `n m` then `i j s` (1-based).
    pub fn to_edge_list(&self, graph: &UGraph) -> String {
        let mut out = format!("{} {}\n", graph.n(), graph.m());
        for (&(u, v), s) in graph.edges().iter().zip(&self.signs) {
            let _ = writeln!(out, "{} {} {}", u + 1, v + 1, if *s > 0 { "+1" } else { "-1" });
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<(UGraph, Self)> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::input("sign list is empty"))?;
        let mut edges = Vec::new();
        let mut signs = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [u, v, s] = fields[..] else {
                return Err(Error::input(format!("bad sign line {line:?}")));
            };
            let parse = |t: &str| {
                t.parse::<usize>()
                    .ok()
                    .filter(|&x| x > 0)
                    .ok_or_else(|| Error::input(format!("bad vertex {t:?}")))
            };
            edges.push((parse(u)? - 1, parse(v)? - 1));
            signs.push(match s {
                "+1" | "1" => 1,
                "-1" => -1,
                other => return Err(Error::input(format!("bad sign {other:?}"))),
            });
        }
        let body: String = edges
            .iter()
            .map(|(u, v)| format!("{} {}\n", u + 1, v + 1))
            .collect();
        let graph = UGraph::from_edge_list(&format!("{header}\n{body}"))?;
        // Edge order in the file may differ from the graph's sorted order.
        let mut sorted = vec![1; graph.m()];
        for ((u, v), s) in edges.into_iter().zip(signs) {
            let k = graph.edge_index(u, v).expect("edge was just inserted");
            sorted[k] = s;
        }
        let assignment = Self::new(&graph, sorted)?;
        Ok((graph, assignment))
    }
}

/// Graph with an edge wherever the stored off-diagonal entry is nonzero.
pub fn induced_graph(k: &Kernel) -> UGraph {
    let n = k.dim();
    let edges = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| k.get(i, j) != 0.0);
    UGraph::new(n, edges).expect("pairs are distinct and in range")
}

/// `D K D` with `D = diag(signs)`.
pub fn dn_conjugate(k: &Kernel, signs: &[i8]) -> Result<Kernel> {
    let n = k.dim();
    if signs.len() != n {
        return Err(Error::input(format!(
            "{} signs for a kernel of dimension {n}",
            signs.len()
        )));
    }
    if signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::input("signs must be +1 or -1"));
    }
    let m = SymMatrix::from_fn(n, |i, j| {
        f64::from(signs[i]) * f64::from(signs[j]) * k.get(i, j)
    })?;
    Ok(Kernel {
        matrix: m,
        alpha: k.alpha,
    })
}

/// `min_D |D A D - B|_inf` computed exactly.
///
/// Signs are fixed one vertex at a time (the first is pinned to +1 since
/// `D` and `-D` act identically) and partial assignments whose running
/// maximum already reaches the incumbent are pruned, so the search is exact
/// but usually far below `2^(N-1)` leaves.
pub fn rho(a: &Kernel, b: &Kernel) -> Result<f64> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::input(format!(
            "dimension mismatch: {n} vs {}",
            b.dim()
        )));
    }
    if n > RHO_EXACT_MAX_DIM {
        return Err(Error::capability(format!(
            "exact rho is limited to N <= {RHO_EXACT_MAX_DIM} (got {n}); use rho_heuristic"
        )));
    }
    let diag = (0..n)
        .map(|i| (a.get(i, i) - b.get(i, i)).abs())
        .fold(0.0, f64::max);
    let mut signs = vec![1i8; n];
    let mut best = f64::INFINITY;
    rho_search(a, b, 1, diag, &mut signs, &mut best);
    Ok(best)
}

fn rho_search(a: &Kernel, b: &Kernel, i: usize, cur: f64, signs: &mut [i8], best: &mut f64) {
    if cur >= *best {
        return;
    }
    if i == signs.len() {
        *best = cur;
        return;
    }
    for s in [1i8, -1] {
        signs[i] = s;
        let mut next = cur;
        for j in 0..i {
            let flip = f64::from(signs[i] * signs[j]);
            next = next.max((flip * a.get(i, j) - b.get(i, j)).abs());
            if next >= *best {
                break;
            }
        }
        rho_search(a, b, i + 1, next, signs, best);
    }
}

/// Upper bound on `rho` for dimensions beyond the exact cap.
///
/// Signs are propagated greedily along a BFS spanning forest of the union
/// of both induced graphs, then single-vertex flips are applied while they
/// strictly decrease the sup-norm.
pub fn rho_heuristic(a: &Kernel, b: &Kernel) -> Result<f64> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::input(format!(
            "dimension mismatch: {n} vs {}",
            b.dim()
        )));
    }
    let mut signs = vec![0i8; n];
    for root in 0..n {
        if signs[root] != 0 {
            continue;
        }
        signs[root] = 1;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for w in 0..n {
                if signs[w] != 0 || w == u {
                    continue;
                }
                let (x, y) = (a.get(u, w), b.get(u, w));
                if x == 0.0 && y == 0.0 {
                    continue;
                }
                let agree = (x >= 0.0) == (y >= 0.0);
                signs[w] = if agree { signs[u] } else { -signs[u] };
                queue.push_back(w);
            }
        }
    }
    let cost = |signs: &[i8]| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                let flip = f64::from(signs[i] * signs[j]);
                worst = worst.max((flip * a.get(i, j) - b.get(i, j)).abs());
            }
        }
        worst
    };
    let mut best = cost(&signs);
    loop {
        let mut improved = false;
        for v in 0..n {
            signs[v] = -signs[v];
            let c = cost(&signs);
            if c < best {
                best = c;
                improved = true;
            } else {
                signs[v] = -signs[v];
            }
        }
        if !improved {
            return Ok(best);
        }
    }
}

/// `P[Y = S] = |det(K - I_{S^c})|`.
pub fn subset_probability(k: &Kernel, subset: &[usize]) -> Result<f64> {
    let n = k.dim();
    let mut inside = vec![false; n];
    for &i in subset {
        if i >= n {
            return Err(Error::input(format!(
                "index {} out of range for dimension {n}",
                i + 1
            )));
        }
        inside[i] = true;
    }
    Ok(subset_probability_mask(k, &inside))
}

pub(crate) fn subset_probability_mask(k: &Kernel, inside: &[bool]) -> f64 {
    let n = k.dim();
    let mut buf = k.matrix.as_slice().to_vec();
    for (i, &on) in inside.iter().enumerate() {
        if !on {
            buf[i * n + i] -= 1.0;
        }
    }
    linalg::det_in_place(&mut buf, n).abs()
}

/// Checks that `subset` induces a single chordless cycle in `g` and returns
/// the vertices in cyclic order.
pub fn induced_cycle_order(g: &UGraph, subset: &[usize]) -> Result<Vec<usize>> {
    let mut s = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != subset.len() || s.len() < 3 {
        return Err(Error::input("an induced cycle needs at least 3 distinct vertices"));
    }
    if let Some(&bad) = s.iter().find(|&&v| v >= g.n()) {
        return Err(Error::input(format!("vertex {} out of range", bad + 1)));
    }
    let inside = |v: usize| s.binary_search(&v).is_ok();
    let nbrs = |v: usize| -> Vec<usize> {
        g.neighbors(v).iter().copied().filter(|&w| inside(w)).collect()
    };
    if s.iter().any(|&v| nbrs(v).len() != 2) {
        return Err(Error::input("index set does not induce a cycle"));
    }
    let mut order = vec![s[0]];
    let mut prev = s[0];
    let mut cur = nbrs(s[0])[0];
    while cur != s[0] {
        order.push(cur);
        let nb = nbrs(cur);
        let next = if nb[0] == prev { nb[1] } else { nb[0] };
        prev = cur;
        cur = next;
    }
    if order.len() != s.len() {
        return Err(Error::input("index set induces several disjoint cycles"));
    }
    Ok(order)
}

/// `det(K_S)` for an induced cycle `S`, evaluated as the explicit sum over
/// matchings of `G_K(S)` plus the single full-cycle term.
pub fn induced_cycle_minor_expansion(k: &Kernel, subset: &[usize]) -> Result<f64> {
    let g = induced_graph(k);
    let order = induced_cycle_order(&g, subset)?;
    let len = order.len();
    if len > MATCHINGS_MAX_LEN {
        return Err(Error::capability(format!(
            "matchings expansion limited to cycles of length <= {MATCHINGS_MAX_LEN}"
        )));
    }
    let diag: Vec<f64> = order.iter().map(|&v| k.get(v, v)).collect();
    // edge t joins order[t] and order[t + 1 mod len]
    let edge_sq: Vec<f64> = (0..len)
        .map(|t| k.get(order[t], order[(t + 1) % len]).powi(2))
        .collect();
    let matchings = matching_sum(&diag, &edge_sq);
    let cycle_product: f64 = (0..len)
        .map(|t| k.get(order[t], order[(t + 1) % len]))
        .product();
    let parity = if (len + 1) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(matchings + 2.0 * parity * cycle_product)
}

/// `sum_M (-1)^|M| prod_{e in M} w_e prod_{v not in V(M)} d_v` over the
/// matchings `M` of a cycle with vertex weights `d` and edge weights `w`
/// (edge `t` joins vertices `t` and `t + 1 mod len`). Enumerates every
/// matching as an edge bitmask.
pub(crate) fn matching_sum(diag: &[f64], edge_w: &[f64]) -> f64 {
    let len = diag.len();
    let mut total = 0.0;
    for mask in 0u32..(1u32 << len) {
        // adjacent cycle edges share a vertex
        let rotated = (mask >> 1) | ((mask & 1) << (len - 1));
        if mask & rotated != 0 {
            continue;
        }
        let mut covered = vec![false; len];
        let mut term = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        for t in 0..len {
            if mask >> t & 1 == 1 {
                term *= edge_w[t];
                covered[t] = true;
                covered[(t + 1) % len] = true;
            }
        }
        for (v, &d) in diag.iter().enumerate() {
            if !covered[v] {
                term *= d;
            }
        }
        total += term;
    }
    total
}

/// Product of the signs of `K_e` over the edges of a cycle.
pub fn cycle_sign(k: &Kernel, cycle_edges: &[(usize, usize)]) -> Result<i8> {
    let mut sign = 1i8;
    for &(u, v) in cycle_edges {
        if u >= k.dim() || v >= k.dim() {
            return Err(Error::input(format!("edge ({}, {}) out of range", u + 1, v + 1)));
        }
        let x = k.get(u, v);
        if u == v || x == 0.0 {
            return Err(Error::input(format!(
                "edge ({}, {}) is not an edge of the kernel graph",
                u + 1,
                v + 1
            )));
        }
        if x < 0.0 {
            sign = -sign;
        }
    }
    Ok(sign)
}
