//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use dpp_moments::estimator::{ExactMinors, MinorSource};
use dpp_moments::graph::UGraph;
use dpp_moments::kernel::Kernel;
use dpp_moments::linalg::{eig_sym, SymMatrix};
use dpp_moments::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Determinant by cofactor expansion along the first row.
pub fn laplace_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    match n {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => (0..n)
            .filter(|&j| m[0][j] != 0.0)
            .map(|j| {
                let minor: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[0][j] * laplace_det(&minor)
            })
            .sum(),
    }
}

pub fn submatrix(k: &Kernel, subset: &[usize]) -> Vec<Vec<f64>> {
    subset
        .iter()
        .map(|&i| subset.iter().map(|&j| k.get(i, j)).collect())
        .collect()
}

pub fn mask_to_set(mask: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

/// `min_D max |D A D - B|` over all `2^N` sign vectors.
pub fn brute_rho(a: &Kernel, b: &Kernel) -> f64 {
    let n = a.dim();
    let mut best = f64::INFINITY;
    for mask in 0..1usize << n.saturating_sub(1) {
        let d = |i: usize| if i > 0 && mask >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 };
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((d(i) * d(j) * a.get(i, j) - b.get(i, j)).abs());
            }
        }
        best = best.min(worst);
    }
    best
}

/// Valid kernel `V diag(λ) Vᵀ` with uniform eigenvalues and a random
/// orthonormal basis from Gram-Schmidt.
pub fn random_dense_kernel(n: usize, r: &mut impl Rng) -> Kernel {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let lambda: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..1.0)).collect();
    let m = SymMatrix::from_fn(n, |i, j| (0..n).map(|k| lambda[k] * basis[k][i] * basis[k][j]).sum())
        .unwrap();
    Kernel::new(m).unwrap()
}

/// `½I + cA` with random signs on the edges of `g`, where
/// `c = min(1/4, 1/(2 λmax(|A|)))` keeps the spectrum in `[0, 1]`.
pub fn random_graph_kernel(g: &UGraph, r: &mut impl Rng) -> Kernel {
    let n = g.n();
    let adj = SymMatrix::from_fn(n, |i, j| if i != j && g.has_edge(i, j) { 1.0 } else { 0.0 }).unwrap();
    let lambda = eig_sym(&adj).unwrap().values[0];
    let c = if lambda > 0.0 { (0.5 / lambda).min(0.25) } else { 0.25 };
    let mut m = SymMatrix::from_diagonal(&vec![0.5; n]).unwrap();
    for &(i, j) in g.edges() {
        m.set(i, j, if r.gen_bool(0.5) { c } else { -c });
    }
    Kernel::with_alpha(m, c).unwrap()
}

/// Diagonal `d`, entries `signs[e] * w` on the edges of `C_ℓ` in edge order.
/// Not validated: for `w = d = 1/2` the matrix is not a kernel.
pub fn cycle_fixture(ell: usize, d: f64, w: f64, signs: &[f64]) -> Kernel {
    let g = UGraph::cycle(ell).unwrap();
    let mut m = SymMatrix::from_diagonal(&vec![d; ell]).unwrap();
    for (&(i, j), s) in g.edges().iter().zip(signs) {
        m.set(i, j, s * w);
    }
    Kernel::from_matrix_unchecked(m)
}

/// Exact minors shifted by `shift(S)`.
pub struct PerturbedMinors<'a, F: Fn(&[usize]) -> f64> {
    pub kernel: &'a Kernel,
    pub shift: F,
}

impl<F: Fn(&[usize]) -> f64> MinorSource for PerturbedMinors<'_, F> {
    fn ground_size(&self) -> usize {
        self.kernel.dim()
    }

    fn sample_count(&self) -> Option<usize> {
        None
    }

    fn minors(&self, subsets: &[Vec<usize>]) -> Result<Vec<f64>> {
        let exact = ExactMinors(self.kernel).minors(subsets)?;
        Ok(subsets
            .iter()
            .zip(exact)
            .map(|(s, v)| {
                let mut key = s.clone();
                key.sort_unstable();
                v + (self.shift)(&key)
            })
            .collect())
    }
}

/// Deterministic ±1 per index set, from a seeded hash.
pub fn hashed_sign(seed: u64, set: &[usize]) -> f64 {
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for &v in set {
        h = (h ^ (v as u64 + 1)).wrapping_mul(0x0100_0000_01B3);
        h ^= h >> 29;
    }
    h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    h ^= h >> 31;
    if h & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Every simple cycle of `g` as an edge bitmask, from the full cycle space.
pub fn all_simple_cycles(g: &UGraph) -> Vec<u64> {
    assert!(g.m() <= 64);
    // Fundamental cycles of a BFS forest span the cycle space.
    let n = g.n();
    let mut parent_edge: Vec<Option<usize>> = vec![None; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut tree = vec![false; g.m()];
    for root in 0..n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if depth[v] == usize::MAX {
                    depth[v] = depth[u] + 1;
                    parent[v] = Some(u);
                    let e = g.edge_index(u, v).unwrap();
                    parent_edge[v] = Some(e);
                    tree[e] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    let path_edges = |mut a: usize, mut b: usize| -> u64 {
        let mut mask = 0u64;
        while a != b {
            if depth[a] >= depth[b] {
                mask ^= 1 << parent_edge[a].unwrap();
                a = parent[a].unwrap();
            } else {
                mask ^= 1 << parent_edge[b].unwrap();
                b = parent[b].unwrap();
            }
        }
        mask
    };
    let fundamentals: Vec<u64> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(e, _)| !tree[*e])
        .map(|(e, &(u, v))| path_edges(u, v) | 1 << e)
        .collect();
    let mut out = Vec::new();
    for pick in 1u64..1 << fundamentals.len() {
        let mask = fundamentals
            .iter()
            .enumerate()
            .filter(|(k, _)| pick >> k & 1 == 1)
            .fold(0u64, |acc, (_, f)| acc ^ f);
        if is_simple_cycle(g, mask) {
            out.push(mask);
        }
    }
    out
}

fn is_simple_cycle(g: &UGraph, mask: u64) -> bool {
    let mut deg: HashMap<usize, usize> = HashMap::new();
    let edges: Vec<(usize, usize)> = (0..g.m()).filter(|e| mask >> e & 1 == 1).map(|e| g.edge(e)).collect();
    for &(u, v) in &edges {
        *deg.entry(u).or_default() += 1;
        *deg.entry(v).or_default() += 1;
    }
    if deg.values().any(|&d| d != 2) {
        return false;
    }
    // connected: walk from one vertex
    let start = edges[0].0;
    let mut seen = vec![start];
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &(a, b) in &edges {
            let w = if a == u {
                b
            } else if b == u {
                a
            } else {
                continue;
            };
            if !seen.contains(&w) {
                seen.push(w);
                stack.push(w);
            }
        }
    }
    seen.len() == deg.len()
}

/// Rank of a set of `u64` rows over GF(2).
pub fn gf2_rank(rows: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &r in rows {
        let mut x = r;
        for &b in &basis {
            x = x.min(x ^ b);
        }
        if x != 0 {
            basis.push(x);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

/// `(total length, longest cycle)` of a minimum-weight cycle basis found by
/// matroid greedy over all simple cycles; `None` if `nu = 0`.
pub fn greedy_min_basis(cycles: &[u64], nu: usize) -> Option<(usize, usize)> {
    if nu == 0 {
        return None;
    }
    let mut sorted = cycles.to_vec();
    sorted.sort_by_key(|c| c.count_ones());
    let mut kept: Vec<u64> = Vec::new();
    for c in sorted {
        let mut trial = kept.clone();
        trial.push(c);
        if gf2_rank(&trial) == trial.len() {
            kept = trial;
            if kept.len() == nu {
                break;
            }
        }
    }
    assert_eq!(kept.len(), nu);
    Some((
        kept.iter().map(|c| c.count_ones() as usize).sum(),
        kept.iter().map(|c| c.count_ones() as usize).max().unwrap(),
    ))
}

/// Exhaustive minimum over all `nu`-subsets of simple cycles that form a
/// basis, of `(total length, longest cycle)` minimised separately.
pub fn exhaustive_min_basis(cycles: &[u64], nu: usize) -> (usize, usize) {
    let mut best_total = usize::MAX;
    let mut best_max = usize::MAX;
    let k = cycles.len();
    let mut idx: Vec<usize> = (0..nu).collect();
    loop {
        let pick: Vec<u64> = idx.iter().map(|&i| cycles[i]).collect();
        if gf2_rank(&pick) == nu {
            let lens: Vec<usize> = pick.iter().map(|c| c.count_ones() as usize).collect();
            best_total = best_total.min(lens.iter().sum());
            best_max = best_max.min(*lens.iter().max().unwrap());
        }
        // next combination
        let mut i = nu;
        loop {
            if i == 0 {
                return (best_total, best_max);
            }
            i -= 1;
            if idx[i] < k - nu + i {
                idx[i] += 1;
                for j in i + 1..nu {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// All `x` in `GF(2)^cols` with `A x = b`, rows of `A` as bitmasks.
pub fn gf2_all_solutions(rows: &[u64], b: &[bool], cols: usize) -> Vec<u64> {
    (0u64..1 << cols)
        .filter(|&x| rows.iter().zip(b).all(|(&r, &bit)| ((r & x).count_ones() % 2 == 1) == bit))
        .collect()
}
