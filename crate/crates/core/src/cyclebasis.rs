//! Shortest maximal cycle bases via Horton's candidate set.
//!
//! Candidates are `P(v, x) + {x, y} + P(y, v)` for every vertex `v` and
//! edge `{x, y}`, with `P` the BFS tree paths of [`UGraph::bfs_tree`]. A
//! greedy pass over candidates sorted by length keeps each cycle that is
//! independent over GF(2) of those already kept; the result has minimum total
//! length and therefore also minimizes the longest member.

use std::collections::HashSet;

use log::warn;

use crate::error::{Error, Result};
use crate::gf2::{EchelonBasis, Gf2Matrix, Gf2Vector};
use crate::graph::UGraph;

/// A simple cycle of a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle {
    /// Vertices in cyclic order, starting anywhere, without repeating the start.
    pub vertices: Vec<usize>,
    /// Edge indices of the cycle, ascending.
    pub edges: Vec<usize>,
    pub incidence: Gf2Vector,
    /// False if the cycle has a chord in its graph.
    pub induced: bool,
}

impl Cycle {
    /// Builds a cycle from vertices in cyclic order.
    pub fn from_vertices(g: &UGraph, vertices: Vec<usize>) -> Result<Self> {
        let len = vertices.len();
        if len < 3 {
            return Err(Error::input("a cycle needs at least 3 vertices"));
        }
        let mut distinct = vertices.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() != len {
            return Err(Error::input("cycle repeats a vertex"));
        }
        let mut edges = Vec::with_capacity(len);
        for t in 0..len {
            let (u, v) = (vertices[t], vertices[(t + 1) % len]);
            let e = g.edge_index(u, v).ok_or_else(|| {
                Error::input(format!("({}, {}) is not an edge", u + 1, v + 1))
            })?;
            edges.push(e);
        }
        edges.sort_unstable();
        let incidence = Gf2Vector::from_positions(g.m(), edges.iter().copied())?;
        let induced = g.induced_edge_count(&vertices) == len;
        Ok(Self {
            vertices,
            edges,
            incidence,
            induced,
        })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Vertex set, ascending.
    pub fn vertex_set(&self) -> Vec<usize> {
        let mut v = self.vertices.clone();
        v.sort_unstable();
        v
    }

    /// Edges as vertex pairs.
    pub fn edge_pairs(&self, g: &UGraph) -> Vec<(usize, usize)> {
        self.edges.iter().map(|&e| g.edge(e)).collect()
    }
}

/// Cycle basis together with its cycle sparsity.
#[derive(Clone, Debug)]
pub struct CycleBasis {
    pub cycles: Vec<Cycle>,
    /// Cyclomatic number `m - n + kappa` of the graph.
    pub nu: usize,
    /// Length of the longest basis cycle; 2 when the cycle space is empty.
    pub sparsity: usize,
    /// Set when chordless candidates could not complete the basis.
    pub contains_chorded: bool,
    edge_count: usize,
}

impl CycleBasis {
    pub fn from_cycles(g: &UGraph, cycles: Vec<Cycle>) -> Self {
        let sparsity = cycles.iter().map(Cycle::len).max().unwrap_or(2);
        let contains_chorded = cycles.iter().any(|c| !c.induced);
        Self {
            nu: g.cyclomatic_number(),
            sparsity,
            contains_chorded,
            edge_count: g.m(),
            cycles,
        }
    }

    pub fn total_length(&self) -> usize {
        self.cycles.iter().map(Cycle::len).sum()
    }

    /// One row per basis cycle, one column per edge.
    pub fn incidence_matrix(&self) -> Gf2Matrix {
        Gf2Matrix::from_rows(
            self.edge_count,
            self.cycles.iter().map(|c| c.incidence.clone()).collect(),
        )
        .expect("incidence vectors share the graph's edge count")
    }
}

/// Horton's candidate cycles, deduplicated and sorted by length, ties by the
/// ascending edge-index list.
pub fn horton_candidates(g: &UGraph) -> Vec<Cycle> {
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out = Vec::new();
    let mut mark = vec![usize::MAX; g.n()];
    for v in 0..g.n() {
        if g.degree(v) < 2 {
            continue;
        }
        let tree = g.bfs_tree(v);
        for &(x, y) in g.edges() {
            if !tree.reachable(x) {
                continue;
            }
            if tree.parent[x] == Some(y) || tree.parent[y] == Some(x) {
                continue;
            }
            let px = tree.path_to(x).expect("x is reachable");
            let py = tree.path_to(y).expect("y shares x's component");
            for &w in &px[1..] {
                mark[w] = v;
            }
            let disjoint = py[1..].iter().all(|&w| mark[w] != v);
            for &w in &px[1..] {
                mark[w] = usize::MAX;
            }
            if !disjoint {
                continue;
            }
            let mut vertices = px;
            vertices.extend(py[1..].iter().rev());
            let cycle = Cycle::from_vertices(g, vertices)
                .expect("tree paths plus a non-tree edge form a simple cycle");
            if seen.insert(cycle.edges.clone()) {
                out.push(cycle);
            }
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.edges.cmp(&b.edges)));
    out
}

/// Minimum-total-length cycle basis, which is also a shortest maximal one.
///
/// Components are processed independently and their bases concatenated.
/// Chordless candidates are used first; if they cannot complete a
/// component's basis the unfiltered list is used and the basis is flagged.
pub fn shortest_maximal_cycle_basis(g: &UGraph) -> Result<CycleBasis> {
    let (kappa, label) = g.components();
    let candidates = horton_candidates(g);
    let mut comp_m = vec![0usize; kappa];
    let mut comp_n = vec![0usize; kappa];
    for v in 0..g.n() {
        comp_n[label[v]] += 1;
    }
    for &(u, _) in g.edges() {
        comp_m[label[u]] += 1;
    }

    let mut cycles = Vec::new();
    for c in 0..kappa {
        let nu_c = comp_m[c] + 1 - comp_n[c];
        if nu_c == 0 {
            continue;
        }
        let mine: Vec<&Cycle> = candidates
            .iter()
            .filter(|cy| label[cy.vertices[0]] == c)
            .collect();
        let mut kept = greedy(g.m(), mine.iter().copied().filter(|cy| cy.induced), nu_c);
        if kept.len() < nu_c {
            warn!(
                "chordless Horton candidates span only {} of {nu_c} cycle dimensions; \
                 falling back to chorded candidates",
                kept.len()
            );
            kept = greedy(g.m(), mine.iter().copied(), nu_c);
        }
        if kept.len() < nu_c {
            return Err(Error::Internal(format!(
                "Horton candidates span {} of {nu_c} cycle dimensions",
                kept.len()
            )));
        }
        cycles.extend(kept);
    }
    Ok(CycleBasis::from_cycles(g, cycles))
}

fn greedy<'a>(m: usize, cands: impl Iterator<Item = &'a Cycle>, limit: usize) -> Vec<Cycle> {
    let mut acc = EchelonBasis::new(m);
    let mut kept = Vec::new();
    for cy in cands {
        if kept.len() == limit {
            break;
        }
        if acc
            .rank_increment(&cy.incidence)
            .expect("incidence width equals edge count")
        {
            kept.push(cy.clone());
        }
    }
    kept
}

/// Length of the longest cycle in a shortest maximal cycle basis (2 for forests).
pub fn cycle_sparsity(g: &UGraph) -> Result<usize> {
    Ok(shortest_maximal_cycle_basis(g)?.sparsity)
}
