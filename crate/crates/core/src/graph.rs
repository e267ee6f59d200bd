//! Undirected simple graphs on `0..n`.
//!
//! Edges are kept sorted as pairs `(i, j)` with `i < j`; the position of an
//! edge in that list is its coordinate in `GF(2)^m` for every module that
//! talks about cycles or signs.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    index: HashMap<(usize, usize), usize>,
}

#[inline]
fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl UGraph {
    /// Builds a graph, rejecting self-loops, duplicates and out-of-range ends.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::input(format!(
                    "edge ({}, {}) out of range for {n} vertices",
                    u + 1,
                    v + 1
                )));
            }
            if u == v {
                return Err(Error::input(format!("self-loop at vertex {}", u + 1)));
            }
            list.push(ordered(u, v));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::input(format!(
                "duplicate edge ({}, {})",
                w[0].0 + 1,
                w[0].1 + 1
            )));
        }
        let mut adj = vec![Vec::new(); n];
        let mut index = HashMap::with_capacity(list.len());
        for (k, &(u, v)) in list.iter().enumerate() {
            adj[u].push(v);
            adj[v].push(u);
            index.insert((u, v), k);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(Self {
            n,
            edges: list,
            adj,
            index,
        })
    }

    pub fn empty(n: usize) -> Self {
        Self::new(n, std::iter::empty()).expect("empty edge set is valid")
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::input("a cycle needs at least 3 vertices"));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("path edges are valid")
    }

    pub fn complete(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
            .expect("complete graph edges are valid")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> (usize, usize) {
        self.edges[k]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.index.contains_key(&ordered(u, v))
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.index.get(&ordered(u, v)).copied()
    }

    /// Component label per vertex (labels numbered by smallest member) and
    /// the number of components. Isolated vertices are their own component.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut uf = UnionFind::new(self.n);
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        let mut label = vec![usize::MAX; self.n];
        let mut root_label = HashMap::new();
        for v in 0..self.n {
            let r = uf.find(v);
            let next = root_label.len();
            label[v] = *root_label.entry(r).or_insert(next);
        }
        (root_label.len(), label)
    }

    pub fn component_count(&self) -> usize {
        self.components().0
    }

    /// `m - n + kappa(G)`, the dimension of the cycle space.
    pub fn cyclomatic_number(&self) -> usize {
        self.m() + self.component_count() - self.n
    }

    /// Number of edges of `G` with both ends in `vertices`.
    pub fn induced_edge_count(&self, vertices: &[usize]) -> usize {
        let mut count = 0;
        for (a, &u) in vertices.iter().enumerate() {
            for &v in &vertices[a + 1..] {
                if self.has_edge(u, v) {
                    count += 1;
                }
            }
        }
        count
    }

    /// BFS distances from `src` together with the parent tree in which each
    /// vertex points at its smallest-index neighbor one level closer.
    pub fn bfs_tree(&self, src: usize) -> BfsTree {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        let parent = (0..self.n)
            .map(|v| {
                if v == src || dist[v] == usize::MAX {
                    None
                } else {
                    self.adj[v].iter().copied().find(|&u| dist[u] + 1 == dist[v])
                }
            })
            .collect();
        BfsTree { src, dist, parent }
    }

    /// A shortest `u`-`v` path (inclusive of both ends), or `None` when
    /// unreachable. Ties are broken towards smallest-index predecessors.
    pub fn bfs_shortest_path(&self, u: usize, v: usize) -> Option<Vec<usize>> {
        let tree = self.bfs_tree(u);
        tree.path_to(v)
    }

    /// Lexicographic breadth-first search order.
    ///
    /// Each step picks the unvisited vertex with the lexicographically largest
    /// label (ties to the smallest index) and stamps its unvisited neighbors.
    pub fn lex_bfs_order(&self) -> Vec<usize> {
        let n = self.n;
        let mut labels: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut visited = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for step in 0..n {
            let mut best: Option<usize> = None;
            for v in 0..n {
                if visited[v] {
                    continue;
                }
                best = match best {
                    Some(b) if labels[b] >= labels[v] => Some(b),
                    _ => Some(v),
                };
            }
            let v = best.expect("an unvisited vertex remains");
            visited[v] = true;
            order.push(v);
            for &w in &self.adj[v] {
                if !visited[w] {
                    labels[w].push(n - step);
                }
            }
        }
        order
    }

    /// A perfect elimination ordering, or `None` if the graph is not chordal.
    ///
    /// The reverse Lex-BFS order is checked explicitly with [`UGraph::is_peo`].
    pub fn lex_bfs_peo(&self) -> Option<Peo> {
        let mut order = self.lex_bfs_order();
        order.reverse();
        if self.is_peo(&order) {
            Some(Peo::new(self, order))
        } else {
            None
        }
    }

    pub fn is_chordal(&self) -> bool {
        self.lex_bfs_peo().is_some()
    }

    /// Direct clique check: every vertex's later neighborhood is a clique.
    pub fn is_peo(&self, order: &[usize]) -> bool {
        if !is_permutation(order, self.n) {
            return false;
        }
        let pos = positions(order);
        order.iter().all(|&v| {
            let later: Vec<usize> = self.adj[v]
                .iter()
                .copied()
                .filter(|&w| pos[w] > pos[v])
                .collect();
            later
                .iter()
                .enumerate()
                .all(|(a, &x)| later[a + 1..].iter().all(|&y| self.has_edge(x, y)))
        })
    }

    /// Spanning forest `{ {v, v*} }` where `v*` is the earliest later
    /// neighbor of `v` in the elimination order.
    pub fn peo_spanning_forest(&self, peo: &Peo) -> Result<UGraph> {
        if !self.is_peo(&peo.order) {
            return Err(Error::input("ordering is not a perfect elimination ordering"));
        }
        let forest = UGraph::new(self.n, peo.forest_edges())?;
        let expected = self.n - self.component_count();
        if forest.m() != expected || forest.cyclomatic_number() != 0 {
            return Err(Error::Internal(format!(
                "elimination forest has {} edges, expected {expected}",
                forest.m()
            )));
        }
        Ok(forest)
    }

    /// Edge-list text format: `n m` followed by `m` lines `i j`, 1-based.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.m());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{} {}", u + 1, v + 1);
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::input("edge list is empty"))?;
        let nums = parse_usizes(header)?;
        let [n, m] = nums[..] else {
            return Err(Error::input(format!("bad edge-list header {header:?}")));
        };
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let pair = parse_usizes(line)?;
            let [u, v] = pair[..] else {
                return Err(Error::input(format!("bad edge line {line:?}")));
            };
            if u == 0 || v == 0 {
                return Err(Error::input(format!("edge {line:?}: vertices are 1-based")));
            }
            edges.push((u - 1, v - 1));
        }
        if edges.len() != m {
            return Err(Error::input(format!(
                "header announces {m} edges, found {}",
                edges.len()
            )));
        }
        Self::new(n, edges)
    }
}

fn parse_usizes(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|e| Error::input(format!("bad integer {t:?}: {e}")))
        })
        .collect()
}

fn is_permutation(order: &[usize], n: usize) -> bool {
    if order.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    order.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
}

fn positions(order: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; order.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    pos
}

/// Result of a single-source BFS.
#[derive(Clone, Debug)]
pub struct BfsTree {
    pub src: usize,
    /// `usize::MAX` marks unreachable vertices.
    pub dist: Vec<usize>,
    pub parent: Vec<Option<usize>>,
}

impl BfsTree {
    pub fn reachable(&self, v: usize) -> bool {
        self.dist[v] != usize::MAX
    }

    /// Tree path from the source to `v`.
    pub fn path_to(&self, v: usize) -> Option<Vec<usize>> {
        if !self.reachable(v) {
            return None;
        }
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }
}

/// A perfect elimination ordering with the `v*` map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Peo {
    /// `order[k]` is the vertex eliminated at step `k`.
    pub order: Vec<usize>,
    /// `position[v]` is the step at which `v` is eliminated.
    pub position: Vec<usize>,
    /// Earliest later neighbor of each vertex, if any.
    pub star: Vec<Option<usize>>,
}

impl Peo {
    fn new(g: &UGraph, order: Vec<usize>) -> Self {
        let position = positions(&order);
        let star = (0..g.n)
            .map(|v| {
                g.adj[v]
                    .iter()
                    .copied()
                    .filter(|&w| position[w] > position[v])
                    .min_by_key(|&w| position[w])
            })
            .collect();
        Self {
            order,
            position,
            star,
        }
    }

    /// Wraps an arbitrary ordering after verifying it is a PEO of `g`.
    pub fn from_order(g: &UGraph, order: Vec<usize>) -> Result<Self> {
        if !g.is_peo(&order) {
            return Err(Error::input("ordering is not a perfect elimination ordering"));
        }
        Ok(Self::new(g, order))
    }

    pub fn forest_edges(&self) -> Vec<(usize, usize)> {
        self.star
            .iter()
            .enumerate()
            .filter_map(|(v, s)| s.map(|w| ordered(v, w)))
            .collect()
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Random chordal graph by clique-tree growth.
///
/// Each new vertex either starts a new component (probability
/// `isolate_prob`) or is joined to a random nonempty subset, of size at most
/// `max_clique - 1`, of an existing maximal clique. Adding simplicial
/// vertices preserves chordality.
pub fn random_chordal<R: Rng + ?Sized>(
    n: usize,
    max_clique: usize,
    isolate_prob: f64,
    rng: &mut R,
) -> UGraph {
    let max_clique = max_clique.max(2);
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    let mut edges = Vec::new();
    for v in 0..n {
        if cliques.is_empty() || rng.gen_bool(isolate_prob) {
            cliques.push(vec![v]);
            continue;
        }
        let base = cliques[rng.gen_range(0..cliques.len())].clone();
        let k = rng.gen_range(1..=base.len().min(max_clique - 1));
        let mut chosen = base.clone();
        chosen.shuffle(rng);
        chosen.truncate(k);
        chosen.sort_unstable();
        for &u in &chosen {
            edges.push((u, v));
        }
        chosen.push(v);
        cliques.push(chosen);
    }
    UGraph::new(n, edges).expect("generated edges are distinct")
}
