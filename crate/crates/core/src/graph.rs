//! Bitset graphs and the combinatorial oracles built on them.
//!
//! Every combinatorial object in the crate flows through [`Graph`]: Paley
//! graphs, local graphs, induced subgraphs used by the exact subgraph
//! constraints, and the random test graphs of the property suites.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, EigenError};

const WORD: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vertex index {index} out of range for graph of order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("subset must be strictly increasing")]
    UnsortedSubset,
    #[error("graph of order {0} is too large for exhaustive search (limit 128)")]
    TooLarge(usize),
    #[error("graphs have different orders ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("vertex map is not a bijection")]
    NotBijection,
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Simple undirected graph on `0..n` with bitset adjacency rows.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges())
            .finish()
    }
}

impl Graph {
    /// Graph on `n` vertices without edges.
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(WORD).max(1);
        Self {
            n,
            words,
            adj: vec![0; words * n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(i, j);
            }
        }
        g
    }

    /// The cycle `0-1-...-(n-1)-0`.
    pub fn cycle(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 1..n {
            g.add_edge(i - 1, i);
        }
        g
    }

    /// Circulant graph: `i ~ j` iff `(i - j) mod n` or `(j - i) mod n` lies in `jumps`.
    pub fn circulant(n: usize, jumps: &[usize]) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for &s in jumps {
                let j = (i + s) % n;
                if j != i {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Erdős–Rényi graph `G(n, p)`.
    pub fn random<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    /// Adds the edge `{u, v}`; self-loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u < self.n && v < self.n, "edge endpoint out of range");
        if u == v {
            return;
        }
        self.adj[u * self.words + v / WORD] |= 1 << (v % WORD);
        self.adj[v * self.words + u / WORD] |= 1 << (u % WORD);
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.words + v / WORD] >> (v % WORD) & 1 == 1
    }

    #[inline]
    pub fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.has_edge(v, u)).collect()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn is_regular(&self) -> Option<usize> {
        let d = if self.n == 0 { 0 } else { self.degree(0) };
        (0..self.n).all(|v| self.degree(v) == d).then_some(d)
    }

    pub fn is_stable(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(a, &u)| set[a + 1..].iter().all(|&v| !self.has_edge(u, v)))
    }

    fn common_neighbors(&self, u: usize, v: usize) -> usize {
        self.row(u)
            .iter()
            .zip(self.row(v))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Row `v` as a 128-bit mask; requires `n <= 128`.
    fn mask128(&self, v: usize) -> u128 {
        let row = self.row(v);
        let lo = row[0] as u128;
        let hi = row.get(1).copied().unwrap_or(0) as u128;
        lo | hi << 64
    }

    /// Dense 0/1 adjacency matrix, row-major.
    pub fn adjacency_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for (u, v) in self.edges() {
            a[u * n + v] = 1.0;
            a[v * n + u] = 1.0;
        }
        a
    }
}

/// Subgraph induced by the strictly increasing vertex list `subset`.
pub fn induced_subgraph(g: &Graph, subset: &[usize]) -> Result<Graph, GraphError> {
    for (k, &v) in subset.iter().enumerate() {
        if v >= g.n {
            return Err(GraphError::IndexOutOfRange {
                index: v,
                order: g.n,
            });
        }
        if k > 0 && subset[k - 1] >= v {
            return Err(GraphError::UnsortedSubset);
        }
    }
    let mut h = Graph::empty(subset.len());
    for (a, &u) in subset.iter().enumerate() {
        for (b, &v) in subset.iter().enumerate().skip(a + 1) {
            if g.has_edge(u, v) {
                h.add_edge(a, b);
            }
        }
    }
    Ok(h)
}

pub fn complement(g: &Graph) -> Graph {
    let mut h = Graph::empty(g.n);
    for u in 0..g.n {
        for v in u + 1..g.n {
            if !g.has_edge(u, v) {
                h.add_edge(u, v);
            }
        }
    }
    h
}

/// A maximum stable set: its size and the lexicographically smallest witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableSetWitness {
    pub size: usize,
    pub witness: Vec<usize>,
}

struct AlphaSearch<'a> {
    adj: &'a [u128],
    best: usize,
    target: Option<usize>,
    found: bool,
}

impl AlphaSearch<'_> {
    // Branch on the candidate of maximum residual degree, include-branch first,
    // prune by candidate popcount.
    fn run(&mut self, size: usize, cand: u128) {
        if self.found {
            return;
        }
        if cand == 0 {
            if size > self.best {
                self.best = size;
            }
            if self.target.is_some_and(|t| size >= t) {
                self.found = true;
            }
            return;
        }
        let bound = size + cand.count_ones() as usize;
        match self.target {
            Some(t) if bound < t => return,
            None if bound <= self.best => return,
            _ => {}
        }
        let mut pivot = 0;
        let mut pivot_deg = -1i64;
        let mut rest = cand;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let d = (self.adj[v] & cand).count_ones() as i64;
            if d > pivot_deg {
                pivot_deg = d;
                pivot = v;
            }
        }
        let bit = 1u128 << pivot;
        self.run(size + 1, cand & !bit & !self.adj[pivot]);
        if pivot_deg == 0 {
            // the pivot is isolated in `cand`, excluding it can never help
            return;
        }
        self.run(size, cand & !bit);
    }
}

/// Exact stability number by bitset branch and bound.
///
/// The witness is the lexicographically smallest maximum stable set, so the
/// result does not depend on the search order.
pub fn brute_force_alpha(g: &Graph) -> Result<StableSetWitness, GraphError> {
    let n = g.n;
    if n > 128 {
        return Err(GraphError::TooLarge(n));
    }
    if n == 0 {
        return Ok(StableSetWitness {
            size: 0,
            witness: vec![],
        });
    }
    let adj: Vec<u128> = (0..n).map(|v| g.mask128(v)).collect();
    let all = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    let mut search = AlphaSearch {
        adj: &adj,
        best: 0,
        target: None,
        found: false,
    };
    search.run(0, all);
    let alpha = search.best;

    // Greedy lexicographic completion: fix the smallest vertex that still
    // extends to a maximum stable set using only larger vertices.
    let mut witness = Vec::with_capacity(alpha);
    let mut cand = all;
    while witness.len() < alpha {
        let mut rest = cand;
        let mut chosen = None;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let above = if v == 127 { 0 } else { !((1u128 << (v + 1)) - 1) };
            let next = cand & !adj[v] & above;
            let mut probe = AlphaSearch {
                adj: &adj,
                best: 0,
                target: Some(alpha - witness.len() - 1),
                found: false,
            };
            probe.run(0, next);
            if probe.found {
                chosen = Some((v, next));
                break;
            }
        }
        let (v, next) = chosen.expect("maximum stable set must be extendable");
        witness.push(v);
        cand = next;
    }
    Ok(StableSetWitness {
        size: alpha,
        witness,
    })
}

/// Stable sets of a graph, listed in lexicographic order of their sorted
/// vertex lists (the empty set first, a set before its extensions).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableSetList {
    pub sets: Vec<Vec<usize>>,
    pub complete: bool,
}

pub fn enumerate_stable_sets(g: &Graph, cap: usize) -> StableSetList {
    fn walk(
        g: &Graph,
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> bool {
        if out.len() >= cap {
            return false;
        }
        out.push(current.clone());
        for v in start..g.n {
            if current.iter().all(|&u| !g.has_edge(u, v)) {
                current.push(v);
                let ok = walk(g, v + 1, current, out, cap);
                current.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    let mut sets = Vec::new();
    let complete = walk(g, 0, &mut Vec::new(), &mut sets, cap);
    StableSetList { sets, complete }
}

/// Adjacency eigenvalues in ascending order (cyclic Jacobi).
pub fn spectrum(g: &Graph) -> Result<Vec<f64>, GraphError> {
    let n = g.n;
    if n > 256 {
        return Err(GraphError::TooLarge(n));
    }
    let mut a = g.adjacency_dense();
    Ok(linalg::jacobi_eigenvalues(&mut a, n, 1e-10)?)
}

/// Parameters `(n, r, a, c)` of a strongly regular graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrgParameters {
    pub n: usize,
    pub r: usize,
    pub a: usize,
    pub c: usize,
}

pub fn check_strongly_regular(g: &Graph) -> Option<SrgParameters> {
    let n = g.n;
    let r = g.is_regular()?;
    if r == 0 || r + 1 == n {
        return None;
    }
    let mut lambda = None;
    let mut mu = None;
    for u in 0..n {
        for v in u + 1..n {
            let common = g.common_neighbors(u, v);
            let slot = if g.has_edge(u, v) {
                &mut lambda
            } else {
                &mut mu
            };
            match *slot {
                None => *slot = Some(common),
                Some(x) if x != common => return None,
                _ => {}
            }
        }
    }
    Some(SrgParameters {
        n,
        r,
        a: lambda?,
        c: mu?,
    })
}

/// True iff `map` carries the edges of `g` exactly onto the edges of `h`.
pub fn check_isomorphism_map(g: &Graph, h: &Graph, map: &[usize]) -> Result<bool, GraphError> {
    let n = g.n;
    if h.n != n || map.len() != n {
        return Err(GraphError::OrderMismatch(n, h.n.min(map.len())));
    }
    let mut seen = vec![false; n];
    for &m in map {
        if m >= n || std::mem::replace(&mut seen[m], true) {
            return Err(GraphError::NotBijection);
        }
    }
    for u in 0..n {
        for v in u + 1..n {
            if g.has_edge(u, v) != h.has_edge(map[u], map[v]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
