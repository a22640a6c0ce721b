//! Exact subgraph constraints.
//!
//! `X_I ∈ STAB²(G_I)` is tested as convex-hull membership of the vectorized
//! submatrix among the outer products `s sᵀ` of the stable sets of `G_I`.
//! Coordinates are the diagonal entries followed by the non-edge pairs of
//! `G_I` (edge entries vanish at every generator). A failed check yields
//! the Farkas hyperplane as a cut.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{hull_membership, HullError, MembershipResult, SparseSym};
use crate::graph::{enumerate_stable_sets, induced_subgraph, Graph, GraphError};
use crate::linalg::SymMatrix;
use crate::par::Execution;

/// Moves allowed per distinct evaluation before a restart gives up.
const MOVES_PER_EVALUATION: usize = 20;
/// Violation differences below this count as ties, so plateaus stay walkable.
const PLATEAU_TOL: f64 = 1e-9;

pub const MAX_SUBSET: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EscError {
    #[error("subset of size {0} exceeds the limit of {MAX_SUBSET}")]
    SubsetTooLarge(usize),
    #[error("matrix has order {0}, graph has order {1}")]
    OrderMismatch(usize, usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Hull(#[from] HullError),
}

/// `⟨H, X_I⟩ ≤ h` on the principal submatrix indexed by the sorted set `I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutPlane {
    pub subset: Vec<usize>,
    pub h: SymMatrix,
    pub rhs: f64,
}

impl CutPlane {
    /// `⟨H, X_I⟩ − h`; positive means `X` violates the cut.
    pub fn evaluate(&self, x: &SymMatrix) -> f64 {
        self.h.inner(&x.principal(&self.subset)) - self.rhs
    }

    /// The cut as a constraint on the full matrix.
    pub fn lift(&self) -> SparseSym {
        let mut a = SparseSym::new();
        let k = self.subset.len();
        for a_ in 0..k {
            for b in a_..k {
                let v = self.h.get(a_, b);
                if v != 0.0 {
                    a.push(self.subset[a_], self.subset[b], v);
                }
            }
        }
        a
    }

    /// Largest `⟨H, s sᵀ⟩ − h` over the stable sets of `G_I`.
    pub fn max_excess_on_stab2(&self, g: &Graph) -> Result<f64, EscError> {
        let verts = stab2_vertices(g, &self.subset)?;
        Ok(verts
            .iter()
            .map(|v| self.h.inner(v) - self.rhs)
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EscCheckOutcome {
    /// Convex weights over [`stab2_vertices`], in that order.
    Satisfied { weights: Vec<f64> },
    Violated { cut: CutPlane, violation: f64 },
}

impl EscCheckOutcome {
    pub fn violation(&self) -> f64 {
        match self {
            EscCheckOutcome::Satisfied { .. } => 0.0,
            EscCheckOutcome::Violated { violation, .. } => *violation,
        }
    }
}

fn check_subset(g: &Graph, subset: &[usize]) -> Result<Graph, EscError> {
    if subset.len() > MAX_SUBSET {
        return Err(EscError::SubsetTooLarge(subset.len()));
    }
    Ok(induced_subgraph(g, subset)?)
}

fn stable_sets(gi: &Graph) -> Vec<Vec<usize>> {
    enumerate_stable_sets(gi, usize::MAX).sets
}

/// One `s sᵀ` per stable set of `G_I`, the empty set first.
pub fn stab2_vertices(g: &Graph, subset: &[usize]) -> Result<Vec<SymMatrix>, EscError> {
    let gi = check_subset(g, subset)?;
    let k = subset.len();
    Ok(stable_sets(&gi)
        .iter()
        .map(|s| {
            let mut ind = vec![0.0; k];
            for &v in s {
                ind[v] = 1.0;
            }
            SymMatrix::outer(&ind)
        })
        .collect())
}

/// Coordinates used for hull membership: diagonal, then non-edge pairs.
fn coordinates(gi: &Graph) -> Vec<(usize, usize)> {
    let k = gi.order();
    let mut c: Vec<(usize, usize)> = (0..k).map(|i| (i, i)).collect();
    for i in 0..k {
        for j in i + 1..k {
            if !gi.has_edge(i, j) {
                c.push((i, j));
            }
        }
    }
    c
}

struct HullInstance {
    coords: Vec<(usize, usize)>,
    points: Vec<Vec<f64>>,
    target: Vec<f64>,
}

fn hull_instance(x: &SymMatrix, g: &Graph, subset: &[usize]) -> Result<HullInstance, EscError> {
    if x.order() != g.order() {
        return Err(EscError::OrderMismatch(x.order(), g.order()));
    }
    let gi = check_subset(g, subset)?;
    let coords = coordinates(&gi);
    let points: Vec<Vec<f64>> = stable_sets(&gi)
        .iter()
        .map(|s| {
            let mut ind = vec![false; subset.len()];
            for &v in s {
                ind[v] = true;
            }
            coords
                .iter()
                .map(|&(i, j)| if ind[i] && ind[j] { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let target: Vec<f64> = coords
        .iter()
        .map(|&(i, j)| x.get(subset[i], subset[j]))
        .collect();
    Ok(HullInstance { coords, points, target })
}

pub fn esc_check(x: &SymMatrix, g: &Graph, subset: &[usize], tol: f64) -> Result<EscCheckOutcome, EscError> {
    let HullInstance { coords, points, target } = hull_instance(x, g, subset)?;
    Ok(match hull_membership(&points, &target, tol)? {
        MembershipResult::Inside { weights, .. } => EscCheckOutcome::Satisfied { weights },
        MembershipResult::Outside {
            normal,
            offset,
            violation,
        } => {
            let mut h = SymMatrix::zeros(subset.len());
            for (&(i, j), &y) in coords.iter().zip(&normal) {
                h.set(i, j, if i == j { y } else { 0.5 * y });
            }
            EscCheckOutcome::Violated {
                cut: CutPlane {
                    subset: subset.to_vec(),
                    h,
                    rhs: offset,
                },
                violation,
            }
        }
    })
}

/// Violation of `X_I` pushed away from the centroid of `STAB²(G_I)` by the
/// factor `1 + push`. Zero only if `X_I` lies in the hull shrunk towards the
/// centroid, so it grades subsets that are still feasible.
pub fn pushed_violation(x: &SymMatrix, g: &Graph, subset: &[usize], push: f64, tol: f64) -> Result<f64, EscError> {
    let HullInstance { points, mut target, .. } = hull_instance(x, g, subset)?;
    let m = points.len() as f64;
    for (c, t) in target.iter_mut().enumerate() {
        let centroid = points.iter().map(|p| p[c]).sum::<f64>() / m;
        *t += push * (*t - centroid);
    }
    Ok(match hull_membership(&points, &target, tol)? {
        MembershipResult::Inside { .. } => 0.0,
        MembershipResult::Outside { violation, .. } => violation,
    })
}

/// Builds a cut from entries given on arbitrary labels, sorting the subset.
fn cut_from_labels(labels: &[usize], entries: &[(usize, usize, f64)], rhs: f64) -> CutPlane {
    let mut subset = labels.to_vec();
    subset.sort_unstable();
    let pos = |v: usize| subset.binary_search(&labels[v]).unwrap();
    let mut h = SymMatrix::zeros(subset.len());
    for &(a, b, v) in entries {
        h.add(pos(a), pos(b), v);
    }
    CutPlane { subset, h, rhs }
}

/// The four inequalities describing `STAB²` of two non-adjacent vertices:
/// `X_ij ≥ 0`, `X_ij ≤ X_ii`, `X_ij ≤ X_jj`, `X_ii + X_jj ≤ 1 + X_ij`.
pub fn esc_ineq_k2(i: usize, j: usize) -> [CutPlane; 4] {
    assert_ne!(i, j);
    let l = [i, j];
    [
        cut_from_labels(&l, &[(0, 1, -0.5)], 0.0),
        cut_from_labels(&l, &[(0, 1, 0.5), (0, 0, -1.0)], 0.0),
        cut_from_labels(&l, &[(0, 1, 0.5), (1, 1, -1.0)], 0.0),
        cut_from_labels(&l, &[(0, 0, 1.0), (1, 1, 1.0), (0, 1, -0.5)], 1.0),
    ]
}

/// The three triangle inequalities `X_ij + X_iℓ ≤ X_ii + X_jℓ` (centred at
/// each vertex in turn) and `X_ii + X_jj + X_ℓℓ ≤ 1 + X_ij + X_iℓ + X_jℓ`.
pub fn esc_ineq_k3(i: usize, j: usize, l: usize) -> [CutPlane; 4] {
    assert!(i != j && i != l && j != l);
    let lab = [i, j, l];
    let tri = |c: usize, a: usize, b: usize| {
        cut_from_labels(&lab, &[(c, a, 0.5), (c, b, 0.5), (c, c, -1.0), (a, b, -0.5)], 0.0)
    };
    [
        tri(0, 1, 2),
        tri(1, 0, 2),
        tri(2, 0, 1),
        cut_from_labels(
            &lab,
            &[
                (0, 0, 1.0),
                (1, 1, 1.0),
                (2, 2, 1.0),
                (0, 1, -0.5),
                (0, 2, -0.5),
                (1, 2, -0.5),
            ],
            1.0,
        ),
    ]
}

/// Settings for [`find_violated`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Total subset evaluations, split evenly across restarts.
    pub budget: usize,
    pub restarts: usize,
    pub top_m: usize,
    pub seed: u64,
    pub tol: f64,
    /// Outward push used for the annealing score; `0` anneals on the plain
    /// violation. Reported violations are always unpushed.
    pub push: f64,
    pub execution: Execution,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: 4000,
            restarts: 8,
            top_m: 200,
            seed: 20250101,
            tol: 1e-6,
            push: 0.25,
            execution: Execution::default(),
        }
    }
}

pub(crate) fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(restart as u64 + 1)
}

/// Simulated-annealing search for subsets of size `k` whose ESC `X`
/// violates. Returns at most `top_m` distinct subsets, most violated first,
/// ties by subset.
pub fn find_violated(
    x: &SymMatrix,
    g: &Graph,
    k: usize,
    cfg: &SearchConfig,
) -> Result<Vec<(Vec<usize>, f64)>, EscError> {
    let n = g.order();
    let k = k.min(n);
    if k > MAX_SUBSET {
        return Err(EscError::SubsetTooLarge(k));
    }
    if x.order() != n {
        return Err(EscError::OrderMismatch(x.order(), n));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let restarts = cfg.restarts.max(1);
    let per = (cfg.budget / restarts).max(1);
    let runs = cfg.execution.map_range(restarts, |r| {
        anneal(x, g, k, per, restart_seed(cfg.seed, r), cfg)
    });
    let mut best: HashMap<Vec<usize>, f64> = HashMap::new();
    for run in runs {
        for (s, v) in run? {
            let e = best.entry(s).or_insert(v);
            *e = e.max(v);
        }
    }
    let mut out: Vec<(Vec<usize>, f64)> = best.into_iter().filter(|(_, v)| *v > cfg.tol).collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out.truncate(cfg.top_m);
    Ok(out)
}

fn anneal(
    x: &SymMatrix,
    g: &Graph,
    k: usize,
    budget: usize,
    seed: u64,
    cfg: &SearchConfig,
) -> Result<Vec<(Vec<usize>, f64)>, EscError> {
    let n = g.order();
    let tol = cfg.tol;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // subset -> (annealing score, violation); the budget counts distinct
    // subsets, revisits are free but capped
    let mut memo: HashMap<Vec<usize>, (f64, f64)> = HashMap::new();
    let eval = |memo: &mut HashMap<Vec<usize>, (f64, f64)>, s: &Vec<usize>| -> Result<f64, EscError> {
        if let Some(&(score, _)) = memo.get(s) {
            return Ok(score);
        }
        let entry = if cfg.push > 0.0 {
            // the pushed point is outside whenever X_I is
            let score = pushed_violation(x, g, s, cfg.push, tol)?;
            let v = if score > tol { esc_check(x, g, s, tol)?.violation() } else { 0.0 };
            (score, v)
        } else {
            let v = esc_check(x, g, s, tol)?.violation();
            (v, v)
        };
        memo.insert(s.clone(), entry);
        Ok(entry.0)
    };
    let fresh_start = |rng: &mut ChaCha8Rng| {
        let mut s = sample(rng, n, k).into_vec();
        s.sort_unstable();
        s
    };
    let mut cur = fresh_start(&mut rng);
    let mut cur_v = eval(&mut memo, &cur)?;
    let mut temp = cur_v.max(1e-3);
    // a local maximum is abandoned after a neighborhood's worth of rejections
    let patience = k * (n - k);
    let mut rejected = 0;
    let max_moves = budget.saturating_mul(MOVES_PER_EVALUATION);
    let mut moves = 0;
    while k < n && memo.len() < budget && moves < max_moves {
        moves += 1;
        if rejected >= patience {
            cur = fresh_start(&mut rng);
            cur_v = eval(&mut memo, &cur)?;
            temp = cur_v.max(1e-3);
            rejected = 0;
        }
        let out_pos = rng.random_range(0..k);
        let incoming = loop {
            let v = rng.random_range(0..n);
            if cur.binary_search(&v).is_err() {
                break v;
            }
        };
        let mut cand = cur.clone();
        cand[out_pos] = incoming;
        cand.sort_unstable();
        let v = eval(&mut memo, &cand)?;
        let accept = v >= cur_v - PLATEAU_TOL || rng.random::<f64>() < ((v - cur_v) / temp).exp();
        if accept {
            cur = cand;
            cur_v = v;
            rejected = 0;
        } else {
            rejected += 1;
        }
        if moves % 50 == 0 {
            temp *= 0.95;
        }
    }
    Ok(memo
        .into_iter()
        .filter(|(_, (_, v))| *v > tol)
        .map(|(s, (_, v))| (s, v))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stab2_counts() {
        let g = Graph::path(2);
        assert_eq!(stab2_vertices(&g, &[0, 1]).unwrap().len(), 3);
        let e = Graph::empty(2);
        let v = stab2_vertices(&e, &[0, 1]).unwrap();
        assert_eq!(v.len(), 4);
        assert!(v.contains(&SymMatrix::from_fn(2, |_, _| 1.0)));
        assert_eq!(
            stab2_vertices(&Graph::empty(20), &(0..17).collect::<Vec<_>>()).unwrap_err(),
            EscError::SubsetTooLarge(17)
        );
    }

    #[test]
    fn k2_arithmetic_example() {
        let x = SymMatrix::from_fn(2, |i, j| if i == j { 0.6 } else { 0.0 });
        let cuts = esc_ineq_k2(0, 1);
        assert!((cuts[3].evaluate(&x) - 0.2).abs() < 1e-12);
        assert!(cuts[..3].iter().all(|c| c.evaluate(&x) <= 0.0));
    }

    #[test]
    fn explicit_cuts_are_valid_on_every_three_vertex_graph() {
        for mask in 0..8u32 {
            let pairs = [(0, 1), (0, 2), (1, 2)];
            let edges: Vec<(usize, usize)> =
                (0..3).filter(|b| mask >> b & 1 == 1).map(|b| pairs[b]).collect();
            let g = Graph::from_edges(3, &edges);
            let mut cuts: Vec<CutPlane> = esc_ineq_k3(2, 0, 1).into();
            cuts.extend(esc_ineq_k2(1, 2));
            for c in &cuts {
                assert!(c.max_excess_on_stab2(&g).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn stable_outer_products_are_satisfied() {
        let g = Graph::cycle(7);
        let mut s = vec![0.0; 7];
        for v in [0, 2, 4] {
            s[v] = 1.0;
        }
        let x = SymMatrix::outer(&s);
        for subset in [vec![0, 1, 2, 3], vec![0, 2, 4], vec![1, 3, 5, 6]] {
            assert!(matches!(
                esc_check(&x, &g, &subset, 1e-9).unwrap(),
                EscCheckOutcome::Satisfied { .. }
            ));
        }
        let cfg = SearchConfig {
            budget: 200,
            ..SearchConfig::default()
        };
        assert!(find_violated(&x, &g, 4, &cfg).unwrap().is_empty());
    }

    #[test]
    fn violated_cut_separates_and_is_valid() {
        // X_00 = X_11 = 0.6, X_01 = 0 on two non-adjacent vertices
        let g = Graph::empty(2);
        let x = SymMatrix::from_fn(2, |i, j| if i == j { 0.6 } else { 0.0 });
        match esc_check(&x, &g, &[0, 1], 1e-9).unwrap() {
            EscCheckOutcome::Violated { cut, violation } => {
                assert!(violation > 0.0);
                assert!((cut.evaluate(&x) - violation).abs() < 1e-9);
                assert!(cut.max_excess_on_stab2(&g).unwrap() <= 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }
}
