//! Exact subgraph hierarchy and its vertex-transitive variant.
//!
//! `z_J(G)` is computed by cutting planes on the lifted theta SDP: solve,
//! separate every ESC in `J`, add the most violated cuts, resolve. Pairs and
//! triples are separated with their explicit inequality systems, larger
//! subsets through the hull-membership LP.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{sdp_solve_with, PresolveError, SdpOptions, SdpProblem, SdpStatus};
use crate::esc::{esc_check, esc_ineq_k2, esc_ineq_k3, find_violated, CutPlane, EscCheckOutcome, EscError, SearchConfig};
use crate::gf::local_graph;
use crate::graph::Graph;
use crate::linalg::{min_eigenvalue, EigenError, SymMatrix};
use crate::par::Execution;
use crate::theta::{bordered, lifted_problem, split_bordered};

/// Largest subset family the exhaustive mode will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;
/// Loosest solver gap still accepted from a stalled solve.
const SALVAGE_GAP: f64 = 1e-5;
const INACTIVE_SLACK: f64 = 1e-4;
const INACTIVE_MULTIPLIER: f64 = 1e-9;
const INACTIVE_ROUNDS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HierarchyError {
    #[error("C({n}, {k}) = {count} subsets exceeds the exhaustive limit; use heuristic mode")]
    CombinatorialBlowup { n: usize, k: usize, count: u128 },
    #[error("SDP solver stopped with status {status:?} (gap {gap:e}) in round {round}")]
    Solver { status: SdpStatus, gap: f64, round: usize },
    #[error(transparent)]
    Presolve(#[from] PresolveError),
    #[error(transparent)]
    Esc(#[from] EscError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("input is not feasible: {0}")]
    InfeasibleInput(String),
    #[error("graph has no vertices")]
    EmptyGraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Exhaustive,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    Esh,
    Vtesh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exactness {
    Exact,
    UpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierarchyConfig {
    pub level: usize,
    pub mode: Mode,
    /// Separation cycles in heuristic mode.
    pub cycles: usize,
    pub max_new_cuts_per_cycle: usize,
    /// Subset evaluations per heuristic separation.
    pub budget: usize,
    pub restarts: usize,
    /// Outward push of the annealing score, see [`SearchConfig::push`].
    pub push: f64,
    pub seed: u64,
    pub sdp_tol: f64,
    pub esc_tol: f64,
    pub max_rounds: usize,
    pub execution: Execution,
}

impl HierarchyConfig {
    pub fn exhaustive(level: usize) -> Self {
        Self {
            level,
            ..Self::default()
        }
    }

    pub fn heuristic(level: usize) -> Self {
        Self {
            level,
            mode: Mode::Heuristic,
            ..Self::default()
        }
    }
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        Self {
            level: 2,
            mode: Mode::Exhaustive,
            cycles: 10,
            max_new_cuts_per_cycle: 200,
            budget: 4000,
            restarts: 8,
            push: 0.25,
            seed: 20250101,
            sdp_tol: 1e-8,
            esc_tol: 1e-6,
            max_rounds: 100,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub objective: f64,
    pub active_cuts: usize,
    pub new_cuts: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub kind: BoundKind,
    pub exactness: Exactness,
    /// False when the round cap stopped an exhaustive run early.
    pub converged: bool,
    pub level: usize,
    pub solver_gap: f64,
    pub trace: Vec<RoundTrace>,
    pub cuts: Vec<CutPlane>,
    /// Lifted optimum `(x, X)` of the last solve.
    pub x: Vec<f64>,
    pub matrix: SymMatrix,
}

/// `⌊(√q + 3) / 2⌋` in integer arithmetic.
pub fn ell(q: u64) -> u64 {
    (q.isqrt() + 3) / 2
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            break;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

struct PoolCut {
    cut: CutPlane,
    inactive: usize,
}

struct Solved {
    objective: f64,
    gap: f64,
    big: SymMatrix,
    slacks: Vec<f64>,
    multipliers: Vec<f64>,
}

fn solve_with_cuts(base: &SdpProblem, pool: &[PoolCut], opts: &SdpOptions, round: usize) -> Result<Solved, HierarchyError> {
    let mut prob = base.clone();
    for p in pool {
        prob.add_inequality(p.cut.lift(), p.cut.rhs);
    }
    let sol = sdp_solve_with(&prob, opts)?;
    let usable = sol.is_optimal()
        || (sol.status != SdpStatus::PrimalInfeasible
            && sol.gap <= SALVAGE_GAP
            && sol.primal_infeasibility <= 1e-6
            && sol.dual_infeasibility <= 1e-6);
    if !usable {
        return Err(HierarchyError::Solver {
            status: sol.status,
            gap: sol.gap,
            round,
        });
    }
    let slacks = sol.inequality_slacks(&prob)[base.inequalities.len()..].to_vec();
    let multipliers = sol.u[base.inequalities.len()..].to_vec();
    Ok(Solved {
        objective: sol.objective,
        gap: sol.gap,
        big: sol.x,
        slacks,
        multipliers,
    })
}

/// Violated ESC cuts on one subset, most violated first.
pub fn separate_subset(x: &SymMatrix, g: &Graph, subset: &[usize], tol: f64) -> Result<Vec<(CutPlane, f64)>, EscError> {
    let explicit = |cuts: Vec<CutPlane>| {
        let mut v: Vec<(CutPlane, f64)> = cuts
            .into_iter()
            .map(|c| {
                let e = c.evaluate(x);
                (c, e)
            })
            .filter(|(_, e)| *e > tol)
            .collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v
    };
    match *subset {
        [i, j] => Ok(explicit(esc_ineq_k2(i, j).into())),
        [i, j, l] => {
            let mut cuts: Vec<CutPlane> = esc_ineq_k3(i, j, l).into();
            cuts.extend(esc_ineq_k2(i, j));
            cuts.extend(esc_ineq_k2(i, l));
            cuts.extend(esc_ineq_k2(j, l));
            Ok(explicit(cuts))
        }
        _ => Ok(match esc_check(x, g, subset, tol)? {
            EscCheckOutcome::Violated { cut, violation } if violation > tol => vec![(cut, violation)],
            _ => Vec::new(),
        }),
    }
}

/// Keeps cuts whose slack is small or multiplier is positive; retires the
/// rest after several idle rounds.
fn age_pool(pool: &mut Vec<PoolCut>, solved: &Solved) {
    for (p, (&s, &u)) in pool.iter_mut().zip(solved.slacks.iter().zip(&solved.multipliers)) {
        if s > INACTIVE_SLACK && u < INACTIVE_MULTIPLIER {
            p.inactive += 1;
        } else {
            p.inactive = 0;
        }
    }
    pool.retain(|p| p.inactive < INACTIVE_ROUNDS);
}

fn sdp_options(cfg: &HierarchyConfig) -> SdpOptions {
    SdpOptions {
        tol: cfg.sdp_tol,
        max_iter: 200,
        execution: cfg.execution,
    }
}

fn finish(
    solved: Solved,
    kind: BoundKind,
    exactness: Exactness,
    converged: bool,
    level: usize,
    trace: Vec<RoundTrace>,
    pool: Vec<PoolCut>,
) -> BoundResult {
    let (x, matrix) = split_bordered(&solved.big);
    BoundResult {
        value: solved.objective,
        kind,
        exactness,
        converged,
        level,
        solver_gap: solved.gap,
        trace,
        cuts: pool.into_iter().map(|p| p.cut).collect(),
        x,
        matrix,
    }
}

/// `z_J(G)`: the lifted theta SDP with the ESC of every subset in `family`.
pub fn z_with_cuts(g: &Graph, family: &[Vec<usize>], cfg: &HierarchyConfig) -> Result<BoundResult, HierarchyError> {
    if g.order() == 0 {
        return Err(HierarchyError::EmptyGraph);
    }
    let level = family.iter().map(Vec::len).max().unwrap_or(0);
    let base = lifted_problem(g, false);
    let opts = sdp_options(cfg);
    let mut pool: Vec<PoolCut> = Vec::new();
    let mut trace = Vec::new();
    for round in 0..cfg.max_rounds.max(1) {
        let solved = solve_with_cuts(&base, &pool, &opts, round)?;
        let (_, xm) = split_bordered(&solved.big);
        let found = cfg
            .execution
            .map(family, |s| separate_subset(&xm, g, s, cfg.esc_tol));
        let mut fresh: Vec<(CutPlane, f64)> = Vec::new();
        for f in found {
            fresh.extend(f?);
        }
        fresh.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.subset.cmp(&b.0.subset)));
        fresh.truncate(cfg.max_new_cuts_per_cycle.max(1));
        trace.push(RoundTrace {
            objective: solved.objective,
            active_cuts: pool.len(),
            new_cuts: fresh.len(),
        });
        if fresh.is_empty() {
            return Ok(finish(solved, BoundKind::Esh, Exactness::Exact, true, level, trace, pool));
        }
        age_pool(&mut pool, &solved);
        pool.extend(fresh.into_iter().map(|(cut, _)| PoolCut { cut, inactive: 0 }));
        if round + 1 == cfg.max_rounds.max(1) {
            // round cap: the last solve with all cuts still bounds z_J from above
            let solved = solve_with_cuts(&base, &pool, &opts, round + 1)?;
            trace.push(RoundTrace {
                objective: solved.objective,
                active_cuts: pool.len(),
                new_cuts: 0,
            });
            return Ok(finish(solved, BoundKind::Esh, Exactness::UpperBound, false, level, trace, pool));
        }
    }
    unreachable!("loop returns on its final round")
}

fn heuristic(g: &Graph, k: usize, cfg: &HierarchyConfig) -> Result<BoundResult, HierarchyError> {
    let base = lifted_problem(g, false);
    let opts = sdp_options(cfg);
    let mut pool: Vec<PoolCut> = Vec::new();
    let mut trace = Vec::new();
    let mut solved = solve_with_cuts(&base, &pool, &opts, 0)?;
    for cycle in 0..cfg.cycles {
        let (_, xm) = split_bordered(&solved.big);
        let search = SearchConfig {
            budget: cfg.budget,
            restarts: cfg.restarts,
            top_m: cfg.max_new_cuts_per_cycle.max(1),
            seed: cfg.seed.wrapping_add(cycle as u64),
            tol: cfg.esc_tol,
            push: cfg.push,
            execution: cfg.execution,
        };
        let hits = find_violated(&xm, g, k, &search)?;
        let mut fresh = Vec::with_capacity(hits.len());
        for (s, _) in &hits {
            if let Some((cut, _)) = separate_subset(&xm, g, s, cfg.esc_tol)?.into_iter().next() {
                fresh.push(cut);
            }
        }
        trace.push(RoundTrace {
            objective: solved.objective,
            active_cuts: pool.len(),
            new_cuts: fresh.len(),
        });
        if fresh.is_empty() {
            break;
        }
        age_pool(&mut pool, &solved);
        pool.extend(fresh.into_iter().map(|cut| PoolCut { cut, inactive: 0 }));
        solved = solve_with_cuts(&base, &pool, &opts, cycle + 1)?;
    }
    if trace.last().is_none_or(|t| t.objective != solved.objective) {
        trace.push(RoundTrace {
            objective: solved.objective,
            active_cuts: pool.len(),
            new_cuts: 0,
        });
    }
    Ok(finish(solved, BoundKind::Esh, Exactness::UpperBound, true, k, trace, pool))
}

/// `z_k(G)`; levels above `n` clamp to `n`.
pub fn z_level(g: &Graph, cfg: &HierarchyConfig) -> Result<BoundResult, HierarchyError> {
    let n = g.order();
    if n == 0 {
        return Err(HierarchyError::EmptyGraph);
    }
    let k = cfg.level.min(n);
    match cfg.mode {
        Mode::Exhaustive => {
            let count = binomial(n, k);
            if count > EXHAUSTIVE_LIMIT {
                return Err(HierarchyError::CombinatorialBlowup { n, k, count });
            }
            let family = if k == 0 { Vec::new() } else { k_subsets(n, k) };
            let mut r = z_with_cuts(g, &family, cfg)?;
            r.level = k;
            Ok(r)
        }
        Mode::Heuristic => heuristic(g, k, cfg),
    }
}

/// `z′_k(G) = 1 + z_k(G^L)` with the local graph anchored at vertex 0.
pub fn vtesh_level(g: &Graph, cfg: &HierarchyConfig) -> Result<BoundResult, HierarchyError> {
    if g.order() == 0 {
        return Err(HierarchyError::EmptyGraph);
    }
    let (local, _) = local_graph(g, 0);
    if local.order() == 0 {
        // the anchor's closed neighbourhood is everything: α = 1
        return Ok(BoundResult {
            value: 1.0,
            kind: BoundKind::Vtesh,
            exactness: Exactness::Exact,
            converged: true,
            level: 0,
            solver_gap: 0.0,
            trace: Vec::new(),
            cuts: Vec::new(),
            x: Vec::new(),
            matrix: SymMatrix::zeros(0),
        });
    }
    let mut r = z_level(&local, cfg)?;
    r.value += 1.0;
    r.kind = BoundKind::Vtesh;
    for t in &mut r.trace {
        t.objective += 1.0;
    }
    Ok(r)
}

/// Embeds a lifted solution of the local graph into one of `g`: the anchor
/// gets weight 1, its neighbours 0, and local vertex `j` sits at `map[j]`.
pub fn embed_local_solution(
    g: &Graph,
    anchor: usize,
    local_x: &[f64],
    local_m: &SymMatrix,
    map: &[usize],
) -> Result<(Vec<f64>, SymMatrix), HierarchyError> {
    let n = g.order();
    let l = local_x.len();
    if local_m.order() != l || map.len() != l || anchor >= n || map.iter().any(|&v| v >= n) {
        return Err(HierarchyError::InfeasibleInput("dimension mismatch".into()));
    }
    if let Some(i) = (0..l).find(|&i| (local_m.get(i, i) - local_x[i]).abs() > 1e-6) {
        return Err(HierarchyError::InfeasibleInput(format!("diag(X) differs from x at {i}")));
    }
    if l > 0 {
        let lo = min_eigenvalue(&bordered(local_x, local_m))?;
        if lo < -1e-6 {
            return Err(HierarchyError::InfeasibleInput(format!("bordered matrix has eigenvalue {lo}")));
        }
    }
    let mut y = vec![0.0; n];
    let mut m = SymMatrix::zeros(n);
    y[anchor] = 1.0;
    m.set(anchor, anchor, 1.0);
    for a in 0..l {
        y[map[a]] = local_x[a];
        m.set(anchor, map[a], local_x[a]);
        for b in a..l {
            m.set(map[a], map[b], local_m.get(a, b));
        }
    }
    Ok((y, m))
}
