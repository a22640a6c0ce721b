//! Lovász theta in its lifted and trace forms, Schrijver's refinement, and
//! the maps between the two formulations.
//!
//! The lifted form works on the bordered matrix `[[X, x], [xᵀ, 1]] ⪰ 0` of
//! order `n + 1`, vertex `i` at index `i` and the border at index `n`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{sdp_solve_with, PresolveError, SdpOptions, SdpProblem, SdpStatus, SparseSym};
use crate::graph::Graph;
use crate::linalg::{min_eigenvalue, EigenError, SymMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThetaError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error(transparent)]
    Presolve(#[from] PresolveError),
    #[error("SDP solver stopped with status {status:?} (gap {gap:e})")]
    Solver { status: SdpStatus, gap: f64 },
    #[error("input is not feasible: {0}")]
    InfeasibleInput(String),
    #[error("matrix has zero trace")]
    ZeroTrace,
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaVariant {
    Lifted,
    Trace,
    SchrijverLifted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaSolution {
    pub value: f64,
    /// Vertex weights; `None` for the trace form.
    pub x: Option<Vec<f64>>,
    pub matrix: SymMatrix,
    pub variant: ThetaVariant,
    pub solver_gap: f64,
    pub iterations: usize,
}

/// The lifted theta SDP of `g`, optionally with `X_ij ≥ 0` on non-edges.
pub fn lifted_problem(g: &Graph, nonnegative: bool) -> SdpProblem {
    let n = g.order();
    let mut c = SymMatrix::zeros(n + 1);
    for i in 0..n {
        c.set(i, n, 0.5);
    }
    let mut prob = SdpProblem::new(c);
    prob.add_equality(SparseSym::single(n, n, 1.0), 1.0);
    for i in 0..n {
        let mut a = SparseSym::single(i, i, 1.0);
        a.push(i, n, -0.5);
        prob.add_equality(a, 0.0);
    }
    for (i, j) in g.edges() {
        prob.add_equality(SparseSym::single(i, j, 0.5), 0.0);
    }
    if nonnegative {
        for i in 0..n {
            for j in i + 1..n {
                if !g.has_edge(i, j) {
                    prob.add_inequality(SparseSym::single(i, j, -0.5), 0.0);
                }
            }
        }
    }
    prob
}

/// Splits a bordered lifted matrix into `(x, X)`.
pub fn split_bordered(big: &SymMatrix) -> (Vec<f64>, SymMatrix) {
    let n = big.order() - 1;
    let x = (0..n).map(|i| big.get(i, n)).collect();
    let idx: Vec<usize> = (0..n).collect();
    (x, big.principal(&idx))
}

pub fn bordered(x: &[f64], m: &SymMatrix) -> SymMatrix {
    let n = x.len();
    SymMatrix::from_fn(n + 1, |i, j| match (i == n, j == n) {
        (true, true) => 1.0,
        (false, true) => x[i],
        _ => m.get(i, j),
    })
}

fn solve(prob: &SdpProblem, opts: &SdpOptions) -> Result<crate::conic::SdpSolution, ThetaError> {
    let sol = sdp_solve_with(prob, opts)?;
    if !sol.is_optimal() {
        return Err(ThetaError::Solver {
            status: sol.status,
            gap: sol.gap,
        });
    }
    Ok(sol)
}

fn lifted(g: &Graph, nonnegative: bool, opts: &SdpOptions) -> Result<ThetaSolution, ThetaError> {
    if g.order() == 0 {
        return Err(ThetaError::EmptyGraph);
    }
    let sol = solve(&lifted_problem(g, nonnegative), opts)?;
    let (x, matrix) = split_bordered(&sol.x);
    Ok(ThetaSolution {
        value: sol.objective,
        x: Some(x),
        matrix,
        variant: if nonnegative {
            ThetaVariant::SchrijverLifted
        } else {
            ThetaVariant::Lifted
        },
        solver_gap: sol.gap,
        iterations: sol.iterations,
    })
}

pub fn theta_lifted(g: &Graph) -> Result<ThetaSolution, ThetaError> {
    lifted(g, false, &SdpOptions::default())
}

pub fn theta_lifted_with(g: &Graph, opts: &SdpOptions) -> Result<ThetaSolution, ThetaError> {
    lifted(g, false, opts)
}

/// Schrijver's ϑ* via the lifted form with non-negativity on non-edges.
pub fn theta_schrijver(g: &Graph) -> Result<ThetaSolution, ThetaError> {
    lifted(g, true, &SdpOptions::default())
}

pub fn theta_schrijver_with(g: &Graph, opts: &SdpOptions) -> Result<ThetaSolution, ThetaError> {
    lifted(g, true, opts)
}

/// `max ⟨J, X⟩` subject to `tr X = 1`, `X_ij = 0` on edges, `X ⪰ 0`.
pub fn theta_trace(g: &Graph) -> Result<ThetaSolution, ThetaError> {
    let n = g.order();
    if n == 0 {
        return Err(ThetaError::EmptyGraph);
    }
    let mut prob = SdpProblem::new(SymMatrix::from_fn(n, |_, _| 1.0));
    let mut tr = SparseSym::new();
    for i in 0..n {
        tr.push(i, i, 1.0);
    }
    prob.add_equality(tr, 1.0);
    for (i, j) in g.edges() {
        prob.add_equality(SparseSym::single(i, j, 0.5), 0.0);
    }
    let sol = solve(&prob, &SdpOptions::default())?;
    Ok(ThetaSolution {
        value: sol.objective,
        x: None,
        matrix: sol.x,
        variant: ThetaVariant::Trace,
        solver_gap: sol.gap,
        iterations: sol.iterations,
    })
}

/// Trace-form point `X′` to the lifted pair `(diag Y, Y)` with
/// `Y = ⟨J, X′⟩ X′`.
pub fn lift_trace_solution(xp: &SymMatrix) -> Result<(Vec<f64>, SymMatrix), ThetaError> {
    let tr = xp.trace();
    if (tr - 1.0).abs() > 1e-6 {
        return Err(ThetaError::InfeasibleInput(format!("trace {tr} differs from 1")));
    }
    let lo = min_eigenvalue(xp)?;
    if lo < -1e-6 {
        return Err(ThetaError::InfeasibleInput(format!("minimum eigenvalue {lo}")));
    }
    let y = xp.scaled(xp.total());
    Ok((y.diag(), y))
}

/// Lifted pair `(x, X)` to the trace-form point `X / tr X`.
pub fn normalize_lifted_solution(x: &[f64], m: &SymMatrix) -> Result<SymMatrix, ThetaError> {
    if x.len() != m.order() {
        return Err(ThetaError::InfeasibleInput(format!(
            "x has length {}, X has order {}",
            x.len(),
            m.order()
        )));
    }
    if let Some(i) = (0..x.len()).find(|&i| (m.get(i, i) - x[i]).abs() > 1e-6) {
        return Err(ThetaError::InfeasibleInput(format!("diag(X) differs from x at {i}")));
    }
    let tr = m.trace();
    if tr.abs() < 1e-12 {
        return Err(ThetaError::ZeroTrace);
    }
    Ok(m.scaled(1.0 / tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::paley_graph;

    #[test]
    fn trivial_values() {
        for n in 1..5 {
            assert!((theta_lifted(&Graph::complete(n)).unwrap().value - 1.0).abs() < 1e-6);
            assert!((theta_lifted(&Graph::empty(n)).unwrap().value - n as f64).abs() < 1e-6);
        }
        assert!((theta_trace(&Graph::complete(2)).unwrap().value - 1.0).abs() < 1e-6);
        assert!((theta_schrijver(&Graph::complete(3)).unwrap().value - 1.0).abs() < 1e-6);
        assert_eq!(theta_lifted(&Graph::empty(0)).unwrap_err(), ThetaError::EmptyGraph);
    }

    #[test]
    fn five_cycle() {
        let c5 = Graph::cycle(5);
        let s5 = 5f64.sqrt();
        assert!((theta_trace(&c5).unwrap().value - s5).abs() < 1e-5);
        assert!((theta_lifted(&c5).unwrap().value - s5).abs() < 1e-5);
        assert!((theta_schrijver(&c5).unwrap().value - s5).abs() < 1e-5);
    }

    #[test]
    fn lifted_solution_invariants() {
        let g = paley_graph(13).unwrap();
        let sol = theta_lifted(&g).unwrap();
        assert!((sol.value - 3.6056).abs() < 1e-4);
        let x = sol.x.as_ref().unwrap();
        for i in 0..13 {
            assert!((sol.matrix.get(i, i) - x[i]).abs() < 1e-7);
        }
        for (i, j) in g.edges() {
            assert!(sol.matrix.get(i, j).abs() < 1e-8);
        }
        assert!(min_eigenvalue(&bordered(x, &sol.matrix)).unwrap() > -1e-7);
    }

    #[test]
    fn formulation_maps() {
        let c5 = Graph::cycle(5);
        let tr = theta_trace(&c5).unwrap();
        let (x, y) = lift_trace_solution(&tr.matrix).unwrap();
        assert!((x.iter().sum::<f64>() - 5f64.sqrt()).abs() < 1e-4);
        assert!((y.get(2, 2) - x[2]).abs() < 1e-12);

        let e = SymMatrix::from_fn(3, |i, j| if i == 0 && j == 0 { 1.0 } else { 0.0 });
        let (x, y) = lift_trace_solution(&e).unwrap();
        assert_eq!(y, e);
        assert_eq!(x.iter().sum::<f64>(), 1.0);

        let n = 4;
        let (x, y) = lift_trace_solution(&SymMatrix::identity(n).scaled(1.0 / n as f64)).unwrap();
        assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((y.get(1, 1) - 0.25).abs() < 1e-12);

        let one = normalize_lifted_solution(&[1.0], &SymMatrix::identity(1)).unwrap();
        assert_eq!(one, SymMatrix::identity(1));
        assert_eq!(
            normalize_lifted_solution(&[0.0], &SymMatrix::zeros(1)).unwrap_err(),
            ThetaError::ZeroTrace
        );
        assert!(lift_trace_solution(&SymMatrix::identity(2)).is_err());
    }
}
