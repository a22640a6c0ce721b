//! A dense primal-dual SDP solver for one PSD block, and LP-based convex
//! hull membership.

mod hull;
mod sdp;
mod simplex;

pub use hull::{hull_membership, HullError, MembershipResult};
pub use sdp::{
    sdp_solve, sdp_solve_with, PresolveError, SdpOptions, SdpProblem, SdpSolution, SdpStatus,
};
pub use simplex::{LpOutcome, StandardLp};

pub use crate::linalg::{min_eigenvalue, SymMatrix};

use serde::{Deserialize, Serialize};

/// Sparse symmetric matrix given by upper-triangle entries `(i, j, v)` with
/// `i <= j`; an off-diagonal entry stands for both `(i, j)` and `(j, i)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseSym {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(i: usize, j: usize, v: f64) -> Self {
        let mut s = Self::new();
        s.push(i, j, v);
        s
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((i, j, v));
    }

    /// Upper-triangle nonzeros of a dense symmetric matrix.
    pub fn from_sym(m: &SymMatrix) -> Self {
        let mut s = Self::new();
        for i in 0..m.order() {
            for j in i..m.order() {
                let v = m.get(i, j);
                if v != 0.0 {
                    s.push(i, j, v);
                }
            }
        }
        s
    }

    pub fn to_sym(&self, order: usize) -> SymMatrix {
        let mut m = SymMatrix::zeros(order);
        for &(i, j, v) in &self.entries {
            m.add(i, j, v);
        }
        m
    }

    /// `⟨A, X⟩` counting off-diagonal entries twice.
    pub fn inner(&self, x: &SymMatrix) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * x.get(i, j) } else { 2.0 * v * x.get(i, j) })
            .sum()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.iter().map(|&(_, j, _)| j).max()
    }
}
