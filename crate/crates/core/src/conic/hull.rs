//! Convex-hull membership through the ℓ1 phase-1 LP
//!
//! ```text
//! min Σ (a_e + b_e)  s.t.  Σ_t λ_t p_t + a − b = target,  Σ_t λ_t = 1,  λ, a, b ≥ 0.
//! ```
//!
//! A zero optimum gives the convex weights; otherwise the simplex multipliers
//! are a Farkas certificate, rescaled into a separating hyperplane.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::simplex::{LpOutcome, StandardLp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HullError {
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("no generating points")]
    NoPoints,
    #[error("simplex did not terminate within its pivot budget")]
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MembershipResult {
    /// `target = Σ weights_t · point_t` up to `distance` in ℓ1.
    Inside { weights: Vec<f64>, distance: f64 },
    /// `⟨normal, p_t⟩ ≤ offset` for every point and
    /// `⟨normal, target⟩ = offset + violation`, with `‖normal‖_∞ = 1`.
    Outside {
        normal: Vec<f64>,
        offset: f64,
        violation: f64,
    },
}

impl MembershipResult {
    pub fn is_inside(&self) -> bool {
        matches!(self, MembershipResult::Inside { .. })
    }
}

pub fn hull_membership(points: &[Vec<f64>], target: &[f64], tol: f64) -> Result<MembershipResult, HullError> {
    let first = points.first().ok_or(HullError::NoPoints)?;
    let d = target.len();
    for (index, p) in points.iter().enumerate() {
        if p.len() != d {
            return Err(HullError::DimensionMismatch {
                index,
                found: p.len(),
                expected: d,
            });
        }
    }
    let t = points.len();
    let mut columns = Vec::with_capacity(t + 2 * d);
    for p in points {
        let mut c = p.clone();
        c.push(1.0);
        columns.push(c);
    }
    for sign in [1.0, -1.0] {
        for e in 0..d {
            let mut c = vec![0.0; d + 1];
            c[e] = sign;
            columns.push(c);
        }
    }
    let mut costs = vec![0.0; t];
    costs.extend(std::iter::repeat_n(1.0, 2 * d));
    let mut rhs = target.to_vec();
    rhs.push(1.0);
    let lp = StandardLp {
        rows: d + 1,
        columns,
        costs,
        rhs,
    };
    let mut basis: Vec<usize> = (0..d)
        .map(|e| if target[e] - first[e] >= 0.0 { t + e } else { t + d + e })
        .collect();
    basis.push(0);

    let budget = 200_000 + 50 * (t + d);
    let LpOutcome::Optimal {
        x, duals, objective, ..
    } = lp.solve_from_basis(basis, budget)
    else {
        return Err(HullError::Stalled);
    };
    if objective <= tol {
        return Ok(MembershipResult::Inside {
            weights: x[..t].to_vec(),
            distance: objective,
        });
    }
    let mut normal = duals[..d].to_vec();
    let scale = normal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for v in &mut normal {
        *v /= scale;
    }
    let offset = points
        .iter()
        .map(|p| dot(&normal, p))
        .fold(f64::NEG_INFINITY, f64::max);
    let violation = dot(&normal, target) - offset;
    Ok(MembershipResult::Outside {
        normal,
        offset,
        violation,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
