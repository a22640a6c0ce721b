//! Closed-form bounds on `α(P_q)`, the local-graph bounds `b_M`, `b_{M*}`,
//! and one-row reports combining them with theta and hierarchy values.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{is_prime, local_graph, paley_graph, prime_power, GfError};
use crate::graph::{brute_force_alpha, spectrum, Graph, GraphError};
use crate::hierarchy::{ell, vtesh_level, z_level, BoundKind, Exactness, HierarchyConfig, Mode};
use crate::theta::{theta_lifted, theta_schrijver, ThetaError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("graph is not regular")]
    NotRegular,
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("q = {0} is not congruent to 1 (mod 4)")]
    NotOneModFour(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("q = {0} is a square")]
    SquareOrder(u64),
    #[error("q = {0} is too small")]
    QTooSmall(u64),
    #[error("log log q is undefined for q = {0}")]
    DomainError(u64),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

/// A solver-backed value and the duality gap it was certified to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certified {
    pub value: f64,
    pub gap: f64,
}

/// Hoffman's ratio bound `n / (1 − r/τ)` for an `r`-regular graph.
pub fn hoffman_bound(g: &Graph) -> Result<f64, BoundsError> {
    let r = g.is_regular().ok_or(BoundsError::NotRegular)?;
    if g.edge_count() == 0 {
        return Err(BoundsError::EmptyGraph);
    }
    let tau = spectrum(g)?[0];
    Ok(g.order() as f64 / (1.0 - r as f64 / tau))
}

fn paley_order(q: u64) -> Result<(u64, u32), BoundsError> {
    let (p, s) = prime_power(q).ok_or(BoundsError::NotPrimePower(q))?;
    if q % 4 != 1 {
        return Err(BoundsError::NotOneModFour(q));
    }
    Ok((p, s))
}

/// `(√(2q − 1) + 1) / 2`, for prime `q ≡ 1 (mod 4)`.
pub fn hanson_petridis(q: u64) -> Result<f64, BoundsError> {
    if !is_prime(q) {
        return Err(BoundsError::NotPrime(q));
    }
    paley_order(q)?;
    Ok((((2 * q - 1) as f64).sqrt() + 1.0) / 2.0)
}

/// `√(q − 4)`, for non-square `q ≠ 5`.
pub fn maistrelli(q: u64) -> Result<f64, BoundsError> {
    if q.isqrt().pow(2) == q {
        return Err(BoundsError::SquareOrder(q));
    }
    if q <= 5 {
        return Err(BoundsError::QTooSmall(q));
    }
    Ok(((q - 4) as f64).sqrt())
}

/// Cohen's lower bound `p/(p−1) · ((½ ln q − 2 ln ln q)/ln 2 + 1)` for
/// `q = p^s`, all logarithms natural.
pub fn cohen_lower(q: u64) -> Result<f64, BoundsError> {
    let (p, _) = prime_power(q).ok_or(BoundsError::NotPrimePower(q))?;
    let lq = (q as f64).ln();
    if lq <= 1.0 {
        return Err(BoundsError::DomainError(q));
    }
    let p = p as f64;
    Ok(p / (p - 1.0) * ((0.5 * lq - 2.0 * lq.ln()) / 2f64.ln() + 1.0))
}

fn local_bound(q: u64, schrijver: bool) -> Result<Certified, BoundsError> {
    paley_order(q)?;
    let (local, _) = local_graph(&paley_graph(q)?, 0);
    let sol = if schrijver {
        theta_schrijver(&local)?
    } else {
        theta_lifted(&local)?
    };
    Ok(Certified {
        value: 1.0 + sol.value,
        gap: sol.solver_gap,
    })
}

/// `1 + ϑ(P_q^L)`.
pub fn b_m(q: u64) -> Result<Certified, BoundsError> {
    local_bound(q, false)
}

/// `1 + ϑ*(P_q^L)`.
pub fn b_m_star(q: u64) -> Result<Certified, BoundsError> {
    local_bound(q, true)
}

/// One report cell: a value, or the reason it is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Cell {
    /// `gap` is zero for closed forms and exact values.
    Value { value: f64, gap: f64, source: Source },
    Skipped { reason: String },
    Failed { error: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    ClosedForm,
    Solver,
    Exhaustive,
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Value { value, .. } => Some(*value),
            _ => None,
        }
    }

    fn closed(r: Result<f64, BoundsError>) -> Cell {
        match r {
            Ok(value) => Cell::Value {
                value,
                gap: 0.0,
                source: Source::ClosedForm,
            },
            Err(e) => Cell::Skipped { reason: e.to_string() },
        }
    }

    fn solved(r: Result<Certified, BoundsError>) -> Cell {
        match r {
            Ok(c) => Cell::Value {
                value: c.value,
                gap: c.gap,
                source: Source::Solver,
            },
            Err(e) => Cell::Failed { error: e.to_string() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierarchyRequest {
    pub kind: BoundKind,
    pub config: HierarchyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyEntry {
    pub kind: BoundKind,
    pub level: usize,
    pub mode: Mode,
    pub cell: Cell,
    pub exactness: Option<Exactness>,
}

/// Size limits deciding which fields of a report are computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Largest `q` for exhaustive `α`.
    pub alpha_max_q: u64,
    /// Largest `q` for which theta is solved; above it `√q` is reported.
    pub theta_sdp_max_q: u64,
    /// Largest `q` for `b_M` and `b_{M*}`.
    pub local_max_q: u64,
    pub hierarchy: Vec<HierarchyRequest>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            alpha_max_q: 101,
            theta_sdp_max_q: 61,
            local_max_q: 113,
            hierarchy: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub q: u64,
    pub alpha: Cell,
    pub theta: Cell,
    pub hoffman: Cell,
    pub maistrelli: Cell,
    pub hanson: Cell,
    pub cohen_lower: Cell,
    pub b_m: Cell,
    pub b_m_star: Cell,
    pub ell: u64,
    pub hierarchy: Vec<HierarchyEntry>,
}

impl BoundReport {
    /// Upper-bound cells, in column order.
    pub fn upper_bounds(&self) -> [&Cell; 6] {
        [&self.theta, &self.hoffman, &self.maistrelli, &self.hanson, &self.b_m, &self.b_m_star]
    }
}

fn too_large(what: &str, limit: u64) -> Cell {
    Cell::Skipped {
        reason: format!("{what} computed only for q <= {limit}"),
    }
}

/// Every applicable bound for `P_q`; inapplicable or failed fields carry
/// their reason instead of a value.
pub fn assemble_report(q: u64, opts: &ReportOptions) -> Result<BoundReport, BoundsError> {
    paley_order(q)?;
    let g = paley_graph(q)?;
    let alpha = if q <= opts.alpha_max_q {
        match brute_force_alpha(&g) {
            Ok(w) => Cell::Value {
                value: w.size as f64,
                gap: 0.0,
                source: Source::Exhaustive,
            },
            Err(e) => Cell::Failed { error: e.to_string() },
        }
    } else {
        too_large("alpha", opts.alpha_max_q)
    };
    let theta = if q <= opts.theta_sdp_max_q {
        Cell::solved(
            theta_lifted(&g)
                .map(|s| Certified {
                    value: s.value,
                    gap: s.solver_gap,
                })
                .map_err(BoundsError::from),
        )
    } else {
        Cell::Value {
            value: (q as f64).sqrt(),
            gap: 0.0,
            source: Source::ClosedForm,
        }
    };
    let (b_m_cell, b_m_star_cell) = if q <= opts.local_max_q {
        (Cell::solved(b_m(q)), Cell::solved(b_m_star(q)))
    } else {
        (too_large("b_M", opts.local_max_q), too_large("b_M*", opts.local_max_q))
    };
    let hierarchy = opts
        .hierarchy
        .iter()
        .map(|req| {
            let r = match req.kind {
                BoundKind::Esh => z_level(&g, &req.config),
                BoundKind::Vtesh => vtesh_level(&g, &req.config),
            };
            let (cell, exactness) = match r {
                Ok(b) => (
                    Cell::Value {
                        value: b.value,
                        gap: b.solver_gap,
                        source: Source::Solver,
                    },
                    Some(b.exactness),
                ),
                Err(e) => (Cell::Failed { error: e.to_string() }, None),
            };
            HierarchyEntry {
                kind: req.kind,
                level: req.config.level,
                mode: req.config.mode,
                cell,
                exactness,
            }
        })
        .collect();
    Ok(BoundReport {
        q,
        alpha,
        theta,
        hoffman: Cell::closed(hoffman_bound(&g)),
        maistrelli: Cell::closed(maistrelli(q)),
        hanson: Cell::closed(hanson_petridis(q)),
        cohen_lower: Cell::closed(cohen_lower(q)),
        b_m: b_m_cell,
        b_m_star: b_m_star_cell,
        ell: ell(q),
        hierarchy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_closed_forms() {
        let s5 = 5f64.sqrt();
        assert!((hoffman_bound(&Graph::cycle(5)).unwrap() - s5).abs() < 1e-9);
        assert!((hoffman_bound(&Graph::complete(4)).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(hoffman_bound(&Graph::empty(3)).unwrap_err(), BoundsError::EmptyGraph);
        assert_eq!(hoffman_bound(&Graph::path(3)).unwrap_err(), BoundsError::NotRegular);
        assert_eq!(maistrelli(13).unwrap(), 3.0);
        assert_eq!(maistrelli(29).unwrap(), 5.0);
        assert_eq!(maistrelli(9).unwrap_err(), BoundsError::SquareOrder(9));
        assert_eq!(maistrelli(5).unwrap_err(), BoundsError::QTooSmall(5));
        assert_eq!(hanson_petridis(13).unwrap(), 3.0);
        assert_eq!(hanson_petridis(125).unwrap_err(), BoundsError::NotPrime(125));
        assert_eq!(cohen_lower(2).unwrap_err(), BoundsError::DomainError(2));
        assert!(cohen_lower(1009).unwrap() > cohen_lower(13).unwrap());
    }
}
