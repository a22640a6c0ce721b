//! Closed-form optimum of the lifted theta SDP for Paley graphs and explicit
//! convex-combination certificates that it satisfies the exact subgraph
//! constraints up to level `ℓ(q)` (and `ℓ(q) + 1` when `α(P_q) < ℓ(q)`).
//!
//! For square `q` every quantity is rational and the certificates are
//! checked exactly; otherwise they are checked in floating point with a
//! `1e-12` slack.

use std::ops::{Add, Mul, Sub};

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{paley_graph, GfError};
use crate::graph::{brute_force_alpha, Graph, GraphError};
use crate::hierarchy::{binomial, ell, k_subsets};
use crate::linalg::{eigenvalues, EigenError, SymMatrix};
use crate::par::Execution;
use crate::theta::bordered;

/// Slack allowed on weights and reconstruction in floating point.
pub const CERTIFICATE_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("subset {subset:?} has no non-adjacent pair to augment its stable set")]
    NoAugmentingPair { subset: Vec<usize> },
    #[error("closed-form solution failed its own check: {0}")]
    Defect(String),
}

/// `(x*, X*)`: `x*_i = 1/√q`, `X*_ii = 1/√q`, `X*_ij = 2/(q + √q)` on
/// non-edges and `0` on edges.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PaleyThetaSolution {
    pub q: u64,
    pub x_star: Vec<f64>,
    pub matrix: SymMatrix,
    pub objective: f64,
    #[serde(skip)]
    graph: Option<Graph>,
}

impl PaleyThetaSolution {
    pub fn graph(&self) -> &Graph {
        self.graph.as_ref().expect("graph is set on construction")
    }
}

/// Builds the closed-form solution and checks feasibility and its spectrum.
pub fn paley_theta_solution(q: u64) -> Result<PaleyThetaSolution, CertifyError> {
    let g = paley_graph(q)?;
    let n = q as usize;
    let r = (q as f64).sqrt();
    let d = 1.0 / r;
    let c = 2.0 / (q as f64 + r);
    let matrix = SymMatrix::from_fn(n, |i, j| {
        if i == j {
            d
        } else if g.has_edge(i, j) {
            0.0
        } else {
            c
        }
    });
    let x_star = vec![d; n];
    let objective = x_star.iter().sum::<f64>();
    let sol = PaleyThetaSolution {
        q,
        x_star,
        matrix,
        objective,
        graph: Some(g),
    };
    check_solution(&sol)?;
    Ok(sol)
}

fn check_solution(sol: &PaleyThetaSolution) -> Result<(), CertifyError> {
    let r = (sol.q as f64).sqrt();
    if (sol.objective - r).abs() > 1e-8 {
        return Err(CertifyError::Defect(format!("objective {} differs from √q", sol.objective)));
    }
    let lo = eigenvalues(&bordered(&sol.x_star, &sol.matrix))?[0];
    if lo < -1e-8 {
        return Err(CertifyError::Defect(format!("bordered matrix has eigenvalue {lo}")));
    }
    let vals = eigenvalues(&sol.matrix)?;
    let half = (sol.q as usize - 1) / 2;
    let mid = 2.0 / (1.0 + r);
    let expect = |i: usize| match i {
        i if i < half => 0.0,
        i if i < 2 * half => mid,
        _ => 1.0,
    };
    if let Some(i) = (0..vals.len()).find(|&i| (vals[i] - expect(i)).abs() > 1e-8) {
        return Err(CertifyError::Defect(format!("eigenvalue {} where {} was expected", vals[i], expect(i))));
    }
    Ok(())
}

/// `X*_I = λ·0 + Σ μ_i E_i + Σ ν_ij E_ij (+ σ s sᵀ)`, indices local to `subset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscWeights {
    pub subset: Vec<usize>,
    pub lambda: f64,
    pub mu: Vec<f64>,
    /// `(i, j, ν_ij)` for `i < j`, every pair listed.
    pub nu: Vec<(usize, usize, f64)>,
    pub sigma: Option<f64>,
    /// Local indices of the stable set carrying `σ`.
    pub stable_set: Option<Vec<usize>>,
}

impl EscWeights {
    pub fn total(&self) -> f64 {
        self.lambda + self.mu.iter().sum::<f64>() + self.nu.iter().map(|t| t.2).sum::<f64>() + self.sigma.unwrap_or(0.0)
    }

    pub fn min_weight(&self) -> f64 {
        self.mu
            .iter()
            .copied()
            .chain(self.nu.iter().map(|t| t.2))
            .chain(self.sigma)
            .fold(self.lambda, f64::min)
    }

    pub fn reconstruct(&self) -> SymMatrix {
        let k = self.subset.len();
        let mut m = SymMatrix::zeros(k);
        for (i, &w) in self.mu.iter().enumerate() {
            m.add(i, i, w);
        }
        for &(i, j, w) in &self.nu {
            m.add(i, i, w);
            m.add(j, j, w);
            m.add(i, j, w);
        }
        if let (Some(s), Some(set)) = (self.sigma, &self.stable_set) {
            for (a, &i) in set.iter().enumerate() {
                for &j in &set[a..] {
                    m.add(i, j, s);
                }
            }
        }
        m
    }

    /// Largest entrywise deviation of the reconstruction from `X_I`.
    pub fn reconstruction_error(&self, x: &SymMatrix) -> f64 {
        self.reconstruct().max_abs_diff(&x.principal(&self.subset))
    }

    /// Weights are nonnegative and sum to one within the certificate slack.
    pub fn is_valid_for(&self, x: &SymMatrix) -> bool {
        self.min_weight() >= -CERTIFICATE_SLACK
            && (self.total() - 1.0).abs() <= CERTIFICATE_SLACK
            && self.reconstruction_error(x) <= CERTIFICATE_SLACK
    }
}

/// Weights in a scalar type with exact or floating arithmetic.
struct Generic<T> {
    lambda: T,
    mu: Vec<T>,
    nu: Vec<(usize, usize, T)>,
    sigma: Option<T>,
}

/// The construction shared by both certificates. `d` is the diagonal of
/// `X*`, `c` its non-edge entry; `s` marks the stable set carrying `σ = c`.
fn weights<T>(g: &Graph, subset: &[usize], d: T, c: T, zero: T, one: T, s: Option<&[bool]>) -> Generic<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    let k = subset.len();
    let in_s = |i: usize| s.is_some_and(|s| s[i]);
    let mut nu = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    let mut row = vec![zero; k];
    for i in 0..k {
        for j in i + 1..k {
            let w = if g.has_edge(subset[i], subset[j]) || (in_s(i) && in_s(j)) {
                zero
            } else {
                c
            };
            row[i] = row[i] + w;
            row[j] = row[j] + w;
            nu.push((i, j, w));
        }
    }
    let mu: Vec<T> = (0..k)
        .map(|i| if in_s(i) { d - c - row[i] } else { d - row[i] })
        .collect();
    let mut lambda = one;
    for &m in &mu {
        lambda = lambda - m;
    }
    for &(_, _, w) in &nu {
        lambda = lambda - w;
    }
    let sigma = s.map(|_| c);
    if let Some(sv) = sigma {
        lambda = lambda - sv;
    }
    Generic { lambda, mu, nu, sigma }
}

fn float_weights(q: u64, g: &Graph, subset: &[usize], s: Option<&[bool]>) -> EscWeights {
    let r = (q as f64).sqrt();
    let w = weights(g, subset, 1.0 / r, 2.0 / (q as f64 + r), 0.0, 1.0, s);
    EscWeights {
        subset: subset.to_vec(),
        lambda: w.lambda,
        mu: w.mu,
        nu: w.nu,
        sigma: w.sigma,
        stable_set: s.map(|s| (0..s.len()).filter(|&i| s[i]).collect()),
    }
}

/// Exact check for square `q`: weights nonnegative, summing to one, and
/// reproducing `X*_I` with no rounding at all.
fn exact_check(q: u64, g: &Graph, subset: &[usize], s: Option<&[bool]>) -> bool {
    let r = q.isqrt() as i64;
    let zero = Ratio::from_integer(0i64);
    let one = Ratio::from_integer(1i64);
    let d = Ratio::new(1, r);
    let c = Ratio::new(2, r * r + r);
    let w = weights(g, subset, d, c, zero, one, s);
    let nonneg = w.lambda >= zero
        && w.mu.iter().all(|m| *m >= zero)
        && w.nu.iter().all(|t| t.2 >= zero)
        && w.sigma.is_none_or(|x| x >= zero);
    // the total is one by construction of λ; reconstruction entry by entry
    let k = subset.len();
    let in_s = |i: usize| s.is_some_and(|s| s[i]);
    let sig = w.sigma.unwrap_or(zero);
    let diag_ok = (0..k).all(|i| {
        let mut v = w.mu[i] + if in_s(i) { sig } else { zero };
        for &(a, b, x) in &w.nu {
            if a == i || b == i {
                v = v + x;
            }
        }
        v == d
    });
    let off_ok = w.nu.iter().all(|&(i, j, x)| {
        let v = x + if in_s(i) && in_s(j) { sig } else { zero };
        let target = if g.has_edge(subset[i], subset[j]) { zero } else { c };
        v == target
    });
    nonneg && diag_ok && off_ok
}

fn check_base_pre(q: u64, subset: &[usize]) -> Result<(), CertifyError> {
    if q < 9 {
        return Err(CertifyError::PreconditionViolated(format!("q = {q} < 9")));
    }
    let l = ell(q) as usize;
    if subset.len() > l {
        return Err(CertifyError::PreconditionViolated(format!(
            "|I| = {} exceeds ℓ({q}) = {l}",
            subset.len()
        )));
    }
    Ok(())
}

fn check_subset(q: u64, subset: &[usize]) -> Result<(), CertifyError> {
    if let Some(&v) = subset.iter().find(|&&v| v as u64 >= q) {
        return Err(GraphError::IndexOutOfRange {
            index: v,
            order: q as usize,
        }
        .into());
    }
    if subset.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GraphError::UnsortedSubset.into());
    }
    Ok(())
}

/// Certificate that `X*_I ∈ STAB²` for `|I| ≤ ℓ(q)`, using only stable sets
/// of size at most two.
pub fn esc_certificate_base(q: u64, subset: &[usize]) -> Result<EscWeights, CertifyError> {
    check_base_pre(q, subset)?;
    check_subset(q, subset)?;
    let g = paley_graph(q)?;
    Ok(float_weights(q, &g, subset, None))
}

/// The stable set for the isolated-vertex case: all isolated vertices of
/// `G_I`, plus the lexicographically first non-adjacent pair when fewer than
/// three are isolated. `None` when `G_I` has no isolated vertex.
fn augmented_stable_set(g: &Graph, subset: &[usize]) -> Result<Option<Vec<bool>>, CertifyError> {
    let k = subset.len();
    let isolated: Vec<bool> = (0..k)
        .map(|i| (0..k).all(|j| j == i || !g.has_edge(subset[i], subset[j])))
        .collect();
    let p = isolated.iter().filter(|&&b| b).count();
    if p == 0 {
        return Ok(None);
    }
    let mut s = isolated.clone();
    if p <= 2 {
        let first = isolated.iter().position(|&b| b).unwrap();
        let pair = (0..k)
            .filter(|&i| i != first)
            .flat_map(|i| (i + 1..k).filter(move |&j| j != first).map(move |j| (i, j)))
            .find(|&(i, j)| !g.has_edge(subset[i], subset[j]) && !(isolated[i] && isolated[j]));
        let Some((a, b)) = pair else {
            return Err(CertifyError::NoAugmentingPair {
                subset: subset.to_vec(),
            });
        };
        s[a] = true;
        s[b] = true;
    }
    Ok(Some(s))
}

/// Certificate at level `ℓ(q) + 1`. Without isolated vertices in `G_I` the
/// base construction applies; otherwise a stable set of size at least three
/// takes weight `σ = 2/(q + √q)`.
pub fn esc_certificate_plus1(q: u64, subset: &[usize]) -> Result<EscWeights, CertifyError> {
    if q < 25 {
        return Err(CertifyError::PreconditionViolated(format!("q = {q} < 25")));
    }
    let l = ell(q) as usize;
    if subset.len() != l + 1 {
        return Err(CertifyError::PreconditionViolated(format!(
            "|I| = {} differs from ℓ({q}) + 1 = {}",
            subset.len(),
            l + 1
        )));
    }
    check_subset(q, subset)?;
    let g = paley_graph(q)?;
    let s = augmented_stable_set(&g, subset)?;
    Ok(float_weights(q, &g, subset, s.as_deref()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coverage {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagnationReport {
    pub q: u64,
    pub k: usize,
    pub coverage: Coverage,
    pub checked: usize,
    pub passed: usize,
    /// Subsets that needed the stable-set construction.
    pub augmented: usize,
    pub max_reconstruction_error: f64,
    pub min_weight: f64,
    /// Certificates checked in rational arithmetic (square `q`).
    pub exact: bool,
    pub first_failure: Option<Vec<usize>>,
}

impl StagnationReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.checked
    }
}

/// `k`-subsets of `0..n` drawn with the seeded generator, each sorted.
pub fn sample_subsets(n: usize, k: usize, samples: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let mut s = sample(&mut rng, n, k).into_vec();
            s.sort_unstable();
            s
        })
        .collect()
}

/// Certifies that `(x*, X*)` satisfies every (or every sampled) ESC of
/// order `k`, which gives `z_k(P_q) = √q`.
pub fn verify_stagnation(q: u64, k: usize, coverage: Coverage) -> Result<StagnationReport, CertifyError> {
    verify_stagnation_with(q, k, coverage, Execution::default())
}

pub fn verify_stagnation_with(
    q: u64,
    k: usize,
    coverage: Coverage,
    execution: Execution,
) -> Result<StagnationReport, CertifyError> {
    let sol = paley_theta_solution(q)?;
    let g = sol.graph();
    let l = ell(q) as usize;
    let plus1 = k == l + 1;
    if k == 0 || k > l + 1 {
        return Err(CertifyError::PreconditionViolated(format!("k = {k} outside 1..={}", l + 1)));
    }
    if plus1 {
        if q < 25 {
            return Err(CertifyError::PreconditionViolated(format!("level ℓ+1 needs q ≥ 25, got {q}")));
        }
        let alpha = brute_force_alpha(g)?.size;
        if alpha >= l {
            return Err(CertifyError::PreconditionViolated(format!("α(P_{q}) = {alpha} is not below ℓ = {l}")));
        }
    } else if q < 9 && k > 2 {
        return Err(CertifyError::PreconditionViolated(format!("q = {q} < 9")));
    }
    let subsets = match coverage {
        Coverage::Exhaustive => {
            let count = binomial(q as usize, k);
            if count > 10_000_000 {
                return Err(CertifyError::PreconditionViolated(format!("C({q}, {k}) = {count} is too many to enumerate")));
            }
            k_subsets(q as usize, k)
        }
        Coverage::Sampled { samples, seed } => sample_subsets(q as usize, k, samples, seed),
    };
    let square = q.isqrt() * q.isqrt() == q;
    let outcomes = execution.map(&subsets, |s| -> Result<(bool, bool, f64, f64), CertifyError> {
        let aug = if plus1 { augmented_stable_set(g, s)? } else { None };
        let w = float_weights(q, g, s, aug.as_deref());
        let err = w.reconstruction_error(&sol.matrix);
        let ok = if square {
            exact_check(q, g, s, aug.as_deref())
        } else {
            w.is_valid_for(&sol.matrix)
        };
        Ok((ok, aug.is_some(), err, w.min_weight()))
    });
    let mut report = StagnationReport {
        q,
        k,
        coverage,
        checked: subsets.len(),
        passed: 0,
        augmented: 0,
        max_reconstruction_error: 0.0,
        min_weight: f64::INFINITY,
        exact: square,
        first_failure: None,
    };
    for (s, out) in subsets.iter().zip(outcomes) {
        let (ok, aug, err, min_w) = out?;
        report.passed += usize::from(ok);
        report.augmented += usize::from(aug);
        report.max_reconstruction_error = report.max_reconstruction_error.max(err);
        report.min_weight = report.min_weight.min(min_w);
        if !ok && report.first_failure.is_none() {
            report.first_failure = Some(s.clone());
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q9_two_adjacent_vertices() {
        let g = paley_graph(9).unwrap();
        let (u, v) = g.edges()[0];
        let w = esc_certificate_base(9, &[u, v]).unwrap();
        assert_eq!(w.nu, vec![(0, 1, 0.0)]);
        for m in &w.mu {
            assert!((m - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((w.lambda - 1.0 / 3.0).abs() < 1e-15);
        assert!(exact_check(9, &g, &[u, v], None));
    }

    #[test]
    fn preconditions() {
        assert!(matches!(esc_certificate_base(5, &[0, 1]), Err(CertifyError::PreconditionViolated(_))));
        assert!(matches!(esc_certificate_base(13, &[0, 1, 2, 3]), Err(CertifyError::PreconditionViolated(_))));
        assert!(matches!(esc_certificate_plus1(13, &[0, 1, 2, 3]), Err(CertifyError::PreconditionViolated(_))));
        assert!(matches!(esc_certificate_base(13, &[2, 1]), Err(CertifyError::Graph(_))));
    }
}
