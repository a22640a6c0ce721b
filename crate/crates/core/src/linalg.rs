//! Packed symmetric matrices and a cyclic Jacobi eigensolver.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    ConvergenceFailure { sweeps: usize, off: f64 },
    #[error("matrix of order {0} exceeds the supported order {1}")]
    TooLarge(usize, usize),
}

const MAX_SWEEPS: usize = 100;

/// Real symmetric matrix stored as its packed upper triangle (row-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    order: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            data: vec![0.0; order * (order + 1) / 2],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds the matrix from `f(i, j)` evaluated on `i <= j`.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            for j in i..order {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Reads the upper triangle of a dense row-major square matrix.
    pub fn from_dense(order: usize, dense: &[f64]) -> Self {
        assert_eq!(dense.len(), order * order);
        Self::from_fn(order, |i, j| dense[i * order + j])
    }

    /// Outer product `v vᵀ`.
    pub fn outer(v: &[f64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j])
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[packed_index(self.order, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = packed_index(self.order, i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = packed_index(self.order, i, j);
        self.data[k] += v;
    }

    pub fn packed(&self) -> &[f64] {
        &self.data
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.order;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.get(i, j);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.order).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    /// Sum of all entries, `⟨J, A⟩`.
    pub fn total(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.order {
            for j in i..self.order {
                let v = self.get(i, j);
                s += if i == j { v } else { 2.0 * v };
            }
        }
        s
    }

    /// Frobenius inner product `Σ_ij A_ij B_ij`.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.order, other.order);
        let mut s = 0.0;
        for i in 0..self.order {
            for j in i..self.order {
                let p = self.get(i, j) * other.get(i, j);
                s += if i == j { p } else { 2.0 * p };
            }
        }
        s
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            order: self.order,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Principal submatrix on the given indices.
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.order, other.order);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[inline]
pub(crate) fn packed_index(order: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    debug_assert!(j < order);
    // rows 0..i hold order, order-1, ..., order-i+1 entries
    i * order - i * i.saturating_sub(1) / 2 + (j - i)
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += 2.0 * a[i * n + j] * a[i * n + j];
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi on a dense row-major symmetric matrix, destroyed in place.
///
/// Sweeps until the off-diagonal Frobenius norm drops below
/// `tol * max(1, ‖A‖_F)`. Returns eigenvalues in ascending order.
pub fn jacobi_eigenvalues(a: &mut [f64], n: usize, tol: f64) -> Result<Vec<f64>, EigenError> {
    jacobi(a, n, tol, None)
}

/// Like [`jacobi_eigenvalues`] but also returns the eigenvectors as the
/// columns of a dense row-major matrix, matched to the ascending eigenvalues.
pub fn jacobi_eigen(a: &mut [f64], n: usize, tol: f64) -> Result<(Vec<f64>, Vec<f64>), EigenError> {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let vals = jacobi(a, n, tol, Some(&mut v))?;
    // reorder columns to ascending eigenvalues
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]));
    let mut sorted = vec![0.0; n * n];
    for (c, &src) in order.iter().enumerate() {
        for r in 0..n {
            sorted[r * n + c] = v[r * n + src];
        }
    }
    Ok((vals, sorted))
}

fn jacobi(
    a: &mut [f64],
    n: usize,
    tol: f64,
    mut vecs: Option<&mut Vec<f64>>,
) -> Result<Vec<f64>, EigenError> {
    assert_eq!(a.len(), n * n);
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let threshold = tol * scale;
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(a, n);
        if off <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(EigenError::ConvergenceFailure { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                if let Some(v) = vecs.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Smallest eigenvalue of a symmetric matrix of order at most 512.
pub fn min_eigenvalue(m: &SymMatrix) -> Result<f64, EigenError> {
    if m.order() > 512 {
        return Err(EigenError::TooLarge(m.order(), 512));
    }
    if m.order() == 0 {
        return Ok(0.0);
    }
    let mut dense = m.to_dense();
    let vals = jacobi_eigenvalues(&mut dense, m.order(), 1e-11)?;
    Ok(vals[0])
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn eigenvalues(m: &SymMatrix) -> Result<Vec<f64>, EigenError> {
    if m.order() > 512 {
        return Err(EigenError::TooLarge(m.order(), 512));
    }
    let mut dense = m.to_dense();
    jacobi_eigenvalues(&mut dense, m.order(), 1e-11)
}
