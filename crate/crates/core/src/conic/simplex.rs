//! Revised primal simplex on `min cᵀx, Ax = b, x ≥ 0` with Bland's rule.

use faer::linalg::solvers::Solve;
use faer::Mat;

const PRICE_TOL: f64 = 1e-10;
const PIVOT_TOL: f64 = 1e-10;
const REFACTOR_EVERY: usize = 64;

/// Dense standard-form LP, stored by columns.
#[derive(Debug, Clone)]
pub struct StandardLp {
    pub rows: usize,
    pub columns: Vec<Vec<f64>>,
    pub costs: Vec<f64>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        /// Simplex multipliers `π = c_Bᵀ B⁻¹`.
        duals: Vec<f64>,
        objective: f64,
        pivots: usize,
    },
    Unbounded,
    /// Pivot cap reached or basis became singular.
    Stalled,
}

impl StandardLp {
    /// Runs from a primal-feasible starting basis (one column per row).
    pub fn solve_from_basis(&self, mut basis: Vec<usize>, max_pivots: usize) -> LpOutcome {
        let m = self.rows;
        assert_eq!(basis.len(), m);
        let mut in_basis = vec![false; self.columns.len()];
        for &b in &basis {
            in_basis[b] = true;
        }
        let Some(mut binv) = self.basis_inverse(&basis) else {
            return LpOutcome::Stalled;
        };
        let mut xb = mat_vec(&binv, &self.rhs);
        let mut since_refactor = 0;

        for pivots in 0..=max_pivots {
            let cb: Vec<f64> = basis.iter().map(|&b| self.costs[b]).collect();
            let duals: Vec<f64> = (0..m)
                .map(|j| (0..m).map(|i| cb[i] * binv[(i, j)]).sum())
                .collect();
            // Bland: lowest-index improving column enters
            let entering = (0..self.columns.len()).find(|&j| {
                !in_basis[j] && self.costs[j] - dot(&duals, &self.columns[j]) < -PRICE_TOL
            });
            let Some(q) = entering else {
                let mut x = vec![0.0; self.columns.len()];
                for (i, &b) in basis.iter().enumerate() {
                    x[b] = xb[i].max(0.0);
                }
                let objective = dot(&self.costs, &x);
                return LpOutcome::Optimal {
                    x,
                    duals,
                    objective,
                    pivots,
                };
            };
            if pivots == max_pivots {
                break;
            }
            let d = mat_vec(&binv, &self.columns[q]);
            // ratio test, ties to the lowest variable index
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if d[i] > PIVOT_TOL {
                    let ratio = xb[i].max(0.0) / d[i];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best - 1e-12 || (ratio <= best + 1e-12 && basis[i] < basis[r]) {
                                Some((i, ratio.min(best)))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return LpOutcome::Unbounded;
            };
            in_basis[basis[r]] = false;
            in_basis[q] = true;
            basis[r] = q;
            since_refactor += 1;
            if since_refactor >= REFACTOR_EVERY {
                since_refactor = 0;
                match self.basis_inverse(&basis) {
                    Some(b) => binv = b,
                    None => return LpOutcome::Stalled,
                }
                xb = mat_vec(&binv, &self.rhs);
            } else {
                pivot(&mut binv, &mut xb, &d, r);
            }
        }
        LpOutcome::Stalled
    }

    fn basis_inverse(&self, basis: &[usize]) -> Option<Mat<f64>> {
        let m = self.rows;
        let b = Mat::<f64>::from_fn(m, m, |i, j| self.columns[basis[j]][i]);
        let inv = b.partial_piv_lu().solve(Mat::<f64>::identity(m, m));
        let finite = (0..m).all(|i| (0..m).all(|j| inv[(i, j)].is_finite()));
        finite.then_some(inv)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(a: &Mat<f64>, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.nrows()];
    for (j, &vj) in v.iter().enumerate() {
        if vj != 0.0 {
            for (i, o) in out.iter_mut().enumerate() {
                *o += a[(i, j)] * vj;
            }
        }
    }
    out
}

/// Product-form update of `B⁻¹` and `x_B` for pivot row `r`.
fn pivot(binv: &mut Mat<f64>, xb: &mut [f64], d: &[f64], r: usize) {
    let m = xb.len();
    let dr = d[r];
    for j in 0..m {
        binv[(r, j)] /= dr;
    }
    xb[r] /= dr;
    for i in 0..m {
        if i != r && d[i] != 0.0 {
            let f = d[i];
            for j in 0..m {
                let v = binv[(r, j)];
                binv[(i, j)] -= f * v;
            }
            xb[i] -= f * xb[r];
        }
    }
}
