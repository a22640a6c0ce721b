//! Infeasible primal-dual interior-point method for
//!
//! ```text
//! max ⟨C, X⟩  s.t.  ⟨A_p, X⟩ = b_p,  ⟨B_j, X⟩ + w_j = d_j,  X ⪰ 0,  w ≥ 0
//! ```
//!
//! with dual `Σ y_p A_p + Σ u_j B_j − S = C`, `S ⪰ 0`, `u ≥ 0`. Search
//! directions use Nesterov–Todd scaling and a Mehrotra predictor-corrector;
//! the Schur complement is assembled densely and factored by Cholesky.

use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::linalg::solvers::Solve;
use faer::{Col, Mat, Par, Side};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::SparseSym;
use crate::linalg::SymMatrix;
use crate::par::Execution;

const FEAS_TOL: f64 = 1e-8;
const STEP_FRACTION: f64 = 0.98;
/// Iterations without a better iterate before the solver gives up.
const STALL_ITERATIONS: usize = 30;

struct Iterate {
    merit: f64,
    iteration: usize,
    x: Mat<f64>,
    s: Mat<f64>,
    yh: Vec<f64>,
    pobj: f64,
    dobj: f64,
    gap: f64,
    pinf: f64,
    dinf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    PrimalInfeasible,
    NumericalTrouble,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PresolveError {
    #[error("block order must be at least 1")]
    EmptyBlock,
    #[error("tolerance {0} outside (0, 1e-2]")]
    BadTolerance(f64),
    #[error("objective has order {0}, block has order {1}")]
    ObjectiveOrder(usize, usize),
    #[error("constraint {constraint} touches index {index} outside block order {order}")]
    IndexOutOfRange {
        constraint: usize,
        index: usize,
        order: usize,
    },
    #[error("equality constraints are linearly dependent (relative pivot {pivot:e})")]
    RankDeficient { pivot: f64 },
}

/// One PSD block with linear equalities and `≤` inequalities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpProblem {
    pub order: usize,
    /// Maximized as `⟨C, X⟩`.
    pub objective: SymMatrix,
    pub equalities: Vec<(SparseSym, f64)>,
    pub inequalities: Vec<(SparseSym, f64)>,
}

impl SdpProblem {
    pub fn new(objective: SymMatrix) -> Self {
        Self {
            order: objective.order(),
            objective,
            equalities: Vec::new(),
            inequalities: Vec::new(),
        }
    }

    pub fn add_equality(&mut self, a: SparseSym, b: f64) {
        self.equalities.push((a, b));
    }

    /// Adds `⟨B, X⟩ ≤ d`.
    pub fn add_inequality(&mut self, a: SparseSym, d: f64) {
        self.inequalities.push((a, d));
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SdpOptions {
    /// Relative duality gap `|p − d| / (1 + |p| + |d|)` at termination.
    pub tol: f64,
    pub max_iter: usize,
    pub execution: Execution,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 200,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpSolution {
    pub x: SymMatrix,
    /// Equality multipliers.
    pub y: Vec<f64>,
    /// Inequality multipliers, nonnegative.
    pub u: Vec<f64>,
    pub s: SymMatrix,
    /// Primal objective `⟨C, X⟩`.
    pub objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub status: SdpStatus,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    /// Slack `d_j − ⟨B_j, X⟩` of each inequality.
    pub fn inequality_slacks(&self, prob: &SdpProblem) -> Vec<f64> {
        prob.inequalities
            .iter()
            .map(|(a, d)| d - a.inner(&self.x))
            .collect()
    }
}

/// Solves with the given gap tolerance and iteration cap.
pub fn sdp_solve(prob: &SdpProblem, tol: f64, max_iter: usize) -> Result<SdpSolution, PresolveError> {
    sdp_solve_with(
        prob,
        &SdpOptions {
            tol,
            max_iter,
            ..SdpOptions::default()
        },
    )
}

pub fn sdp_solve_with(prob: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution, PresolveError> {
    presolve(prob, opts.tol)?;
    Ok(Solver::new(prob, opts).run())
}

fn presolve(prob: &SdpProblem, tol: f64) -> Result<(), PresolveError> {
    let m = prob.order;
    if m == 0 {
        return Err(PresolveError::EmptyBlock);
    }
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(PresolveError::BadTolerance(tol));
    }
    if prob.objective.order() != m {
        return Err(PresolveError::ObjectiveOrder(prob.objective.order(), m));
    }
    let all = prob.equalities.iter().chain(&prob.inequalities);
    for (k, (a, _)) in all.enumerate() {
        if let Some(j) = a.max_index().filter(|&j| j >= m) {
            return Err(PresolveError::IndexOutOfRange {
                constraint: k,
                index: j,
                order: m,
            });
        }
    }
    equality_rank_check(prob)
}

/// Cholesky of the Gram matrix `⟨A_p, A_q⟩`; a tiny relative pivot means the
/// equalities are dependent.
fn equality_rank_check(prob: &SdpProblem) -> Result<(), PresolveError> {
    let np = prob.equalities.len();
    if np == 0 {
        return Ok(());
    }
    // cell -> [(constraint, weighted value)]
    let mut cells: std::collections::BTreeMap<(usize, usize), Vec<(usize, f64)>> =
        std::collections::BTreeMap::new();
    for (p, (a, _)) in prob.equalities.iter().enumerate() {
        for &(i, j, v) in &a.entries {
            cells.entry((i, j)).or_default().push((p, v));
        }
    }
    let mut gram = Mat::<f64>::zeros(np, np);
    for ((i, j), list) in &cells {
        // merge duplicate entries of one constraint in this cell
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(list.len());
        for &(p, v) in list {
            match merged.last_mut() {
                Some((q, w)) if *q == p => *w += v,
                _ => merged.push((p, v)),
            }
        }
        let weight = if i == j { 1.0 } else { 2.0 };
        for &(p, vp) in &merged {
            for &(q, vq) in &merged {
                gram[(p, q)] += weight * vp * vq;
            }
        }
    }
    let scale = (0..np).map(|p| gram[(p, p)]).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(PresolveError::RankDeficient { pivot: 0.0 });
    }
    match gram.llt(Side::Lower) {
        Ok(llt) => {
            let l = llt.L();
            let pivot = (0..np).map(|p| l[(p, p)] * l[(p, p)]).fold(f64::INFINITY, f64::min) / scale;
            if pivot < 1e-10 {
                Err(PresolveError::RankDeficient { pivot })
            } else {
                Ok(())
            }
        }
        Err(_) => Err(PresolveError::RankDeficient { pivot: 0.0 }),
    }
}

fn to_mat(s: &SymMatrix) -> Mat<f64> {
    let m = s.order();
    Mat::from_fn(m, m, |i, j| s.get(i, j))
}

fn to_sym(a: &Mat<f64>) -> SymMatrix {
    SymMatrix::from_fn(a.nrows(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

fn symmetrize(a: &mut Mat<f64>) {
    let m = a.nrows();
    for i in 0..m {
        for j in i + 1..m {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

fn frob_inner(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)] * b[(i, j)];
        }
    }
    s
}

fn sparse_inner(a: &SparseSym, x: &Mat<f64>) -> f64 {
    a.entries
        .iter()
        .map(|&(i, j, v)| if i == j { v * x[(i, i)] } else { v * (x[(i, j)] + x[(j, i)]) })
        .sum()
}

/// `inner` against a dense row-major buffer.
fn sparse_inner_buf(a: &SparseSym, t: &[f64], m: usize) -> f64 {
    a.entries
        .iter()
        .map(|&(i, j, v)| if i == j { v * t[i * m + i] } else { 2.0 * v * t[i * m + j] })
        .sum()
}

fn inv_lower(l: faer::MatRef<'_, f64>) -> Mat<f64> {
    let m = l.nrows();
    let mut inv = Mat::<f64>::identity(m, m);
    solve_lower_triangular_in_place(l, inv.as_mut(), Par::Seq);
    inv
}

/// Largest step `α ≤ 1 / STEP_FRACTION` keeping `F Fᵀ + α Δ ⪰ 0`, given `F⁻¹`.
fn max_psd_step(f_inv: &Mat<f64>, delta: &Mat<f64>) -> f64 {
    let mut t = f_inv * delta * f_inv.transpose();
    symmetrize(&mut t);
    match t.self_adjoint_eigenvalues(Side::Lower) {
        Ok(vals) => {
            let lo = vals.first().copied().unwrap_or(0.0);
            if lo < 0.0 {
                -1.0 / lo
            } else {
                f64::INFINITY
            }
        }
        Err(_) => 0.0,
    }
}

fn max_ratio_step(v: &[f64], dv: &[f64]) -> f64 {
    v.iter()
        .zip(dv)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&x, &d)| -x / d)
        .fold(f64::INFINITY, f64::min)
}

struct Direction {
    dx: Mat<f64>,
    ds: Mat<f64>,
    dy: Vec<f64>,
    dw: Vec<f64>,
    du: Vec<f64>,
}

struct Solver<'a> {
    m: usize,
    np: usize,
    cons: Vec<&'a SparseSym>,
    rhs: Vec<f64>,
    c: Mat<f64>,
    opts: SdpOptions,
}

impl<'a> Solver<'a> {
    fn new(prob: &'a SdpProblem, opts: &SdpOptions) -> Self {
        let cons = prob
            .equalities
            .iter()
            .chain(&prob.inequalities)
            .map(|(a, _)| a)
            .collect();
        let rhs = prob
            .equalities
            .iter()
            .chain(&prob.inequalities)
            .map(|&(_, b)| b)
            .collect();
        Self {
            m: prob.order,
            np: prob.equalities.len(),
            cons,
            rhs,
            c: to_mat(&prob.objective),
            opts: *opts,
        }
    }

    fn apply(&self, x: &Mat<f64>) -> Vec<f64> {
        self.cons.iter().map(|a| sparse_inner(a, x)).collect()
    }

    fn adjoint(&self, v: &[f64]) -> Mat<f64> {
        let mut out = Mat::<f64>::zeros(self.m, self.m);
        for (a, &vk) in self.cons.iter().zip(v) {
            if vk == 0.0 {
                continue;
            }
            for &(i, j, e) in &a.entries {
                out[(i, j)] += vk * e;
                if i != j {
                    out[(j, i)] += vk * e;
                }
            }
        }
        out
    }

    /// `M_kl = ⟨A_k, W A_l W⟩`, one column per task.
    fn schur(&self, w: &Mat<f64>) -> Mat<f64> {
        let m = self.m;
        let k = self.cons.len();
        let wbuf: Vec<f64> = (0..m * m).map(|idx| w[(idx / m, idx % m)]).collect();
        let cols = self.opts.execution.map_range(k, |l| {
            let mut t = vec![0.0; m * m];
            for &(r, s, v) in &self.cons[l].entries {
                let wr = &wbuf[r * m..(r + 1) * m];
                let ws = &wbuf[s * m..(s + 1) * m];
                for p in 0..m {
                    let row = &mut t[p * m..(p + 1) * m];
                    if r == s {
                        let a = v * wr[p];
                        for q in 0..m {
                            row[q] += a * wr[q];
                        }
                    } else {
                        let (a, b) = (v * wr[p], v * ws[p]);
                        for q in 0..m {
                            row[q] += a * ws[q] + b * wr[q];
                        }
                    }
                }
            }
            (l..k)
                .map(|kk| sparse_inner_buf(self.cons[kk], &t, m))
                .collect::<Vec<f64>>()
        });
        let mut out = Mat::<f64>::zeros(k, k);
        for (l, col) in cols.into_iter().enumerate() {
            for (off, v) in col.into_iter().enumerate() {
                out[(l + off, l)] = v;
                out[(l, l + off)] = v;
            }
        }
        out
    }

    fn run(&self) -> SdpSolution {
        let (m, np) = (self.m, self.np);
        let k = self.cons.len();
        let nj = k - np;
        let mut x = Mat::<f64>::identity(m, m);
        let mut s = Mat::<f64>::identity(m, m);
        let mut w: Vec<f64> = self.rhs[np..].iter().map(|d| d.abs().max(1.0)).collect();
        let mut u = vec![1.0; nj];
        // ŷ = [y; u]; `u` mirrors the inequality block
        let mut yh: Vec<f64> = vec![0.0; np].into_iter().chain(u.iter().copied()).collect();
        let c_norm = frob_inner(&self.c, &self.c).sqrt();
        let mut status = SdpStatus::MaxIterations;
        let mut iterations = 0;
        let (mut pobj, mut dobj, mut gap, mut pinf, mut dinf);
        let mut best: Option<Iterate> = None;

        loop {
            let ax = self.apply(&x);
            let rp: Vec<f64> = (0..k)
                .map(|i| self.rhs[i] - ax[i] - if i >= np { w[i - np] } else { 0.0 })
                .collect();
            let mut rd = &self.c - self.adjoint(&yh) + &s;
            symmetrize(&mut rd);
            pobj = frob_inner(&self.c, &x);
            dobj = self.rhs.iter().zip(&yh).map(|(a, b)| a * b).sum::<f64>();
            pinf = rp
                .iter()
                .zip(&self.rhs)
                .map(|(r, b)| r.abs() / (1.0 + b.abs()))
                .fold(0.0, f64::max);
            dinf = frob_inner(&rd, &rd).sqrt() / (1.0 + c_norm);
            gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
            if gap <= self.opts.tol && pinf <= FEAS_TOL && dinf <= FEAS_TOL {
                status = SdpStatus::Optimal;
                break;
            }
            let merit = (gap / self.opts.tol).max(pinf / FEAS_TOL).max(dinf / FEAS_TOL);
            if best.as_ref().is_none_or(|b| merit < b.merit) {
                best = Some(Iterate {
                    merit,
                    iteration: iterations,
                    x: x.clone(),
                    s: s.clone(),
                    yh: yh.clone(),
                    pobj,
                    dobj,
                    gap,
                    pinf,
                    dinf,
                });
            } else if best.as_ref().is_some_and(|b| iterations - b.iteration >= STALL_ITERATIONS) {
                status = SdpStatus::NumericalTrouble;
                break;
            }
            let ymax = yh.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if ymax > 1e8 && dobj < 0.0 && -dobj / ymax > 1e-6 && dinf * (1.0 + c_norm) / ymax < 1e-6 {
                status = SdpStatus::PrimalInfeasible;
                break;
            }
            if iterations == self.opts.max_iter {
                break;
            }
            iterations += 1;

            let mu = (frob_inner(&x, &s) + w.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>())
                / (m + nj) as f64;

            // Nesterov–Todd scaling point W = G Gᵀ with Gᵀ S G = G⁻¹ X G⁻ᵀ = Λ
            let (Ok(lx), Ok(ls)) = (x.llt(Side::Lower), s.llt(Side::Lower)) else {
                status = SdpStatus::NumericalTrouble;
                break;
            };
            let lx = lx.L().to_owned();
            let ls = ls.L().to_owned();
            let Ok(svd) = (ls.transpose() * &lx).svd() else {
                status = SdpStatus::NumericalTrouble;
                break;
            };
            let lam: Vec<f64> = (0..m).map(|i| svd.S().column_vector()[i]).collect();
            if lam.iter().any(|&l| !(l > 0.0)) {
                status = SdpStatus::NumericalTrouble;
                break;
            }
            let v = svd.V().to_owned();
            let mut g = &lx * &v;
            for j in 0..m {
                let f = 1.0 / lam[j].sqrt();
                for i in 0..m {
                    g[(i, j)] *= f;
                }
            }
            let lx_inv = inv_lower(lx.as_ref());
            let ls_inv = inv_lower(ls.as_ref());
            let mut g_inv = v.transpose() * &lx_inv;
            for i in 0..m {
                let f = lam[i].sqrt();
                for j in 0..m {
                    g_inv[(i, j)] *= f;
                }
            }
            let mut wmat = &g * g.transpose();
            symmetrize(&mut wmat);

            let mut schur = self.schur(&wmat);
            for j in 0..nj {
                schur[(np + j, np + j)] += w[j] / u[j];
            }
            let Some(factor) = factor_with_perturbation(&schur) else {
                status = SdpStatus::NumericalTrouble;
                break;
            };

            let wrdw = &wmat * &rd * &wmat;
            let solve_dir = |kx: Mat<f64>, kv: Vec<f64>| -> Direction {
                let target = &kx + &wrdw;
                let at = self.apply(&target);
                let rhs = Col::<f64>::from_fn(k, |i| {
                    let extra = if i >= np { kv[i - np] / u[i - np] } else { 0.0 };
                    at[i] + extra - rp[i]
                });
                let sol = factor.solve(&rhs);
                let mut dy: Vec<f64> = (0..k).map(|i| sol[i]).collect();
                let build = |dy: &[f64]| {
                    let mut ds = self.adjoint(dy) - &rd;
                    symmetrize(&mut ds);
                    let mut dx = &kx - &wmat * &ds * &wmat;
                    symmetrize(&mut dx);
                    let dw: Vec<f64> = (0..nj).map(|j| (kv[j] - w[j] * dy[np + j]) / u[j]).collect();
                    (dx, ds, dw)
                };
                let (mut dx, mut ds, mut dw) = build(&dy);
                // refine against the residual of the assembled direction, which
                // drifts from the Schur solve once W is ill-conditioned
                for _ in 0..2 {
                    let adx = self.apply(&dx);
                    let resid = Col::<f64>::from_fn(k, |i| {
                        adx[i] + if i >= np { dw[i - np] } else { 0.0 } - rp[i]
                    });
                    let corr = factor.solve(&resid);
                    for i in 0..k {
                        dy[i] += corr[i];
                    }
                    (dx, ds, dw) = build(&dy);
                }
                let du: Vec<f64> = dy[np..].to_vec();
                Direction { dx, ds, dy, dw, du }
            };

            // predictor
            let pred = solve_dir(-&x, w.iter().zip(&u).map(|(a, b)| -a * b).collect());
            let ap = max_psd_step(&lx_inv, &pred.dx)
                .min(max_ratio_step(&w, &pred.dw))
                .min(1.0);
            let ad = max_psd_step(&ls_inv, &pred.ds)
                .min(max_ratio_step(&u, &pred.du))
                .min(1.0);
            let x_aff = &x + &pred.dx * ap;
            let s_aff = &s + &pred.ds * ad;
            let slack_aff: f64 = (0..nj)
                .map(|j| (w[j] + ap * pred.dw[j]) * (u[j] + ad * pred.du[j]))
                .sum();
            let mu_aff = (frob_inner(&x_aff, &s_aff) + slack_aff) / (m + nj) as f64;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            // corrector in the scaled space
            let dxs = &g_inv * &pred.dx * g_inv.transpose();
            let dss = g.transpose() * &pred.ds * &g;
            let prod = &dxs * &dss;
            let mut z = Mat::<f64>::zeros(m, m);
            for i in 0..m {
                for j in 0..m {
                    let mut r = -0.5 * (prod[(i, j)] + prod[(j, i)]);
                    if i == j {
                        r += sigma * mu - lam[i] * lam[i];
                    }
                    z[(i, j)] = 2.0 * r / (lam[i] + lam[j]);
                }
            }
            let mut kx = &g * &z * g.transpose();
            symmetrize(&mut kx);
            let kv: Vec<f64> = (0..nj)
                .map(|j| sigma * mu - w[j] * u[j] - pred.dw[j] * pred.du[j])
                .collect();
            let dir = solve_dir(kx, kv);

            let ap = (STEP_FRACTION * max_psd_step(&lx_inv, &dir.dx).min(max_ratio_step(&w, &dir.dw))).min(1.0);
            let ad = (STEP_FRACTION * max_psd_step(&ls_inv, &dir.ds).min(max_ratio_step(&u, &dir.du))).min(1.0);
            let (Some((x_new, ap)), Some((s_new, ad))) = (pd_step(&x, &dir.dx, ap), pd_step(&s, &dir.ds, ad)) else {
                status = SdpStatus::NumericalTrouble;
                break;
            };
            if ap < 1e-12 && ad < 1e-12 {
                status = SdpStatus::NumericalTrouble;
                break;
            }
            x = x_new;
            s = s_new;
            for j in 0..nj {
                w[j] += ap * dir.dw[j];
                u[j] += ad * dir.du[j];
            }
            for i in 0..k {
                yh[i] += ad * dir.dy[i];
            }
        }

        // degenerate faces can make late iterates drift; fall back to the
        // iterate closest to the stopping criteria
        if matches!(status, SdpStatus::MaxIterations | SdpStatus::NumericalTrouble) {
            if let Some(b) = best {
                (x, s, yh, pobj, dobj, gap, pinf, dinf) = (b.x, b.s, b.yh, b.pobj, b.dobj, b.gap, b.pinf, b.dinf);
            }
        }

        SdpSolution {
            x: to_sym(&x),
            y: yh[..np].to_vec(),
            u: yh[np..].to_vec(),
            s: to_sym(&s),
            objective: pobj,
            dual_objective: dobj,
            gap,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            iterations,
            status,
        }
    }
}

/// `a + α d` for the largest `α` among `step, 0.8 step, …` whose result
/// still factors; rounding can put the full step on the cone boundary.
fn pd_step(a: &Mat<f64>, d: &Mat<f64>, step: f64) -> Option<(Mat<f64>, f64)> {
    let mut alpha = step;
    for _ in 0..30 {
        let mut next = a + d * alpha;
        symmetrize(&mut next);
        if next.llt(Side::Lower).is_ok() {
            return Some((next, alpha));
        }
        alpha *= 0.8;
    }
    None
}

/// Cholesky of the Schur complement, retrying with a growing diagonal shift.
fn factor_with_perturbation(a: &Mat<f64>) -> Option<faer::linalg::solvers::Llt<f64>> {
    if let Ok(f) = a.llt(Side::Lower) {
        return Some(f);
    }
    let n = a.nrows();
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(1.0, f64::max);
    let mut eps = 1e-12;
    while eps <= 1e-8 {
        let mut b = a.clone();
        for i in 0..n {
            b[(i, i)] += eps * scale;
        }
        if let Ok(f) = b.llt(Side::Lower) {
            return Some(f);
        }
        eps *= 10.0;
    }
    None
}
