//! Block coordinate descent over the rows of `W = Theta^{-1}`.
//!
//! Each sweep visits every row `i`, holds the rest of `W` fixed and solves the
//! l1-penalized quadratic row problem in `u = theta12 / theta22`; the new
//! off-diagonal row of `W` is `-W11 u`. The diagonal of `W` is pinned to
//! `S_ii + lambda` from the first iteration on. Rows with
//! `max_j |S_ij| <= lambda` are zero in `Theta` and never enter the inner solver.

mod kkt;
mod row;

pub use kkt::{kkt_check, KktReport};
pub use row::{row_objective, row_subproblem, RowSolution};

pub(crate) use kkt::kkt_residuals;
pub(crate) use row::soft_threshold;

use log::warn;
use serde::Serialize;

use crate::covmodel::{log_det_spd, objective, spd_factor_inverse, Cholesky, SolverConfig, SymMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct GlassoSolution {
    pub theta: SymMatrix,
    pub w: SymMatrix,
    pub lambda: f64,
    pub objective: f64,
    /// Outer sweeps performed (0 for closed-form solves).
    pub iterations: usize,
    pub converged: bool,
    pub max_kkt_residual: f64,
    /// `-log det W` after each sweep when `track_objective` is set.
    pub dual_trace: Vec<f64>,
}

impl GlassoSolution {
    pub fn dim(&self) -> usize {
        self.theta.dim()
    }
}

/// Serializable summary of a solve.
#[derive(Clone, Debug, Serialize)]
pub struct SolveSummary {
    pub lambda: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub max_kkt_residual: f64,
}

impl From<&GlassoSolution> for SolveSummary {
    fn from(s: &GlassoSolution) -> Self {
        Self {
            lambda: s.lambda,
            objective: s.objective,
            iterations: s.iterations,
            converged: s.converged,
            max_kkt_residual: s.max_kkt_residual,
        }
    }
}

pub(crate) fn check_inputs(s: &SymMatrix, lambda: f64, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::input(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    if !s.is_finite() {
        return Err(Error::input("covariance matrix has non-finite entries"));
    }
    for i in 0..s.dim() {
        let d = s.get(i, i) + lambda;
        if !(d > 0.0) {
            return Err(Error::Infeasible { index: i, value: d });
        }
    }
    Ok(())
}

/// Closed form for a single variable: `W = S + lambda`, `Theta = 1 / W`.
pub fn solve_scalar(s: f64, lambda: f64) -> Result<GlassoSolution> {
    let w = s + lambda;
    if !(w > 0.0) {
        return Err(Error::Infeasible { index: 0, value: w });
    }
    let theta = 1.0 / w;
    Ok(GlassoSolution {
        theta: SymMatrix::from_diag(&[theta]),
        w: SymMatrix::from_diag(&[w]),
        lambda,
        objective: w.ln() + s * theta + lambda * theta,
        iterations: 0,
        converged: true,
        max_kkt_residual: 0.0,
        dual_trace: Vec::new(),
    })
}

/// Closed form for two variables: `w12 = soft(s12, lambda)`, `Theta = W^{-1}`.
pub fn solve_pair(s: &SymMatrix, lambda: f64, cfg: &SolverConfig) -> Result<GlassoSolution> {
    if s.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: s.dim() });
    }
    check_inputs(s, lambda, cfg)?;
    let (a, b) = (s.get(0, 0) + lambda, s.get(1, 1) + lambda);
    let w12 = soft_threshold(s.get(0, 1), lambda);
    let det = a * b - w12 * w12;
    if !(det > 0.0) {
        return Err(Error::NotPositiveDefinite { pivot: 1, value: det });
    }
    let w = SymMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 0) => a,
        (1, 1) => b,
        _ => w12,
    });
    let theta = SymMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 0) => b / det,
        (1, 1) => a / det,
        _ => -w12 / det,
    });
    finish(s, theta, w, lambda, 0, true, Vec::new(), cfg)
}

/// Graphical lasso on the whole matrix, no component splitting.
pub fn solve_full(s: &SymMatrix, lambda: f64, cfg: &SolverConfig) -> Result<GlassoSolution> {
    solve_block(s, lambda, cfg, None)
}

/// Graphical lasso on one block. `warm` seeds `W` (off-diagonal) and the
/// row iterates; it is ignored when its dimension differs.
pub fn solve_block(
    s: &SymMatrix,
    lambda: f64,
    cfg: &SolverConfig,
    warm: Option<&GlassoSolution>,
) -> Result<GlassoSolution> {
    check_inputs(s, lambda, cfg)?;
    let p = s.dim();
    if p == 1 {
        return solve_scalar(s.get(0, 0), lambda);
    }
    let warm = match warm {
        Some(ws) if ws.dim() != p => {
            warn!("warm start of dimension {} ignored for block of dimension {p}", ws.dim());
            None
        }
        other => other,
    };

    if warm.is_some() {
        match solve_iterative(s, lambda, cfg, warm) {
            Ok(sol) if sol.w.is_finite() && sol.theta.is_finite() => return Ok(sol),
            Ok(_) | Err(_) => warn!("warm-started solve broke down; retrying cold"),
        }
    }
    solve_iterative(s, lambda, cfg, None)
}

fn solve_iterative(
    s: &SymMatrix,
    lambda: f64,
    cfg: &SolverConfig,
    warm: Option<&GlassoSolution>,
) -> Result<GlassoSolution> {
    let p = s.dim();
    let mut w = s.add_diag(lambda);
    // u[i * p + j] = theta_ij / theta_ii for j != i
    let mut u = vec![0.0; p * p];
    if let Some(ws) = warm {
        // A W from another penalty may sit outside the box |W - S| <= lambda;
        // row updates only preserve definiteness from a feasible start.
        let mut candidate = ws.w.clone();
        for i in 0..p {
            candidate.set(i, i, s.get(i, i) + lambda);
            for j in (i + 1)..p {
                let sij = s.get(i, j);
                candidate.set(i, j, candidate.get(i, j).clamp(sij - lambda, sij + lambda));
            }
        }
        if Cholesky::new(&candidate).is_ok() {
            w = candidate;
            for i in 0..p {
                let tii = ws.theta.get(i, i);
                if tii > 0.0 {
                    for j in 0..p {
                        if j != i {
                            u[i * p + j] = ws.theta.get(i, j) / tii;
                        }
                    }
                }
            }
        } else {
            warn!("warm start W is not positive definite at the new lambda; starting cold");
        }
    }

    let active: Vec<bool> =
        (0..p).map(|i| s.row(i).iter().enumerate().any(|(j, v)| j != i && v.abs() > lambda)).collect();
    for i in (0..p).filter(|&i| !active[i]) {
        u[i * p..(i + 1) * p].fill(0.0);
        for j in (0..p).filter(|&j| j != i) {
            w.set(i, j, 0.0);
        }
    }

    let mean_diag = s.diag().iter().map(|v| v.abs()).sum::<f64>() / p as f64;
    let scale = if mean_diag > 0.0 { mean_diag } else { 1.0 };
    let outer_tol = cfg.conv_tol * scale;
    // Row solves well below the outer tolerance keep -log det W monotone
    // across sweeps up to rounding; looser ones make it jitter at the tail.
    let inner_tol = (1e-4 * outer_tol.min(cfg.kkt_tol)).max(f64::EPSILON * scale);

    let mut r = vec![0.0; p];
    let mut dual_trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut result = None;

    while iterations < cfg.max_outer {
        iterations += 1;
        let mut max_change = 0.0_f64;
        for i in (0..p).filter(|&i| active[i]) {
            let ui = &mut u[i * p..(i + 1) * p];
            r.fill(0.0);
            let wv = w.as_slice();
            for (j, &uj) in ui.iter().enumerate() {
                if uj != 0.0 && j != i {
                    for (rk, g) in r.iter_mut().zip(&wv[j * p..(j + 1) * p]) {
                        *rk += g * uj;
                    }
                }
            }
            row::coordinate_descent(wv, p, i, s.row(i), 1.0, lambda, ui, &mut r, inner_tol, cfg.max_inner);
            for j in (0..p).filter(|&j| j != i) {
                let new = -r[j];
                max_change = max_change.max((new - w.get(i, j)).abs());
                w.set(i, j, new);
            }
        }
        if cfg.track_objective {
            dual_trace.push(-log_det_spd(&w).unwrap_or(f64::NAN));
        }
        if max_change <= outer_tol {
            let theta = theta_from_rows(&w, &u);
            let report = kkt_residuals(s, &theta, &w, lambda, cfg);
            if report.passed {
                converged = true;
                result = Some(theta);
                break;
            }
        }
    }

    let theta = result.unwrap_or_else(|| theta_from_rows(&w, &u));
    let (theta, w) = match Cholesky::new(&theta) {
        Ok(_) => (theta, w),
        Err(_) => {
            // unconverged row iterates need not give a PD theta; fall back to W^{-1}
            let inv = spd_factor_inverse(&w)?;
            (inv.inverse, w)
        }
    };
    finish(s, theta, w, lambda, iterations, converged, dual_trace, cfg)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    s: &SymMatrix,
    theta: SymMatrix,
    w: SymMatrix,
    lambda: f64,
    iterations: usize,
    converged: bool,
    dual_trace: Vec<f64>,
    cfg: &SolverConfig,
) -> Result<GlassoSolution> {
    let report = kkt_residuals(s, &theta, &w, lambda, cfg);
    let objective = objective(s, &theta, lambda)?;
    Ok(GlassoSolution {
        theta,
        w,
        lambda,
        objective,
        iterations,
        converged: converged && report.passed,
        max_kkt_residual: report.max_violation(),
        dual_trace,
    })
}

/// `theta_ii = 1 / (W_ii + w12' u)`, `theta_ij = u_ij theta_ii`, symmetrized
/// by averaging the two row estimates.
fn theta_from_rows(w: &SymMatrix, u: &[f64]) -> SymMatrix {
    let p = w.dim();
    let diag: Vec<f64> = (0..p)
        .map(|i| {
            let ui = &u[i * p..(i + 1) * p];
            let dot: f64 = w.row(i).iter().zip(ui).enumerate().filter(|(j, _)| *j != i).map(|(_, (a, b))| a * b).sum();
            1.0 / (w.get(i, i) + dot)
        })
        .collect();
    SymMatrix::from_fn(p, |i, j| {
        if i == j {
            diag[i]
        } else {
            let a = u[i * p + j] * diag[i];
            let b = u[j * p + i] * diag[j];
            if a == 0.0 && b == 0.0 {
                0.0
            } else {
                0.5 * (a + b)
            }
        }
    })
}
