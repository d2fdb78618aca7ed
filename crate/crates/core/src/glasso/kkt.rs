use serde::Serialize;

use super::GlassoSolution;
use crate::covmodel::{SolverConfig, SymMatrix};

/// Worst violations of the stationarity conditions of the penalized likelihood.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KktReport {
    /// max over zero `theta_ij` of `(|S_ij - W_ij| - lambda)+`.
    pub max_violation_zero: f64,
    /// max over nonzero `theta_ij` of `|W_ij - (S_ij + lambda * sign(theta_ij))|`.
    pub max_violation_sign: f64,
    /// max over `i` of `|W_ii - S_ii - lambda|`.
    pub max_violation_diag: f64,
    pub passed: bool,
}

impl KktReport {
    pub fn max_violation(&self) -> f64 {
        self.max_violation_zero.max(self.max_violation_sign).max(self.max_violation_diag)
    }
}

pub fn kkt_check(s: &SymMatrix, sol: &GlassoSolution, cfg: &SolverConfig) -> KktReport {
    kkt_residuals(s, &sol.theta, &sol.w, sol.lambda, cfg)
}

pub(crate) fn kkt_residuals(
    s: &SymMatrix,
    theta: &SymMatrix,
    w: &SymMatrix,
    lambda: f64,
    cfg: &SolverConfig,
) -> KktReport {
    let p = s.dim();
    assert_eq!(theta.dim(), p);
    assert_eq!(w.dim(), p);
    let (mut zero, mut sign, mut diag) = (0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..p {
        diag = diag.max((w.get(i, i) - s.get(i, i) - lambda).abs());
        let (srow, trow, wrow) = (s.row(i), theta.row(i), w.row(i));
        for j in (i + 1)..p {
            let t = trow[j];
            if t.abs() <= cfg.support_tol {
                zero = zero.max((srow[j] - wrow[j]).abs() - lambda);
            } else {
                sign = sign.max((wrow[j] - (srow[j] + lambda * t.signum())).abs());
            }
        }
    }
    let zero = zero.max(0.0);
    let passed = zero <= cfg.kkt_tol && sign <= cfg.kkt_tol && diag <= cfg.kkt_tol;
    KktReport { max_violation_zero: zero, max_violation_sign: sign, max_violation_diag: diag, passed }
}
