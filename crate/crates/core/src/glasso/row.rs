//! The per-row l1-penalized quadratic subproblem
//!
//! ```text
//! minimize_u  1/2 u' A u + t u' s + lambda t ||u||_1
//! ```
//!
//! with `A = W11` positive definite and `t = theta22 > 0`.

use crate::covmodel::SymMatrix;
use crate::error::{Error, Result};

#[inline]
pub(crate) fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowSolution {
    pub theta12: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

/// Cyclic coordinate descent on a row of a dense `dim x dim` Gram matrix
/// `gram`, skipping coordinate `skip` (pass `dim` to skip nothing).
///
/// `u` holds the iterate (with `u[skip] == 0`), `r` must equal `gram * u` on
/// entry and is kept in sync. Stops when a full sweep moves no coordinate by
/// more than `tol` in the scale of `gram * u / t`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn coordinate_descent(
    gram: &[f64],
    dim: usize,
    skip: usize,
    s: &[f64],
    t: f64,
    lambda: f64,
    u: &mut [f64],
    r: &mut [f64],
    tol: f64,
    max_sweeps: usize,
) -> (usize, bool) {
    let gamma = lambda * t;
    for sweep in 1..=max_sweeps {
        let mut max_move = 0.0_f64;
        for j in 0..dim {
            if j == skip {
                continue;
            }
            let a_jj = gram[j * dim + j];
            let old = u[j];
            let z = t * s[j] + r[j] - a_jj * old;
            let new = -soft_threshold(z, gamma) / a_jj;
            let delta = new - old;
            if delta != 0.0 {
                u[j] = new;
                for (rk, g) in r.iter_mut().zip(&gram[j * dim..(j + 1) * dim]) {
                    *rk += g * delta;
                }
                max_move = max_move.max(a_jj * delta.abs() / t);
            }
        }
        if max_move <= tol {
            return (sweep, true);
        }
    }
    (max_sweeps, false)
}

/// Minimizer of the row criterion for `theta12`. Returns the zero vector
/// without iterating when `||s12||_inf <= lambda`.
pub fn row_subproblem(
    w11: &SymMatrix,
    s12: &[f64],
    theta22: f64,
    lambda: f64,
    conv_tol: f64,
    max_inner: usize,
    warm: Option<&[f64]>,
) -> Result<RowSolution> {
    let dim = w11.dim();
    if s12.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: s12.len() });
    }
    if !(theta22 > 0.0) {
        return Err(Error::input(format!("theta22 must be positive, got {theta22}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::input(format!("lambda must be nonnegative, got {lambda}")));
    }
    if s12.iter().all(|v| v.abs() <= lambda) {
        return Ok(RowSolution { theta12: vec![0.0; dim], sweeps: 0, converged: true });
    }
    if let Some(i) = (0..dim).find(|&i| !(w11.get(i, i) > 0.0)) {
        return Err(Error::NotPositiveDefinite { pivot: i, value: w11.get(i, i) });
    }
    let mut u = match warm {
        Some(w) if w.len() == dim => w.to_vec(),
        Some(w) => return Err(Error::DimensionMismatch { expected: dim, got: w.len() }),
        None => vec![0.0; dim],
    };
    let gram = w11.as_slice();
    let mut r = vec![0.0; dim];
    for (j, &uj) in u.iter().enumerate() {
        if uj != 0.0 {
            for (rk, g) in r.iter_mut().zip(w11.row(j)) {
                *rk += g * uj;
            }
        }
    }
    let (sweeps, converged) =
        coordinate_descent(gram, dim, dim, s12, theta22, lambda, &mut u, &mut r, conv_tol, max_inner);
    Ok(RowSolution { theta12: u, sweeps, converged })
}

/// Value of the row criterion, used by tests and diagnostics.
pub fn row_objective(w11: &SymMatrix, s12: &[f64], theta22: f64, lambda: f64, u: &[f64]) -> f64 {
    let dim = w11.dim();
    let mut quad = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            quad += u[i] * w11.get(i, j) * u[j];
        }
    }
    let lin: f64 = u.iter().zip(s12).map(|(a, b)| a * b).sum();
    let l1: f64 = u.iter().map(|v| v.abs()).sum();
    0.5 * quad + theta22 * lin + lambda * theta22 * l1
}
