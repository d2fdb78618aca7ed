//! Numeric containers, covariance construction, SPD inversion and the
//! penalized Gaussian log-likelihood.

mod factor;
mod matrix;

pub use factor::{log_det_spd, spd_factor_inverse, Cholesky, SpdInverse};
pub use matrix::{DataMatrix, SymMatrix};

use crate::error::{Error, Result};

/// Solver tolerances and caps shared by every solve entry point.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Bound on every KKT residual for a solution to count as converged.
    pub kkt_tol: f64,
    /// Outer stop: max |dW| over a sweep <= conv_tol * mean |S_ii|.
    pub conv_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Entries of theta with `|theta_ij| <= support_tol` count as zero.
    pub support_tol: f64,
    /// Always true; the unpenalized-diagonal criterion is not supported.
    pub penalize_diagonal: bool,
    /// Record `-log det W` after every outer sweep (costs one factorization per sweep).
    pub track_objective: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            kkt_tol: 1e-7,
            conv_tol: 1e-6,
            max_outer: 1000,
            max_inner: 1000,
            support_tol: 1e-8,
            penalize_diagonal: true,
            track_objective: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let tols = [("kkt_tol", self.kkt_tol), ("conv_tol", self.conv_tol), ("support_tol", self.support_tol)];
        for (name, v) in tols {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::input(format!("{name} must be a positive finite number, got {v}")));
            }
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::input("iteration caps must be at least 1"));
        }
        if !self.penalize_diagonal {
            return Err(Error::input("only the diagonal-penalized criterion is supported"));
        }
        Ok(())
    }
}

/// `S = X^T X / n`, after subtracting column means when `center` is set.
pub fn sample_covariance(x: &DataMatrix, center: bool) -> SymMatrix {
    let (n, p) = (x.n(), x.p());
    let means: Vec<f64> = if center {
        (0..p).map(|j| (0..n).map(|i| x.get(i, j)).sum::<f64>() / n as f64).collect()
    } else {
        vec![0.0; p]
    };
    let mut acc = vec![0.0; p * p];
    let mut centered = vec![0.0; p];
    for i in 0..n {
        for (c, (v, m)) in centered.iter_mut().zip(x.row(i).iter().zip(&means)) {
            *c = v - m;
        }
        for a in 0..p {
            let ca = centered[a];
            if ca == 0.0 {
                continue;
            }
            for b in a..p {
                acc[a * p + b] += ca * centered[b];
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    SymMatrix::from_fn(p, |a, b| acc[a * p + b] * inv_n)
}

/// `R_ij = S_ij / sqrt(S_ii S_jj)`, with an exactly unit diagonal.
pub fn to_correlation(s: &SymMatrix) -> Result<SymMatrix> {
    let d = s.diag();
    if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::input(format!("correlation needs positive variances; S[{0}][{0}] = {1}", i + 1, d[i])));
    }
    let scale: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
    Ok(SymMatrix::from_fn(s.dim(), |i, j| if i == j { 1.0 } else { s.get(i, j) / (scale[i] * scale[j]) }))
}

/// `-log det(theta) + tr(S theta) + lambda * sum_ij |theta_ij|`, diagonal included.
pub fn objective(s: &SymMatrix, theta: &SymMatrix, lambda: f64) -> Result<f64> {
    if s.dim() != theta.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), got: theta.dim() });
    }
    let log_det = log_det_spd(theta)?;
    let l1: f64 = theta.as_slice().iter().map(|v| v.abs()).sum();
    Ok(-log_det + s.trace_product(theta) + lambda * l1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_uncentered_two_by_two() {
        let x = DataMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let s = sample_covariance(&x, false);
        assert_eq!(s.to_rows(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
    }

    #[test]
    fn single_centered_sample_is_zero() {
        let x = DataMatrix::from_rows(&[vec![3.0, -7.5, 2.0]]).unwrap();
        assert_eq!(sample_covariance(&x, true), SymMatrix::zeros(3));
    }

    #[test]
    fn non_finite_data_rejected() {
        assert!(DataMatrix::from_rows(&[vec![1.0, f64::NAN]]).is_err());
        assert!(DataMatrix::from_rows(&[vec![1.0, f64::INFINITY]]).is_err());
    }

    #[test]
    fn correlation_hand_scaled() {
        let s = SymMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 9.0]]).unwrap();
        let r = to_correlation(&s).unwrap();
        assert_eq!(r.get(0, 0), 1.0);
        assert_eq!(r.get(1, 1), 1.0);
        assert!((r.get(0, 1) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn correlation_of_correlation_unchanged() {
        let r = SymMatrix::from_rows(&[vec![1.0, 0.25, -0.5], vec![0.25, 1.0, 0.125], vec![-0.5, 0.125, 1.0]]).unwrap();
        assert_eq!(to_correlation(&r).unwrap(), r);
    }

    #[test]
    fn correlation_rejects_nonpositive_variance() {
        let s = SymMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(to_correlation(&s), Err(Error::Input(_))));
    }

    #[test]
    fn objective_identity_cases() {
        let i2 = SymMatrix::identity(2);
        assert!((objective(&i2, &i2, 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((objective(&i2, &i2, 0.1).unwrap() - 2.2).abs() < 1e-15);
    }

    #[test]
    fn objective_rejects_indefinite_theta() {
        let s = SymMatrix::identity(2);
        let theta = SymMatrix::from_rows(&[vec![1.0, 3.0], vec![3.0, 1.0]]).unwrap();
        assert!(matches!(objective(&s, &theta, 0.1), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig { kkt_tol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig { max_inner: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
