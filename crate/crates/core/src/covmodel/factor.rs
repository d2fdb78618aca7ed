use super::SymMatrix;
use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor `M = L L^T`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    p: usize,
    // row-major, upper part unused
    l: Vec<f64>,
}

impl Cholesky {
    /// Fails with [`Error::NotPositiveDefinite`] on the first non-positive pivot.
    /// No jitter is ever added.
    pub fn new(m: &SymMatrix) -> Result<Self> {
        let p = m.dim();
        let mut l = vec![0.0; p * p];
        for j in 0..p {
            let mut d = m.get(j, j);
            for k in 0..j {
                d -= l[j * p + k] * l[j * p + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let djj = d.sqrt();
            l[j * p + j] = djj;
            for i in (j + 1)..p {
                let mut s = m.get(i, j);
                let (ri, rj) = (&l[i * p..i * p + j], &l[j * p..j * p + j]);
                for (a, b) in ri.iter().zip(rj) {
                    s -= a * b;
                }
                l[i * p + j] = s / djj;
            }
        }
        Ok(Self { p, l })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.p).map(|i| self.l[i * self.p + i].ln()).sum::<f64>()
    }

    /// Solves `M x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let p = self.p;
        assert_eq!(b.len(), p);
        for i in 0..p {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * p + k] * b[k];
            }
            b[i] = s / self.l[i * p + i];
        }
        for i in (0..p).rev() {
            let mut s = b[i];
            for k in (i + 1)..p {
                s -= self.l[k * p + i] * b[k];
            }
            b[i] = s / self.l[i * p + i];
        }
    }

    /// `M^{-1}` via `L^{-1}`: `M^{-1} = L^{-T} L^{-1}`.
    pub fn inverse(&self) -> SymMatrix {
        let p = self.p;
        // column-by-column inverse of L (lower triangular)
        let mut linv = vec![0.0; p * p];
        for c in 0..p {
            linv[c * p + c] = 1.0 / self.l[c * p + c];
            for i in (c + 1)..p {
                let mut s = 0.0;
                for k in c..i {
                    s -= self.l[i * p + k] * linv[k * p + c];
                }
                linv[i * p + c] = s / self.l[i * p + i];
            }
        }
        SymMatrix::from_fn(p, |i, j| {
            // (L^{-T} L^{-1})_{ij} = sum_k linv[k][i] * linv[k][j], k >= max(i, j)
            let start = i.max(j);
            (start..p).map(|k| linv[k * p + i] * linv[k * p + j]).sum()
        })
    }
}

/// Inverse of a symmetric positive definite matrix together with `log det`.
#[derive(Clone, Debug)]
pub struct SpdInverse {
    pub inverse: SymMatrix,
    pub log_det: f64,
}

pub fn spd_factor_inverse(m: &SymMatrix) -> Result<SpdInverse> {
    let chol = Cholesky::new(m)?;
    Ok(SpdInverse { inverse: chol.inverse(), log_det: chol.log_det() })
}

pub fn log_det_spd(m: &SymMatrix) -> Result<f64> {
    Ok(Cholesky::new(m)?.log_det())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_spd(p: usize, seed: u64) -> SymMatrix {
        // B B^T + p I with a cheap LCG, no external rng needed here
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let b: Vec<f64> = (0..p * p).map(|_| next()).collect();
        SymMatrix::from_fn(p, |i, j| {
            let dot: f64 = (0..p).map(|k| b[i * p + k] * b[j * p + k]).sum();
            dot + if i == j { 0.5 } else { 0.0 }
        })
    }

    #[test]
    fn identity_inverse_and_log_det() {
        let inv = spd_factor_inverse(&SymMatrix::identity(4)).unwrap();
        assert_eq!(inv.inverse, SymMatrix::identity(4));
        assert_eq!(inv.log_det, 0.0);
    }

    #[test]
    fn diagonal_inverse() {
        let inv = spd_factor_inverse(&SymMatrix::from_diag(&[2.0, 4.0])).unwrap();
        assert!((inv.inverse.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((inv.inverse.get(1, 1) - 0.25).abs() < 1e-15);
        assert_eq!(inv.inverse.get(0, 1), 0.0);
        assert!((inv.log_det - 8f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn multiply_back_is_identity() {
        let m = random_spd(8, 3);
        let inv = spd_factor_inverse(&m).unwrap().inverse;
        let prod = m.matmul(&inv);
        for i in 0..8 {
            for j in 0..8 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((prod[i * 8 + j] - target).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        match spd_factor_inverse(&m) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn solve_matches_inverse() {
        let m = random_spd(6, 11);
        let chol = Cholesky::new(&m).unwrap();
        let inv = chol.inverse();
        let mut b: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let expected: Vec<f64> = (0..6).map(|i| inv.row(i).iter().zip(&b).map(|(a, x)| a * x).sum()).collect();
        chol.solve_in_place(&mut b);
        for (x, e) in b.iter().zip(&expected) {
            assert!((x - e).abs() < 1e-12);
        }
    }
}
