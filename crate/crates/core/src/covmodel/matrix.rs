use crate::error::{Error, Result};

/// Dense symmetric `p x p` matrix stored row-major in full.
///
/// Every constructor and mutator keeps `get(i, j) == get(j, i)` bitwise.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    p: usize,
    values: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(p: usize) -> Self {
        assert!(p >= 1, "SymMatrix dimension must be at least 1");
        Self { p, values: vec![0.0; p * p] }
    }

    pub fn identity(p: usize) -> Self {
        let mut m = Self::zeros(p);
        for i in 0..p {
            m.values[i * p + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.values[i * diag.len() + i] = d;
        }
        m
    }

    /// Builds the matrix from `f(i, j)` evaluated on the upper triangle (`i <= j`).
    pub fn from_fn(p: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(p);
        for i in 0..p {
            for j in i..p {
                let v = f(i, j);
                m.values[i * p + j] = v;
                m.values[j * p + i] = v;
            }
        }
        m
    }

    /// Row-major values; symmetry must hold exactly.
    pub fn from_row_major(p: usize, values: Vec<f64>) -> Result<Self> {
        if p == 0 {
            return Err(Error::input("matrix dimension must be at least 1"));
        }
        if values.len() != p * p {
            return Err(Error::DimensionMismatch { expected: p * p, got: values.len() });
        }
        for i in 0..p {
            for j in (i + 1)..p {
                let (a, b) = (values[i * p + j], values[j * p + i]);
                if a != b && !(a.is_nan() && b.is_nan()) {
                    return Err(Error::input(format!("matrix not symmetric at ({}, {}): {a} vs {b}", i + 1, j + 1)));
                }
            }
        }
        Ok(Self { p, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows_symmetrized(rows, 0.0)
    }

    /// Accepts asymmetry up to `tol` (absolute) and averages it away.
    pub fn from_rows_symmetrized(rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        let p = rows.len();
        if p == 0 {
            return Err(Error::input("empty matrix"));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::NotSquare { rows: p, row: r + 1, cols: row.len() });
            }
        }
        let mut m = Self::zeros(p);
        for i in 0..p {
            m.values[i * p + i] = rows[i][i];
            for j in (i + 1)..p {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > tol {
                    return Err(Error::input(format!("matrix not symmetric at ({}, {}): {a} vs {b}", i + 1, j + 1)));
                }
                let v = if a == b { a } else { 0.5 * (a + b) };
                m.values[i * p + j] = v;
                m.values[j * p + i] = v;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.p + j] = v;
        self.values[j * self.p + i] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.p).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.p).map(|i| self.get(i, i)).collect()
    }

    /// Checks the upper triangle, which determines the matrix.
    pub fn is_finite(&self) -> bool {
        (0..self.p).all(|i| self.row(i)[i..].iter().all(|v| v.is_finite()))
    }

    /// Largest `|m_ij|` over `i != j`; zero when `p == 1`.
    pub fn max_abs_offdiag(&self) -> f64 {
        let mut best = 0.0_f64;
        for i in 0..self.p {
            for j in (i + 1)..self.p {
                best = best.max(self.get(i, j).abs());
            }
        }
        best
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.p, other.p);
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Dense product `self * other`, row-major (generally not symmetric).
    pub fn matmul(&self, other: &SymMatrix) -> Vec<f64> {
        assert_eq!(self.p, other.p);
        let p = self.p;
        let mut out = vec![0.0; p * p];
        for i in 0..p {
            let out_row = &mut out[i * p..(i + 1) * p];
            for k in 0..p {
                let a = self.values[i * p + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `tr(self * other)` for symmetric operands.
    pub fn trace_product(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.p, other.p);
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    /// Principal submatrix on `indices` (taken in the given order).
    pub fn principal_submatrix(&self, indices: &[usize]) -> SymMatrix {
        let k = indices.len();
        let mut out = SymMatrix::zeros(k);
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                out.values[a * k + b] = self.get(i, j);
            }
        }
        out
    }

    pub fn add_diag(&self, shift: f64) -> SymMatrix {
        let mut out = self.clone();
        for i in 0..self.p {
            out.values[i * self.p + i] += shift;
        }
        out
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// `n x p` observation matrix, one sample per row.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::input("data matrix needs at least one row and one column"));
        }
        if values.len() != n * p {
            return Err(Error::DimensionMismatch { expected: n * p, got: values.len() });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite entry at row {}, column {}", pos / p + 1, pos % p + 1)));
        }
        Ok(Self { n, p, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::input(format!(
                "ragged data matrix: row {} has {} columns, expected {p}",
                bad + 1,
                rows[bad].len()
            )));
        }
        Self::new(n, p, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.p + col]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }
}
