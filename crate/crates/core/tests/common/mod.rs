//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use covthresh::covmodel::{sample_covariance, to_correlation};
use covthresh::{DataMatrix, SymMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn s3() -> SymMatrix {
    SymMatrix::from_rows(&[vec![1.0, 0.5, 0.1], vec![0.5, 1.0, 0.2], vec![0.1, 0.2, 1.0]]).unwrap()
}

pub fn gaussian_data(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DataMatrix {
    let values = (0..n * p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    DataMatrix::new(n, p, values).unwrap()
}

/// Unstructured sample covariance; correlation scale on even seeds.
pub fn random_cov(seed: u64, p: usize) -> SymMatrix {
    let mut r = rng(seed);
    let n = r.random_range(p / 2 + 2..2 * p + 10);
    let x = gaussian_data(&mut r, n, p);
    let s = sample_covariance(&x, true);
    if seed.is_multiple_of(2) {
        to_correlation(&s).unwrap()
    } else {
        s
    }
}

/// Random SPD matrix `A A' / p + 0.5 I`.
pub fn random_spd(rng: &mut ChaCha8Rng, p: usize) -> SymMatrix {
    let a: Vec<f64> = (0..p * p).map(|_| rng.sample(StandardNormal)).collect();
    SymMatrix::from_fn(p, |i, j| {
        let dot: f64 = (0..p).map(|k| a[i * p + k] * a[j * p + k]).sum();
        dot / p as f64 + if i == j { 0.5 } else { 0.0 }
    })
}

/// Components by boolean transitive closure (Warshall), blocks ordered by
/// smallest member with members ascending.
pub fn closure_blocks(p: usize, adjacent: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut reach = vec![vec![false; p]; p];
    for i in 0..p {
        reach[i][i] = true;
        for j in 0..p {
            if i != j && adjacent(i, j) {
                reach[i][j] = true;
            }
        }
    }
    for k in 0..p {
        for i in 0..p {
            if reach[i][k] {
                for j in 0..p {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut seen = vec![false; p];
    let mut blocks = Vec::new();
    for i in 0..p {
        if !seen[i] {
            let b: Vec<usize> = (0..p).filter(|&j| reach[i][j]).collect();
            for &j in &b {
                seen[j] = true;
            }
            blocks.push(b);
        }
    }
    blocks
}

pub fn threshold_blocks(s: &SymMatrix, lambda: f64) -> Vec<Vec<usize>> {
    closure_blocks(s.dim(), |i, j| s.get(i, j).abs() > lambda)
}

pub fn max_abs_offdiag(s: &SymMatrix) -> f64 {
    let p = s.dim();
    let mut m: f64 = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                m = m.max(s.get(i, j).abs());
            }
        }
    }
    m
}

/// Sorted distinct `|S_ij|`, computed naively.
pub fn naive_critical(s: &SymMatrix) -> Vec<f64> {
    let p = s.dim();
    let mut v = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            let a = s.get(i, j).abs();
            if !v.contains(&a) {
                v.push(a);
            }
        }
    }
    v.sort_by(f64::total_cmp);
    v
}

/// `count` penalties strictly inside `(0, max|S_ij|)` that avoid every
/// critical value: midpoints of consecutive distinct values, spread evenly.
pub fn offgrid_lambdas(s: &SymMatrix, count: usize) -> Vec<f64> {
    let mut crit = vec![0.0];
    crit.extend(naive_critical(s).into_iter().filter(|&c| c > 0.0));
    let mids: Vec<f64> = crit.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    if mids.len() <= count {
        return mids;
    }
    let step = (mids.len() - 1) as f64 / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|k| mids[(k as f64 * step).round() as usize]).collect();
    out.dedup();
    out
}

/// High-iteration proximal gradient reference for
/// `min_u 1/2 u'Au + t u's + lambda t |u|_1`.
pub fn ista_reference(a: &SymMatrix, s: &[f64], t: f64, lambda: f64, iters: usize) -> Vec<f64> {
    let d = a.dim();
    // Frobenius norm bounds the largest eigenvalue
    let lip = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| a.get(i, j).powi(2)).sum::<f64>().sqrt();
    let step = 1.0 / lip;
    let mut u = vec![0.0; d];
    let mut y = u.clone();
    let mut tk = 1.0f64;
    for _ in 0..iters {
        let grad: Vec<f64> = (0..d).map(|i| (0..d).map(|j| a.get(i, j) * y[j]).sum::<f64>() + t * s[i]).collect();
        let next: Vec<f64> = (0..d)
            .map(|i| {
                let z = y[i] - step * grad[i];
                z.signum() * (z.abs() - step * lambda * t).max(0.0)
            })
            .collect();
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * tk * tk).sqrt());
        y = (0..d).map(|i| next[i] + (tk - 1.0) / tn * (next[i] - u[i])).collect();
        u = next;
        tk = tn;
    }
    u
}

pub fn to_nalgebra(m: &SymMatrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(m.dim(), m.dim(), |i, j| m.get(i, j))
}

/// The penalized objective evaluated through an eigendecomposition.
pub fn eigen_objective(s: &SymMatrix, theta: &SymMatrix, lambda: f64) -> f64 {
    let t = to_nalgebra(theta);
    let eig = nalgebra::SymmetricEigen::new(t.clone());
    let log_det: f64 = eig.eigenvalues.iter().map(|v| v.ln()).sum();
    let tr = (to_nalgebra(s) * &t).trace();
    let l1: f64 = t.iter().map(|v| v.abs()).sum();
    -log_det + tr + lambda * l1
}
