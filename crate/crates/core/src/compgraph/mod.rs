//! Thresholded covariance graphs and their connected components.
//!
//! Node ids are 0-based in the Rust API; reports and files use 1-based ids.

mod partition;
mod union_find;

pub use partition::{partition_equal, partition_refines, EdgeSet, VertexPartition};
pub use union_find::UnionFind;

use serde::Serialize;

use crate::covmodel::SymMatrix;
use crate::error::{Error, Result};

/// Component sizes of the thresholded graph over a grid of penalties.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentProfile {
    pub lambdas: Vec<f64>,
    /// One entry per lambda, sizes sorted descending.
    pub sizes: Vec<Vec<usize>>,
}

/// Edges `(i, j)` with `|S_ij| > lambda` (strict), diagonal ignored.
pub fn threshold_graph(s: &SymMatrix, lambda: f64) -> EdgeSet {
    let p = s.dim();
    let mut edges = Vec::new();
    for_each_above(s, lambda, |i, j| edges.push((i, j)));
    EdgeSet::from_sorted_unchecked(p, edges)
}

/// Edges where `|theta_ij| > support_tol`, diagonal ignored.
pub fn support_graph(theta: &SymMatrix, support_tol: f64) -> EdgeSet {
    threshold_graph(theta, support_tol)
}

pub fn connected_components(g: &EdgeSet) -> VertexPartition {
    let mut uf = UnionFind::new(g.p());
    for &(i, j) in g.edges() {
        uf.union(i, j);
    }
    let (labels, k) = uf.labels();
    VertexPartition::from_dense_labels(&labels, k)
}

/// Components of the thresholded graph without materializing its edge list.
pub fn threshold_partition(s: &SymMatrix, lambda: f64) -> VertexPartition {
    let mut uf = UnionFind::new(s.dim());
    for_each_above(s, lambda, |i, j| {
        uf.union(i, j);
    });
    let (labels, k) = uf.labels();
    VertexPartition::from_dense_labels(&labels, k)
}

const CHUNK: usize = 32;

/// Bit `k` set when `|chunk[k]| > lambda`.
#[inline(always)]
fn mask_above(chunk: &[f64], lambda: f64) -> u32 {
    chunk.iter().enumerate().fold(0u32, |m, (k, v)| m | (u32::from(v.abs() > lambda) << k))
}

/// Calls `f(i, j)` for every `i < j` with `|S_ij| > lambda`, in row-major order.
fn for_each_above(s: &SymMatrix, lambda: f64, mut f: impl FnMut(usize, usize)) {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx512f") {
        // SAFETY: the feature was just detected at runtime.
        unsafe { scan_avx512(s, lambda, &mut f) };
        return;
    }
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx2") {
        // SAFETY: the feature was just detected at runtime.
        unsafe { scan_avx2(s, lambda, &mut f) };
        return;
    }
    scan(s, lambda, &mut f);
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn scan_avx2(s: &SymMatrix, lambda: f64, f: &mut dyn FnMut(usize, usize)) {
    scan(s, lambda, f);
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn scan_avx512(s: &SymMatrix, lambda: f64, f: &mut dyn FnMut(usize, usize)) {
    scan(s, lambda, f);
}

#[inline(always)]
fn scan(s: &SymMatrix, lambda: f64, f: &mut dyn FnMut(usize, usize)) {
    let p = s.dim();
    for i in 0..p {
        let tail = &s.row(i)[i + 1..];
        // branch-free mask per chunk; most chunks hold no edge
        for (c, chunk) in tail.chunks(CHUNK).enumerate() {
            let mut mask = mask_above(chunk, lambda);
            let base = i + 1 + c * CHUNK;
            while mask != 0 {
                f(i, base + mask.trailing_zeros() as usize);
                mask &= mask - 1;
            }
        }
    }
}

/// Sorted distinct `|S_ij|`, `i < j`. The thresholded partition is constant
/// on `[c_k, c_{k+1})`.
pub fn critical_lambdas(s: &SymMatrix) -> Vec<f64> {
    let p = s.dim();
    let mut vals: Vec<f64> = Vec::with_capacity(p * (p - 1) / 2);
    for i in 0..p {
        vals.extend(s.row(i)[i + 1..].iter().map(|v| v.abs()));
    }
    vals.sort_unstable_by(f64::total_cmp);
    vals.dedup();
    vals
}

/// Smallest `lambda` in `critical_lambdas(S) ∪ {0}` whose thresholded graph
/// has no component larger than `p_max`.
pub fn lambda_for_max_component(s: &SymMatrix, p_max: usize) -> Result<f64> {
    if p_max == 0 {
        return Err(Error::input("p_max must be at least 1"));
    }
    let p = s.dim();
    let mut entries: Vec<(f64, usize, usize)> = Vec::with_capacity(p * (p - 1) / 2);
    for i in 0..p {
        for j in (i + 1)..p {
            entries.push((s.get(i, j).abs(), i, j));
        }
    }
    if entries.is_empty() {
        return Ok(0.0);
    }
    entries.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));

    // Walk candidates downward. The graph at candidate c holds every edge of
    // weight > c, so the group of weight c joins only once we move below c.
    let mut uf = UnionFind::new(p);
    let mut k = 0;
    while k < entries.len() {
        let c = entries[k].0;
        if c == 0.0 {
            break;
        }
        while k < entries.len() && entries[k].0 == c {
            let (_, i, j) = entries[k];
            uf.union(i, j);
            k += 1;
        }
        if uf.largest() > p_max {
            return Ok(c);
        }
    }
    Ok(0.0)
}

/// Nodes with `|S_ij| <= lambda` for every `j != i`, ascending.
pub fn node_screen(s: &SymMatrix, lambda: f64) -> Vec<usize> {
    let p = s.dim();
    (0..p).filter(|&i| s.row(i).iter().enumerate().all(|(j, v)| j == i || v.abs() <= lambda)).collect()
}

pub fn component_profile(s: &SymMatrix, lambdas: &[f64]) -> Result<ComponentProfile> {
    if lambdas.is_empty() {
        return Err(Error::input("lambda grid is empty"));
    }
    if let Some(bad) = lambdas.iter().find(|l| !l.is_finite() || **l < 0.0) {
        return Err(Error::input(format!("invalid lambda {bad}")));
    }
    let mut grid = lambdas.to_vec();
    grid.sort_unstable_by(f64::total_cmp);
    grid.dedup();
    let sizes = grid
        .iter()
        .map(|&l| {
            let mut sz = threshold_partition(s, l).sizes();
            sz.sort_unstable_by(|a, b| b.cmp(a));
            sz
        })
        .collect();
    Ok(ComponentProfile { lambdas: grid, sizes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> SymMatrix {
        SymMatrix::from_rows(&[vec![1.0, 0.5, 0.1], vec![0.5, 1.0, 0.2], vec![0.1, 0.2, 1.0]]).unwrap()
    }

    fn blocks(p: &VertexPartition) -> Vec<Vec<usize>> {
        p.blocks().to_vec()
    }

    #[test]
    fn threshold_is_strict() {
        assert_eq!(threshold_graph(&s3(), 0.3).edges(), &[(0, 1)]);
        assert_eq!(threshold_graph(&s3(), 0.2).edges(), &[(0, 1)]);
        assert!(threshold_graph(&s3(), 0.5).is_empty());
        assert!(threshold_graph(&s3(), 7.0).is_empty());
    }

    #[test]
    fn support_graph_ignores_numeric_dust() {
        assert!(support_graph(&SymMatrix::identity(3), 1e-8).is_empty());
        let mut t = SymMatrix::identity(3);
        t.set(0, 1, 1e-12);
        assert!(support_graph(&t, 1e-8).is_empty());
        t.set(0, 1, -1e-3);
        assert_eq!(support_graph(&t, 1e-8).edges(), &[(0, 1)]);
    }

    #[test]
    fn components_small_cases() {
        let g = EdgeSet::new(4, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(blocks(&connected_components(&g)), vec![vec![0, 1, 2], vec![3]]);
        let g = EdgeSet::new(3, []).unwrap();
        assert_eq!(blocks(&connected_components(&g)), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn refinement_across_lambdas_on_example() {
        let fine = threshold_partition(&s3(), 0.25);
        let coarse = threshold_partition(&s3(), 0.15);
        assert_eq!(blocks(&fine), vec![vec![0, 1], vec![2]]);
        assert_eq!(blocks(&coarse), vec![vec![0, 1, 2]]);
        assert!(partition_refines(&fine, &coarse).unwrap());
        assert!(!partition_refines(&coarse, &fine).unwrap());
    }

    #[test]
    fn critical_values() {
        assert_eq!(critical_lambdas(&s3()), vec![0.1, 0.2, 0.5]);
        let s = SymMatrix::from_fn(4, |i, j| if i == j { 1.0 } else { -0.4 });
        assert_eq!(critical_lambdas(&s), vec![0.4]);
    }

    #[test]
    fn lambda_for_max_component_examples() {
        assert_eq!(lambda_for_max_component(&s3(), 2).unwrap(), 0.2);
        assert_eq!(lambda_for_max_component(&s3(), 3).unwrap(), 0.0);
        assert_eq!(lambda_for_max_component(&s3(), 10).unwrap(), 0.0);
        assert_eq!(lambda_for_max_component(&s3(), 1).unwrap(), 0.5);
        assert!(lambda_for_max_component(&s3(), 0).is_err());
        assert_eq!(lambda_for_max_component(&SymMatrix::identity(1), 1).unwrap(), 0.0);
    }

    #[test]
    fn lambda_for_max_component_with_zero_entries() {
        // block-diagonal: zero off-block entries never form edges
        let s = SymMatrix::from_rows(&[vec![1.0, 0.3, 0.0], vec![0.3, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(lambda_for_max_component(&s, 2).unwrap(), 0.0);
        assert_eq!(lambda_for_max_component(&s, 1).unwrap(), 0.3);
    }

    #[test]
    fn node_screen_examples() {
        assert_eq!(node_screen(&s3(), 0.3), vec![2]);
        assert_eq!(node_screen(&s3(), 0.5), vec![0, 1, 2]);
        assert_eq!(node_screen(&s3(), 0.05), Vec::<usize>::new());
    }

    #[test]
    fn profile_example() {
        let prof = component_profile(&s3(), &[0.6, 0.15, 0.3]).unwrap();
        assert_eq!(prof.lambdas, vec![0.15, 0.3, 0.6]);
        assert_eq!(prof.sizes, vec![vec![3], vec![2, 1], vec![1, 1, 1]]);
        let single = component_profile(&s3(), &[9.0]).unwrap();
        assert_eq!(single.sizes, vec![vec![1, 1, 1]]);
        assert!(component_profile(&s3(), &[]).is_err());
    }
}
