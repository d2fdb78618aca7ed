use serde::Serialize;

use crate::error::{Error, Result};

/// Undirected simple graph on nodes `0..p`; pairs stored as `(i, j)` with `i < j`, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSet {
    p: usize,
    edges: Vec<(usize, usize)>,
}

impl EdgeSet {
    /// Normalizes orientation, sorts and dedups. Self-loops and out-of-range
    /// endpoints are rejected.
    pub fn new(p: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::input(format!("self-loop at node {}", a + 1)));
            }
            if a >= p || b >= p {
                return Err(Error::input(format!("edge ({a}, {b}) out of range for p = {p}")));
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        out.dedup();
        Ok(Self { p, edges: out })
    }

    /// Caller guarantees `i < j < p`, sorted, no duplicates.
    pub(crate) fn from_sorted_unchecked(p: usize, edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        Self { p, edges }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i.min(j), i.max(j))).is_ok()
    }

    pub fn is_subset_of(&self, other: &EdgeSet) -> bool {
        self.edges.iter().all(|&(i, j)| other.contains(i, j))
    }
}

/// Vertex partition of `0..p` in canonical form: blocks ordered by their
/// minimum element, members ascending. Two partitions are equal up to block
/// relabeling iff their canonical forms are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct VertexPartition {
    p: usize,
    blocks: Vec<Vec<usize>>,
}

impl VertexPartition {
    pub fn from_blocks(p: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; p];
        let mut canon = Vec::with_capacity(blocks.len());
        for mut block in blocks {
            if block.is_empty() {
                return Err(Error::input("partition contains an empty block"));
            }
            block.sort_unstable();
            for &v in &block {
                if v >= p {
                    return Err(Error::input(format!("node {v} out of range for p = {p}")));
                }
                if std::mem::replace(&mut seen[v], true) {
                    return Err(Error::input(format!("node {} appears in two blocks", v + 1)));
                }
            }
            canon.push(block);
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::input(format!("node {} not covered by any block", missing + 1)));
        }
        canon.sort_unstable_by_key(|b| b[0]);
        Ok(Self { p, blocks: canon })
    }

    /// `labels[v]` is the block id of node `v`; ids need not be dense or ordered.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap = std::collections::HashMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (v, &l) in labels.iter().enumerate() {
            let idx = *remap.entry(l).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[idx].push(v);
        }
        // first-appearance order is already canonical
        Self { p: labels.len(), blocks }
    }

    /// Labels in `0..k` assigned in order of first appearance (as produced by
    /// [`UnionFind::labels`](super::UnionFind::labels)).
    pub(crate) fn from_dense_labels(labels: &[usize], k: usize) -> Self {
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (v, &l) in labels.iter().enumerate() {
            blocks[l].push(v);
        }
        debug_assert!(blocks.windows(2).all(|w| w[0][0] < w[1][0]));
        Self { p: labels.len(), blocks }
    }

    pub fn singletons_of(p: usize) -> Self {
        Self { p, blocks: (0..p).map(|v| vec![v]).collect() }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn max_block_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Block index of every node.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.p];
        for (b, block) in self.blocks.iter().enumerate() {
            for &v in block {
                labels[v] = b;
            }
        }
        labels
    }

    /// Nodes in blocks of size one, ascending.
    pub fn singletons(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.blocks.iter().filter(|b| b.len() == 1).map(|b| b[0]).collect();
        out.sort_unstable();
        out
    }

    /// Blocks as 1-based node ids, the convention used by every report.
    pub fn one_based(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.iter().map(|v| v + 1).collect()).collect()
    }
}

pub fn partition_equal(a: &VertexPartition, b: &VertexPartition) -> Result<bool> {
    if a.p != b.p {
        return Err(Error::DimensionMismatch { expected: a.p, got: b.p });
    }
    Ok(a.blocks == b.blocks)
}

/// True iff every block of `fine` lies inside a single block of `coarse`.
pub fn partition_refines(fine: &VertexPartition, coarse: &VertexPartition) -> Result<bool> {
    if fine.p != coarse.p {
        return Err(Error::DimensionMismatch { expected: fine.p, got: coarse.p });
    }
    let coarse_label = coarse.labels();
    Ok(fine.blocks.iter().all(|b| b.iter().all(|&v| coarse_label[v] == coarse_label[b[0]])))
}
