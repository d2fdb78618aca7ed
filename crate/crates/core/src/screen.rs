//! Component-wise graphical lasso.
//!
//! The vertex partition of the thresholded graph `|S_ij| > lambda` equals the
//! partition of the estimated concentration graph, so each component is
//! solved on its own principal submatrix and the results are embedded
//! block-diagonally. Off-block entries satisfy `|S_ij| <= lambda`, which is
//! exactly the stationarity condition for `Theta_ij = W_ij = 0`.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::compgraph::{lambda_for_max_component, partition_refines, threshold_partition, VertexPartition};
use crate::covmodel::{SolverConfig, SymMatrix};
use crate::error::{Error, Result};
use crate::glasso::{self, check_inputs, kkt_residuals, GlassoSolution, KktReport};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Timings {
    pub partition: Duration,
    /// Wall time of the (possibly parallel) block-solve phase.
    pub solve: Duration,
    pub per_block: Vec<Duration>,
    pub assembly: Duration,
}

impl Timings {
    pub fn total(&self) -> Duration {
        self.partition + self.solve + self.assembly
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScreenedSolution {
    pub partition: VertexPartition,
    /// One per block, in canonical block order.
    pub block_solutions: Vec<GlassoSolution>,
    pub assembled_theta: SymMatrix,
    pub assembled_w: SymMatrix,
    pub lambda: f64,
    /// Sum of block objectives, equal to the global objective of the assembly.
    pub objective: f64,
    pub converged: bool,
    /// Indices (into `partition.blocks()`) of blocks that did not converge.
    pub failed_blocks: Vec<usize>,
    /// KKT residuals of the assembled solution against the full `S`.
    pub global_kkt: KktReport,
    pub timings: Timings,
}

/// Per-lambda summary emitted by the CLI.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaReport {
    pub lambda: f64,
    pub num_components: usize,
    pub max_component: usize,
    pub objective: f64,
    pub converged: bool,
    pub kkt_passed: bool,
    pub time_partition_ms: f64,
    pub time_solve_ms: f64,
}

impl From<&ScreenedSolution> for LambdaReport {
    fn from(s: &ScreenedSolution) -> Self {
        Self {
            lambda: s.lambda,
            num_components: s.partition.num_blocks(),
            max_component: s.partition.max_block_size(),
            objective: s.objective,
            converged: s.converged,
            kkt_passed: s.global_kkt.passed,
            time_partition_ms: s.timings.partition.as_secs_f64() * 1e3,
            time_solve_ms: s.timings.solve.as_secs_f64() * 1e3,
        }
    }
}

#[derive(Debug)]
pub struct PathResult {
    /// Descending.
    pub lambdas: Vec<f64>,
    /// Thresholded partitions, one per lambda.
    pub partitions: Vec<VertexPartition>,
    pub solutions: Vec<Result<ScreenedSolution>>,
    pub partitions_nested: bool,
}

/// Principal submatrix on `block` (ascending node order).
pub fn extract_block(s: &SymMatrix, block: &[usize]) -> Result<SymMatrix> {
    if block.is_empty() {
        return Err(Error::input("empty block"));
    }
    if let Some(&bad) = block.iter().find(|&&v| v >= s.dim()) {
        return Err(Error::input(format!("node {} out of range for p = {}", bad + 1, s.dim())));
    }
    let mut idx = block.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if idx.len() != block.len() {
        return Err(Error::input("block lists a node twice"));
    }
    Ok(s.principal_submatrix(&idx))
}

/// Writes `sub` into the rows/columns `block` of `target`.
pub fn embed_block(target: &mut SymMatrix, block: &[usize], sub: &SymMatrix) {
    assert_eq!(block.len(), sub.dim());
    let p = target.dim();
    let vals = target.values_mut();
    for (a, &i) in block.iter().enumerate() {
        for (b, &j) in block.iter().enumerate() {
            vals[i * p + j] = sub.get(a, b);
        }
    }
}

/// Block-diagonal `(Theta, W)` from per-block solutions; off-block entries are exactly zero.
pub fn assemble(partition: &VertexPartition, blocks: &[GlassoSolution], p: usize) -> Result<(SymMatrix, SymMatrix)> {
    if partition.p() != p {
        return Err(Error::DimensionMismatch { expected: p, got: partition.p() });
    }
    if blocks.len() != partition.num_blocks() {
        return Err(Error::DimensionMismatch { expected: partition.num_blocks(), got: blocks.len() });
    }
    let mut theta = SymMatrix::zeros(p);
    let mut w = SymMatrix::zeros(p);
    for (nodes, sol) in partition.blocks().iter().zip(blocks) {
        if sol.dim() != nodes.len() {
            return Err(Error::DimensionMismatch { expected: nodes.len(), got: sol.dim() });
        }
        embed_block(&mut theta, nodes, &sol.theta);
        embed_block(&mut w, nodes, &sol.w);
    }
    Ok((theta, w))
}

fn solve_component(
    sub: &SymMatrix,
    lambda: f64,
    cfg: &SolverConfig,
    warm: Option<&GlassoSolution>,
) -> Result<GlassoSolution> {
    match sub.dim() {
        1 => glasso::solve_scalar(sub.get(0, 0), lambda),
        2 => match glasso::solve_pair(sub, lambda, cfg) {
            Ok(sol) if sol.converged => Ok(sol),
            _ => glasso::solve_block(sub, lambda, cfg, warm),
        },
        _ => glasso::solve_block(sub, lambda, cfg, warm),
    }
}

fn restrict_warm(warm: &ScreenedSolution, block: &[usize]) -> GlassoSolution {
    GlassoSolution {
        theta: warm.assembled_theta.principal_submatrix(block),
        w: warm.assembled_w.principal_submatrix(block),
        lambda: warm.lambda,
        objective: f64::NAN,
        iterations: 0,
        converged: false,
        max_kkt_residual: f64::NAN,
        dual_trace: Vec::new(),
    }
}

/// Threshold, split into components, solve each independently and assemble.
pub fn screen_solve(
    s: &SymMatrix,
    lambda: f64,
    cfg: &SolverConfig,
    warm: Option<&ScreenedSolution>,
) -> Result<ScreenedSolution> {
    check_inputs(s, lambda, cfg)?;
    let p = s.dim();
    let warm = warm.filter(|w| w.assembled_w.dim() == p);

    let start = Instant::now();
    let partition = threshold_partition(s, lambda);
    let t_partition = start.elapsed();

    let start = Instant::now();
    let solved: Vec<(Result<GlassoSolution>, Duration)> = partition
        .blocks()
        .par_iter()
        .map(|nodes| {
            let t = Instant::now();
            let res = extract_block(s, nodes).and_then(|sub| {
                let w = warm.map(|ws| restrict_warm(ws, nodes));
                solve_component(&sub, lambda, cfg, w.as_ref())
            });
            (res, t.elapsed())
        })
        .collect();
    let t_solve = start.elapsed();

    let mut block_solutions = Vec::with_capacity(solved.len());
    let mut per_block = Vec::with_capacity(solved.len());
    for (res, dt) in solved {
        block_solutions.push(res?);
        per_block.push(dt);
    }

    let start = Instant::now();
    let (assembled_theta, assembled_w) = assemble(&partition, &block_solutions, p)?;
    let t_assembly = start.elapsed();

    let failed_blocks: Vec<usize> =
        block_solutions.iter().enumerate().filter(|(_, b)| !b.converged).map(|(i, _)| i).collect();
    let objective = block_solutions.iter().map(|b| b.objective).sum();
    let global_kkt = kkt_residuals(s, &assembled_theta, &assembled_w, lambda, cfg);

    Ok(ScreenedSolution {
        partition,
        block_solutions,
        assembled_theta,
        assembled_w,
        lambda,
        objective,
        converged: failed_blocks.is_empty(),
        failed_blocks,
        global_kkt,
        timings: Timings { partition: t_partition, solve: t_solve, per_block, assembly: t_assembly },
    })
}

/// Solves from the largest lambda down, warm-starting each merged block from
/// the block-diagonal union of the previous solution.
pub fn path_solve(s: &SymMatrix, lambdas: &[f64], cfg: &SolverConfig) -> Result<PathResult> {
    if lambdas.is_empty() {
        return Err(Error::input("lambda grid is empty"));
    }
    let mut grid = lambdas.to_vec();
    if let Some(bad) = grid.iter().find(|l| !l.is_finite() || **l < 0.0) {
        return Err(Error::input(format!("invalid lambda {bad}")));
    }
    grid.sort_unstable_by(|a, b| b.total_cmp(a));
    grid.dedup();

    let mut partitions = Vec::with_capacity(grid.len());
    let mut solutions: Vec<Result<ScreenedSolution>> = Vec::with_capacity(grid.len());
    let mut last_ok: Option<usize> = None;
    for &lambda in &grid {
        let warm = last_ok.and_then(|i| solutions[i].as_ref().ok());
        let res = screen_solve(s, lambda, cfg, warm);
        let part = match &res {
            Ok(sol) => sol.partition.clone(),
            Err(_) => threshold_partition(s, lambda),
        };
        partitions.push(part);
        if res.is_ok() {
            last_ok = Some(solutions.len());
        }
        solutions.push(res);
    }
    let mut nested = true;
    for pair in partitions.windows(2) {
        nested &= partition_refines(&pair[0], &pair[1])?;
    }
    Ok(PathResult { lambdas: grid, partitions, solutions, partitions_nested: nested })
}

/// Smallest lambda whose thresholded components all have at most `p_max` nodes.
pub fn size_guarded_lambda(s: &SymMatrix, p_max: usize) -> Result<f64> {
    lambda_for_max_component(s, p_max)
}
