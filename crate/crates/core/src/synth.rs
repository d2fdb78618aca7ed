//! Block-diagonal benchmark instances: `S = blkdiag(1, ..., 1) + sigma U U'`
//! with `U` standard normal and `sigma` calibrated so that 1.25 times the
//! largest off-block noise entry equals one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::compgraph::{critical_lambdas, partition_equal, threshold_partition, UnionFind, VertexPartition};
use crate::covmodel::SymMatrix;
use crate::error::{Error, Result};

/// Ratio between the smallest planted entry (one) and the noise ceiling.
pub const CALIBRATION_RATIO: f64 = 1.25;

const MAX_ATTEMPTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SynthSpec {
    /// Number of planted blocks.
    pub k: usize,
    /// Size of every block.
    pub p1: usize,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(k: usize, p1: usize, seed: u64) -> Result<Self> {
        let spec = Self { k, p1, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.p1 == 0 {
            return Err(Error::input("block count and block size must be at least 1"));
        }
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.k * self.p1
    }

    fn block_of(&self, v: usize) -> usize {
        v / self.p1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthInstance {
    pub spec: SynthSpec,
    /// Seed actually used (the requested seed plus the number of rejected draws).
    pub seed_used: u64,
    pub s: SymMatrix,
    pub sigma: f64,
    /// Largest `|sigma (U U')_ij|` over the calibration set (off-block pairs,
    /// or all off-diagonal pairs when there is a single block).
    pub max_offblock_noise: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_i: f64,
    pub lambda_ii: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SynthSidecar {
    pub sigma: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    #[serde(rename = "lambda_I")]
    pub lambda_i: f64,
    #[serde(rename = "lambda_II")]
    pub lambda_ii: f64,
    pub k: usize,
    pub p1: usize,
    pub p: usize,
    pub seed: u64,
    pub seed_used: u64,
}

impl From<&SynthInstance> for SynthSidecar {
    fn from(inst: &SynthInstance) -> Self {
        Self {
            sigma: inst.sigma,
            lambda_min: inst.lambda_min,
            lambda_max: inst.lambda_max,
            lambda_i: inst.lambda_i,
            lambda_ii: inst.lambda_ii,
            k: inst.spec.k,
            p1: inst.spec.p1,
            p: inst.spec.p(),
            seed: inst.spec.seed,
            seed_used: inst.seed_used,
        }
    }
}

/// `K` consecutive blocks of `p1` nodes.
pub fn planted_partition(spec: &SynthSpec) -> VertexPartition {
    let blocks = (0..spec.k).map(|b| (b * spec.p1..(b + 1) * spec.p1).collect()).collect();
    VertexPartition::from_blocks(spec.p(), blocks).expect("consecutive blocks form a partition")
}

/// Gram matrix `U U'` of a `p x p` standard normal draw.
fn noise_gram(p: usize, seed: u64) -> SymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..p * p).map(|_| StandardNormal.sample(&mut rng)).collect();
    SymMatrix::from_fn(p, |i, j| u[i * p..(i + 1) * p].iter().zip(&u[j * p..(j + 1) * p]).map(|(a, b)| a * b).sum())
}

/// Largest lambda at which the block is still connected is just below the
/// weakest edge of its maximum spanning tree; returns that edge weight.
fn bottleneck(s: &SymMatrix, nodes: &[usize]) -> f64 {
    if nodes.len() < 2 {
        return f64::INFINITY;
    }
    let mut edges = Vec::new();
    for (a, &i) in nodes.iter().enumerate() {
        for (b, &j) in nodes.iter().enumerate().skip(a + 1) {
            edges.push((s.get(i, j).abs(), a, b));
        }
    }
    edges.sort_unstable_by(|x, y| y.0.total_cmp(&x.0));
    let mut uf = UnionFind::new(nodes.len());
    let mut merged = 1;
    for (wt, a, b) in edges {
        if wt <= 0.0 {
            break;
        }
        if uf.find(a) != uf.find(b) {
            uf.union(a, b);
            merged += 1;
            if merged == nodes.len() {
                return wt;
            }
        }
    }
    0.0
}

fn try_generate(spec: SynthSpec, seed: u64) -> std::result::Result<SynthInstance, String> {
    let p = spec.p();
    let gram = noise_gram(p, seed);
    let calibrate_on = |i: usize, j: usize| spec.k == 1 || spec.block_of(i) != spec.block_of(j);
    let mut max_noise = 0.0_f64;
    for i in 0..p {
        for j in (i + 1)..p {
            if calibrate_on(i, j) {
                max_noise = max_noise.max(gram.get(i, j).abs());
            }
        }
    }
    let sigma = if p == 1 {
        0.0
    } else if max_noise > 0.0 {
        1.0 / (CALIBRATION_RATIO * max_noise)
    } else {
        return Err("noise draw has no nonzero calibration entry".into());
    };
    let s = SymMatrix::from_fn(p, |i, j| {
        let planted = if spec.block_of(i) == spec.block_of(j) { 1.0 } else { 0.0 };
        planted + sigma * gram.get(i, j)
    });
    let mut max_offblock_noise = 0.0_f64;
    let mut max_cross = 0.0_f64;
    for i in 0..p {
        for j in (i + 1)..p {
            if calibrate_on(i, j) {
                max_offblock_noise = max_offblock_noise.max((sigma * gram.get(i, j)).abs());
            }
            if spec.block_of(i) != spec.block_of(j) {
                max_cross = max_cross.max(s.get(i, j).abs());
            }
        }
    }

    // Planted partition holds exactly for max_cross <= lambda < min bottleneck.
    let planted = planted_partition(&spec);
    let upper = planted.blocks().iter().map(|b| bottleneck(&s, b)).fold(f64::INFINITY, f64::min);
    let mut candidates = critical_lambdas_with_zero(&s);
    candidates.retain(|&c| c >= max_cross && c < upper);
    let (lambda_min, lambda_max) = match (candidates.first(), candidates.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(format!("no lambda isolates the planted blocks (cross {max_cross}, connectivity {upper})")),
    };
    let lambda_i = 0.5 * (lambda_min + lambda_max);
    for l in [lambda_min, lambda_i, lambda_max] {
        if !partition_equal(&threshold_partition(&s, l), &planted).unwrap_or(false) {
            return Err(format!("planted partition not recovered at lambda {l}"));
        }
    }
    Ok(SynthInstance {
        spec,
        seed_used: seed,
        s,
        sigma,
        max_offblock_noise,
        lambda_min,
        lambda_max,
        lambda_i,
        lambda_ii: lambda_max,
    })
}

fn critical_lambdas_with_zero(s: &SymMatrix) -> Vec<f64> {
    let mut c = if s.dim() >= 2 { critical_lambdas(s) } else { Vec::new() };
    if c.first() != Some(&0.0) {
        c.insert(0, 0.0);
    }
    c
}

/// Draws an instance; rejected draws move on to the next seed, up to ten attempts.
pub fn generate(spec: SynthSpec) -> Result<SynthInstance> {
    spec.validate()?;
    let mut last = String::new();
    for attempt in 0..MAX_ATTEMPTS as u64 {
        match try_generate(spec, spec.seed.wrapping_add(attempt)) {
            Ok(inst) => return Ok(inst),
            Err(reason) => {
                log::warn!("synthetic draw with seed {} rejected: {reason}", spec.seed.wrapping_add(attempt));
                last = reason;
            }
        }
    }
    Err(Error::Degenerate { attempts: MAX_ATTEMPTS, reason: last })
}
