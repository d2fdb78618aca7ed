//! Sparse inverse covariance estimation (graphical lasso) with exact
//! covariance-thresholding decomposition.
//!
//! The connected components of the graph `|S_ij| > lambda` induce exactly the
//! vertex partition of the estimated concentration graph, so the problem
//! splits into independent per-component solves whose block-diagonal
//! assembly is the global optimum. This crate provides:
//!
//! * [`covmodel`]: dense symmetric matrices, sample covariance, Cholesky
//!   inversion and the penalized log-likelihood objective;
//! * [`compgraph`]: thresholded graphs, connected components, canonical
//!   vertex partitions and critical penalty values;
//! * [`glasso`]: the block coordinate descent solver and a KKT certificate;
//! * [`screen`]: component-wise solving, assembly and regularization paths;
//! * [`synth`]: the block-diagonal synthetic benchmark generator;
//! * [`io`] and [`cli`]: file formats and the `covthresh` command line.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the matrix notation.
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod compgraph;
pub mod covmodel;
pub mod error;
pub mod glasso;
pub mod io;
pub mod screen;
pub mod synth;

pub use compgraph::{ComponentProfile, EdgeSet, VertexPartition};
pub use covmodel::{DataMatrix, SolverConfig, SymMatrix};
pub use error::{Error, Result};
pub use glasso::{GlassoSolution, KktReport};
pub use screen::{PathResult, ScreenedSolution};
pub use synth::{SynthInstance, SynthSpec};
