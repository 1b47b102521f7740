//! Supernodal sparse Cholesky factorization of symmetric positive definite
//! matrices, with fan-in / fan-out / fan-both task mapping executed on a
//! simulated distributed runtime.

pub mod error;
pub mod kernels;
pub mod mapping;
pub mod matrix;
pub mod ordering;
pub mod pipeline;
pub mod runtime;
pub mod solve;
pub mod symbolic;
pub mod taskgraph;

pub use error::{Error, Result};
pub use mapping::{ComputationMap, MapKind, TaskId, TaskKind};
pub use matrix::{Permutation, SparseSymMatrix};
pub use pipeline::{analyze, factorize, Analysis, FactorOptions, Factorization};
pub use runtime::{Protocol, RunConfig, RunStats, Schedule};
pub use solve::{solve, FactorResult};
