//! Tensor-train approximation in the entrywise maximum norm.
//!
//! The crate is organised bottom-up:
//!
//! - [`tensor`]: dense and TT representations, unfoldings, TT-SVD, rounding
//!   and t-orthogonalization.
//! - [`index`]: partial indices, partial arrays, traces, partition norms and
//!   the quadratic forms behind randomized TT compression.
//! - [`norms`], [`coherence`], [`bounds`]: factorization quasinorm upper
//!   bounds, TT core coherences and rank/error bound formulas.
//! - [`sketch`]: randomized TT compression with sub-Gaussian sketches.
//! - [`altproj`]: alternating projections with a bisection over the error
//!   level.
//! - [`generators`], [`experiment`], [`plot`], [`verify`]: instance
//!   generators, the experiment grid harness and property checks.
//! - [`seed`], [`config`]: seed derivation and `key = value` configuration.

pub mod altproj;
pub mod bounds;
pub mod coherence;
pub mod config;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod index;
pub mod linalg;
pub mod norms;
pub mod plot;
pub mod seed;
pub mod sketch;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use tensor::{
    max_norm_error, orthogonalize, tt_rank_of_dense, tt_round, tt_svd, DenseTensor, RankCap,
    Shape, Truncation, TtCore, TtTensor, UnfoldingMatrix,
};

pub use altproj::{binary_search_epsilon, APConfig, ApproxReport};
pub use generators::{identity_tensor, uniform_tensor, GeneratorKind, GeneratorSpec};
pub use sketch::{SketchConfig, SketchDistribution};

pub use nalgebra::DMatrix;
