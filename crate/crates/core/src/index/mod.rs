//! Partial indices over subsets of dimensions, partial arrays, traces,
//! partition norms and the structured arrays of sketched TT chains.
//!
//! Dimensions are 0-based: an ambient set of size `N` is `{0, .., N-1}` and
//! the doubled set `Ω ⊕ Ω` lives in `{0, .., 2N-1}`. Index values are 0-based
//! as well, so the product index is `i + α k`.

mod array;
mod chain;
mod partition;
mod subset;

pub use array::{partial_frobenius, partial_trace, PartialArray};
pub use chain::{build_phi, build_psi, chain_product, collapse_chain, eval_quadratic_form};
pub use partition::{
    cauchy_schwarz_check, cell_projections, enumerate_partitions, enumerate_partitions_k,
    pairing_bound, partition_norm, partition_norm_with, theta_weights, Partition,
    PartitionNormOptions, ThetaWeights,
};
pub use subset::{all_indices, doubled_extents, kron_extents, kron_index, DimSubset, PartialIndex};
