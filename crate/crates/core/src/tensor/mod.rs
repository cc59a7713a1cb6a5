//! Dense and tensor-train representations.

pub mod decomp;
pub mod dense;
pub mod io;
pub mod tt;

pub use decomp::{
    is_minimal, left_orthogonality_defect, max_norm_error, orthogonalize,
    right_orthogonality_defect, tt_rank_of_dense, tt_round, tt_round_with, tt_svd,
    tt_svd_with_report, RankCap, Truncation, TtSvdReport, DEFAULT_RANK_TOL,
};
pub use dense::{DenseTensor, MultiIndexIter, Shape, UnfoldingMatrix, MAX_DENSE_ENTRIES};
pub use tt::{TtCore, TtTensor};
