//! Subspace and block coherences, and TT core coherences of a tensor.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::{orthogonalize, tt_svd, DenseTensor, Truncation, TtCore, DEFAULT_RANK_TOL};

/// Largest accepted deviation of `Q^T Q` from the identity for basis inputs.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

/// Unitarily invariant norm used to measure blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormSelector {
    #[default]
    Frobenius,
    Spectral,
}

impl NormSelector {
    fn of(self, m: &DMatrix<f64>) -> Result<f64> {
        match self {
            NormSelector::Frobenius => Ok(m.norm()),
            NormSelector::Spectral => linalg::spectral_norm(m),
        }
    }
}

/// `(m/q) max_i ‖Q(i, :)‖²` for an `m x q` matrix with orthonormal columns.
pub fn subspace_coherence(basis: &DMatrix<f64>) -> Result<f64> {
    block_coherence(basis, 1, NormSelector::Frobenius)
}

/// `(m/q) max_i ‖Q(block i, :)‖²` over the `m/p` blocks of `p` consecutive rows.
pub fn block_coherence(basis: &DMatrix<f64>, p: usize, norm: NormSelector) -> Result<f64> {
    let (m, q) = basis.shape();
    if q == 0 || m == 0 {
        return Err(Error::InvalidArgument("basis of an empty subspace".into()));
    }
    if p == 0 || m % p != 0 {
        return Err(Error::InvalidArgument(format!(
            "block size {p} does not divide dimension {m}"
        )));
    }
    let defect = linalg::orthonormality_defect(basis);
    if !(defect <= ORTHONORMALITY_TOL) {
        return Err(Error::InvalidArgument(format!(
            "basis columns are not orthonormal (defect {defect:.3e})"
        )));
    }
    let mut worst = 0.0f64;
    for b in 0..m / p {
        let block = basis.rows(b * p, p).into_owned();
        worst = worst.max(norm.of(&block)?.powi(2));
    }
    Ok(m as f64 / q as f64 * worst)
}

/// Block coherence of `col(G^<)` with blocks of size `r_{s-1}`.
pub fn left_core_coherence(core: &TtCore, norm: NormSelector) -> Result<f64> {
    let basis = linalg::column_basis(&core.left_unfolding(), DEFAULT_RANK_TOL)?;
    block_coherence(&basis, core.left_rank(), norm)
}

/// Block coherence of `row(G^>)` with blocks of size `r_s`.
pub fn right_core_coherence(core: &TtCore, norm: NormSelector) -> Result<f64> {
    let basis = linalg::column_basis(&core.right_unfolding().transpose(), DEFAULT_RANK_TOL)?;
    block_coherence(&basis, core.right_rank(), norm)
}

/// Left/right TT core coherences, unfolding spectral norms and TT ranks.
///
/// `left[s]` belongs to core `s` (`s = 0..d-2`), `right[s]` to core `s + 1`
/// (`s = 0..d-2`), and `unfolding_spectral[t - 1]` is `‖A^{<t>}‖_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceProfile {
    pub dims: Vec<usize>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub unfolding_spectral: Vec<f64>,
    pub ranks: Vec<usize>,
}

pub fn tt_core_coherences(a: &DenseTensor) -> Result<CoherenceProfile> {
    tt_core_coherences_with(a, NormSelector::Frobenius)
}

/// Coherences from the minimal left-orthogonal factorization (TT-SVD) and the
/// minimal right-orthogonal one obtained from it by an LQ sweep.
pub fn tt_core_coherences_with(a: &DenseTensor, norm: NormSelector) -> Result<CoherenceProfile> {
    if a.is_zero() {
        return Err(Error::InvalidArgument("coherences of the zero tensor are undefined".into()));
    }
    let d = a.order();
    let left_orth = tt_svd(a, &Truncation::tolerance(DEFAULT_RANK_TOL))?;
    let right_orth = orthogonalize(&left_orth, 0)?;
    let left = left_orth.cores()[..d - 1]
        .iter()
        .map(|g| left_core_coherence(g, norm))
        .collect::<Result<Vec<_>>>()?;
    let right = right_orth.cores()[1..]
        .iter()
        .map(|g| right_core_coherence(g, norm))
        .collect::<Result<Vec<_>>>()?;
    let unfolding_spectral = (1..d)
        .map(|t| linalg::spectral_norm(&a.unfold(t)?.matrix))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoherenceProfile {
        dims: a.dims().to_vec(),
        left,
        right,
        unfolding_spectral,
        ranks: left_orth.ranks(),
    })
}

/// Per-core bounds on `‖T_s‖_{u,∞}` for a minimal factorization with pivot
/// core `pivot` (0-based). Off-pivot entries are exact values.
pub fn gamma_bound_terms(profile: &CoherenceProfile, pivot: usize) -> Result<Vec<f64>> {
    let d = profile.dims.len();
    if pivot >= d {
        return Err(Error::InvalidArgument(format!(
            "pivot core {pivot} out of range for order {d}"
        )));
    }
    // full rank vector r_0 = 1, .., r_d = 1
    let r: Vec<f64> = std::iter::once(1)
        .chain(profile.ranks.iter().copied())
        .chain(std::iter::once(1))
        .map(|x| x as f64)
        .collect();
    let n: Vec<f64> = profile.dims.iter().map(|&x| x as f64).collect();
    let left_form = |s: usize| (r[s + 1] / (n[s] * r[s]) * profile.left[s]).sqrt();
    let right_form = |s: usize| (r[s] / (n[s] * r[s + 1]) * profile.right[s - 1]).sqrt();
    Ok((0..d)
        .map(|s| {
            if s < pivot {
                left_form(s)
            } else if s > pivot {
                right_form(s)
            } else {
                let mut best = f64::INFINITY;
                if s < d - 1 {
                    best = best.min(profile.unfolding_spectral[s] * left_form(s));
                }
                if s > 0 {
                    best = best.min(profile.unfolding_spectral[s - 1] * right_form(s));
                }
                best
            }
        })
        .collect())
}

/// Upper bound on `∏_s ‖T_s‖_{F,∞}` for any minimal factorization of `a`
/// with pivot core `pivot` (0-based).
pub fn gamma_bound_via_coherence(a: &DenseTensor, pivot: usize) -> Result<f64> {
    let profile = tt_core_coherences(a)?;
    Ok(gamma_bound_terms(&profile, pivot)?.iter().product())
}
