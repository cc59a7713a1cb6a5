//! TT-SVD, TT rounding and partial orthogonalization sweeps.

use nalgebra::{DMatrix, DVector};

use super::dense::DenseTensor;
use super::tt::{TtCore, TtTensor};
use crate::error::{Error, Result};
use crate::linalg::{self, Svd};

/// Default relative tolerance for numerical ranks: `sigma_i <= tol * sigma_1` is zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Upper limit on TT ranks, either uniform or one value per split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankCap {
    Uniform(usize),
    PerSplit(Vec<usize>),
}

impl RankCap {
    fn at(&self, split: usize) -> usize {
        match self {
            RankCap::Uniform(r) => *r,
            RankCap::PerSplit(rs) => rs[split],
        }
    }
}

/// How TT-SVD and rounding truncate. When both are set the rank cap wins:
/// the kept rank is `min(cap, #{sigma_i > rel_tol * sigma_1})`, never below 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub max_ranks: Option<RankCap>,
    pub rel_tol: f64,
}

impl Truncation {
    /// No truncation beyond dropping exactly-zero singular values.
    pub fn exact() -> Self {
        Truncation {
            max_ranks: None,
            rel_tol: 0.0,
        }
    }

    pub fn rank(r: usize) -> Self {
        Truncation {
            max_ranks: Some(RankCap::Uniform(r)),
            rel_tol: 0.0,
        }
    }

    pub fn ranks(rs: Vec<usize>) -> Self {
        Truncation {
            max_ranks: Some(RankCap::PerSplit(rs)),
            rel_tol: 0.0,
        }
    }

    pub fn tolerance(rel_tol: f64) -> Self {
        Truncation {
            max_ranks: None,
            rel_tol,
        }
    }

    fn validate(&self, order: usize) -> Result<()> {
        if !(self.rel_tol >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "truncation tolerance must be >= 0, got {}",
                self.rel_tol
            )));
        }
        match &self.max_ranks {
            Some(RankCap::Uniform(0)) => Err(Error::InvalidArgument("rank cap must be >= 1".into())),
            Some(RankCap::PerSplit(rs)) if rs.len() != order - 1 || rs.contains(&0) => {
                Err(Error::InvalidArgument(format!(
                    "per-split rank caps need {} positive entries, got {rs:?}",
                    order - 1
                )))
            }
            _ => Ok(()),
        }
    }

    fn kept_rank(&self, split: usize, s: &[f64]) -> usize {
        let by_tol = match s.first() {
            Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > self.rel_tol * top).count(),
            _ => 0,
        };
        let capped = match &self.max_ranks {
            Some(cap) => by_tol.min(cap.at(split)),
            None => by_tol,
        };
        capped.clamp(1, s.len().max(1))
    }
}

/// Output of [`tt_svd_with_report`]: the factorization plus, for every split,
/// the sum of squared singular values discarded there.
#[derive(Debug, Clone)]
pub struct TtSvdReport {
    pub tt: TtTensor,
    pub discarded_sq: Vec<f64>,
}

impl TtSvdReport {
    /// `sqrt(sum of discarded sigma^2)`, an upper bound on the Frobenius error.
    pub fn error_bound(&self) -> f64 {
        self.discarded_sq.iter().sum::<f64>().sqrt()
    }
}

pub fn tt_svd(a: &DenseTensor, trunc: &Truncation) -> Result<TtTensor> {
    Ok(tt_svd_with_report(a, trunc)?.tt)
}

/// Sequential truncated SVDs, left to right. Cores `1..d-1` of the result are
/// left-orthogonal. The zero tensor maps to rank-one zero cores.
pub fn tt_svd_with_report(a: &DenseTensor, trunc: &Truncation) -> Result<TtSvdReport> {
    let d = a.order();
    trunc.validate(d)?;
    let dims = a.dims().to_vec();
    if a.is_zero() {
        return Ok(TtSvdReport {
            tt: TtTensor::zeros(&dims)?,
            discarded_sq: vec![0.0; d - 1],
        });
    }
    let mut cores = Vec::with_capacity(d);
    let mut discarded_sq = Vec::with_capacity(d - 1);
    // `rest` is r_{s-1} x (n_s ... n_d) with the trailing indices in storage order
    let mut rest = DMatrix::from_row_slice(1, a.values().len(), a.values());
    let mut left_rank = 1;
    for s in 0..d - 1 {
        let n = dims[s];
        let tail = rest.ncols() / n;
        // (left_rank * n) x tail, row a + i * left_rank
        let mut m = DMatrix::zeros(left_rank * n, tail);
        for alpha in 0..left_rank {
            for i in 0..n {
                m.row_mut(alpha + i * left_rank)
                    .copy_from(&rest.view((alpha, i * tail), (1, tail)));
            }
        }
        let f = linalg::svd(&m)?;
        let k = trunc.kept_rank(s, &f.s);
        discarded_sq.push(f.s[k..].iter().map(|x| x * x).sum());
        let Svd { u, s: sv, vt } = f.truncate(k);
        cores.push(TtCore::from_left_unfolding(&u, left_rank, n)?);
        rest = DMatrix::from_diagonal(&DVector::from_vec(sv)) * vt;
        left_rank = k;
    }
    cores.push(TtCore::from_right_unfolding(&rest, dims[d - 1], 1)?);
    Ok(TtSvdReport {
        tt: TtTensor::new(cores)?,
        discarded_sq,
    })
}

/// Right-to-left QR sweep over cores `stop+1..d-1` (0-based) making them
/// right-orthogonal. Ranks may shrink where a core is not minimal.
fn right_sweep(cores: &mut [TtCore], stop: usize) -> Result<()> {
    for s in (stop + 1..cores.len()).rev() {
        let (n, q) = (cores[s].mode_size(), cores[s].right_rank());
        let (qm, r) = linalg::thin_qr(&cores[s].right_unfolding().transpose());
        cores[s] = TtCore::from_right_unfolding(&qm.transpose(), n, q)?;
        cores[s - 1] = cores[s - 1].right_multiply(&r.transpose())?;
    }
    Ok(())
}

/// Left-to-right QR sweep over cores `0..stop` making them left-orthogonal.
fn left_sweep(cores: &mut [TtCore], stop: usize) -> Result<()> {
    for s in 0..stop {
        let (p, n) = (cores[s].left_rank(), cores[s].mode_size());
        let (qm, r) = linalg::thin_qr(&cores[s].left_unfolding());
        cores[s] = TtCore::from_left_unfolding(&qm, p, n)?;
        cores[s + 1] = cores[s + 1].left_multiply(&r)?;
    }
    Ok(())
}

/// Recompresses a TT to ranks at most `max_rank`.
pub fn tt_round(tt: &TtTensor, max_rank: usize) -> Result<TtTensor> {
    tt_round_with(tt, &Truncation::rank(max_rank))
}

/// Right-orthogonalization followed by a left-to-right truncated SVD sweep;
/// in exact arithmetic this equals TT-SVD of the dense tensor.
pub fn tt_round_with(tt: &TtTensor, trunc: &Truncation) -> Result<TtTensor> {
    let d = tt.order();
    trunc.validate(d)?;
    let mut cores = tt.cores().to_vec();
    right_sweep(&mut cores, 0)?;
    for s in 0..d - 1 {
        let (p, n) = (cores[s].left_rank(), cores[s].mode_size());
        let f = linalg::svd(&cores[s].left_unfolding())?;
        let k = trunc.kept_rank(s, &f.s);
        let Svd { u, s: sv, vt } = f.truncate(k);
        cores[s] = TtCore::from_left_unfolding(&u, p, n)?;
        let carry = DMatrix::from_diagonal(&DVector::from_vec(sv)) * vt;
        cores[s + 1] = cores[s + 1].left_multiply(&carry)?;
    }
    TtTensor::new(cores)
}

/// True when every core unfolding `G_s^<` has full column rank and every
/// `G_s^>` full row rank at relative tolerance `tol`.
pub fn is_minimal(tt: &TtTensor, tol: f64) -> Result<bool> {
    Ok(first_rank_deficient_core(tt, tol)?.is_none())
}

fn first_rank_deficient_core(tt: &TtTensor, tol: f64) -> Result<Option<usize>> {
    for (s, core) in tt.cores().iter().enumerate() {
        let left = linalg::singular_values(&core.left_unfolding())?;
        let right = linalg::singular_values(&core.right_unfolding())?;
        if linalg::numerical_rank(&left, tol) < core.right_rank()
            || linalg::numerical_rank(&right, tol) < core.left_rank()
        {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Minimal t-orthogonal factorization: cores before `pivot` (0-based) become
/// left-orthogonal, cores after it right-orthogonal. The input must be minimal.
pub fn orthogonalize(tt: &TtTensor, pivot: usize) -> Result<TtTensor> {
    let d = tt.order();
    if pivot >= d {
        return Err(Error::InvalidArgument(format!(
            "pivot core {pivot} out of range for order {d}"
        )));
    }
    if let Some(core) = first_rank_deficient_core(tt, DEFAULT_RANK_TOL)? {
        return Err(Error::RankDeficient { core });
    }
    let mut cores = tt.cores().to_vec();
    left_sweep(&mut cores, pivot)?;
    right_sweep(&mut cores, pivot)?;
    TtTensor::new(cores)
}

/// Largest deviation of `G^T G` from the identity for the left unfolding.
pub fn left_orthogonality_defect(core: &TtCore) -> f64 {
    linalg::orthonormality_defect(&core.left_unfolding())
}

/// Largest deviation of `G G^T` from the identity for the right unfolding.
pub fn right_orthogonality_defect(core: &TtCore) -> f64 {
    linalg::orthonormality_defect(&core.right_unfolding().transpose())
}

/// Numerical ranks of all unfoldings, `sigma_i > tol * sigma_1`.
pub fn tt_rank_of_dense(a: &DenseTensor, tol: f64) -> Result<Vec<usize>> {
    (1..a.order())
        .map(|s| {
            let sv = linalg::singular_values(&a.unfold(s)?.matrix)?;
            Ok(linalg::numerical_rank(&sv, tol))
        })
        .collect()
}

/// `max |a - b|` with `b` given in TT format.
pub fn max_norm_error(a: &DenseTensor, b: &TtTensor) -> Result<f64> {
    if a.dims() != b.dims().as_slice() {
        return Err(Error::ShapeMismatch {
            expected: a.dims().to_vec(),
            found: b.dims(),
        });
    }
    a.max_abs_diff(&b.to_dense()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag4() -> DenseTensor {
        let v = [1.0, 0.5, 0.25, 0.125];
        DenseTensor::from_dims(&[4, 4], (0..16).map(|k| if k % 5 == 0 { v[k / 5] } else { 0.0 }).collect())
            .unwrap()
    }


    #[test]
    fn rank_deficient_first_unfolding_is_exact() {
        let a = crate::generators::random_tt(&[2, 2, 4, 3], &[1, 1, 2], 85)
            .unwrap()
            .to_dense()
            .unwrap();
        for trunc in [Truncation::exact(), Truncation::rank(2), Truncation::rank(3)] {
            let b = tt_svd(&a, &trunc).unwrap().to_dense().unwrap();
            assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
        }
    }
    #[test]
    fn identity_matrix_is_reconstructed_exactly() {
        let eye = DenseTensor::from_dims(&[4, 4], (0..16).map(|k| if k % 5 == 0 { 1.0 } else { 0.0 }).collect())
            .unwrap();
        let tt = tt_svd(&eye, &Truncation::exact()).unwrap();
        assert!(tt.to_dense().unwrap().frobenius_diff(&eye).unwrap() <= 1e-10);
    }

    #[test]
    fn diagonal_truncated_to_rank_two() {
        let a = diag4();
        let rep = tt_svd_with_report(&a, &Truncation::rank(2)).unwrap();
        let err = rep.tt.to_dense().unwrap().frobenius_diff(&a).unwrap();
        let expected = (0.25f64 * 0.25 + 0.125 * 0.125).sqrt();
        assert!((err - expected).abs() < 1e-8, "{err} vs {expected}");
        assert!((rep.error_bound() - expected).abs() < 1e-12);
    }

    #[test]
    fn tolerance_drops_small_values_and_cap_wins() {
        let a = diag4();
        let t = tt_svd(&a, &Truncation::tolerance(0.3)).unwrap();
        assert_eq!(t.ranks(), vec![2]);
        let both = Truncation {
            max_ranks: Some(RankCap::Uniform(1)),
            rel_tol: 0.3,
        };
        assert_eq!(tt_svd(&a, &both).unwrap().ranks(), vec![1]);
    }

    #[test]
    fn zero_tensor_has_unit_ranks() {
        let z = DenseTensor::zeros(crate::Shape::new(vec![2, 3, 2]).unwrap()).unwrap();
        let tt = tt_svd(&z, &Truncation::exact()).unwrap();
        assert_eq!(tt.ranks(), vec![1, 1]);
        assert!(tt.to_dense().unwrap().is_zero());
    }

    #[test]
    fn rejects_bad_truncation() {
        let a = diag4();
        assert!(tt_svd(&a, &Truncation::rank(0)).is_err());
        assert!(tt_svd(&a, &Truncation::ranks(vec![1, 1])).is_err());
        assert!(tt_svd(&a, &Truncation::tolerance(-1.0)).is_err());
    }

    #[test]
    fn orthogonalize_rejects_non_minimal() {
        // rank-2 cores representing a rank-1 matrix
        let g1 = TtCore::from_fn(1, 2, 2, |_, i, _| (i + 1) as f64).unwrap();
        let g2 = TtCore::from_fn(2, 2, 1, |_, i, _| (i + 1) as f64).unwrap();
        let tt = TtTensor::new(vec![g1, g2]).unwrap();
        assert!(matches!(orthogonalize(&tt, 0), Err(Error::RankDeficient { .. })));
        assert!(orthogonalize(&tt, 5).is_err());
    }

    #[test]
    fn max_norm_error_of_half_ones_against_identity() {
        let eye = DenseTensor::from_dims(&[2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let half = TtTensor::new(vec![
            TtCore::from_fn(1, 2, 1, |_, _, _| 0.5).unwrap(),
            TtCore::from_fn(1, 2, 1, |_, _, _| 1.0).unwrap(),
        ])
        .unwrap();
        assert_eq!(max_norm_error(&eye, &half).unwrap(), 0.5);
        let wrong = TtTensor::zeros(&[2, 3]).unwrap();
        assert!(max_norm_error(&eye, &wrong).is_err());
    }
}
