//! Dense factorizations on nalgebra matrices with the conventions the rest of
//! the crate relies on: singular values sorted in decreasing order and
//! explicit failure on non-finite input. SVDs are computed with faer.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Singular value decomposition `m = u * diag(s) * vt` with `s` non-increasing.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub vt: DMatrix<f64>,
}

impl Svd {
    /// Keeps the leading `k` triplets.
    pub fn truncate(&self, k: usize) -> Svd {
        let k = k.min(self.s.len());
        Svd {
            u: self.u.columns(0, k).into_owned(),
            s: self.s[..k].to_vec(),
            vt: self.vt.rows(0, k).into_owned(),
        }
    }
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("SVD input".into()))
    }
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

// nalgebra's bidiagonal SVD returns inaccurate factors for a sizeable share of
// rank-deficient inputs, which breaks exact TT-SVD; faer is used instead.
pub fn svd(m: &DMatrix<f64>) -> Result<Svd> {
    check_finite(m)?;
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd {
            u: DMatrix::zeros(rows, 0),
            s: Vec::new(),
            vt: DMatrix::zeros(0, cols),
        });
    }
    let f = to_faer(m)
        .thin_svd()
        .map_err(|e| Error::Decomposition(format!("SVD of a {rows}x{cols} matrix: {e:?}")))?;
    let (u, s, v) = (f.U(), f.S().column_vector(), f.V());
    Ok(Svd {
        u: DMatrix::from_fn(rows, k, |i, j| u[(i, j)]),
        s: (0..k).map(|j| s[j]).collect(),
        vt: DMatrix::from_fn(k, cols, |i, j| v[(j, i)]),
    })
}

pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_finite(m)?;
    if m.nrows().min(m.ncols()) == 0 {
        return Ok(Vec::new());
    }
    to_faer(m)
        .singular_values()
        .map_err(|e| Error::Decomposition(format!("singular values: {e:?}")))
}

/// Minimum-norm least-squares solution of `x c = y`, dropping singular values
/// at or below `rcond * s[0]`.
pub fn lstsq(x: &DMatrix<f64>, y: &DVector<f64>, rcond: f64) -> Result<DVector<f64>> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} system with {} right-hand sides",
            x.nrows(),
            x.ncols(),
            y.len()
        )));
    }
    let f = svd(x)?;
    let k = numerical_rank(&f.s, rcond);
    let f = f.truncate(k);
    let mut w = f.u.transpose() * y;
    for (wi, si) in w.iter_mut().zip(&f.s) {
        *wi /= si;
    }
    Ok(f.vt.transpose() * w)
}

/// Number of singular values strictly above `tol * s[0]`; zero for a zero matrix.
pub fn numerical_rank(s: &[f64], tol: f64) -> usize {
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > tol * top).count(),
        _ => 0,
    }
}

pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Orthonormal basis of the column space, rank decided at relative tolerance `tol`.
pub fn column_basis(m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let f = svd(m)?;
    let k = numerical_rank(&f.s, tol);
    Ok(f.u.columns(0, k).into_owned())
}

/// Thin QR: `m = q * r` with `q` of size `rows x min(rows, cols)`.
pub fn thin_qr(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let qr = m.clone().qr();
    (qr.q(), qr.r())
}

/// Largest absolute deviation of `q^T q` from the identity.
pub fn orthonormality_defect(q: &DMatrix<f64>) -> f64 {
    let g = q.transpose() * q;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}
