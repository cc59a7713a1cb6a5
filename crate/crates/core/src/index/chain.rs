use nalgebra::DMatrix;

use super::array::PartialArray;
use super::subset::{for_each_assignment, DimSubset};
use crate::error::{Error, Result};

/// Checks a chain `1×k_1, k_1×k_2, .., k_last×1` and returns the inner sizes.
fn chain_inner_sizes(w: &[DMatrix<f64>]) -> Result<Vec<usize>> {
    if w.is_empty() {
        return Err(Error::DimensionMismatch("empty matrix chain".into()));
    }
    if w[0].nrows() != 1 || w[w.len() - 1].ncols() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "chain must start with one row and end with one column, got {}x{} .. {}x{}",
            w[0].nrows(),
            w[0].ncols(),
            w[w.len() - 1].nrows(),
            w[w.len() - 1].ncols()
        )));
    }
    for (t, pair) in w.windows(2).enumerate() {
        if pair[0].ncols() != pair[1].nrows() {
            return Err(Error::DimensionMismatch(format!(
                "chain link {t}: {} columns vs {} rows",
                pair[0].ncols(),
                pair[1].nrows()
            )));
        }
    }
    Ok(w[..w.len() - 1].iter().map(|m| m.ncols()).collect())
}

/// `W_1 W_2 .. W_d` for a chain starting with a row and ending with a column.
pub fn chain_product(w: &[DMatrix<f64>]) -> Result<f64> {
    chain_inner_sizes(w)?;
    let mut acc = w[0].clone();
    for m in &w[1..] {
        acc = acc * m;
    }
    Ok(acc[(0, 0)])
}

fn member_extents(omega: &DimSubset, sizes: &[usize]) -> Result<Vec<usize>> {
    if sizes.len() != omega.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} matrices for |Ω| = {}; expected |Ω| + 1",
            sizes.len() + 1,
            omega.len()
        )));
    }
    let mut ext = vec![1usize; omega.ambient()];
    for (&w, &k) in omega.members().iter().zip(sizes) {
        ext[w] = k;
    }
    Ok(ext)
}

/// `Φ_Ω(Ŵ_1, .., Ŵ_{|Ω|+1})` on `Ω ⊕ Ω`, entry at `i ⧺ j` equal to
/// `Ŵ_1(0, i_ω1) Ŵ_2(j_ω1, i_ω2) .. Ŵ_{|Ω|+1}(j_ωlast, 0)`.
///
/// Extents outside `Ω` are set to 1.
pub fn build_phi(omega: &DimSubset, w: &[DMatrix<f64>]) -> Result<PartialArray> {
    let k = chain_inner_sizes(w)?;
    let ext = member_extents(omega, &k)?;
    let q = omega.len();
    let mut values = Vec::new();
    let dims: Vec<usize> = k.iter().chain(&k).copied().collect();
    for_each_assignment(&dims, |ij| {
        let (i, j) = ij.split_at(q);
        if q == 0 {
            values.push(w[0][(0, 0)]);
            return;
        }
        let mut v = w[0][(0, i[0])];
        for t in 1..q {
            v *= w[t][(j[t - 1], i[t])];
        }
        v *= w[q][(j[q - 1], 0)];
        values.push(v);
    });
    let ext2: Vec<usize> = ext.iter().chain(&ext).copied().collect();
    PartialArray::new(ext2, omega.doubled(), values)
}

/// `Ψ_Ω` on `Ω ⊕ Ω` with extents `(r ⋄ k)^{×2}`: the entry at
/// `(α ⋄ i) ⧺ (β ⋄ j)` is the `Φ_Ω` entry at `i ⧺ j` when `α = β`, else 0.
///
/// `ranks` has one entry per ambient dimension.
pub fn build_psi(omega: &DimSubset, ranks: &[usize], w: &[DMatrix<f64>]) -> Result<PartialArray> {
    if ranks.len() != omega.ambient() {
        return Err(Error::DimensionMismatch(format!(
            "{} ranks for ambient size {}",
            ranks.len(),
            omega.ambient()
        )));
    }
    if omega.members().iter().any(|&w| ranks[w] == 0) {
        return Err(Error::InvalidArgument("ranks must be positive".into()));
    }
    let phi = build_phi(omega, w)?;
    let k: Vec<usize> = omega.members().iter().map(|&w| phi.extents()[w]).collect();
    let r: Vec<usize> = omega.members().iter().map(|&w| ranks[w]).collect();
    let rk: Vec<usize> = k.iter().zip(&r).map(|(a, b)| a * b).collect();
    let q = omega.len();
    let kk: Vec<usize> = k.iter().chain(&k).copied().collect();
    let dims: Vec<usize> = rk.iter().chain(&rk).copied().collect();
    let mut values = Vec::new();
    for_each_assignment(&dims, |x| {
        let (a, b) = x.split_at(q);
        let matched = a.iter().zip(b).zip(&k).all(|((p, s), kw)| p / kw == s / kw);
        if !matched {
            values.push(0.0);
            return;
        }
        let off = x.iter().zip(&kk).fold(0, |acc, (v, kw)| acc * kw + v % kw);
        values.push(phi.values()[off]);
    });
    let mut ext = vec![1usize; omega.ambient()];
    for (&w, &e) in omega.members().iter().zip(&rk) {
        ext[w] = e;
    }
    let ext2: Vec<usize> = ext.iter().chain(&ext).copied().collect();
    PartialArray::new(ext2, omega.doubled(), values)
}

/// Merges a chain `W_1 .. W_d` (dimensions `0..d-1`, dimension `s` sitting
/// between `W_{s+1}` and `W_{s+2}`) into the `|Ω| + 1` factors that remain
/// once every dimension outside `Ω` has been traced out.
pub fn collapse_chain(w: &[DMatrix<f64>], omega: &DimSubset) -> Result<Vec<DMatrix<f64>>> {
    chain_inner_sizes(w)?;
    if omega.ambient() + 1 != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} matrices need an ambient set of size {}, got {}",
            w.len(),
            w.len() - 1,
            omega.ambient()
        )));
    }
    let mut out = Vec::with_capacity(omega.len() + 1);
    let mut start = 0;
    for &cut in omega.members().iter().chain(std::iter::once(&(w.len() - 1))) {
        let mut m = w[start].clone();
        for f in &w[start + 1..=cut] {
            m = m * f;
        }
        out.push(m);
        start = cut + 1;
    }
    Ok(out)
}

/// `(W_1 R_1)(R_1^T W_2 R_2) .. (R_{d-1}^T W_d)`.
pub fn eval_quadratic_form(w: &[DMatrix<f64>], r_mats: &[DMatrix<f64>]) -> Result<f64> {
    let k = chain_inner_sizes(w)?;
    if r_mats.len() != k.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} sketch matrices for a chain of {} factors",
            r_mats.len(),
            w.len()
        )));
    }
    for (s, (r, &ks)) in r_mats.iter().zip(&k).enumerate() {
        if r.nrows() != ks {
            return Err(Error::DimensionMismatch(format!(
                "sketch {s} has {} rows, chain needs {ks}",
                r.nrows()
            )));
        }
    }
    let mut v = &w[0] * &r_mats[0];
    for s in 1..w.len() {
        let left = v * r_mats[s - 1].transpose() * &w[s];
        v = if s < r_mats.len() { left * &r_mats[s] } else { left };
    }
    Ok(v[(0, 0)])
}
