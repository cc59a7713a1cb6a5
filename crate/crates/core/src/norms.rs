//! Core norms and upper bounds on TT and CP factorization quasinorms.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::{TtCore, TtTensor};

/// `max_i ‖G(:, i, :)‖_F`.
pub fn core_norm_f_inf(g: &TtCore) -> f64 {
    g.slices().iter().map(|s| s.norm()).fold(0.0, f64::max)
}

/// `∏_s ‖G_s‖_{F,∞}`: an upper bound on the TT factorization quasinorm of the
/// represented tensor and on its largest entry.
pub fn gamma_tt_upper(tt: &TtTensor) -> f64 {
    tt.cores().iter().map(core_norm_f_inf).product()
}

/// Rescales the cores so that every `‖G_s‖_{F,∞}` equals `γ^{1/d}`,
/// leaving the tensor and [`gamma_tt_upper`] unchanged. A TT with a zero
/// core is returned as is.
pub fn balance_cores(tt: &TtTensor) -> Result<TtTensor> {
    let norms: Vec<f64> = tt.cores().iter().map(core_norm_f_inf).collect();
    if norms.iter().any(|&x| x == 0.0) {
        return Ok(tt.clone());
    }
    let d = norms.len() as f64;
    let target = norms.iter().map(|x| x.ln()).sum::<f64>() / d;
    let cores = tt
        .cores()
        .iter()
        .zip(&norms)
        .map(|(g, &n)| g.scaled((target - n.ln()).exp()))
        .collect();
    TtTensor::new(cores)
}

fn check_factors(factors: &[DMatrix<f64>]) -> Result<usize> {
    if factors.len() < 2 {
        return Err(Error::InvalidShape(format!(
            "need at least two CP factors, got {}",
            factors.len()
        )));
    }
    let k = factors[0].ncols();
    if k == 0 || factors.iter().any(|f| f.ncols() != k || f.nrows() == 0) {
        return Err(Error::DimensionMismatch(format!(
            "CP factors need a common positive column count, got {:?}",
            factors.iter().map(|f| f.shape()).collect::<Vec<_>>()
        )));
    }
    Ok(k)
}

/// TT form of the CP tensor `Σ_α ∏_s C_s(i_s, α)`: interior slices are
/// `diag(C_s(i, :))`, the boundary cores carry the rows of `C_1` and `C_d`.
pub fn cp_to_tt(factors: &[DMatrix<f64>]) -> Result<TtTensor> {
    let k = check_factors(factors)?;
    let d = factors.len();
    let cores = factors
        .iter()
        .enumerate()
        .map(|(s, c)| {
            let n = c.nrows();
            if s == 0 {
                TtCore::from_fn(1, n, k, |_, i, b| c[(i, b)])
            } else if s == d - 1 {
                TtCore::from_fn(k, n, 1, |a, i, _| c[(i, a)])
            } else {
                TtCore::from_fn(k, n, k, |a, i, b| if a == b { c[(i, a)] } else { 0.0 })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    TtTensor::new(cores)
}

/// `∏_s max_i ‖C_s(i, :)‖_2`.
pub fn gamma_cp_upper(factors: &[DMatrix<f64>]) -> Result<f64> {
    check_factors(factors)?;
    Ok(factors
        .iter()
        .map(|c| c.row_iter().map(|r| r.norm()).fold(0.0, f64::max))
        .product())
}
