//! Rank and entrywise error bound formulas.

use crate::coherence::{tt_core_coherences, CoherenceProfile};
use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Default constant for [`rank_bound_tt`]; matches the matrix formula at `d = 2`.
pub const DEFAULT_C_D: f64 = 9.0;

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

/// `⌈9 ln(3 n1 n2) / ε²⌉`.
pub fn rank_bound_matrix(n1: usize, n2: usize, epsilon: f64) -> Result<u64> {
    check_epsilon(epsilon)?;
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidArgument("matrix sizes must be positive".into()));
    }
    let v = 9.0 * (3.0 * n1 as f64 * n2 as f64).ln() / (epsilon * epsilon);
    Ok(v.ceil() as u64)
}

/// `⌈(c_d / ε²) ln(2e ∏ n_s)⌉`.
pub fn rank_bound_tt(dims: &[usize], epsilon: f64, c_d: f64) -> Result<u64> {
    check_epsilon(epsilon)?;
    if !(c_d > 0.0 && c_d.is_finite()) {
        return Err(Error::InvalidArgument(format!("c_d must be positive, got {c_d}")));
    }
    if dims.len() < 2 || dims.contains(&0) {
        return Err(Error::InvalidShape(format!("invalid dimensions {dims:?}")));
    }
    let log_size: f64 = dims.iter().map(|&n| (n as f64).ln()).sum();
    let v = c_d / (epsilon * epsilon) * (2f64.ln() + 1.0 + log_size);
    Ok(v.ceil() as u64)
}

/// Output of [`coherence_error_bound`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceBound {
    /// Target TT rank from [`rank_bound_tt`].
    pub rank: u64,
    /// Guaranteed entrywise error at that rank.
    pub bound: f64,
    /// Unfolding (1-based split) attaining the minimum.
    pub best_split: usize,
    /// The minimized quantity for every split, without the `ε / sqrt(∏ n)` factor.
    pub per_split: Vec<f64>,
}

pub fn coherence_error_bound(a: &DenseTensor, epsilon: f64, c_d: f64) -> Result<CoherenceBound> {
    check_epsilon(epsilon)?;
    let profile = tt_core_coherences(a)?;
    coherence_error_bound_from_profile(&profile, epsilon, c_d)
}

/// `ε / sqrt(∏ n) · min_t r_t sqrt(∏_{s<=t} μ<_s) sqrt(∏_{s>t} μ>_s) ‖A^{<t>}‖_2`.
pub fn coherence_error_bound_from_profile(
    profile: &CoherenceProfile,
    epsilon: f64,
    c_d: f64,
) -> Result<CoherenceBound> {
    let rank = rank_bound_tt(&profile.dims, epsilon, c_d)?;
    let d = profile.dims.len();
    let per_split: Vec<f64> = (1..d)
        .map(|t| {
            let left: f64 = profile.left[..t].iter().product();
            let right: f64 = profile.right[t - 1..].iter().product();
            profile.ranks[t - 1] as f64 * (left * right).sqrt() * profile.unfolding_spectral[t - 1]
        })
        .collect();
    let (best, value) = per_split
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let size: f64 = profile.dims.iter().map(|&n| n as f64).product();
    Ok(CoherenceBound {
        rank,
        bound: epsilon / size.sqrt() * value,
        best_split: best + 1,
        per_split,
    })
}
