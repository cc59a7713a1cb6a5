//! Randomized TT compression: sub-Gaussian sketches sandwiched between cores.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::index::{chain_product, eval_quadratic_form};
use crate::norms::gamma_tt_upper;
use crate::seed::stream_rng;
use crate::tensor::{TtCore, TtTensor};

/// Law of the unscaled sketch entries (zero mean, unit variance).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SketchDistribution {
    #[default]
    Gaussian,
    Rademacher,
}

impl SketchDistribution {
    fn sample(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            SketchDistribution::Gaussian => StandardNormal.sample(rng),
            SketchDistribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

impl fmt::Display for SketchDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SketchDistribution::Gaussian => "gaussian",
            SketchDistribution::Rademacher => "rademacher",
        })
    }
}

impl FromStr for SketchDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gaussian" => Ok(SketchDistribution::Gaussian),
            "rademacher" => Ok(SketchDistribution::Rademacher),
            other => Err(Error::Parse(format!(
                "unknown distribution {other:?} (gaussian, rademacher)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchConfig {
    pub target_rank: usize,
    pub distribution: SketchDistribution,
    pub seed: u64,
    /// Per-position scales `η_s`; `None` means `η_s = r^{-1/2}` everywhere.
    pub eta: Option<Vec<f64>>,
}

impl SketchConfig {
    pub fn new(target_rank: usize, distribution: SketchDistribution, seed: u64) -> Self {
        SketchConfig {
            target_rank,
            distribution,
            seed,
            eta: None,
        }
    }

    /// Scales for `positions` sketches; custom scales must be positive with
    /// `∏ η_s = r^{-positions/2}` to relative precision 1e-12.
    pub fn etas(&self, positions: usize) -> Result<Vec<f64>> {
        if self.target_rank == 0 {
            return Err(Error::InvalidArgument("target rank must be >= 1".into()));
        }
        let r = self.target_rank as f64;
        match &self.eta {
            None => Ok(vec![r.powf(-0.5); positions]),
            Some(eta) => {
                if eta.len() != positions {
                    return Err(Error::InvalidArgument(format!(
                        "{} scales for {positions} sketch positions",
                        eta.len()
                    )));
                }
                if eta.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
                    return Err(Error::InvalidArgument("scales must be positive".into()));
                }
                let log_prod: f64 = eta.iter().map(|e| e.ln()).sum();
                let target = -(positions as f64) / 2.0 * r.ln();
                if ((log_prod - target).exp() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "scales multiply to {:.6e}, expected r^(-{positions}/2) = {:.6e}",
                        log_prod.exp(),
                        target.exp()
                    )));
                }
                Ok(eta.clone())
            }
        }
    }
}

fn draw_with(
    config: &SketchConfig,
    inner_ranks: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<DMatrix<f64>>> {
    let eta = config.etas(inner_ranks.len())?;
    let r = config.target_rank;
    Ok(inner_ranks
        .iter()
        .zip(&eta)
        .map(|(&k, &e)| DMatrix::from_fn(k, r, |_, _| e * config.distribution.sample(rng)))
        .collect())
}

/// Sketches `R_s` of size `k_s x r` for trial 0.
pub fn draw_sketches(config: &SketchConfig, inner_ranks: &[usize]) -> Result<Vec<DMatrix<f64>>> {
    draw_sketches_for_trial(config, inner_ranks, 0)
}

/// Sketches for an independent trial; each trial reads its own random stream.
pub fn draw_sketches_for_trial(
    config: &SketchConfig,
    inner_ranks: &[usize],
    trial: u64,
) -> Result<Vec<DMatrix<f64>>> {
    draw_with(config, inner_ranks, &mut stream_rng(config.seed, trial))
}

/// `H_1 = G_1 R_1`, `H_s = R_{s-1}^T G_s R_s`, `H_d = R_{d-1}^T G_d`.
pub fn compress_with(tt: &TtTensor, sketches: &[DMatrix<f64>]) -> Result<TtTensor> {
    let d = tt.order();
    let ranks = tt.ranks();
    if sketches.len() != d - 1 || sketches.iter().zip(&ranks).any(|(r, &k)| r.nrows() != k) {
        return Err(Error::DimensionMismatch(format!(
            "sketches {:?} do not fit TT ranks {ranks:?}",
            sketches.iter().map(|r| r.shape()).collect::<Vec<_>>()
        )));
    }
    let cores = tt
        .cores()
        .iter()
        .enumerate()
        .map(|(s, g)| {
            let slices = g
                .slices()
                .iter()
                .map(|m| {
                    let left = if s == 0 { m.clone() } else { sketches[s - 1].transpose() * m };
                    if s == d - 1 {
                        left
                    } else {
                        left * &sketches[s]
                    }
                })
                .collect();
            TtCore::new(slices)
        })
        .collect::<Result<Vec<_>>>()?;
    TtTensor::new(cores)
}

pub fn compress(tt: &TtTensor, config: &SketchConfig) -> Result<TtTensor> {
    compress_trial(tt, config, 0)
}

pub fn compress_trial(tt: &TtTensor, config: &SketchConfig, trial: u64) -> Result<TtTensor> {
    let sketches = draw_sketches_for_trial(config, &tt.ranks(), trial)?;
    compress_with(tt, &sketches)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchTrial {
    pub trial: u64,
    pub max_error: f64,
    pub gamma_bound: f64,
    pub implied_epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchReport {
    pub trials: Vec<SketchTrial>,
    pub target_rank: usize,
}

impl SketchReport {
    /// Empirical quantile of the implied `ε̂`, linear interpolation between order statistics.
    pub fn implied_epsilon_quantile(&self, q: f64) -> f64 {
        quantile(self.trials.iter().map(|t| t.implied_epsilon).collect(), q)
    }

    pub fn max_error_quantile(&self, q: f64) -> f64 {
        quantile(self.trials.iter().map(|t| t.max_error).collect(), q)
    }

    pub fn median_implied_epsilon(&self) -> f64 {
        self.implied_epsilon_quantile(0.5)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,max_error,gamma_bound,implied_epsilon\n");
        for t in &self.trials {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e}\n",
                t.trial, t.max_error, t.gamma_bound, t.implied_epsilon
            ));
        }
        out
    }
}

pub(crate) fn quantile(mut v: Vec<f64>, q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Per-trial `‖A - B‖_max` for independent sketches `B`, with `ε̂ = error / ∏‖G_s‖_{F,∞}`.
pub fn sketch_error_report(tt: &TtTensor, config: &SketchConfig, trials: u64) -> Result<SketchReport> {
    let dense = tt.to_dense()?;
    let gamma = gamma_tt_upper(tt);
    let rows = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let b = compress_trial(tt, config, trial)?.to_dense()?;
            let max_error = dense.max_abs_diff(&b)?;
            Ok(SketchTrial {
                trial,
                max_error,
                gamma_bound: gamma,
                implied_epsilon: if gamma > 0.0 { max_error / gamma } else { 0.0 },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SketchReport {
        trials: rows,
        target_rank: config.target_rank,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentRow {
    pub p: f64,
    /// `(mean |Δ - EΔ|^p)^{1/p}` over the trials.
    pub moment: f64,
    /// `Σ_{κ=1}^{2d-2} (p/r)^{κ/2}`.
    pub shape: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentScan {
    pub rows: Vec<MomentRow>,
    /// `EΔ` for the chosen scales.
    pub expected: f64,
    pub sample_mean: f64,
    pub sample_std: f64,
    /// Single multiplicative constant fitted in log space.
    pub constant: f64,
}

impl MomentScan {
    /// Largest over smallest ratio `moment / (constant * shape)`.
    pub fn ratio_spread(&self) -> f64 {
        let ratios: Vec<f64> = self.rows.iter().map(|r| r.moment / r.shape).collect();
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    }
}

/// Monte Carlo `L_p` norms of the centred quadratic form
/// `(W_1 R_1)(R_1^T W_2 R_2)..(R_{d-1}^T W_d)` against the theoretical shape.
pub fn moment_scan(
    w: &[DMatrix<f64>],
    config: &SketchConfig,
    p_values: &[f64],
    trials: u64,
) -> Result<MomentScan> {
    if p_values.iter().any(|&p| !(p >= 1.0)) {
        return Err(Error::InvalidArgument("moment orders must be >= 1".into()));
    }
    if trials < 2 {
        return Err(Error::InvalidArgument("need at least two trials".into()));
    }
    let d = w.len();
    if d < 2 {
        return Err(Error::DimensionMismatch("chain needs at least two factors".into()));
    }
    let inner: Vec<usize> = w[..d - 1].iter().map(|m| m.ncols()).collect();
    let eta = config.etas(d - 1)?;
    let r = config.target_rank as f64;
    let expected = chain_product(w)? * eta.iter().map(|e| e * e * r).product::<f64>();
    let values = (0..trials)
        .into_par_iter()
        .map(|t| eval_quadratic_form(w, &draw_sketches_for_trial(config, &inner, t)?))
        .collect::<Result<Vec<f64>>>()?;
    let n = values.len() as f64;
    let sample_mean = values.iter().sum::<f64>() / n;
    let sample_std = (values.iter().map(|v| (v - sample_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut rows: Vec<MomentRow> = p_values
        .iter()
        .map(|&p| {
            let m = values.iter().map(|v| (v - expected).abs().powf(p)).sum::<f64>() / n;
            let shape = (1..=2 * d - 2).map(|k| (p / r).powf(k as f64 / 2.0)).sum();
            MomentRow {
                p,
                moment: m.powf(1.0 / p),
                shape,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.p.total_cmp(&b.p));
    let usable: Vec<&MomentRow> = rows.iter().filter(|r| r.moment > 0.0).collect();
    let constant = if usable.is_empty() {
        0.0
    } else {
        (usable.iter().map(|r| (r.moment / r.shape).ln()).sum::<f64>() / usable.len() as f64).exp()
    };
    Ok(MomentScan {
        rows,
        expected,
        sample_mean,
        sample_std,
        constant,
    })
}
