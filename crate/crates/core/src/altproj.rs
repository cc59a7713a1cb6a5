//! Entrywise approximation by alternating projections between the max-norm
//! ball around `a` and the set of TT rank-`r` tensors, with a bisection over
//! the ball radius.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generators::random_tt_init;
use crate::seed::derive_seed;
use crate::tensor::{tt_svd, DenseTensor, Truncation, TtTensor};

#[derive(Debug, Clone, PartialEq)]
pub struct APConfig {
    /// Uniform target TT rank.
    pub rank: usize,
    pub max_iter: usize,
    /// Stop when `‖X_{t+1} - X_t‖_F <= conv_tol * ‖a‖_F`.
    pub conv_tol: f64,
    /// Success iff `‖a - X‖_max <= ε (1 + slack)`.
    pub slack: f64,
    pub seed: u64,
    pub max_bisections: usize,
    /// Bisection stops once the bracket is narrower than `width_tol * ‖a‖_max`.
    pub width_tol: f64,
}

impl APConfig {
    pub fn new(rank: usize) -> Self {
        APConfig {
            rank,
            max_iter: 500,
            conv_tol: 1e-8,
            slack: 1e-6,
            seed: 0,
            max_bisections: 20,
            width_tol: 1e-3,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::InvalidArgument("rank must be >= 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        if !(self.conv_tol > 0.0) {
            return Err(Error::InvalidArgument("conv_tol must be positive".into()));
        }
        if !(self.slack >= 0.0) || !self.slack.is_finite() {
            return Err(Error::InvalidArgument("slack must be nonnegative".into()));
        }
        if !(self.width_tol > 0.0) {
            return Err(Error::InvalidArgument("width_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxReport {
    /// Certified max-norm error: the residual of the returned witness.
    pub epsilon_achieved: f64,
    pub iterations_used: usize,
    /// Single run: the target was reached. Search: the bracket reached its tolerance.
    pub converged: bool,
    pub residual_max: f64,
    pub rank: usize,
    pub seed: u64,
}

/// Output of a single alternating projections run.
#[derive(Debug, Clone)]
pub struct ApRun {
    pub report: ApproxReport,
    /// Final iterate.
    pub witness: TtTensor,
    /// `‖a - X_t‖_max` after every iteration.
    pub residual_history: Vec<f64>,
    /// Iterate with the smallest residual; a valid upper bound even when the run fails.
    pub best_witness: TtTensor,
    pub best_residual: f64,
}

/// Output of the bisection, with the best witness over all restarts.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub report: ApproxReport,
    pub witness: TtTensor,
    pub restart: usize,
}

fn check_shapes(x: &DenseTensor, a: &DenseTensor) -> Result<()> {
    if x.dims() != a.dims() {
        return Err(Error::ShapeMismatch {
            expected: a.dims().to_vec(),
            found: x.dims().to_vec(),
        });
    }
    Ok(())
}

/// Nearest point of `{y : ‖y - a‖_max <= ε}`: `a + clip(x - a, ±ε)`.
pub fn project_ball(x: &DenseTensor, a: &DenseTensor, epsilon: f64) -> Result<DenseTensor> {
    check_shapes(x, a)?;
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("radius {epsilon} must be >= 0")));
    }
    let values = x
        .values()
        .iter()
        .zip(a.values())
        .map(|(&xv, &av)| av + (xv - av).clamp(-epsilon, epsilon))
        .collect();
    DenseTensor::new(a.shape().clone(), values)
}

/// TT-SVD truncated to rank `r` at every split.
pub fn quasi_project_lowrank(y: &DenseTensor, r: usize) -> Result<TtTensor> {
    tt_svd(y, &Truncation::rank(r))
}

fn check_finite(x: &DenseTensor, what: &str) -> Result<()> {
    if x.values().iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

/// `Y_{t+1} = P_ball(X_t)`, `X_{t+1} = TT-SVD_r(Y_{t+1})` until the residual
/// reaches `ε (1 + slack)`, the iterates stagnate, or `max_iter` is spent.
pub fn alternating_projections(
    a: &DenseTensor,
    epsilon: f64,
    cfg: &APConfig,
    x0: &TtTensor,
) -> Result<ApRun> {
    cfg.validate()?;
    if x0.dims() != a.dims() {
        return Err(Error::ShapeMismatch {
            expected: a.dims().to_vec(),
            found: x0.dims(),
        });
    }
    if x0.max_rank() > cfg.rank {
        return Err(Error::InvalidArgument(format!(
            "initial ranks {:?} exceed target rank {}",
            x0.ranks(),
            cfg.rank
        )));
    }
    check_finite(a, "target tensor")?;
    let target = epsilon * (1.0 + cfg.slack);
    let stall = cfg.conv_tol * a.frobenius();
    let mut x_dense = x0.to_dense()?;
    check_finite(&x_dense, "initial iterate")?;
    let mut x_tt = x0.clone();
    let mut history = Vec::new();
    let mut converged = false;
    let mut best: Option<(f64, TtTensor)> = None;
    for _ in 0..cfg.max_iter {
        let y = project_ball(&x_dense, a, epsilon)?;
        let next_tt = quasi_project_lowrank(&y, cfg.rank)?;
        let next = next_tt.to_dense()?;
        check_finite(&next, "alternating projections iterate")?;
        let residual = a.max_abs_diff(&next)?;
        let step = next.frobenius_diff(&x_dense)?;
        history.push(residual);
        if best.as_ref().is_none_or(|(b, _)| residual < *b) {
            best = Some((residual, next_tt.clone()));
        }
        x_dense = next;
        x_tt = next_tt;
        if residual <= target {
            converged = true;
            break;
        }
        if step <= stall {
            break;
        }
    }
    let residual_max = *history.last().expect("max_iter >= 1");
    let (best_residual, best_witness) = best.expect("max_iter >= 1");
    Ok(ApRun {
        report: ApproxReport {
            epsilon_achieved: residual_max,
            iterations_used: history.len(),
            converged,
            residual_max,
            rank: cfg.rank,
            seed: cfg.seed,
        },
        witness: x_tt,
        residual_history: history,
        best_witness,
        best_residual,
    })
}

fn search_one(a: &DenseTensor, cfg: &APConfig, seed: u64) -> Result<(ApproxReport, TtTensor)> {
    let amax = a.max_abs();
    let zero = TtTensor::zeros(a.dims())?;
    let report = |eps: f64, iters: usize, converged: bool| ApproxReport {
        epsilon_achieved: eps,
        iterations_used: iters,
        converged,
        residual_max: eps,
        rank: cfg.rank,
        seed,
    };
    if amax == 0.0 {
        return Ok((report(0.0, 0, true), zero));
    }
    // The truncated TT-SVD often certifies a smaller upper end than the zero tensor.
    let probe = quasi_project_lowrank(a, cfg.rank)?;
    let probe_res = a.max_abs_diff(&probe.to_dense()?)?;
    let (mut hi, mut best) = if probe_res < amax {
        (probe_res, probe)
    } else {
        (amax, zero)
    };
    let x0 = random_tt_init(a.dims(), cfg.rank, seed)?;
    let width = cfg.width_tol * amax;
    let mut lo = 0.0;
    let mut iters = 0;
    let mut steps = 0;
    while hi - lo >= width && steps < cfg.max_bisections {
        let mid = 0.5 * (lo + hi);
        let run = alternating_projections(a, mid, cfg, &x0)?;
        iters += run.report.iterations_used;
        if run.best_residual < hi {
            hi = run.best_residual;
            best = run.best_witness;
        }
        if !run.report.converged {
            lo = mid;
        }
        steps += 1;
    }
    Ok((report(hi, iters, hi - lo < width), best))
}

/// Bisection on the ball radius over `[0, ‖a‖_max]`, treating an unsuccessful
/// run as infeasible. Every iterate certifies its own residual, so the upper
/// end of the bracket is the best residual seen so far. Each restart draws its
/// own starting point; the smallest certified radius wins.
pub fn binary_search_epsilon_with_witness(
    a: &DenseTensor,
    cfg: &APConfig,
    restarts: usize,
) -> Result<SearchResult> {
    cfg.validate()?;
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    check_finite(a, "target tensor")?;
    let runs = (0..restarts)
        .into_par_iter()
        .map(|k| search_one(a, cfg, derive_seed(cfg.seed, &[k as u64])))
        .collect::<Result<Vec<_>>>()?;
    let (restart, (report, witness)) = runs
        .into_iter()
        .enumerate()
        .min_by(|(_, x), (_, y)| x.0.epsilon_achieved.total_cmp(&y.0.epsilon_achieved))
        .expect("restarts >= 1");
    Ok(SearchResult {
        report,
        witness,
        restart,
    })
}

pub fn binary_search_epsilon(a: &DenseTensor, cfg: &APConfig, restarts: usize) -> Result<ApproxReport> {
    Ok(binary_search_epsilon_with_witness(a, cfg, restarts)?.report)
}
