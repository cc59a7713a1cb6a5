//! Test instances: identity tensors, uniform random tensors and random TT
//! starting points.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::norms::cp_to_tt;
use crate::seed::stream_rng;
use crate::tensor::{DenseTensor, Shape, TtCore, TtTensor};

/// Order-`d` identity: 1 where all indices agree, 0 elsewhere. Returned with
/// its CP-as-TT factorization (identity factors, rank `n`).
pub fn identity_tensor(n: usize, d: usize) -> Result<(DenseTensor, TtTensor)> {
    let dense = identity_dense(n, d)?;
    let tt = cp_to_tt(&vec![DMatrix::identity(n, n); d])?;
    Ok((dense, tt))
}

pub fn identity_dense(n: usize, d: usize) -> Result<DenseTensor> {
    let shape = Shape::new(vec![n; d])?;
    DenseTensor::from_fn(shape, |idx| {
        if idx.iter().all(|&i| i == idx[0]) {
            1.0
        } else {
            0.0
        }
    })
}

/// I.i.d. entries uniform on the open interval (-1, 1).
pub fn uniform_tensor(dims: &[usize], seed: u64) -> Result<DenseTensor> {
    let shape = Shape::new(dims.to_vec())?;
    let mut rng = stream_rng(seed, 0);
    let count = shape.numel()?;
    let values = (0..count)
        .map(|_| loop {
            let v: f64 = rng.random_range(-1.0..1.0);
            if v > -1.0 {
                break v;
            }
        })
        .collect();
    DenseTensor::new(shape, values)
}

/// TT with standard normal cores of the given ranks.
pub fn random_tt(dims: &[usize], ranks: &[usize], seed: u64) -> Result<TtTensor> {
    Shape::new(dims.to_vec())?;
    if ranks.len() + 1 != dims.len() || ranks.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "need {} positive ranks, got {ranks:?}",
            dims.len() - 1
        )));
    }
    let mut rng = stream_rng(seed, 0);
    let d = dims.len();
    let cores = (0..d)
        .map(|s| {
            let left = if s == 0 { 1 } else { ranks[s - 1] };
            let right = if s == d - 1 { 1 } else { ranks[s] };
            let slices = (0..dims[s])
                .map(|_| DMatrix::from_fn(left, right, |_, _| StandardNormal.sample(&mut rng)))
                .collect();
            TtCore::new(slices)
        })
        .collect::<Result<Vec<_>>>()?;
    TtTensor::new(cores)
}

/// Starting point for alternating projections: standard normal cores of
/// uniform rank `r`, with the tensor scaled by `r^{1-d}` through the first core.
pub fn random_tt_init(dims: &[usize], r: usize, seed: u64) -> Result<TtTensor> {
    if r == 0 {
        return Err(Error::InvalidArgument("rank must be >= 1".into()));
    }
    let tt = random_tt(dims, &vec![r; dims.len().saturating_sub(1)], seed)?;
    let scale = (r as f64).powi(1 - dims.len() as i32);
    Ok(tt.scaled(scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorKind {
    Identity,
    Uniform,
    RandomTt,
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorKind::Identity => "identity",
            GeneratorKind::Uniform => "uniform",
            GeneratorKind::RandomTt => "random_tt",
        })
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "identity" => Ok(GeneratorKind::Identity),
            "uniform" => Ok(GeneratorKind::Uniform),
            "random_tt" => Ok(GeneratorKind::RandomTt),
            other => Err(Error::Parse(format!(
                "unknown tensor kind {other:?} (identity, uniform, random_tt)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub dims: Vec<usize>,
    /// Uniform TT rank, used by `RandomTt`.
    pub rank: Option<usize>,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<DenseTensor> {
        match self.kind {
            GeneratorKind::Identity => {
                let n = self.dims[0];
                if self.dims.iter().any(|&m| m != n) {
                    return Err(Error::InvalidArgument(format!(
                        "identity tensors need equal sizes, got {:?}",
                        self.dims
                    )));
                }
                identity_dense(n, self.dims.len())
            }
            GeneratorKind::Uniform => uniform_tensor(&self.dims, self.seed),
            GeneratorKind::RandomTt => {
                let r = self
                    .rank
                    .ok_or_else(|| Error::InvalidArgument("random_tt needs a rank".into()))?;
                random_tt(&self.dims, &vec![r; self.dims.len().saturating_sub(1)], self.seed)?.to_dense()
            }
        }
    }
}
