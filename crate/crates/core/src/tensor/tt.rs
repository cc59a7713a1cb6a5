//! Tensor-train cores and tensors.

use nalgebra::DMatrix;

use super::dense::{DenseTensor, Shape};
use crate::error::{Error, Result};

/// An order-3 TT core stored as its `n` slices `G(:, i, :)`, each
/// `left_rank x right_rank`.
#[derive(Debug, Clone, PartialEq)]
pub struct TtCore {
    slices: Vec<DMatrix<f64>>,
}

impl TtCore {
    pub fn new(slices: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::InvalidShape("core with zero mode size".into()))?;
        let (p, q) = first.shape();
        if p == 0 || q == 0 {
            return Err(Error::InvalidShape("core with a zero rank".into()));
        }
        if slices.iter().any(|s| s.shape() != (p, q)) {
            return Err(Error::DimensionMismatch(
                "core slices have different shapes".into(),
            ));
        }
        if slices.iter().any(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite("TT core".into()));
        }
        Ok(TtCore { slices })
    }

    pub fn from_fn(
        left: usize,
        mode: usize,
        right: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        TtCore::new(
            (0..mode)
                .map(|i| DMatrix::from_fn(left, right, |a, b| f(a, i, b)))
                .collect(),
        )
    }

    pub fn zeros(left: usize, mode: usize, right: usize) -> Result<Self> {
        TtCore::from_fn(left, mode, right, |_, _, _| 0.0)
    }

    pub fn left_rank(&self) -> usize {
        self.slices[0].nrows()
    }

    pub fn mode_size(&self) -> usize {
        self.slices.len()
    }

    pub fn right_rank(&self) -> usize {
        self.slices[0].ncols()
    }

    pub fn slice(&self, i: usize) -> &DMatrix<f64> {
        &self.slices[i]
    }

    pub fn slices(&self) -> &[DMatrix<f64>] {
        &self.slices
    }

    pub fn get(&self, a: usize, i: usize, b: usize) -> f64 {
        self.slices[i][(a, b)]
    }

    /// `G^<`: `(left * n) x right`, row `a + i * left`.
    pub fn left_unfolding(&self) -> DMatrix<f64> {
        let (p, n, q) = (self.left_rank(), self.mode_size(), self.right_rank());
        let mut m = DMatrix::zeros(p * n, q);
        for (i, s) in self.slices.iter().enumerate() {
            m.view_mut((i * p, 0), (p, q)).copy_from(s);
        }
        m
    }

    /// `G^>`: `left x (n * right)`, column `b + i * right`.
    pub fn right_unfolding(&self) -> DMatrix<f64> {
        let (p, n, q) = (self.left_rank(), self.mode_size(), self.right_rank());
        let mut m = DMatrix::zeros(p, n * q);
        for (i, s) in self.slices.iter().enumerate() {
            m.view_mut((0, i * q), (p, q)).copy_from(s);
        }
        m
    }

    pub fn from_left_unfolding(m: &DMatrix<f64>, left: usize, mode: usize) -> Result<Self> {
        if m.nrows() != left * mode {
            return Err(Error::DimensionMismatch(format!(
                "left unfolding has {} rows, expected {}",
                m.nrows(),
                left * mode
            )));
        }
        TtCore::new(
            (0..mode)
                .map(|i| m.view((i * left, 0), (left, m.ncols())).into_owned())
                .collect(),
        )
    }

    pub fn from_right_unfolding(m: &DMatrix<f64>, mode: usize, right: usize) -> Result<Self> {
        if m.ncols() != mode * right {
            return Err(Error::DimensionMismatch(format!(
                "right unfolding has {} columns, expected {}",
                m.ncols(),
                mode * right
            )));
        }
        TtCore::new(
            (0..mode)
                .map(|i| m.view((0, i * right), (m.nrows(), right)).into_owned())
                .collect(),
        )
    }

    pub fn scaled(&self, c: f64) -> TtCore {
        TtCore {
            slices: self.slices.iter().map(|s| s * c).collect(),
        }
    }

    /// `left * G(:, i, :)` for every slice.
    pub fn left_multiply(&self, left: &DMatrix<f64>) -> Result<TtCore> {
        if left.ncols() != self.left_rank() {
            return Err(Error::DimensionMismatch(
                "left factor does not match core rank".into(),
            ));
        }
        TtCore::new(self.slices.iter().map(|s| left * s).collect())
    }

    /// `G(:, i, :) * right` for every slice.
    pub fn right_multiply(&self, right: &DMatrix<f64>) -> Result<TtCore> {
        if right.nrows() != self.right_rank() {
            return Err(Error::DimensionMismatch(
                "right factor does not match core rank".into(),
            ));
        }
        TtCore::new(self.slices.iter().map(|s| s * right).collect())
    }
}

/// A tensor in TT format, `A(i_1..i_d) = G_1(i_1) G_2(i_2) ... G_d(i_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TtTensor {
    cores: Vec<TtCore>,
}

impl TtTensor {
    pub fn new(cores: Vec<TtCore>) -> Result<Self> {
        if cores.len() < 2 {
            return Err(Error::InvalidShape(format!(
                "TT needs at least 2 cores, got {}",
                cores.len()
            )));
        }
        if cores[0].left_rank() != 1 || cores[cores.len() - 1].right_rank() != 1 {
            return Err(Error::DimensionMismatch(
                "boundary TT ranks must equal 1".into(),
            ));
        }
        for (s, pair) in cores.windows(2).enumerate() {
            if pair[0].right_rank() != pair[1].left_rank() {
                return Err(Error::DimensionMismatch(format!(
                    "cores {} and {} do not chain ({} vs {})",
                    s,
                    s + 1,
                    pair[0].right_rank(),
                    pair[1].left_rank()
                )));
            }
        }
        Ok(TtTensor { cores })
    }

    /// Rank-one TT of all-zero cores.
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        Shape::new(dims.to_vec())?;
        TtTensor::new(
            dims.iter()
                .map(|&n| TtCore::zeros(1, n, 1))
                .collect::<Result<_>>()?,
        )
    }

    pub fn cores(&self) -> &[TtCore] {
        &self.cores
    }

    pub fn core(&self, s: usize) -> &TtCore {
        &self.cores[s]
    }

    pub fn into_cores(self) -> Vec<TtCore> {
        self.cores
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.cores.iter().map(TtCore::mode_size).collect()
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.dims()).expect("cores validated on construction")
    }

    /// Linking ranks `(r_1, ..., r_{d-1})`.
    pub fn ranks(&self) -> Vec<usize> {
        self.cores[..self.cores.len() - 1]
            .iter()
            .map(TtCore::right_rank)
            .collect()
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(1)
    }

    /// Number of stored parameters.
    pub fn parameter_count(&self) -> usize {
        self.cores
            .iter()
            .map(|c| c.left_rank() * c.mode_size() * c.right_rank())
            .sum()
    }

    pub fn eval(&self, index: &[usize]) -> Result<f64> {
        self.shape().check_index(index)?;
        let mut row = self.cores[0].slice(index[0]).clone();
        for (core, &i) in self.cores[1..].iter().zip(&index[1..]) {
            row = row * core.slice(i);
        }
        Ok(row[(0, 0)])
    }

    pub fn to_dense(&self) -> Result<DenseTensor> {
        let shape = self.shape();
        shape.numel()?;
        // rows enumerate (i_1..i_s) in storage order (i_s fastest)
        let mut acc = DMatrix::from_element(1, 1, 1.0);
        for core in &self.cores {
            let n = core.mode_size();
            let mut next = DMatrix::zeros(acc.nrows() * n, core.right_rank());
            for i in 0..n {
                let block = &acc * core.slice(i);
                for p in 0..acc.nrows() {
                    next.set_row(p * n + i, &block.row(p));
                }
            }
            acc = next;
        }
        DenseTensor::new(shape, acc.column(0).iter().copied().collect())
    }

    /// Interface matrices `(A_{<=s}, A_{>=s+1})` whose product is the s-th unfolding.
    pub fn interface_matrices(&self, split: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let d = self.order();
        if split == 0 || split >= d {
            return Err(Error::InvalidSplit { split, order: d });
        }
        let mut left = DMatrix::from_element(1, 1, 1.0);
        for core in &self.cores[..split] {
            let p = left.nrows();
            let mut next = DMatrix::zeros(p * core.mode_size(), core.right_rank());
            for i in 0..core.mode_size() {
                next.view_mut((i * p, 0), (p, core.right_rank()))
                    .copy_from(&(&left * core.slice(i)));
            }
            left = next;
        }
        let mut right = DMatrix::from_element(1, 1, 1.0);
        for core in self.cores[split..].iter().rev() {
            let c = right.ncols();
            let mut next = DMatrix::zeros(core.left_rank(), core.mode_size() * c);
            for i in 0..core.mode_size() {
                next.view_mut((0, i * c), (core.left_rank(), c))
                    .copy_from(&(core.slice(i) * &right));
            }
            right = next;
        }
        Ok((left, right))
    }

    /// Multiplies the represented tensor by `c` (applied to the first core).
    pub fn scaled(&self, c: f64) -> TtTensor {
        let mut cores = self.cores.clone();
        cores[0] = cores[0].scaled(c);
        TtTensor { cores }
    }

    /// Block construction of `self + other`: boundary cores are concatenated,
    /// interior slices become block-diagonal. Ranks add up.
    pub fn add(&self, other: &TtTensor) -> Result<TtTensor> {
        if self.dims() != other.dims() {
            return Err(Error::ShapeMismatch {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        let d = self.order();
        let mut cores = Vec::with_capacity(d);
        for s in 0..d {
            let (g, h) = (&self.cores[s], &other.cores[s]);
            let left = if s == 0 { 1 } else { g.left_rank() + h.left_rank() };
            let right = if s == d - 1 {
                1
            } else {
                g.right_rank() + h.right_rank()
            };
            let slices = (0..g.mode_size())
                .map(|i| {
                    let mut m = DMatrix::zeros(left, right);
                    let (gs, hs) = (g.slice(i), h.slice(i));
                    m.view_mut((0, 0), gs.shape()).copy_from(gs);
                    let row = if s == 0 { 0 } else { gs.nrows() };
                    let col = if s == d - 1 { 0 } else { gs.ncols() };
                    m.view_mut((row, col), hs.shape()).copy_from(hs);
                    m
                })
                .collect();
            cores.push(TtCore::new(slices)?);
        }
        TtTensor::new(cores)
    }
}
