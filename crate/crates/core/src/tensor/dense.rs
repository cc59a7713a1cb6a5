//! Dense order-d tensors.
//!
//! Storage order has the last index fastest-varying. The s-th unfolding uses
//! a different convention on its row group: rows enumerate `(i_1, ..., i_s)`
//! with `i_1` fastest, columns enumerate `(i_{s+1}, ..., i_d)` with `i_d`
//! fastest. With this layout the interface-matrix recursions
//! `A_{<=s} = (I_{n_s} ⊗ A_{<=s-1}) G_s^<` and
//! `A_{>=s+1} = G_{s+1}^> (I_{n_{s+1}} ⊗ A_{>=s+2})` hold verbatim.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest number of entries a dense tensor may hold (2 GiB of `f64`).
pub const MAX_DENSE_ENTRIES: u128 = 1 << 28;

/// Mode sizes `(n_1, ..., n_d)` of a tensor, `d >= 2`, every `n_s >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidShape(format!(
                "order must be at least 2, got {}",
                dims.len()
            )));
        }
        if dims.iter().any(|&n| n == 0) {
            return Err(Error::InvalidShape(format!("zero extent in {dims:?}")));
        }
        Ok(Shape(dims))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// Total number of entries, rejecting shapes beyond [`MAX_DENSE_ENTRIES`].
    pub fn numel(&self) -> Result<usize> {
        let total = self.0.iter().map(|&n| n as u128).product::<u128>();
        if total > MAX_DENSE_ENTRIES {
            return Err(Error::TooLarge { entries: total });
        }
        Ok(total as usize)
    }

    pub fn check_index(&self, index: &[usize]) -> Result<()> {
        if index.len() != self.0.len() || index.iter().zip(&self.0).any(|(&i, &n)| i >= n) {
            return Err(Error::IndexOutOfBounds {
                index: index.to_vec(),
                dims: self.0.clone(),
            });
        }
        Ok(())
    }

    /// Storage position of a multi-index (last index fastest).
    pub fn linear_index(&self, index: &[usize]) -> Result<usize> {
        self.check_index(index)?;
        Ok(index
            .iter()
            .zip(&self.0)
            .fold(0usize, |acc, (&i, &n)| acc * n + i))
    }

    pub fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        let mut idx = vec![0; self.0.len()];
        for (slot, &n) in idx.iter_mut().zip(&self.0).rev() {
            *slot = linear % n;
            linear /= n;
        }
        idx
    }

    /// Iterates over all multi-indices in storage order.
    pub fn indices(&self) -> MultiIndexIter {
        MultiIndexIter::new(self.0.clone())
    }
}

/// Odometer over `[0, n_1) x ... x [0, n_k)`, last position fastest.
#[derive(Debug, Clone)]
pub struct MultiIndexIter {
    dims: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl MultiIndexIter {
    pub fn new(dims: Vec<usize>) -> Self {
        let current = if dims.iter().any(|&n| n == 0) {
            None
        } else {
            Some(vec![0; dims.len()])
        };
        MultiIndexIter { dims, current }
    }
}

impl Iterator for MultiIndexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().expect("checked above");
        let mut pos = self.dims.len();
        loop {
            if pos == 0 {
                self.current = None;
                break;
            }
            pos -= 1;
            cur[pos] += 1;
            if cur[pos] < self.dims[pos] {
                break;
            }
            cur[pos] = 0;
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Shape,
    values: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Shape, values: Vec<f64>) -> Result<Self> {
        let numel = shape.numel()?;
        if values.len() != numel {
            return Err(Error::InvalidShape(format!(
                "{} values supplied for {} entries",
                values.len(),
                numel
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dense tensor values".into()));
        }
        Ok(DenseTensor { shape, values })
    }

    pub fn from_dims(dims: &[usize], values: Vec<f64>) -> Result<Self> {
        DenseTensor::new(Shape::new(dims.to_vec())?, values)
    }

    pub fn zeros(shape: Shape) -> Result<Self> {
        let numel = shape.numel()?;
        Ok(DenseTensor {
            shape,
            values: vec![0.0; numel],
        })
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        shape.numel()?;
        let values = shape.indices().map(|idx| f(&idx)).collect();
        DenseTensor::new(shape, values)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn order(&self) -> usize {
        self.shape.order()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, index: &[usize]) -> Result<f64> {
        Ok(self.values[self.shape.linear_index(index)?])
    }

    /// Entrywise maximum norm.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> DenseTensor {
        DenseTensor {
            shape: self.shape.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    fn check_same_shape(&self, other: &DenseTensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: self.dims().to_vec(),
                found: other.dims().to_vec(),
            });
        }
        Ok(())
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.check_same_shape(other)?;
        Ok(DenseTensor {
            shape: self.shape.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.check_same_shape(other)?;
        Ok(DenseTensor {
            shape: self.shape.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// `max |self - other|` over all entries.
    pub fn max_abs_diff(&self, other: &DenseTensor) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn frobenius_diff(&self, other: &DenseTensor) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// The s-th unfolding, `1 <= s <= d - 1`.
    pub fn unfold(&self, split: usize) -> Result<UnfoldingMatrix> {
        let d = self.order();
        if split == 0 || split >= d {
            return Err(Error::InvalidSplit { split, order: d });
        }
        let dims = self.dims();
        let rows: usize = dims[..split].iter().product();
        let cols: usize = dims[split..].iter().product();
        let mut m = DMatrix::zeros(rows, cols);
        for (lin, &v) in self.values.iter().enumerate() {
            let col = lin % cols;
            // `high` enumerates (i_1..i_s) with i_s fastest; the row index wants i_1 fastest.
            let mut high = lin / cols;
            let mut row = 0;
            let mut stride: usize = rows;
            for &n in dims[..split].iter().rev() {
                stride /= n;
                row += (high % n) * stride;
                high /= n;
            }
            m[(row, col)] = v;
        }
        Ok(UnfoldingMatrix { split, matrix: m })
    }

    /// Rebuilds a tensor from its s-th unfolding (inverse of [`DenseTensor::unfold`]).
    pub fn fold(shape: Shape, split: usize, matrix: &DMatrix<f64>) -> Result<DenseTensor> {
        let d = shape.order();
        if split == 0 || split >= d {
            return Err(Error::InvalidSplit { split, order: d });
        }
        let dims = shape.dims().to_vec();
        let rows: usize = dims[..split].iter().product();
        let cols: usize = dims[split..].iter().product();
        if matrix.shape() != (rows, cols) {
            return Err(Error::DimensionMismatch(format!(
                "unfolding is {:?}, shape needs {rows}x{cols}",
                matrix.shape()
            )));
        }
        DenseTensor::from_fn(shape, |idx| {
            let (r, c) = unfolding_position(&dims, split, idx);
            matrix[(r, c)]
        })
    }
}

/// (row, column) of a multi-index in the s-th unfolding.
pub fn unfolding_position(dims: &[usize], split: usize, index: &[usize]) -> (usize, usize) {
    let mut row = 0;
    let mut stride = 1;
    for t in 0..split {
        row += index[t] * stride;
        stride *= dims[t];
    }
    let col = index[split..]
        .iter()
        .zip(&dims[split..])
        .fold(0usize, |acc, (&i, &n)| acc * n + i);
    (row, col)
}

/// The s-th unfolding `A^{<s>}` of a dense tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldingMatrix {
    pub split: usize,
    pub matrix: DMatrix<f64>,
}

impl UnfoldingMatrix {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }
}
