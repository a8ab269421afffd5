//! Dense and sparse tensor storage, index arithmetic and matricization.
//!
//! Storage is row-major (last index fastest) with 0-based linear offsets.
//! Public multi-index arguments are 1-based, matching the usual math notation
//! for `A(i_1, ..., i_k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Extents of a k-way array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Shape {
    dims: Vec<usize>,
    total: usize,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Shape("order must be at least 1".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::Shape(format!("dimension {} is zero", pos + 1)));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Shape(format!("total size of {dims:?} overflows")))?;
        Ok(Self { dims, total })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Order k of the tensor.
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn dim(&self, mode: usize) -> usize {
        self.dims[mode]
    }

    pub fn max_dim(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(1)
    }

    /// Row-major linear offset of a 1-based multi-index.
    pub fn linear_index(&self, multi: &[usize]) -> Result<usize> {
        if multi.len() != self.dims.len()
            || multi.iter().zip(&self.dims).any(|(&i, &d)| i == 0 || i > d)
        {
            return Err(Error::Index {
                index: multi.to_vec(),
                dims: self.dims.clone(),
            });
        }
        Ok(multi
            .iter()
            .zip(&self.dims)
            .fold(0usize, |acc, (&i, &d)| acc * d + (i - 1)))
    }

    /// Inverse of [`Shape::linear_index`]: the 1-based multi-index of an offset.
    pub fn multi_index(&self, linear: usize) -> Result<Vec<usize>> {
        if linear >= self.total {
            return Err(Error::Index {
                index: vec![linear],
                dims: self.dims.clone(),
            });
        }
        let mut out = vec![0; self.dims.len()];
        self.decode_into(linear, &mut out);
        for i in &mut out {
            *i += 1;
        }
        Ok(out)
    }

    /// 0-based decode without bounds checks; `out.len()` must equal the order.
    pub(crate) fn decode_into(&self, mut linear: usize, out: &mut [usize]) {
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = linear % d;
            linear /= d;
        }
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode == 0 || mode > self.order() {
            return Err(Error::Mode {
                mode,
                order: self.order(),
            });
        }
        Ok(())
    }

    /// Layout of the 1-based mode-`mode` unfolding.
    pub fn unfolding(&self, mode: usize) -> Result<Unfolding> {
        self.check_mode(mode)?;
        let j = mode - 1;
        let suffix: usize = self.dims[j + 1..].iter().product();
        Ok(Unfolding {
            rows: self.dims[j],
            cols: self.total / self.dims[j],
            suffix,
        })
    }
}

impl TryFrom<Vec<usize>> for Shape {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Shape::new(dims)
    }
}

impl From<Shape> for Vec<usize> {
    fn from(shape: Shape) -> Self {
        shape.dims
    }
}

/// Maps tensor offsets to `(row, col)` of a mode unfolding.
///
/// Column order is the one where the remaining indices keep their relative
/// order and the last one varies fastest, so for row-major storage the
/// column is `prefix * suffix + tail` of the split `linear = (prefix * d_j + i_j) * suffix + tail`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Unfolding {
    pub rows: usize,
    pub cols: usize,
    suffix: usize,
}

impl Unfolding {
    #[inline]
    pub fn position(&self, linear: usize) -> (usize, usize) {
        let tail = linear % self.suffix;
        let rest = linear / self.suffix;
        let row = rest % self.rows;
        let prefix = rest / self.rows;
        (row, prefix * self.suffix + tail)
    }

    #[inline]
    pub fn linear(&self, row: usize, col: usize) -> usize {
        let prefix = col / self.suffix;
        let tail = col % self.suffix;
        (prefix * self.rows + row) * self.suffix + tail
    }
}

/// Dense k-way array of finite `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Shape,
    values: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Shape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.total() {
            return Err(Error::Shape(format!(
                "{} values supplied for shape {:?} (total {})",
                values.len(),
                shape.dims(),
                shape.total()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { shape, values })
    }

    pub fn zeros(shape: Shape) -> Self {
        let values = vec![0.0; shape.total()];
        Self { shape, values }
    }

    /// Builds a tensor from a function of the 0-based multi-index.
    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let mut idx = vec![0; shape.order()];
        let values = (0..shape.total())
            .map(|l| {
                shape.decode_into(l, &mut idx);
                f(&idx)
            })
            .collect();
        Self::new(shape, values)
    }

    pub(crate) fn from_parts_unchecked(shape: Shape, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), shape.total());
        Self { shape, values }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Entry at a 1-based multi-index.
    pub fn get(&self, multi: &[usize]) -> Result<f64> {
        Ok(self.values[self.shape.linear_index(multi)?])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }

    /// Mode-`mode` (1-based) unfolding, materialized as a new matrix.
    pub fn matricize(&self, mode: usize) -> Result<Matrix> {
        let unf = self.shape.unfolding(mode)?;
        let mut out = vec![0.0; self.values.len()];
        for (l, &v) in self.values.iter().enumerate() {
            let (r, c) = unf.position(l);
            out[r * unf.cols + c] = v;
        }
        Ok(Matrix::from_parts_unchecked(unf.rows, unf.cols, out))
    }

    /// Inverse of [`DenseTensor::matricize`].
    pub fn from_matricization(shape: Shape, mode: usize, m: &Matrix) -> Result<Self> {
        let unf = shape.unfolding(mode)?;
        if m.rows() != unf.rows || m.cols() != unf.cols {
            return Err(Error::Shape(format!(
                "matrix is {}x{}, mode-{mode} unfolding of {:?} is {}x{}",
                m.rows(),
                m.cols(),
                shape.dims(),
                unf.rows,
                unf.cols
            )));
        }
        let mut values = vec![0.0; shape.total()];
        for r in 0..unf.rows {
            for (c, &v) in m.row(r).iter().enumerate() {
                values[unf.linear(r, c)] = v;
            }
        }
        Ok(Self::from_parts_unchecked(shape, values))
    }

    /// Exact sparse copy; only exact zeros are dropped.
    pub fn to_sparse(&self) -> SparseTensor {
        let entries = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(l, &v)| (l, v))
            .collect();
        SparseTensor::from_parts_unchecked(self.shape.clone(), entries)
    }

    /// Element-wise `self - other`.
    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape.dims(),
                other.shape.dims()
            )));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self::from_parts_unchecked(self.shape.clone(), values))
    }

    /// View a 2-way tensor as a matrix.
    pub fn to_matrix(&self) -> Result<Matrix> {
        if self.shape.order() != 2 {
            return Err(Error::Shape(format!(
                "expected a 2-way tensor, got order {}",
                self.shape.order()
            )));
        }
        Ok(Matrix::from_parts_unchecked(
            self.shape.dim(0),
            self.shape.dim(1),
            self.values.clone(),
        ))
    }
}

/// Coordinate-format tensor: `(linear offset, value)` pairs sorted by offset.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTensor {
    shape: Shape,
    entries: Vec<(usize, f64)>,
}

impl SparseTensor {
    pub fn new(shape: Shape, entries: Vec<(usize, f64)>) -> Result<Self> {
        let mut prev: Option<usize> = None;
        for &(l, v) in &entries {
            if l >= shape.total() {
                return Err(Error::Index {
                    index: vec![l],
                    dims: shape.dims().to_vec(),
                });
            }
            if prev.is_some_and(|p| p >= l) {
                return Err(Error::Contract(format!(
                    "sparse entries not strictly increasing at offset {l}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(l));
            }
            if v == 0.0 {
                return Err(Error::Contract(format!("explicit zero stored at offset {l}")));
            }
            prev = Some(l);
        }
        Ok(Self { shape, entries })
    }

    pub fn empty(shape: Shape) -> Self {
        Self {
            shape,
            entries: Vec::new(),
        }
    }

    pub(crate) fn from_parts_unchecked(shape: Shape, entries: Vec<(usize, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|&(_, v)| v != 0.0 && v.is_finite()));
        Self { shape, entries }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> DenseTensor {
        let mut values = vec![0.0; self.shape.total()];
        for &(l, v) in &self.entries {
            values[l] = v;
        }
        DenseTensor::from_parts_unchecked(self.shape.clone(), values)
    }

    /// Mode unfolding as a column-sorted sparse matrix.
    pub fn matricize(&self, mode: usize) -> Result<SparseMatrix> {
        let unf = self.shape.unfolding(mode)?;
        let mut triplets: Vec<(usize, usize, f64)> = self
            .entries
            .iter()
            .map(|&(l, v)| {
                let (r, c) = unf.position(l);
                (r, c, v)
            })
            .collect();
        triplets.sort_unstable_by_key(|&(r, c, _)| (c, r));
        Ok(SparseMatrix {
            rows: unf.rows,
            cols: unf.cols,
            triplets,
        })
    }
}

/// Free-function form of [`DenseTensor::to_sparse`].
pub fn sparsify_exact(a: &DenseTensor) -> SparseTensor {
    a.to_sparse()
}

/// Free-function form of [`SparseTensor::to_dense`].
pub fn densify(s: &SparseTensor) -> DenseTensor {
    s.to_dense()
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("matrix dims {rows}x{cols} must be positive")));
        }
        if values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.values[i * n + i] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(r, c));
            }
        }
        Self { rows, cols, values }
    }

    pub(crate) fn from_parts_unchecked(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        Self { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.values[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let orow = &mut out.values[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self^T * other`.
    pub fn t_matmul(&self, other: &Matrix) -> Result<Matrix> {
        self.transpose().matmul(other)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "shape mismatch {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Matrix::from_parts_unchecked(self.rows, self.cols, values))
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix::from_parts_unchecked(
            self.rows,
            self.cols,
            self.values.iter().map(|v| v * s).collect(),
        )
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// First `n` columns as a new matrix.
    pub fn leading_columns(&self, n: usize) -> Matrix {
        Matrix::from_fn(self.rows, n, |r, c| self.get(r, c))
    }

    /// The matrix as a 2-way dense tensor.
    pub fn to_tensor(&self) -> DenseTensor {
        let shape = Shape::new(vec![self.rows, self.cols]).expect("matrix dims are positive");
        DenseTensor::from_parts_unchecked(shape, self.values.clone())
    }
}

/// Sparse matrix in triplet form, sorted by `(col, row)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.triplets {
            m.set(r, c, v);
        }
        m
    }

    /// `self * other^T` through a merge over the shared column index.
    pub fn mul_transpose(&self, other: &SparseMatrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::Shape(format!(
                "column counts differ: {} vs {}",
                self.cols, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.rows);
        let (a, b) = (&self.triplets, &other.triplets);
        let (mut i, mut k) = (0, 0);
        while i < a.len() && k < b.len() {
            let (ca, cb) = (a[i].1, b[k].1);
            if ca < cb {
                i += 1;
            } else if cb < ca {
                k += 1;
            } else {
                let i_end = i + a[i..].iter().take_while(|t| t.1 == ca).count();
                let k_end = k + b[k..].iter().take_while(|t| t.1 == ca).count();
                for &(ra, _, va) in &a[i..i_end] {
                    let orow = out.row_mut(ra);
                    for &(rb, _, vb) in &b[k..k_end] {
                        orow[rb] += va * vb;
                    }
                }
                i = i_end;
                k = k_end;
            }
        }
        Ok(out)
    }
}
