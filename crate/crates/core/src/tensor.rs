//! Dense N-th order tensors stored in vectorization order.
//!
//! Entry `(i_1, ..., i_N)` lives at flat position
//! `1 + sum_n (i_n - 1) * prod_{m<n} I_m`, i.e. the first index varies
//! fastest. All public indices are 1-based; offsets are 0-based and private.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Ordered list of mode extents. Every extent is at least 1; an empty list is
/// the shape of a scalar.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(extents: impl Into<Vec<usize>>) -> Result<Self> {
        let extents = extents.into();
        if let Some(mode) = extents.iter().position(|&e| e == 0) {
            return Err(Error::shape(format!(
                "extent of mode {} is 0; extents must be positive",
                mode + 1
            )));
        }
        Ok(Shape(extents))
    }

    pub fn scalar() -> Self {
        Shape(Vec::new())
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn extents(&self) -> &[usize] {
        &self.0
    }

    /// Element count, the empty product being 1.
    #[inline]
    pub fn numel(&self) -> usize {
        self.0.iter().product()
    }

    /// Extent of 1-based mode `n`.
    pub fn extent(&self, n: usize) -> Result<usize> {
        if n == 0 || n > self.order() {
            return Err(Error::arg(format!(
                "mode {n} out of range 1..={}",
                self.order()
            )));
        }
        Ok(self.0[n - 1])
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        strides_of(&self.0)
    }

    /// 1-based multi-index to 1-based flat index.
    pub fn linear_index(&self, idx: &[usize]) -> Result<usize> {
        Ok(self.offset(idx)? + 1)
    }

    /// 1-based flat index to 1-based multi-index.
    pub fn multi_index(&self, flat: usize) -> Result<Vec<usize>> {
        let len = self.numel();
        if flat == 0 || flat > len {
            return Err(Error::FlatBounds { flat, len });
        }
        Ok(self.multi_index_of_offset(flat - 1))
    }

    pub(crate) fn offset(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.order() {
            return Err(Error::arg(format!(
                "index has {} entries but tensor has order {}",
                idx.len(),
                self.order()
            )));
        }
        let mut off = 0;
        let mut stride = 1;
        for (n, (&i, &e)) in idx.iter().zip(&self.0).enumerate() {
            if i == 0 || i > e {
                return Err(Error::Bounds {
                    mode: n + 1,
                    index: i,
                    extent: e,
                });
            }
            off += (i - 1) * stride;
            stride *= e;
        }
        Ok(off)
    }

    pub(crate) fn multi_index_of_offset(&self, mut off: usize) -> Vec<usize> {
        self.0
            .iter()
            .map(|&e| {
                let i = off % e;
                off /= e;
                i + 1
            })
            .collect()
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Anything that can be validated into a [`Shape`].
pub trait IntoShape {
    fn into_shape(self) -> Result<Shape>;
}

impl IntoShape for Shape {
    fn into_shape(self) -> Result<Shape> {
        Ok(self)
    }
}

impl IntoShape for &Shape {
    fn into_shape(self) -> Result<Shape> {
        Ok(self.clone())
    }
}

impl IntoShape for Vec<usize> {
    fn into_shape(self) -> Result<Shape> {
        Shape::new(self)
    }
}

impl IntoShape for &[usize] {
    fn into_shape(self) -> Result<Shape> {
        Shape::new(self.to_vec())
    }
}

impl<const N: usize> IntoShape for [usize; N] {
    fn into_shape(self) -> Result<Shape> {
        Shape::new(self.to_vec())
    }
}

pub(crate) fn strides_of(extents: &[usize]) -> Vec<usize> {
    let mut s = Vec::with_capacity(extents.len());
    let mut acc = 1;
    for &e in extents {
        s.push(acc);
        acc *= e;
    }
    s
}

/// 1-based flat position of a 1-based multi-index.
pub fn linear_index(idx: &[usize], shape: &Shape) -> Result<usize> {
    shape.linear_index(idx)
}

/// Inverse of [`linear_index`].
pub fn multi_index(flat: usize, shape: &Shape) -> Result<Vec<usize>> {
    shape.multi_index(flat)
}

/// Copies a strided view of `src` into a fresh buffer in vectorization order.
pub(crate) fn gather<T: Copy>(
    extents: &[usize],
    src_strides: &[usize],
    base: usize,
    src: &[T],
) -> Vec<T> {
    let total: usize = extents.iter().product();
    let mut out = Vec::with_capacity(total);
    if total == 0 {
        return out;
    }
    let n = extents.len();
    let mut idx = vec![0usize; n];
    let mut off = base;
    for _ in 0..total {
        out.push(src[off]);
        for k in 0..n {
            idx[k] += 1;
            off += src_strides[k];
            if idx[k] < extents[k] {
                break;
            }
            off -= src_strides[k] * extents[k];
            idx[k] = 0;
        }
    }
    out
}

/// Per-mode selection used by [`DenseTensor::subtensor`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexRange {
    /// A single 1-based index; the mode is dropped from the result.
    At(usize),
    /// Closed 1-based range `m:n`.
    Span(usize, usize),
    /// The whole mode (`:`).
    All,
}

/// Dense tensor of real scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor<T> {
    shape: Shape,
    data: Vec<T>,
}

impl<T: Scalar> DenseTensor<T> {
    /// Builds a tensor from entries already in vectorization order.
    pub fn new(shape: impl IntoShape, data: Vec<T>) -> Result<Self> {
        let shape = shape.into_shape()?;
        if data.len() != shape.numel() {
            return Err(Error::shape(format!(
                "shape {shape} needs {} entries, got {}",
                shape.numel(),
                data.len()
            )));
        }
        Ok(DenseTensor { shape, data })
    }

    pub(crate) fn from_parts(shape: Shape, data: Vec<T>) -> Self {
        debug_assert_eq!(shape.numel(), data.len());
        DenseTensor { shape, data }
    }

    pub fn scalar(v: T) -> Self {
        DenseTensor {
            shape: Shape::scalar(),
            data: vec![v],
        }
    }

    /// Order-1 tensor (column vector).
    pub fn vector(v: Vec<T>) -> Result<Self> {
        Self::new(vec![v.len()], v)
    }

    /// Matrix from column-major data.
    pub fn matrix(rows: usize, cols: usize, col_major: Vec<T>) -> Result<Self> {
        Self::new(vec![rows, cols], col_major)
    }

    /// Matrix from a list of rows (convenient for literals).
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::shape("ragged rows"));
        }
        let mut data = Vec::with_capacity(r * c);
        for j in 0..c {
            for row in rows {
                data.push(row[j]);
            }
        }
        Self::new(vec![r, c], data)
    }

    /// Tensor whose entry at each 1-based multi-index is `f(index)`.
    pub fn from_fn(
        shape: impl IntoShape,
        mut f: impl FnMut(&[usize]) -> T,
    ) -> Result<Self> {
        let shape = shape.into_shape()?;
        let n = shape.order();
        let total = shape.numel();
        let mut idx = vec![1usize; n];
        let mut data = Vec::with_capacity(total);
        for _ in 0..total {
            data.push(f(&idx));
            for k in 0..n {
                idx[k] += 1;
                if idx[k] <= shape.0[k] {
                    break;
                }
                idx[k] = 1;
            }
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn full(shape: impl IntoShape, v: T) -> Result<Self> {
        let shape = shape.into_shape()?;
        let data = vec![v; shape.numel()];
        Ok(DenseTensor { shape, data })
    }

    pub fn zeros(shape: impl IntoShape) -> Result<Self> {
        Self::full(shape, T::zero())
    }

    /// All-ones tensor.
    pub fn ones(shape: impl IntoShape) -> Result<Self> {
        Self::full(shape, T::one())
    }

    /// Entries `1, 2, 3, ...` in vectorization order.
    pub fn ramp(shape: impl IntoShape) -> Result<Self> {
        let shape = shape.into_shape()?;
        let data = (1..=shape.numel()).map(T::from_usize_lossy).collect();
        Ok(DenseTensor { shape, data })
    }

    /// Standard basis vector `e_i` of length `len`.
    pub fn one_hot(len: usize, i: usize) -> Result<Self> {
        let mut t = Self::zeros(vec![len])?;
        t.set(&[i], T::one())?;
        Ok(t)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(vec![n, n], |ix| if ix[0] == ix[1] { T::one() } else { T::zero() })
    }

    /// Matrix unit `E_ij` of the given size: a single 1 at `(i, j)`.
    pub fn matrix_unit(rows: usize, cols: usize, i: usize, j: usize) -> Result<Self> {
        let mut t = Self::zeros(vec![rows, cols])?;
        t.set(&[i, j], T::one())?;
        Ok(t)
    }

    /// Order-`order` tensor of extent `r` in every mode with `weights[r]` at
    /// `(r, ..., r)` (all ones when `weights` is `None`).
    pub fn super_diagonal(order: usize, r: usize, weights: Option<&[T]>) -> Result<Self> {
        if r == 0 || order == 0 {
            return Err(Error::arg("super-diagonal order and size must be positive"));
        }
        if let Some(w) = weights {
            if w.len() != r {
                return Err(Error::arg(format!(
                    "expected {r} super-diagonal weights, got {}",
                    w.len()
                )));
            }
        }
        let shape = Shape::new(vec![r; order])?;
        let mut data = vec![T::zero(); shape.numel()];
        let step: usize = strides_of(shape.extents()).iter().sum();
        for k in 0..r {
            data[k * step] = weights.map_or(T::one(), |w| w[k]);
        }
        Ok(DenseTensor { shape, data })
    }

    /// The folding operator for `shape` as a tensor of shape `(shape..., T)`,
    /// `T = numel(shape)`: the tensorized `T x T` identity. Contracting its last
    /// mode with a length-`T` vector folds that vector into `shape`.
    pub fn folding_operator(shape: impl IntoShape) -> Result<Self> {
        let shape = shape.into_shape()?;
        let t = shape.numel();
        let mut ext = shape.extents().to_vec();
        ext.push(t);
        Self::identity(t)?.reshape(ext)
    }

    #[inline]
    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    #[inline]
    pub fn extents(&self) -> &[usize] {
        self.shape.extents()
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.shape.order()
    }

    #[inline]
    pub fn numel(&self) -> usize {
        self.data.len()
    }

    /// Entries in vectorization order.
    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, idx: &[usize]) -> Result<T> {
        Ok(self.data[self.shape.offset(idx)?])
    }

    pub fn set(&mut self, idx: &[usize], v: T) -> Result<()> {
        let off = self.shape.offset(idx)?;
        self.data[off] = v;
        Ok(())
    }

    /// Value of an order-0 (or single-entry) tensor.
    pub fn to_scalar(&self) -> Result<T> {
        if self.data.len() != 1 {
            return Err(Error::shape(format!(
                "tensor of shape {} is not a scalar",
                self.shape
            )));
        }
        Ok(self.data[0])
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Converts every entry to another scalar type.
    pub fn cast<U: Scalar>(&self) -> DenseTensor<U> {
        DenseTensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .map(|&x| U::from_f64(x.as_f64()).unwrap_or_else(U::nan))
                .collect(),
        }
    }

    /// Reinterprets the buffer under a new shape with the same element count.
    pub fn reshape(&self, target: impl IntoShape) -> Result<Self> {
        let target = target.into_shape()?;
        if target.numel() != self.numel() {
            return Err(Error::shape(format!(
                "cannot reshape {} entries of {} into {target}",
                self.numel(),
                self.shape
            )));
        }
        Ok(DenseTensor {
            shape: target,
            data: self.data.clone(),
        })
    }

    /// Mode permutation with a 1-based permutation `p`: the result has shape
    /// `(I_p(1), ..., I_p(N))` and `Y(i_p(1), ..., i_p(N)) = X(i_1, ..., i_N)`.
    pub fn permute(&self, p: &[usize]) -> Result<Self> {
        check_permutation(p, self.order())?;
        let strides = self.shape.strides();
        let ext: Vec<usize> = p.iter().map(|&k| self.shape.0[k - 1]).collect();
        let src_strides: Vec<usize> = p.iter().map(|&k| strides[k - 1]).collect();
        let data = gather(&ext, &src_strides, 0, &self.data);
        Ok(DenseTensor {
            shape: Shape(ext),
            data,
        })
    }

    /// Vectorization. Storage order already is vectorization order.
    pub fn vec(&self) -> Self {
        DenseTensor {
            shape: Shape(vec![self.numel()]),
            data: self.data.clone(),
        }
    }

    /// Folding (tensorization): inverse of [`vec`](Self::vec).
    pub fn fold(&self, target: impl IntoShape) -> Result<Self> {
        if self.order() > 1 {
            return Err(Error::shape(format!(
                "fold expects a vector, got shape {}",
                self.shape
            )));
        }
        self.reshape(target)
    }

    /// Mode-`n` matricization `X_(n)` of shape `(I_n, prod_{k != n} I_k)`.
    pub fn matricize(&self, n: usize) -> Result<Self> {
        let rows = self.shape.extent(n)?;
        let p = front_permutation(self.order(), n);
        let permuted = self.permute(&p)?;
        let cols = self.numel() / rows;
        Ok(DenseTensor {
            shape: Shape(vec![rows, cols]),
            data: permuted.data,
        })
    }

    /// Inverse of [`matricize`](Self::matricize): folds an `(I_n, rest)`
    /// matrix back into `target`.
    pub fn unmatricize(
        m: &Self,
        n: usize,
        target: impl IntoShape,
    ) -> Result<Self> {
        let target = target.into_shape()?;
        let rows = target.extent(n)?;
        if m.order() != 2 || m.extents()[0] != rows || m.numel() != target.numel() {
            return Err(Error::shape(format!(
                "matrix of shape {} is not a mode-{n} matricization of {target}",
                m.shape
            )));
        }
        let p = front_permutation(target.order(), n);
        let permuted_ext: Vec<usize> = p.iter().map(|&k| target.0[k - 1]).collect();
        let permuted = DenseTensor {
            shape: Shape(permuted_ext),
            data: m.data.clone(),
        };
        permuted.permute(&inverse_permutation(&p))
    }

    /// `k`-unfolding `X_<k>` of shape `(I_1...I_k, I_{k+1}...I_N)`; a pure
    /// reinterpretation of the buffer.
    pub fn k_unfold(&self, k: usize) -> Result<Self> {
        let n = self.order();
        if k == 0 || k >= n {
            return Err(Error::arg(format!(
                "split point {k} out of range 1..={}",
                n.saturating_sub(1)
            )));
        }
        let rows: usize = self.shape.0[..k].iter().product();
        let cols = self.numel() / rows;
        Ok(DenseTensor {
            shape: Shape(vec![rows, cols]),
            data: self.data.clone(),
        })
    }

    /// Copies out a sub-tensor. Modes selected with [`IndexRange::At`] are
    /// dropped; a single fiber comes back as an order-1 tensor.
    pub fn subtensor(&self, sel: &[IndexRange]) -> Result<Self> {
        if sel.len() != self.order() {
            return Err(Error::arg(format!(
                "selection has {} entries but tensor has order {}",
                sel.len(),
                self.order()
            )));
        }
        let strides = self.shape.strides();
        let mut base = 0;
        let mut ext = Vec::new();
        let mut sub_strides = Vec::new();
        for (k, (s, &e)) in sel.iter().zip(&self.shape.0).enumerate() {
            let bounds = |i: usize| {
                if i == 0 || i > e {
                    Err(Error::Bounds {
                        mode: k + 1,
                        index: i,
                        extent: e,
                    })
                } else {
                    Ok(())
                }
            };
            match *s {
                IndexRange::At(i) => {
                    bounds(i)?;
                    base += (i - 1) * strides[k];
                }
                IndexRange::Span(m, n) => {
                    bounds(m)?;
                    bounds(n)?;
                    if m > n {
                        return Err(Error::arg(format!(
                            "empty range {m}:{n} on mode {}",
                            k + 1
                        )));
                    }
                    base += (m - 1) * strides[k];
                    ext.push(n - m + 1);
                    sub_strides.push(strides[k]);
                }
                IndexRange::All => {
                    ext.push(e);
                    sub_strides.push(strides[k]);
                }
            }
        }
        let data = gather(&ext, &sub_strides, base, &self.data);
        Ok(DenseTensor {
            shape: Shape(ext),
            data,
        })
    }

    /// Matrix transpose.
    pub fn transpose(&self) -> Result<Self> {
        if self.order() != 2 {
            return Err(Error::shape(format!(
                "transpose expects a matrix, got shape {}",
                self.shape
            )));
        }
        self.permute(&[2, 1])
    }

    /// Largest absolute entry-wise difference; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        if self.shape != other.shape {
            return T::infinity();
        }
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &a| m.max(a.abs()))
    }

    pub(crate) fn rows(&self) -> usize {
        self.shape.0[0]
    }

    pub(crate) fn cols(&self) -> usize {
        self.shape.0[1]
    }

    /// 0-based matrix entry.
    #[inline]
    pub(crate) fn m(&self, i: usize, j: usize) -> T {
        self.data[i + j * self.shape.0[0]]
    }

    #[inline]
    pub(crate) fn m_set(&mut self, i: usize, j: usize, v: T) {
        let r = self.shape.0[0];
        self.data[i + j * r] = v;
    }

    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub(crate) fn expect_matrix(&self, what: &str) -> Result<(usize, usize)> {
        if self.order() != 2 {
            return Err(Error::shape(format!(
                "{what} expects a matrix, got shape {}",
                self.shape
            )));
        }
        Ok((self.rows(), self.cols()))
    }
}

/// Checks that `p` is a 1-based permutation of `1..=n`.
pub(crate) fn check_permutation(p: &[usize], n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::arg(format!(
            "permutation {p:?} has length {} but tensor has order {n}",
            p.len()
        )));
    }
    let mut seen = vec![false; n];
    for &k in p {
        if k == 0 || k > n || seen[k - 1] {
            return Err(Error::arg(format!("{p:?} is not a permutation of 1..={n}")));
        }
        seen[k - 1] = true;
    }
    Ok(())
}

/// Inverse of a 1-based permutation.
pub fn inverse_permutation(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (k, &pk) in p.iter().enumerate() {
        inv[pk - 1] = k + 1;
    }
    inv
}

/// `[n, 1, ..., n-1, n+1, ..., N]`
fn front_permutation(order: usize, n: usize) -> Vec<usize> {
    std::iter::once(n)
        .chain((1..=order).filter(|&k| k != n))
        .collect()
}
