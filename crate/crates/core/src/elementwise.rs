//! Entry-wise arithmetic with broadcasting, reductions, inner and outer
//! products.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{strides_of, DenseTensor, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    #[inline]
    fn apply<T: Scalar>(self, a: T, b: T) -> T {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
        }
    }
}

/// Operand alignment for a broadcast binary operation. The shorter extent
/// list is padded with trailing 1s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BroadcastedShape {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub result: Shape,
}

impl BroadcastedShape {
    pub fn new(left: &Shape, right: &Shape) -> Result<Self> {
        let n = left.order().max(right.order());
        let pad = |s: &Shape| {
            let mut v = s.extents().to_vec();
            v.resize(n, 1);
            v
        };
        let (l, r) = (pad(left), pad(right));
        let mut out = Vec::with_capacity(n);
        for (&a, &b) in l.iter().zip(&r) {
            if a != b && a != 1 && b != 1 {
                return Err(Error::shape(format!(
                    "shapes {left} and {right} violate the broadcast condition"
                )));
            }
            out.push(a.max(b));
        }
        Ok(BroadcastedShape {
            left: l,
            right: r,
            result: Shape::new(out)?,
        })
    }
}

/// Strides into an operand that repeat along its size-1 modes.
fn broadcast_strides(ext: &[usize]) -> Vec<usize> {
    strides_of(ext)
        .into_iter()
        .zip(ext)
        .map(|(s, &e)| if e == 1 { 0 } else { s })
        .collect()
}

/// Entry-wise `x op y` with broadcasting.
pub fn ew_binary<T: Scalar>(
    op: BinaryOp,
    x: &DenseTensor<T>,
    y: &DenseTensor<T>,
) -> Result<DenseTensor<T>> {
    let b = BroadcastedShape::new(x.shape(), y.shape())?;
    if op == BinaryOp::Div {
        if let Some(off) = y.data().iter().position(|v| *v == T::zero()) {
            return Err(Error::DivisionByZero {
                index: y.shape().multi_index_of_offset(off),
            });
        }
    }
    if x.shape() == y.shape() {
        let data = x
            .data()
            .iter()
            .zip(y.data())
            .map(|(&a, &c)| op.apply(a, c))
            .collect();
        return Ok(DenseTensor::from_parts(b.result, data));
    }
    let ext = b.result.extents().to_vec();
    let (sx, sy) = (broadcast_strides(&b.left), broadcast_strides(&b.right));
    let n = ext.len();
    let total = b.result.numel();
    let mut data = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    let (mut ox, mut oy) = (0usize, 0usize);
    for _ in 0..total {
        data.push(op.apply(x.data()[ox], y.data()[oy]));
        for k in 0..n {
            idx[k] += 1;
            ox += sx[k];
            oy += sy[k];
            if idx[k] < ext[k] {
                break;
            }
            ox -= sx[k] * ext[k];
            oy -= sy[k] * ext[k];
            idx[k] = 0;
        }
    }
    Ok(DenseTensor::from_parts(b.result, data))
}

pub fn add<T: Scalar>(x: &DenseTensor<T>, y: &DenseTensor<T>) -> Result<DenseTensor<T>> {
    ew_binary(BinaryOp::Add, x, y)
}

pub fn sub<T: Scalar>(x: &DenseTensor<T>, y: &DenseTensor<T>) -> Result<DenseTensor<T>> {
    ew_binary(BinaryOp::Sub, x, y)
}

/// Hadamard product.
pub fn hadamard<T: Scalar>(x: &DenseTensor<T>, y: &DenseTensor<T>) -> Result<DenseTensor<T>> {
    ew_binary(BinaryOp::Mul, x, y)
}

pub fn divide<T: Scalar>(x: &DenseTensor<T>, y: &DenseTensor<T>) -> Result<DenseTensor<T>> {
    ew_binary(BinaryOp::Div, x, y)
}

pub fn scale<T: Scalar>(a: T, x: &DenseTensor<T>) -> DenseTensor<T> {
    x.map(|v| a * v)
}

pub fn inner<T: Scalar>(x: &DenseTensor<T>, y: &DenseTensor<T>) -> Result<T> {
    if x.shape() != y.shape() {
        return Err(Error::shape(format!(
            "inner product needs equal shapes, got {} and {}",
            x.shape(),
            y.shape()
        )));
    }
    Ok(x.data().iter().zip(y.data()).map(|(&a, &b)| a * b).sum())
}

/// Frobenius norm. Falls back to a scaled sum when the plain sum of squares
/// overflows or underflows.
pub fn frobenius_norm<T: Scalar>(x: &DenseTensor<T>) -> T {
    let plain: T = x.data().iter().map(|&v| v * v).sum();
    if plain.is_finite() && plain >= T::min_positive_value() {
        return plain.sqrt();
    }
    let m = x.max_abs();
    if m == T::zero() || !m.is_finite() {
        return m;
    }
    let s: T = x.data().iter().map(|&v| (v / m) * (v / m)).sum();
    m * s.sqrt()
}

pub fn sum_all<T: Scalar>(x: &DenseTensor<T>) -> T {
    x.data().iter().copied().sum()
}

/// Outer product of vectors: `X(i_1, ..., i_N) = prod_n v_n(i_n)`.
pub fn outer<T: Scalar>(vs: &[&DenseTensor<T>]) -> Result<DenseTensor<T>> {
    if vs.is_empty() {
        return Err(Error::arg("outer product of an empty list"));
    }
    if let Some(k) = vs.iter().position(|v| v.order() != 1) {
        return Err(Error::shape(format!(
            "outer product operand {} has shape {}, expected a vector",
            k + 1,
            vs[k].shape()
        )));
    }
    let mut data: Vec<T> = vs[0].data().to_vec();
    for v in &vs[1..] {
        let mut next = Vec::with_capacity(data.len() * v.numel());
        for &b in v.data() {
            next.extend(data.iter().map(|&a| a * b));
        }
        data = next;
    }
    let ext: Vec<usize> = vs.iter().map(|v| v.numel()).collect();
    DenseTensor::new(ext, data)
}
