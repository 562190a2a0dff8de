//! Matrix, Kronecker, Khatri-Rao, mode, general tensor and TT products.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{DenseTensor, Shape};

/// `C = A * B` for column-major `m x k` and `k x n` buffers.
pub(crate) fn gemm<T: Scalar>(m: usize, k: usize, n: usize, a: &[T], b: &[T]) -> Vec<T> {
    let mut c = vec![T::zero(); m * n];
    for j in 0..n {
        let col = &mut c[j * m..(j + 1) * m];
        for p in 0..k {
            let bpj = b[p + j * k];
            let acol = &a[p * m..(p + 1) * m];
            for (ci, &ai) in col.iter_mut().zip(acol) {
                *ci += ai * bpj;
            }
        }
    }
    c
}

pub fn matmul<T: Scalar>(a: &DenseTensor<T>, b: &DenseTensor<T>) -> Result<DenseTensor<T>> {
    let (m, k) = a.expect_matrix("matmul")?;
    let (k2, n) = b.expect_matrix("matmul")?;
    if k != k2 {
        return Err(Error::shape(format!(
            "matmul of {} and {}: inner extents differ",
            a.shape(),
            b.shape()
        )));
    }
    DenseTensor::matrix(m, n, gemm(m, k, n, a.data(), b.data()))
}

/// `A^T B` without materializing the transpose.
pub(crate) fn matmul_tn<T: Scalar>(a: &DenseTensor<T>, b: &DenseTensor<T>) -> DenseTensor<T> {
    let (m, r) = (a.rows(), a.cols());
    let n = b.cols();
    debug_assert_eq!(m, b.rows());
    let mut c = vec![T::zero(); r * n];
    for j in 0..n {
        let bcol = &b.data()[j * m..(j + 1) * m];
        for i in 0..r {
            let acol = &a.data()[i * m..(i + 1) * m];
            c[i + j * r] = acol.iter().zip(bcol).map(|(&x, &y)| x * y).sum();
        }
    }
    DenseTensor::from_parts(Shape::new(vec![r, n]).expect("positive extents"), c)
}

pub fn trace<T: Scalar>(s: &DenseTensor<T>) -> Result<T> {
    let (r, c) = s.expect_matrix("trace")?;
    if r != c {
        return Err(Error::shape(format!("trace of non-square {}", s.shape())));
    }
    Ok((0..r).map(|i| s.m(i, i)).sum())
}

/// Kronecker product of an `(I, J)` and a `(P, Q)` matrix, shape `(PI, QJ)`,
/// with the index of `B` varying fastest inside each composite index.
pub fn kronecker<T: Scalar>(a: &DenseTensor<T>, b: &DenseTensor<T>) -> Result<DenseTensor<T>> {
    let (i_n, j_n) = a.expect_matrix("kronecker")?;
    let (p_n, q_n) = b.expect_matrix("kronecker")?;
    let rows = p_n * i_n;
    let mut out = DenseTensor::zeros(vec![rows, q_n * j_n])?;
    for j in 0..j_n {
        for q in 0..q_n {
            let col = q + j * q_n;
            for i in 0..i_n {
                let aij = a.m(i, j);
                for p in 0..p_n {
                    out.m_set(p + i * p_n, col, aij * b.m(p, q));
                }
            }
        }
    }
    Ok(out)
}

/// Column-wise Kronecker product of `(I, R)` and `(J, R)`, shape `(JI, R)`.
pub fn khatri_rao<T: Scalar>(a: &DenseTensor<T>, b: &DenseTensor<T>) -> Result<DenseTensor<T>> {
    let (i_n, r) = a.expect_matrix("khatri_rao")?;
    let (j_n, r2) = b.expect_matrix("khatri_rao")?;
    if r != r2 {
        return Err(Error::shape(format!(
            "khatri_rao needs equal column counts, got {} and {}",
            a.shape(),
            b.shape()
        )));
    }
    let mut data = Vec::with_capacity(i_n * j_n * r);
    for c in 0..r {
        for i in 0..i_n {
            let aic = a.m(i, c);
            data.extend((0..j_n).map(|j| aic * b.m(j, c)));
        }
    }
    DenseTensor::matrix(j_n * i_n, r, data)
}

/// Khatri-Rao product of a list, `mats[0] ⊙ mats[1] ⊙ ...`.
pub fn khatri_rao_all<T: Scalar>(mats: &[&DenseTensor<T>]) -> Result<DenseTensor<T>> {
    let (first, rest) = mats
        .split_first()
        .ok_or_else(|| Error::arg("khatri_rao of an empty list"))?;
    let mut acc = (*first).clone();
    for m in rest {
        acc = khatri_rao(&acc, m)?;
    }
    Ok(acc)
}

/// Mode-`n` product `X ×_n A`: `[X ×_n A]_(n) = A X_(n)`.
pub fn mode_product<T: Scalar>(
    x: &DenseTensor<T>,
    a: &DenseTensor<T>,
    n: usize,
) -> Result<DenseTensor<T>> {
    let (rows, cols) = a.expect_matrix("mode_product")?;
    let i_n = x.shape().extent(n)?;
    if cols != i_n {
        return Err(Error::shape(format!(
            "mode-{n} product: matrix {} does not match extent {i_n} of tensor {}",
            a.shape(),
            x.shape()
        )));
    }
    let xn = x.matricize(n)?;
    let yn = matmul(a, &xn)?;
    let mut ext = x.extents().to_vec();
    ext[n - 1] = rows;
    DenseTensor::unmatricize(&yn, n, ext)
}

/// `G × {A}`: mode products with every present matrix, applied in ascending
/// mode order. A `None` slot skips its mode (the `×_{-n}` product).
pub fn multi_mode_product<T: Scalar>(
    g: &DenseTensor<T>,
    mats: &[Option<&DenseTensor<T>>],
) -> Result<DenseTensor<T>> {
    if mats.len() != g.order() {
        return Err(Error::shape(format!(
            "{} factor slots for a tensor of order {}",
            mats.len(),
            g.order()
        )));
    }
    let mut y = g.clone();
    for (k, m) in mats.iter().enumerate() {
        if let Some(m) = m {
            y = mode_product(&y, m, k + 1)?;
        }
    }
    Ok(y)
}

/// Pairs `(n_k, m_k)` of 1-based modes contracted between a left and a right
/// operand.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ModePairing(pub Vec<(usize, usize)>);

impl ModePairing {
    pub fn new(pairs: impl Into<Vec<(usize, usize)>>) -> Self {
        ModePairing(pairs.into())
    }

    pub fn validate(&self, left: &Shape, right: &Shape) -> Result<()> {
        let mut used_l = vec![false; left.order()];
        let mut used_r = vec![false; right.order()];
        for (k, &(n, m)) in self.0.iter().enumerate() {
            let ln = left.extent(n).map_err(|_| {
                Error::arg(format!("pair {}: left mode {n} out of range", k + 1))
            })?;
            let rm = right.extent(m).map_err(|_| {
                Error::arg(format!("pair {}: right mode {m} out of range", k + 1))
            })?;
            if used_l[n - 1] || used_r[m - 1] {
                return Err(Error::arg(format!("pair {} ({n},{m}) reuses a mode", k + 1)));
            }
            used_l[n - 1] = true;
            used_r[m - 1] = true;
            if ln != rm {
                return Err(Error::shape(format!(
                    "pair {} ({n},{m}): extents {ln} and {rm} differ",
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

/// General tensor product contracting the paired modes. The result keeps the
/// free modes of `a` (ascending) followed by the free modes of `b`.
pub fn tensor_product<T: Scalar>(
    a: &DenseTensor<T>,
    b: &DenseTensor<T>,
    pairing: &ModePairing,
) -> Result<DenseTensor<T>> {
    pairing.validate(a.shape(), b.shape())?;
    let pa: Vec<usize> = pairing.0.iter().map(|p| p.0).collect();
    let pb: Vec<usize> = pairing.0.iter().map(|p| p.1).collect();
    let free_a: Vec<usize> = (1..=a.order()).filter(|k| !pa.contains(k)).collect();
    let free_b: Vec<usize> = (1..=b.order()).filter(|k| !pb.contains(k)).collect();

    let perm_a: Vec<usize> = free_a.iter().chain(&pa).copied().collect();
    let perm_b: Vec<usize> = pb.iter().chain(&free_b).copied().collect();
    let a2 = permute_if_needed(a, &perm_a)?;
    let b2 = permute_if_needed(b, &perm_b)?;

    let m: usize = free_a.iter().map(|&k| a.extents()[k - 1]).product();
    let k: usize = pa.iter().map(|&k| a.extents()[k - 1]).product();
    let n: usize = free_b.iter().map(|&k| b.extents()[k - 1]).product();
    let data = gemm(m, k, n, a2.data(), b2.data());

    let ext: Vec<usize> = free_a
        .iter()
        .map(|&k| a.extents()[k - 1])
        .chain(free_b.iter().map(|&k| b.extents()[k - 1]))
        .collect();
    DenseTensor::new(ext, data)
}

fn permute_if_needed<'a, T: Scalar>(
    x: &'a DenseTensor<T>,
    p: &[usize],
) -> Result<std::borrow::Cow<'a, DenseTensor<T>>> {
    if p.iter().enumerate().all(|(k, &v)| v == k + 1) {
        Ok(std::borrow::Cow::Borrowed(x))
    } else {
        Ok(std::borrow::Cow::Owned(x.permute(p)?))
    }
}

/// TT product: contracts the last mode of `x` with the first mode of `y`.
pub fn tt_pair_product<T: Scalar>(
    x: &DenseTensor<T>,
    y: &DenseTensor<T>,
) -> Result<DenseTensor<T>> {
    if x.order() == 0 || y.order() == 0 {
        return Err(Error::shape("TT product needs operands of order >= 1"));
    }
    let pairing = ModePairing::new(vec![(x.order(), 1)]);
    tensor_product(x, y, &pairing).map_err(|e| match e {
        Error::Shape(_) => Error::shape(format!(
            "TT product: last extent of {} differs from first extent of {}",
            x.shape(),
            y.shape()
        )),
        other => other,
    })
}

/// Left-to-right TT product of a whole chain.
pub fn tt_chain<T: Scalar>(xs: &[&DenseTensor<T>]) -> Result<DenseTensor<T>> {
    let (first, rest) = xs
        .split_first()
        .ok_or_else(|| Error::arg("TT product of an empty chain"))?;
    let mut acc = (*first).clone();
    for x in rest {
        acc = tt_pair_product(&acc, x)?;
    }
    Ok(acc)
}
