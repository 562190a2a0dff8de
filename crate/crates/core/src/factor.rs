//! Dense QR, SVD, truncated SVD, pseudo-inverse and numerical rank.
//!
//! QR uses Householder reflections; SVD uses cyclic one-sided Jacobi
//! rotations. Both are intended for the small dense matrices that appear as
//! unfoldings in tensor decompositions.

use crate::error::{Error, Result};
use crate::products::gemm;
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

/// Maximum number of Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 60;

/// Thin QR factors: `Q` is `I x J` with orthonormal columns, `R` is `J x J`
/// upper triangular with a nonnegative diagonal.
#[derive(Clone, Debug)]
pub struct QrResult<T> {
    pub q: DenseTensor<T>,
    pub r: DenseTensor<T>,
}

/// Economy SVD `M = U diag(sigma) V^T` with `sigma` nonincreasing.
#[derive(Clone, Debug)]
pub struct SvdResult<T> {
    pub u: DenseTensor<T>,
    pub sigma: Vec<T>,
    pub v: DenseTensor<T>,
}

impl<T: Scalar> SvdResult<T> {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `U diag(sigma) V^T`
    pub fn reconstruct(&self) -> DenseTensor<T> {
        let us = self.u_sigma();
        let (m, k, n) = (self.u.rows(), self.sigma.len(), self.v.rows());
        let vt = self.v.transpose().expect("matrix");
        DenseTensor::matrix(m, n, gemm(m, k, n, us.data(), vt.data())).expect("consistent shape")
    }

    /// `U diag(sigma)`
    pub fn u_sigma(&self) -> DenseTensor<T> {
        let mut us = self.u.clone();
        let m = us.rows();
        for (j, &s) in self.sigma.iter().enumerate() {
            for x in &mut us.data_mut()[j * m..(j + 1) * m] {
                *x *= s;
            }
        }
        us
    }

    /// `diag(sigma) V^T`
    pub fn sigma_vt(&self) -> DenseTensor<T> {
        let mut vt = self.v.transpose().expect("matrix");
        let k = self.sigma.len();
        for (idx, x) in vt.data_mut().iter_mut().enumerate() {
            *x *= self.sigma[idx % k];
        }
        vt
    }

    /// Keeps the leading `k` singular triples.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.sigma.len() {
            return Err(Error::arg(format!(
                "target rank {k} out of range 1..={}",
                self.sigma.len()
            )));
        }
        Ok(SvdResult {
            u: leading_columns(&self.u, k),
            sigma: self.sigma[..k].to_vec(),
            v: leading_columns(&self.v, k),
        })
    }
}

pub(crate) fn leading_columns<T: Scalar>(m: &DenseTensor<T>, k: usize) -> DenseTensor<T> {
    let r = m.rows();
    DenseTensor::matrix(r, k, m.data()[..r * k].to_vec()).expect("k within column count")
}

/// Householder QR of a tall (or square) matrix.
pub fn qr<T: Scalar>(m: &DenseTensor<T>) -> Result<QrResult<T>> {
    let (rows, cols) = m.expect_matrix("qr")?;
    if rows < cols {
        return Err(Error::shape(format!(
            "qr needs a tall matrix, got {}; transpose first",
            m.shape()
        )));
    }
    let mut a = m.data().to_vec();
    let e = balance(&mut a);
    let mut reflectors: Vec<Option<Vec<T>>> = Vec::with_capacity(cols);
    let two = T::lit(2.0);
    for k in 0..cols {
        let x = &a[k + k * rows..(k + 1) * rows];
        let norm = norm2(x);
        if norm == T::zero() {
            reflectors.push(None);
            continue;
        }
        let alpha = if x[0] > T::zero() { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vv: T = v.iter().map(|&t| t * t).sum();
        if vv == T::zero() {
            reflectors.push(None);
            continue;
        }
        for j in k..cols {
            let col = &mut a[k + j * rows..(j + 1) * rows];
            let d: T = v.iter().zip(col.iter()).map(|(&p, &q)| p * q).sum();
            let f = two * d / vv;
            for (c, &vi) in col.iter_mut().zip(&v) {
                *c -= f * vi;
            }
        }
        // the column below the diagonal is now zero up to rounding
        a[k + k * rows] = alpha;
        for i in k + 1..rows {
            a[i + k * rows] = T::zero();
        }
        reflectors.push(Some(v));
    }

    let mut r = DenseTensor::zeros(vec![cols, cols])?;
    for j in 0..cols {
        for i in 0..=j {
            r.m_set(i, j, a[i + j * rows]);
        }
    }
    let mut q = DenseTensor::zeros(vec![rows, cols])?;
    for j in 0..cols {
        q.m_set(j, j, T::one());
    }
    for (k, refl) in reflectors.iter().enumerate().rev() {
        let Some(v) = refl else { continue };
        let vv: T = v.iter().map(|&t| t * t).sum();
        for j in 0..cols {
            let col = &mut q.data_mut()[k + j * rows..(j + 1) * rows];
            let d: T = v.iter().zip(col.iter()).map(|(&p, &c)| p * c).sum();
            let f = two * d / vv;
            for (c, &vi) in col.iter_mut().zip(v) {
                *c -= f * vi;
            }
        }
    }
    for k in 0..cols {
        if r.m(k, k) < T::zero() {
            for j in k..cols {
                let v = r.m(k, j);
                r.m_set(k, j, -v);
            }
            for x in &mut q.data_mut()[k * rows..(k + 1) * rows] {
                *x = -*x;
            }
        }
    }
    scale_pow2(r.data_mut(), -e);
    Ok(QrResult { q, r })
}

/// Scales `xs` by a power of two so its largest magnitude is near one, which
/// keeps dot products of huge or tiny entries in range. Returns the exponent.
fn balance<T: Scalar>(xs: &mut [T]) -> i32 {
    let m = xs.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    if m == T::zero() || !m.is_finite() {
        return 0;
    }
    let e = -m.log2().floor().to_i32().unwrap_or(0);
    scale_pow2(xs, e);
    e
}

/// Multiplies by `2^e` in two exact half steps so neither factor overflows.
fn scale_pow2<T: Scalar>(xs: &mut [T], e: i32) {
    if e == 0 {
        return;
    }
    let two = T::lit(2.0);
    let (a, b) = (two.powi(e / 2), two.powi(e - e / 2));
    for x in xs {
        *x = *x * a * b;
    }
}

fn norm2<T: Scalar>(x: &[T]) -> T {
    let m = x.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    if m == T::zero() {
        return m;
    }
    let s: T = x.iter().map(|&v| (v / m) * (v / m)).sum();
    m * s.sqrt()
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Economy SVD by cyclic one-sided Jacobi rotations.
pub fn svd<T: Scalar>(m: &DenseTensor<T>) -> Result<SvdResult<T>> {
    let (rows, cols) = m.expect_matrix("svd")?;
    if rows < cols {
        let t = svd_tall(&m.transpose()?)?;
        return Ok(canonical_signs(SvdResult {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        }));
    }
    svd_tall(m).map(canonical_signs)
}

fn svd_tall<T: Scalar>(m: &DenseTensor<T>) -> Result<SvdResult<T>> {
    let (rows, cols) = (m.rows(), m.cols());
    let eps = T::epsilon();
    let mut a = m.data().to_vec();
    let mut v = DenseTensor::<T>::identity(cols)?.into_data();
    if !norm2(&a).is_finite() {
        return Err(Error::Numeric("svd input has non-finite entries".into()));
    }
    let e = balance(&mut a);
    let fro = norm2(&a);
    // columns below this norm are numerically zero and are not rotated
    let negligible = eps * fro;
    let negligible_sq = negligible * negligible;
    let ortho_tol = T::from_usize_lossy(rows).sqrt() * eps;

    let mut converged = cols < 2 || fro == T::zero();
    let mut sweeps = 0;
    let mut residual = T::zero();
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "one-sided Jacobi did not converge in {MAX_SWEEPS} sweeps \
                 (largest relative off-diagonal Gram entry {residual:e})"
            )));
        }
        sweeps += 1;
        residual = T::zero();
        let mut rotated = false;
        for p in 0..cols - 1 {
            for q in p + 1..cols {
                let (ap, aq) = column_pair(&mut a, rows, p, q);
                let alpha = dot(ap, ap);
                let beta = dot(aq, aq);
                if alpha <= negligible_sq || beta <= negligible_sq {
                    continue;
                }
                let gamma = dot(ap, aq);
                let scale = (alpha * beta).sqrt();
                let rel = gamma.abs() / scale;
                residual = residual.max(rel);
                if rel <= ortho_tol {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(ap, aq, c, s);
                let (vp, vq) = column_pair(&mut v, cols, p, q);
                rotate(vp, vq, c, s);
            }
        }
        converged = !rotated;
    }

    let mut sigma: Vec<T> = (0..cols)
        .map(|j| norm2(&a[j * rows..(j + 1) * rows]))
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap_or(std::cmp::Ordering::Equal));

    let mut u = vec![T::zero(); rows * cols];
    let mut vs = vec![T::zero(); cols * cols];
    let mut complete = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let s = sigma[src];
        let ucol = &mut u[dst * rows..(dst + 1) * rows];
        if s > negligible {
            for (o, &x) in ucol.iter_mut().zip(&a[src * rows..(src + 1) * rows]) {
                *o = x / s;
            }
        } else {
            complete.push(dst);
        }
        vs[dst * cols..(dst + 1) * cols].copy_from_slice(&v[src * cols..(src + 1) * cols]);
    }
    sigma = order.iter().map(|&j| sigma[j]).collect();
    scale_pow2(&mut sigma, -e);
    complete_orthonormal(&mut u, rows, &complete);

    Ok(SvdResult {
        u: DenseTensor::matrix(rows, cols, u)?,
        sigma,
        v: DenseTensor::matrix(cols, cols, vs)?,
    })
}

fn column_pair<T>(a: &mut [T], rows: usize, p: usize, q: usize) -> (&mut [T], &mut [T]) {
    debug_assert!(p < q);
    let (left, right) = a.split_at_mut(q * rows);
    (&mut left[p * rows..(p + 1) * rows], &mut right[..rows])
}

fn rotate<T: Scalar>(x: &mut [T], y: &mut [T], c: T, s: T) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (a, b) = (*xi, *yi);
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Extends the orthonormal columns of `u` to `p` columns.
pub(crate) fn extend_orthonormal<T: Scalar>(u: &DenseTensor<T>, p: usize) -> DenseTensor<T> {
    let (rows, cols) = (u.rows(), u.cols());
    debug_assert!(cols <= p && p <= rows);
    let mut buf = u.data().to_vec();
    buf.resize(rows * p, T::zero());
    let missing: Vec<usize> = (cols..p).collect();
    complete_orthonormal(&mut buf, rows, &missing);
    DenseTensor::matrix(rows, p, buf).expect("consistent shape")
}

/// Replaces the listed columns of `u` with unit vectors orthogonal to every
/// other column.
fn complete_orthonormal<T: Scalar>(u: &mut [T], rows: usize, missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let cols = u.len() / rows;
    let mut filled: Vec<bool> = (0..cols).map(|j| !missing.contains(&j)).collect();
    let mut candidate = 0;
    for &dst in missing {
        while candidate < rows {
            let mut w = vec![T::zero(); rows];
            w[candidate] = T::one();
            candidate += 1;
            for _ in 0..2 {
                for j in (0..cols).filter(|&j| filled[j]) {
                    let col = &u[j * rows..(j + 1) * rows];
                    let d = dot(col, &w);
                    for (wi, &ci) in w.iter_mut().zip(col) {
                        *wi -= d * ci;
                    }
                }
            }
            let n = norm2(&w);
            if n > T::lit(0.5) {
                for (o, wi) in u[dst * rows..(dst + 1) * rows].iter_mut().zip(&w) {
                    *o = *wi / n;
                }
                filled[dst] = true;
                break;
            }
        }
    }
}

/// Flips singular-vector pairs so the largest-magnitude entry of each
/// column of `U` is positive.
fn canonical_signs<T: Scalar>(mut s: SvdResult<T>) -> SvdResult<T> {
    let (m, n) = (s.u.rows(), s.v.rows());
    for j in 0..s.sigma.len() {
        let col = &s.u.data()[j * m..(j + 1) * m];
        let mut best = T::zero();
        let mut sign = T::one();
        for &x in col {
            if x.abs() > best {
                best = x.abs();
                sign = x.signum();
            }
        }
        if sign < T::zero() {
            for x in &mut s.u.data_mut()[j * m..(j + 1) * m] {
                *x = -*x;
            }
            for x in &mut s.v.data_mut()[j * n..(j + 1) * n] {
                *x = -*x;
            }
        }
    }
    s
}

/// Best rank-`k` approximation in the Frobenius norm.
pub fn truncated_svd<T: Scalar>(m: &DenseTensor<T>, k: usize) -> Result<SvdResult<T>> {
    let (rows, cols) = m.expect_matrix("truncated_svd")?;
    if k == 0 || k > rows.min(cols) {
        return Err(Error::arg(format!(
            "target rank {k} out of range 1..={}",
            rows.min(cols)
        )));
    }
    svd(m)?.truncate(k)
}

/// Default singular-value cutoff: `sigma_1 * max(I, J) * eps`.
pub fn default_rank_tol<T: Scalar>(sigma: &[T], rows: usize, cols: usize) -> T {
    let s1 = sigma.first().copied().unwrap_or_else(T::zero);
    s1 * T::from_usize_lossy(rows.max(cols)) * T::epsilon()
}

/// Number of singular values above `tol` (default [`default_rank_tol`]).
pub fn numerical_rank<T: Scalar>(m: &DenseTensor<T>, tol: Option<T>) -> Result<usize> {
    let s = svd(m)?;
    let tol = tol.unwrap_or_else(|| default_rank_tol(&s.sigma, m.rows(), m.cols()));
    Ok(s.sigma.iter().filter(|&&x| x > tol).count())
}

/// Moore-Penrose pseudo-inverse; singular values at or below the default
/// rank tolerance are treated as zero.
pub fn pinv<T: Scalar>(m: &DenseTensor<T>) -> Result<DenseTensor<T>> {
    let s = svd(m)?;
    let (rows, cols) = (m.rows(), m.cols());
    let tol = default_rank_tol(&s.sigma, rows, cols);
    let k = s.sigma.len();
    // V diag(1/sigma) U^T
    let mut vs = s.v.clone();
    for (j, &sj) in s.sigma.iter().enumerate() {
        let inv = if sj > tol { T::one() / sj } else { T::zero() };
        for x in &mut vs.data_mut()[j * cols..(j + 1) * cols] {
            *x *= inv;
        }
    }
    let ut = s.u.transpose()?;
    DenseTensor::matrix(cols, rows, gemm(cols, k, rows, vs.data(), ut.data()))
}
