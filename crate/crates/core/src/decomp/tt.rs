use crate::elementwise::frobenius_norm;
use crate::error::{Error, Result};
use crate::factor::{default_rank_tol, qr, svd};
use crate::products::{matmul, tt_chain};
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

/// Chain of order-3 cores; core `n` is `R_{n-1} x I_n x R_n`.
///
/// A full train has `R_0 = R_N = 1`. Sub-trains produced by [`tt_split`]
/// expose the cut bond at one end.
#[derive(Clone, Debug, PartialEq)]
pub struct TtTrain<T> {
    pub cores: Vec<DenseTensor<T>>,
}

impl<T: Scalar> TtTrain<T> {
    pub fn new(cores: Vec<DenseTensor<T>>) -> Result<Self> {
        let t = TtTrain { cores };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cores.is_empty() {
            return Err(Error::Model("train has no cores".into()));
        }
        for (n, c) in self.cores.iter().enumerate() {
            if c.order() != 3 {
                return Err(Error::Model(format!(
                    "core {} has order {}, expected 3",
                    n + 1,
                    c.order()
                )));
            }
        }
        for (n, w) in self.cores.windows(2).enumerate() {
            if w[0].extents()[2] != w[1].extents()[0] {
                return Err(Error::Model(format!(
                    "bond {} has extent {} on core {} but {} on core {}",
                    n + 1,
                    w[0].extents()[2],
                    n + 1,
                    w[1].extents()[0],
                    n + 2
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    /// Bond extents `(R_0, ..., R_N)`.
    pub fn ranks(&self) -> Vec<usize> {
        let mut r = vec![self.cores[0].extents()[0]];
        r.extend(self.cores.iter().map(|c| c.extents()[2]));
        r
    }

    /// Physical extents `(I_1, ..., I_N)`.
    pub fn extents(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.extents()[1]).collect()
    }

    /// Whether both boundary bonds are 1.
    pub fn is_full(&self) -> bool {
        let r = self.ranks();
        r[0] == 1 && r[r.len() - 1] == 1
    }
}

/// Contracts every bond, keeping the boundary modes:
/// shape `(R_0, I_1, ..., I_N, R_N)`.
pub fn tt_contract<T: Scalar>(t: &TtTrain<T>) -> Result<DenseTensor<T>> {
    t.validate()?;
    let refs: Vec<&DenseTensor<T>> = t.cores.iter().collect();
    tt_chain(&refs)
}

pub fn tt_reconstruct<T: Scalar>(t: &TtTrain<T>) -> Result<DenseTensor<T>> {
    t.validate()?;
    if !t.is_full() {
        return Err(Error::Model(format!(
            "boundary bonds are {:?}; a full train needs both equal to 1",
            (t.ranks()[0], t.ranks()[t.len()])
        )));
    }
    tt_contract(t)?.reshape(t.extents())
}

/// Result of [`tt_svd`].
#[derive(Clone, Debug)]
pub struct TtSvd<T> {
    pub train: TtTrain<T>,
    /// `sqrt` of the sum of all discarded squared singular values.
    pub discarded: T,
}

/// TT-SVD: peels one mode at a time off the remainder with an SVD.
///
/// Each internal bond keeps the singular values above the default numerical
/// rank threshold, further limited by `max_ranks[k]` (one entry per internal
/// bond) and by `tol`: at each split the trailing singular values are dropped
/// while their combined norm stays within `tol * ||X||_F`.
pub fn tt_svd<T: Scalar>(
    x: &DenseTensor<T>,
    max_ranks: Option<&[usize]>,
    tol: Option<T>,
) -> Result<TtSvd<T>> {
    let order = x.order();
    if order < 2 {
        return Err(Error::arg(format!("tt_svd needs order >= 2, got {order}")));
    }
    if let Some(m) = max_ranks {
        if m.len() != order - 1 {
            return Err(Error::arg(format!(
                "{} rank caps for {} internal bonds",
                m.len(),
                order - 1
            )));
        }
        if m.contains(&0) {
            return Err(Error::arg("rank caps must be positive"));
        }
    }
    if let Some(t) = tol {
        if t.is_nan() || t < T::zero() {
            return Err(Error::arg("tolerance must be nonnegative"));
        }
    }
    let budget = tol.map(|t| t * frobenius_norm(x));
    let ext = x.extents();
    let mut rest = x.data().to_vec();
    let mut r_prev = 1;
    let mut cores = Vec::with_capacity(order);
    let mut discarded_sq = T::zero();
    for k in 0..order - 1 {
        let rows = r_prev * ext[k];
        let cols = rest.len() / rows;
        let s = svd(&DenseTensor::matrix(rows, cols, rest)?)?;
        let cut = default_rank_tol(&s.sigma, rows, cols);
        let mut r = s.sigma.iter().filter(|&&v| v > cut).count().max(1);
        if let Some(m) = max_ranks {
            r = r.min(m[k]);
        }
        if let Some(b) = budget {
            let b2 = b * b;
            let mut tail = s.sigma[r..].iter().map(|&v| v * v).sum::<T>();
            while r > 1 && tail + s.sigma[r - 1] * s.sigma[r - 1] <= b2 {
                r -= 1;
                tail += s.sigma[r] * s.sigma[r];
            }
        }
        discarded_sq += s.sigma[r..].iter().map(|&v| v * v).sum::<T>();
        let s = s.truncate(r)?;
        cores.push(s.u.reshape(vec![r_prev, ext[k], r])?);
        rest = s.sigma_vt().into_data();
        r_prev = r;
    }
    cores.push(DenseTensor::new(vec![r_prev, ext[order - 1], 1], rest)?);
    Ok(TtSvd {
        train: TtTrain::new(cores)?,
        discarded: discarded_sq.sqrt(),
    })
}

/// `M = Q R` with orthonormal columns in `Q`; falls back to the SVD for wide
/// `M`, which shrinks the bond to the row count.
fn orthonormal_split<T: Scalar>(m: &DenseTensor<T>) -> Result<(DenseTensor<T>, DenseTensor<T>)> {
    if m.rows() >= m.cols() {
        let f = qr(m)?;
        Ok((f.q, f.r))
    } else {
        let s = svd(m)?;
        let r = s.sigma_vt();
        Ok((s.u, r))
    }
}

/// Orthogonalizes every core except `pivot` (1-based): cores to its left
/// become left-orthonormal, cores to its right right-orthonormal.
pub fn tt_orthogonalize<T: Scalar>(t: &TtTrain<T>, pivot: usize) -> Result<TtTrain<T>> {
    t.validate()?;
    let n = t.len();
    if pivot == 0 || pivot > n {
        return Err(Error::arg(format!("pivot {pivot} out of range 1..={n}")));
    }
    let mut cores = t.cores.clone();
    for k in 0..pivot - 1 {
        let [a, i, b] = [cores[k].extents()[0], cores[k].extents()[1], cores[k].extents()[2]];
        let (q, r) = orthonormal_split(&cores[k].reshape(vec![a * i, b])?)?;
        let m = q.cols();
        cores[k] = q.reshape(vec![a, i, m])?;
        let [_, i2, c] = [cores[k + 1].extents()[0], cores[k + 1].extents()[1], cores[k + 1].extents()[2]];
        let next = matmul(&r, &cores[k + 1].reshape(vec![b, i2 * c])?)?;
        cores[k + 1] = next.reshape(vec![m, i2, c])?;
    }
    for k in (pivot..n).rev() {
        let [a, i, b] = [cores[k].extents()[0], cores[k].extents()[1], cores[k].extents()[2]];
        let (q, r) = orthonormal_split(&cores[k].reshape(vec![a, i * b])?.transpose()?)?;
        let m = q.cols();
        cores[k] = q.transpose()?.reshape(vec![m, i, b])?;
        let [p, i0, _] = [cores[k - 1].extents()[0], cores[k - 1].extents()[1], cores[k - 1].extents()[2]];
        let prev = matmul(&cores[k - 1].reshape(vec![p * i0, a])?, &r.transpose()?)?;
        cores[k - 1] = prev.reshape(vec![p, i0, m])?;
    }
    TtTrain::new(cores)
}

/// Splits before core `k` (1-based, `2 <= k <= N`) into the sub-trains
/// `G^{<k}` and `G^{>=k}`, which share bond `R_{k-1}`.
pub fn tt_split<T: Scalar>(t: &TtTrain<T>, k: usize) -> Result<(TtTrain<T>, TtTrain<T>)> {
    t.validate()?;
    if k < 2 || k > t.len() {
        return Err(Error::arg(format!(
            "split point {k} out of range 2..={}",
            t.len()
        )));
    }
    let left = TtTrain::new(t.cores[..k - 1].to_vec())?;
    let right = TtTrain::new(t.cores[k - 1..].to_vec())?;
    Ok((left, right))
}
