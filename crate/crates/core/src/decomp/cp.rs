use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::elementwise::{frobenius_norm, hadamard, sub};
use crate::error::{Error, Result};
use crate::factor::pinv;
use crate::products::{gemm, khatri_rao_all, matmul, matmul_tn};
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

/// Weighted sum of `R` rank-one tensors: `sum_r weights[r] a_r^(1) o ... o a_r^(N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CpModel<T> {
    pub weights: Vec<T>,
    /// Factor `n` is `I_n x R`.
    pub factors: Vec<DenseTensor<T>>,
}

impl<T: Scalar> CpModel<T> {
    pub fn new(weights: Vec<T>, factors: Vec<DenseTensor<T>>) -> Result<Self> {
        let m = CpModel { weights, factors };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.weights.len();
        if r == 0 {
            return Err(Error::Model("CP model has rank 0".into()));
        }
        if self.factors.is_empty() {
            return Err(Error::Model("CP model has no factors".into()));
        }
        for (n, f) in self.factors.iter().enumerate() {
            if f.order() != 2 || f.cols() != r {
                return Err(Error::Model(format!(
                    "factor {} has shape {}, expected {} columns",
                    n + 1,
                    f.shape(),
                    r
                )));
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn extents(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.rows()).collect()
    }

    /// Rescales every factor column to unit norm, moving the scale into the
    /// weights. A zero column becomes the first unit vector with weight 0.
    pub fn normalize(&mut self) {
        for r in 0..self.rank() {
            let mut w = self.weights[r];
            for f in &mut self.factors {
                let rows = f.rows();
                let col = &mut f.data_mut()[r * rows..(r + 1) * rows];
                let norm = col.iter().map(|&x| x * x).sum::<T>().sqrt();
                if norm > T::zero() {
                    col.iter_mut().for_each(|x| *x /= norm);
                    w *= norm;
                } else {
                    col.iter_mut().for_each(|x| *x = T::zero());
                    col[0] = T::one();
                    w = T::zero();
                }
            }
            self.weights[r] = w;
        }
    }
}

/// `vec(X) = (A_N ⊙ ... ⊙ A_1) weights`, folded to the model's shape.
pub fn cp_reconstruct<T: Scalar>(m: &CpModel<T>) -> Result<DenseTensor<T>> {
    m.validate()?;
    let rev: Vec<&DenseTensor<T>> = m.factors.iter().rev().collect();
    let kr = khatri_rao_all(&rev)?;
    let data = gemm(kr.rows(), m.rank(), 1, kr.data(), &m.weights);
    DenseTensor::new(m.extents(), data)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CpOptions {
    pub max_sweeps: usize,
    /// Stop once the fit `1 - ||X - X̂|| / ||X||` changes by less than this.
    pub tol: f64,
    pub seed: u64,
    /// Independent random starts; the best final fit wins.
    pub restarts: usize,
}

impl Default for CpOptions {
    fn default() -> Self {
        CpOptions {
            max_sweeps: 200,
            tol: 1e-8,
            seed: 0,
            restarts: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CpFit<T> {
    pub model: CpModel<T>,
    /// `||X - X̂||_F` after each sweep of the winning start.
    pub objective: Vec<T>,
    pub rel_error: T,
    /// Objective traces of every start, in draw order.
    pub starts: Vec<Vec<T>>,
}

impl<T: Scalar> CpFit<T> {
    pub fn sweeps(&self) -> usize {
        self.objective.len()
    }
}

/// CP decomposition by alternating least squares.
pub fn cp_als<T: Scalar>(x: &DenseTensor<T>, rank: usize, opts: &CpOptions) -> Result<CpFit<T>> {
    if x.order() < 3 {
        return Err(Error::arg(format!(
            "cp_als needs a tensor of order >= 3, got order {}",
            x.order()
        )));
    }
    if rank == 0 || rank > x.numel() {
        return Err(Error::arg(format!(
            "CP rank {rank} out of range 1..={}",
            x.numel()
        )));
    }
    if opts.restarts == 0 || opts.max_sweeps == 0 {
        return Err(Error::arg("cp_als needs at least one start and one sweep"));
    }
    let unfoldings = (1..=x.order())
        .map(|n| x.matricize(n))
        .collect::<Result<Vec<_>>>()?;
    let xnorm = frobenius_norm(x);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<CpFit<T>> = None;
    let mut starts = Vec::with_capacity(opts.restarts);
    for _ in 0..opts.restarts {
        let factors = x
            .extents()
            .iter()
            .map(|&i| {
                let data = (0..i * rank)
                    .map(|_| T::lit(StandardNormal.sample(&mut rng)))
                    .collect();
                DenseTensor::matrix(i, rank, data)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut model = CpModel::new(vec![T::one(); rank], factors)?;
        let fit = als_run(x, xnorm, &unfoldings, &mut model, opts)?;
        starts.push(fit.objective.clone());
        if best.as_ref().is_none_or(|b| fit.rel_error < b.rel_error) {
            best = Some(fit);
        }
    }
    let mut best = best.expect("at least one start");
    best.starts = starts;
    Ok(best)
}

fn relative<T: Scalar>(err: T, xnorm: T) -> T {
    if xnorm > T::zero() {
        err / xnorm
    } else {
        err
    }
}

fn als_run<T: Scalar>(
    x: &DenseTensor<T>,
    xnorm: T,
    unfoldings: &[DenseTensor<T>],
    model: &mut CpModel<T>,
    opts: &CpOptions,
) -> Result<CpFit<T>> {
    let order = x.order();
    let tol = T::lit(opts.tol);
    let mut objective = Vec::new();
    let mut prev_fit: Option<T> = None;
    for _ in 0..opts.max_sweeps {
        // the weights are folded into whichever factor is solved first
        for n in 0..order {
            let others: Vec<&DenseTensor<T>> =
                (0..order).rev().filter(|&k| k != n).map(|k| &model.factors[k]).collect();
            let kr = khatri_rao_all(&others)?;
            let mut gram: Option<DenseTensor<T>> = None;
            for f in &others {
                let g = matmul_tn(f, f);
                gram = Some(match gram {
                    None => g,
                    Some(acc) => hadamard(&acc, &g)?,
                });
            }
            let gram = gram.expect("order >= 3");
            let rhs = matmul(&unfoldings[n], &kr)?;
            model.factors[n] = matmul(&rhs, &pinv(&gram)?)?;
        }
        model.weights.iter_mut().for_each(|w| *w = T::one());
        model.normalize();

        let err = frobenius_norm(&sub(x, &cp_reconstruct(model)?)?);
        if !err.is_finite() {
            return Err(Error::Numeric("CP-ALS objective is not finite".into()));
        }
        objective.push(err);
        let fit = T::one() - relative(err, xnorm);
        if let Some(p) = prev_fit {
            if (fit - p).abs() < tol {
                break;
            }
        }
        prev_fit = Some(fit);
    }
    let last = *objective.last().expect("at least one sweep");
    Ok(CpFit {
        model: model.clone(),
        objective,
        rel_error: relative(last, xnorm),
        starts: Vec::new(),
    })
}
