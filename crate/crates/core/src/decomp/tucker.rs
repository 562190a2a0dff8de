use crate::error::{Error, Result};
use crate::factor::{extend_orthonormal, leading_columns, qr, svd};
use crate::products::{mode_product, multi_mode_product};
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

/// Core tensor multiplied by one factor matrix per mode.
#[derive(Clone, Debug, PartialEq)]
pub struct TuckerModel<T> {
    pub core: DenseTensor<T>,
    /// Factor `n` is `I_n x R_n`.
    pub factors: Vec<DenseTensor<T>>,
}

impl<T: Scalar> TuckerModel<T> {
    pub fn new(core: DenseTensor<T>, factors: Vec<DenseTensor<T>>) -> Result<Self> {
        let m = TuckerModel { core, factors };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.factors.len() != self.core.order() || self.factors.is_empty() {
            return Err(Error::Model(format!(
                "{} factors for a core of order {}",
                self.factors.len(),
                self.core.order()
            )));
        }
        for (n, f) in self.factors.iter().enumerate() {
            if f.order() != 2 || f.cols() != self.core.extents()[n] {
                return Err(Error::Model(format!(
                    "factor {} has shape {} but core mode {} has extent {}",
                    n + 1,
                    f.shape(),
                    n + 1,
                    self.core.extents()[n]
                )));
            }
        }
        Ok(())
    }

    /// Tucker rank `(R_1, ..., R_N)`.
    pub fn ranks(&self) -> Vec<usize> {
        self.core.extents().to_vec()
    }

    pub fn extents(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.rows()).collect()
    }
}

pub fn tucker_reconstruct<T: Scalar>(m: &TuckerModel<T>) -> Result<DenseTensor<T>> {
    m.validate()?;
    let slots: Vec<Option<&DenseTensor<T>>> = m.factors.iter().map(Some).collect();
    multi_mode_product(&m.core, &slots)
}

fn project<T: Scalar>(x: &DenseTensor<T>, factors: &[DenseTensor<T>]) -> Result<DenseTensor<T>> {
    let mut core = x.clone();
    for (n, u) in factors.iter().enumerate() {
        core = mode_product(&core, &u.transpose()?, n + 1)?;
    }
    Ok(core)
}

/// Higher-order SVD: factor `n` holds the left singular vectors of `X_(n)`
/// and the core is `X ×_1 U_1^T ... ×_N U_N^T`.
pub fn hosvd<T: Scalar>(x: &DenseTensor<T>) -> Result<TuckerModel<T>> {
    if x.order() < 2 {
        return Err(Error::arg(format!("hosvd needs order >= 2, got {}", x.order())));
    }
    let factors = (1..=x.order())
        .map(|n| Ok(svd(&x.matricize(n)?)?.u))
        .collect::<Result<Vec<_>>>()?;
    let core = project(x, &factors)?;
    TuckerModel::new(core, factors)
}

/// HOSVD keeping the leading `ranks[n]` singular vectors of each mode.
pub fn truncated_hosvd<T: Scalar>(x: &DenseTensor<T>, ranks: &[usize]) -> Result<TuckerModel<T>> {
    if x.order() < 2 {
        return Err(Error::arg(format!("hosvd needs order >= 2, got {}", x.order())));
    }
    if ranks.len() != x.order() {
        return Err(Error::arg(format!(
            "{} ranks for a tensor of order {}",
            ranks.len(),
            x.order()
        )));
    }
    let mut factors = Vec::with_capacity(ranks.len());
    for (n, (&p, &i)) in ranks.iter().zip(x.extents()).enumerate() {
        if p == 0 || p > i {
            return Err(Error::arg(format!("rank {p} for mode {} out of range 1..={i}", n + 1)));
        }
        let u = svd(&x.matricize(n + 1)?)?.u;
        factors.push(if p <= u.cols() {
            leading_columns(&u, p)
        } else {
            extend_orthonormal(&u, p)
        });
    }
    let core = project(x, &factors)?;
    TuckerModel::new(core, factors)
}

/// Replaces each factor by the `Q` of its QR factorization and moves `R`
/// into the core.
pub fn tucker_orthogonalize<T: Scalar>(m: &TuckerModel<T>) -> Result<TuckerModel<T>> {
    m.validate()?;
    let mut core = m.core.clone();
    let mut factors = Vec::with_capacity(m.factors.len());
    for (n, f) in m.factors.iter().enumerate() {
        let qr = qr(f)?;
        core = mode_product(&core, &qr.r, n + 1)?;
        factors.push(qr.q);
    }
    TuckerModel::new(core, factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{cp_reconstruct, CpModel};
    use crate::elementwise::{frobenius_norm, outer, sub};
    use crate::factor::truncated_svd;
    use crate::products::{kronecker, matmul, matmul_tn};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    type T = DenseTensor<f64>;

    fn randn(rng: &mut ChaCha8Rng, shape: Vec<usize>) -> T {
        let n: usize = shape.iter().product();
        T::new(shape, (0..n).map(|_| StandardNormal.sample(rng)).collect()).unwrap()
    }

    fn rel(a: &T, b: &T) -> f64 {
        frobenius_norm(&sub(a, b).unwrap()) / frobenius_norm(b)
    }

    fn random_model(seed: u64, extents: &[usize], ranks: &[usize]) -> TuckerModel<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let core = randn(&mut rng, ranks.to_vec());
        let factors = extents
            .iter()
            .zip(ranks)
            .map(|(&i, &r)| randn(&mut rng, vec![i, r]))
            .collect();
        TuckerModel::new(core, factors).unwrap()
    }

    #[test]
    fn super_diagonal_core_is_cp() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let factors: Vec<T> = [3, 2, 4].iter().map(|&i| randn(&mut rng, vec![i, 2])).collect();
        let w = [2.0, -0.5];
        let cp = CpModel::new(w.to_vec(), factors.clone()).unwrap();
        let tk = TuckerModel::new(T::super_diagonal(3, 2, Some(&w)).unwrap(), factors).unwrap();
        assert!(rel(&tucker_reconstruct(&tk).unwrap(), &cp_reconstruct(&cp).unwrap()) <= 1e-12);
    }

    #[test]
    fn identity_factors_give_core() {
        let core = T::ramp(vec![2, 3, 2]).unwrap();
        let factors = vec![T::identity(2).unwrap(), T::identity(3).unwrap(), T::identity(2).unwrap()];
        let m = TuckerModel::new(core.clone(), factors).unwrap();
        assert_eq!(tucker_reconstruct(&m).unwrap(), core);
    }

    #[test]
    fn first_matricization_identity() {
        let m = random_model(2, &[4, 3, 5], &[2, 3, 2]);
        let x = tucker_reconstruct(&m).unwrap();
        let (a, b, c) = (&m.factors[0], &m.factors[1], &m.factors[2]);
        let rhs = matmul(
            &matmul(a, &m.core.matricize(1).unwrap()).unwrap(),
            &kronecker(c, b).unwrap().transpose().unwrap(),
        )
        .unwrap();
        assert!(rel(&x.matricize(1).unwrap(), &rhs) <= 1e-12);
    }

    #[test]
    fn hosvd_of_rank_one() {
        let a = T::vector(vec![1.0, -2.0, 0.5]).unwrap();
        let b = T::vector(vec![3.0, 1.0]).unwrap();
        let c = T::vector(vec![0.5, 0.5, 1.0, 2.0]).unwrap();
        let x = outer(&[&a, &b, &c]).unwrap();
        let h = hosvd(&x).unwrap();
        let sigma = frobenius_norm(&a) * frobenius_norm(&b) * frobenius_norm(&c);
        assert!((h.core.get(&[1, 1, 1]).unwrap().abs() - sigma).abs() <= 1e-12 * sigma);
        let rest: f64 = h.core.data()[1..].iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(rest <= 1e-12 * sigma);
    }

    #[test]
    fn hosvd_is_exact_and_all_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = randn(&mut rng, vec![3, 4, 5]);
        let h = hosvd(&x).unwrap();
        assert!(rel(&tucker_reconstruct(&h).unwrap(), &x) <= 1e-10);
        let x2 = frobenius_norm(&x).powi(2);
        for n in 1..=3 {
            let hn = h.core.matricize(n).unwrap();
            let g = matmul(&hn, &hn.transpose().unwrap()).unwrap();
            let s = crate::factor::svd(&x.matricize(n).unwrap()).unwrap().sigma;
            for i in 0..g.rows() {
                for j in 0..g.cols() {
                    if i == j {
                        let want = s.get(i).map_or(0.0, |v| v * v);
                        assert!((g.m(i, j) - want).abs() <= 1e-10 * x2);
                    } else {
                        assert!(g.m(i, j).abs() <= 1e-10 * x2);
                    }
                }
            }
        }
    }

    #[test]
    fn truncated_hosvd_recovers_planted_ranks() {
        let m = random_model(6, &[4, 4, 4], &[2, 2, 2]);
        let x = tucker_reconstruct(&m).unwrap();
        let t = truncated_hosvd(&x, &[2, 2, 2]).unwrap();
        assert_eq!(t.ranks(), vec![2, 2, 2]);
        assert!(rel(&tucker_reconstruct(&t).unwrap(), &x) <= 1e-10);
    }

    #[test]
    fn full_ranks_match_hosvd() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = randn(&mut rng, vec![2, 3, 4]);
        assert_eq!(truncated_hosvd(&x, &[2, 3, 4]).unwrap(), hosvd(&x).unwrap());
        // a mode wider than the rest of the tensor gets a completed basis
        let y = randn(&mut rng, vec![5, 2, 2]);
        let t = truncated_hosvd(&y, &[5, 2, 2]).unwrap();
        let g = matmul_tn(&t.factors[0], &t.factors[0]);
        assert!(g.max_abs_diff(&T::identity(5).unwrap()) <= 1e-12);
        assert!(rel(&tucker_reconstruct(&t).unwrap(), &y) <= 1e-12);
    }

    #[test]
    fn truncation_error_respects_single_mode_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let x = randn(&mut rng, vec![4, 3, 5]);
            let ranks = [2, 2, 3];
            let err = frobenius_norm(
                &sub(&x, &tucker_reconstruct(&truncated_hosvd(&x, &ranks).unwrap()).unwrap()).unwrap(),
            );
            for (n, &p) in ranks.iter().enumerate() {
                let xn = x.matricize(n + 1).unwrap();
                let best = frobenius_norm(&sub(&xn, &truncated_svd(&xn, p).unwrap().reconstruct()).unwrap());
                assert!(err >= best * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn rank_errors() {
        let x = T::ones(vec![2, 3]).unwrap();
        assert!(truncated_hosvd(&x, &[0, 1]).is_err());
        assert!(truncated_hosvd(&x, &[2, 4]).is_err());
        assert!(truncated_hosvd(&x, &[2]).is_err());
        assert!(hosvd(&T::ones(vec![3]).unwrap()).is_err());
    }

    #[test]
    fn orthogonalize_keeps_reconstruction_and_moves_norm() {
        let m = random_model(12, &[5, 4, 3], &[3, 2, 2]);
        let x = tucker_reconstruct(&m).unwrap();
        let o = tucker_orthogonalize(&m).unwrap();
        assert!(rel(&tucker_reconstruct(&o).unwrap(), &x) <= 1e-12);
        for (f, i) in o.factors.iter().zip([5, 4, 3]) {
            let g = matmul_tn(f, f);
            assert!(g.max_abs_diff(&T::identity(f.cols()).unwrap()) <= 1e-12 * i as f64);
        }
        assert!((frobenius_norm(&x) - frobenius_norm(&o.core)).abs() <= 1e-10 * frobenius_norm(&x));

        // orthonormal factors stay put up to column signs
        let again = tucker_orthogonalize(&o).unwrap();
        for (f, g) in again.factors.iter().zip(&o.factors) {
            for (p, q) in f.data().iter().zip(g.data()) {
                assert!((p.abs() - q.abs()).abs() <= 1e-12);
            }
        }
        assert!(rel(&tucker_reconstruct(&again).unwrap(), &x) <= 1e-12);

        let wide = TuckerModel::new(T::ones(vec![3, 1]).unwrap(), vec![T::ones(vec![2, 3]).unwrap(), T::ones(vec![2, 1]).unwrap()]).unwrap();
        assert!(matches!(tucker_orthogonalize(&wide), Err(Error::Shape(_))));
    }
}
