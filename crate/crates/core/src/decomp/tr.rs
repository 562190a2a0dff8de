use crate::error::{Error, Result};
use crate::products::tt_chain;
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

/// Closed loop of order-3 cores `R_{n-1} x I_n x R_n` with `R_0 = R_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrRing<T> {
    pub cores: Vec<DenseTensor<T>>,
}

impl<T: Scalar> TrRing<T> {
    pub fn new(cores: Vec<DenseTensor<T>>) -> Result<Self> {
        let r = TrRing { cores };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.cores.len();
        if n == 0 {
            return Err(Error::Model("ring has no cores".into()));
        }
        for (k, c) in self.cores.iter().enumerate() {
            if c.order() != 3 {
                return Err(Error::Model(format!(
                    "core {} has order {}, expected 3",
                    k + 1,
                    c.order()
                )));
            }
        }
        for k in 0..n {
            let next = (k + 1) % n;
            let (out, inn) = (self.cores[k].extents()[2], self.cores[next].extents()[0]);
            if out != inn {
                return Err(Error::Model(format!(
                    "bond between cores {} and {} has extents {out} and {inn}",
                    k + 1,
                    next + 1
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

    /// Ring ranks `(R_0, ..., R_N)` with `R_0 = R_N`.
    pub fn ranks(&self) -> Vec<usize> {
        let mut r = vec![self.cores[0].extents()[0]];
        r.extend(self.cores.iter().map(|c| c.extents()[2]));
        r
    }

    pub fn extents(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.extents()[1]).collect()
    }

    /// The same ring read starting from core `s + 1`.
    pub fn shifted(&self, s: usize) -> Self {
        let mut cores = self.cores.clone();
        cores.rotate_left(s % self.cores.len().max(1));
        TrRing { cores }
    }
}

/// Each entry is `trace(G_1(:, i_1, :) G_2(:, i_2, :) ... G_N(:, i_N, :))`.
pub fn tr_reconstruct<T: Scalar>(r: &TrRing<T>) -> Result<DenseTensor<T>> {
    r.validate()?;
    let refs: Vec<&DenseTensor<T>> = r.cores.iter().collect();
    let chain = tt_chain(&refs)?;
    let bond = r.ranks()[0];
    let inner = chain.numel() / (bond * bond);
    let d = chain.data();
    let data = (0..inner)
        .map(|j| (0..bond).map(|a| d[a + j * bond + a * bond * inner]).sum())
        .collect();
    DenseTensor::new(r.extents(), data)
}
