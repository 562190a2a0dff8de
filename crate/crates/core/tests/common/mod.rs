#![allow(dead_code)]

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tenkit::elementwise::{frobenius_norm, sub};
use tenkit::Tensor;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn randn(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    Tensor::new(shape.to_vec(), data).unwrap()
}

pub fn rel(got: &Tensor, want: &Tensor) -> f64 {
    let d = frobenius_norm(&sub(got, want).unwrap());
    let n = frobenius_norm(want);
    if n > 0.0 {
        d / n
    } else {
        d
    }
}

/// A tensor with the given extents and entries in [-10, 10].
pub fn tensor_with(ext: Vec<usize>) -> impl Strategy<Value = Tensor> {
    let n: usize = ext.iter().product();
    prop::collection::vec(-10.0f64..10.0, n).prop_map(move |d| Tensor::new(ext.clone(), d).unwrap())
}

/// Random order in `orders`, extents in 1..=`max_extent`.
pub fn tensor(orders: std::ops::RangeInclusive<usize>, max_extent: usize) -> impl Strategy<Value = Tensor> {
    prop::collection::vec(1usize..=max_extent, orders).prop_flat_map(tensor_with)
}

pub fn matrix(max: usize) -> impl Strategy<Value = Tensor> {
    (1usize..=max, 1usize..=max).prop_flat_map(|(r, c)| tensor_with(vec![r, c]))
}
