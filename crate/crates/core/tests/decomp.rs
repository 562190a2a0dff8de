mod common;

use common::{randn, rel, rng};
use tenkit::decomp::{
    cp_als, cp_reconstruct, hosvd, load_model, save_model, tr_reconstruct, truncated_hosvd,
    tt_orthogonalize, tt_reconstruct, tt_svd, tucker_orthogonalize, tucker_reconstruct, CpModel,
    CpOptions, Model, TrRing, TtTrain, TuckerModel,
};
use tenkit::elementwise::frobenius_norm;
use tenkit::factor::pinv;
use tenkit::products::{matmul, mode_product};
use tenkit::{Tensor, Tensor32};

/// A well-conditioned square matrix: identity plus a small perturbation.
fn gauge(g: &mut rand_chacha::ChaCha8Rng, n: usize) -> Tensor {
    let p = randn(g, &[n, n]).map(|v| 0.2 * v);
    tenkit::elementwise::add(&Tensor::identity(n).unwrap(), &p).unwrap()
}

fn planted_tucker(seed: u64, ext: &[usize], ranks: &[usize]) -> TuckerModel<f64> {
    let mut g = rng(seed);
    let core = randn(&mut g, ranks);
    let factors = ext.iter().zip(ranks).map(|(&i, &r)| randn(&mut g, &[i, r])).collect();
    TuckerModel::new(core, factors).unwrap()
}

#[test]
fn tucker_gauge_leaves_the_tensor_unchanged() {
    let mut g = rng(1);
    let m = planted_tucker(2, &[4, 5, 3], &[2, 3, 2]);
    let x = tucker_reconstruct(&m).unwrap();
    // A_n -> A_n M, G -> G x_n M^-1
    let mut core = m.core.clone();
    let mut factors = m.factors.clone();
    for n in 0..3 {
        let gm = gauge(&mut g, m.ranks()[n]);
        factors[n] = matmul(&factors[n], &gm).unwrap();
        core = mode_product(&core, &pinv(&gm).unwrap(), n + 1).unwrap();
    }
    let moved = TuckerModel::new(core, factors).unwrap();
    assert!(rel(&tucker_reconstruct(&moved).unwrap(), &x) <= 1e-12);

    let o = tucker_orthogonalize(&moved).unwrap();
    assert!(rel(&tucker_reconstruct(&o).unwrap(), &x) <= 1e-12);
    for f in &o.factors {
        let gram = matmul(&f.transpose().unwrap(), f).unwrap();
        assert!(gram.max_abs_diff(&Tensor::identity(f.extents()[1]).unwrap()) <= 1e-12);
    }
    // orthonormal factors keep the norm in the core
    assert!((frobenius_norm(&o.core) - frobenius_norm(&x)).abs() <= 1e-12 * frobenius_norm(&x));
}

#[test]
fn truncated_hosvd_recovers_planted_multilinear_rank() {
    for seed in 0..20 {
        let m = planted_tucker(seed, &[5, 4, 6, 3], &[2, 3, 2, 2]);
        let x = tucker_reconstruct(&m).unwrap();
        let t = truncated_hosvd(&x, &[2, 3, 2, 2]).unwrap();
        assert!(rel(&tucker_reconstruct(&t).unwrap(), &x) <= 1e-10, "seed {seed}");
        let full = hosvd(&x).unwrap();
        assert_eq!(full.ranks(), vec![5, 4, 6, 3]);
    }
}

fn planted_train(seed: u64, ext: &[usize], ranks: &[usize]) -> TtTrain<f64> {
    let mut g = rng(seed);
    let cores = ext
        .iter()
        .enumerate()
        .map(|(n, &i)| randn(&mut g, &[ranks[n], i, ranks[n + 1]]))
        .collect();
    TtTrain::new(cores).unwrap()
}

#[test]
fn tt_bond_gauge_leaves_the_tensor_unchanged() {
    let mut g = rng(5);
    let t = planted_train(6, &[3, 4, 3, 2], &[1, 2, 3, 2, 1]);
    let x = tt_reconstruct(&t).unwrap();
    let mut cores = t.cores.clone();
    for k in 1..4 {
        // insert M M^-1 on bond k
        let r = cores[k - 1].extents()[2];
        let gm = gauge(&mut g, r);
        cores[k - 1] = mode_product(&cores[k - 1], &gm.transpose().unwrap(), 3).unwrap();
        cores[k] = mode_product(&cores[k], &pinv(&gm).unwrap(), 1).unwrap();
    }
    let moved = TtTrain::new(cores).unwrap();
    assert!(rel(&tt_reconstruct(&moved).unwrap(), &x) <= 1e-12);
    assert_eq!(tt_svd(&x, None, None).unwrap().train.ranks(), vec![1, 2, 3, 2, 1]);
}

#[test]
fn every_pivot_keeps_the_tensor_and_carries_the_norm() {
    let t = planted_train(7, &[2, 3, 4, 3, 2], &[1, 2, 3, 3, 2, 1]);
    let x = tt_reconstruct(&t).unwrap();
    let xn = frobenius_norm(&x);
    for pivot in 1..=5 {
        let o = tt_orthogonalize(&t, pivot).unwrap();
        assert!(rel(&tt_reconstruct(&o).unwrap(), &x) <= 1e-12);
        assert!((frobenius_norm(&o.cores[pivot - 1]) - xn).abs() <= 1e-12 * xn);
    }
}

#[test]
fn tt_rank_caps_follow_the_unfolding_ranks() {
    let mut g = rng(8);
    let x = randn(&mut g, &[3, 4, 5]);
    let exact = tt_svd(&x, None, None).unwrap();
    assert_eq!(exact.train.ranks(), vec![1, 3, 5, 1]);
    let capped = tt_svd(&x, Some(&[2, 2]), None).unwrap();
    assert_eq!(capped.train.ranks(), vec![1, 2, 2, 1]);
    let err = frobenius_norm(&tenkit::elementwise::sub(&x, &tt_reconstruct(&capped.train).unwrap()).unwrap());
    // sequential truncation: the error is bounded by the discarded norm
    assert!(err <= capped.discarded * (1.0 + 1e-12));
}

#[test]
fn ring_with_unit_wrap_is_a_train() {
    let t = planted_train(9, &[2, 3, 2], &[1, 2, 2, 1]);
    let r = TrRing::new(t.cores.clone()).unwrap();
    assert!(rel(&tr_reconstruct(&r).unwrap(), &tt_reconstruct(&t).unwrap()) <= 1e-14);
}

#[test]
fn cp_scaling_gauge_leaves_the_tensor_unchanged() {
    let mut g = rng(10);
    let factors: Vec<Tensor> = (0..3).map(|_| randn(&mut g, &[3, 2])).collect();
    let m = CpModel::new(vec![1.5, 0.5], factors.clone()).unwrap();
    let x = cp_reconstruct(&m).unwrap();
    // scale column r of A_1 by c and of A_2 by 1/c
    let d1 = Tensor::from_rows(&[vec![2.0, 0.0], vec![0.0, -3.0]]).unwrap();
    let d2 = Tensor::from_rows(&[vec![0.5, 0.0], vec![0.0, -1.0 / 3.0]]).unwrap();
    let moved = CpModel::new(
        vec![1.5, 0.5],
        vec![matmul(&factors[0], &d1).unwrap(), matmul(&factors[1], &d2).unwrap(), factors[2].clone()],
    )
    .unwrap();
    assert!(rel(&cp_reconstruct(&moved).unwrap(), &x) <= 1e-14);
    let mut n = moved.clone();
    n.normalize();
    assert!(rel(&cp_reconstruct(&n).unwrap(), &x) <= 1e-14);
}

#[test]
fn cp_is_reproducible_for_a_seed() {
    let x = cp_reconstruct(&CpModel::new(
        vec![1.0, 1.0],
        (0..3).map(|k| randn(&mut rng(20 + k), &[3, 2])).collect(),
    )
    .unwrap())
    .unwrap();
    let opts = CpOptions { seed: 3, ..CpOptions::default() };
    let a = cp_als(&x, 2, &opts).unwrap();
    let b = cp_als(&x, 2, &opts).unwrap();
    assert_eq!(a.objective, b.objective);
    assert_eq!(a.model, b.model);
    assert_eq!(a.starts.len(), 3);
}

#[test]
fn saved_models_round_trip() {
    let dir = std::env::temp_dir().join(format!("tenkit-decomp-{}", std::process::id()));
    let t = planted_train(11, &[2, 3, 2], &[1, 2, 2, 1]);
    let models = [
        Model::Tucker(planted_tucker(12, &[3, 2, 2], &[2, 2, 1])),
        Model::Tt(t.clone()),
        Model::Tr(TrRing::new(planted_train(13, &[2, 2, 2], &[2, 2, 3, 2]).cores).unwrap()),
        Model::Cp(CpModel::new(vec![2.0], vec![Tensor::ramp(vec![2, 1]).unwrap(); 3]).unwrap()),
    ];
    for (k, m) in models.iter().enumerate() {
        let d = dir.join(k.to_string());
        save_model(&d, m).unwrap();
        let back: Model<f64> = load_model(&d).unwrap();
        assert_eq!(back.kind(), m.kind());
        assert_eq!(back.ranks(), m.ranks());
        assert_eq!(back.reconstruct().unwrap(), m.reconstruct().unwrap());
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn single_precision_hosvd() {
    let x: Tensor32 = randn(&mut rng(14), &[3, 4, 2]).cast();
    let m = hosvd(&x).unwrap();
    let y = tucker_reconstruct(&m).unwrap();
    assert!(y.max_abs_diff(&x) <= 1e-5);
}
