mod common;

use common::{matrix, rel, tensor, tensor_with};
use proptest::prelude::*;
use tenkit::elementwise::{frobenius_norm, hadamard, inner};
use tenkit::products::{
    khatri_rao, kronecker, matmul, mode_product, tensor_product, tt_pair_product, ModePairing,
};
use tenkit::{Tensor, Tensor32};

fn pair_with_cols() -> impl Strategy<Value = (Tensor, Tensor)> {
    (1usize..=4, 1usize..=4, 1usize..=4)
        .prop_flat_map(|(m, n, r)| (tensor_with(vec![m, r]), tensor_with(vec![n, r])))
}

proptest! {
    #[test]
    fn kronecker_transpose_distributes(a in matrix(4), b in matrix(4)) {
        let lhs = kronecker(&a, &b).unwrap().transpose().unwrap();
        let rhs = kronecker(&a.transpose().unwrap(), &b.transpose().unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn kronecker_norm_multiplies(a in matrix(4), b in matrix(4)) {
        let k = frobenius_norm(&kronecker(&a, &b).unwrap());
        let want = frobenius_norm(&a) * frobenius_norm(&b);
        prop_assert!((k - want).abs() <= 1e-12 * want.max(1.0));
    }

    #[test]
    fn khatri_rao_columns_are_kronecker((a, b) in pair_with_cols()) {
        let kr = khatri_rao(&a, &b).unwrap();
        let (m, n, r) = (a.extents()[0], b.extents()[0], a.extents()[1]);
        for c in 0..r {
            let ac = Tensor::matrix(m, 1, a.data()[c * m..(c + 1) * m].to_vec()).unwrap();
            let bc = Tensor::matrix(n, 1, b.data()[c * n..(c + 1) * n].to_vec()).unwrap();
            let kc = kronecker(&ac, &bc).unwrap();
            prop_assert_eq!(&kr.data()[c * m * n..(c + 1) * m * n], kc.data());
        }
    }

    #[test]
    fn khatri_rao_gram((a, b) in pair_with_cols()) {
        let kr = khatri_rao(&a, &b).unwrap();
        let lhs = matmul(&kr.transpose().unwrap(), &kr).unwrap();
        let ata = matmul(&a.transpose().unwrap(), &a).unwrap();
        let btb = matmul(&b.transpose().unwrap(), &b).unwrap();
        prop_assert!(rel(&lhs, &hadamard(&ata, &btb).unwrap()) <= 1e-12);
    }

    #[test]
    fn mode_products_commute(x in tensor(3..=3, 3), r1 in 1usize..=3, r2 in 1usize..=3) {
        let e = x.extents().to_vec();
        let a = Tensor::ramp(vec![r1, e[0]]).unwrap();
        let b = Tensor::ramp(vec![r2, e[2]]).unwrap().map(|v| v - 2.0);
        let ab = mode_product(&mode_product(&x, &a, 1).unwrap(), &b, 3).unwrap();
        let ba = mode_product(&mode_product(&x, &b, 3).unwrap(), &a, 1).unwrap();
        prop_assert!(rel(&ab, &ba) <= 1e-12);
    }

    #[test]
    fn full_contraction_is_inner_product(x in tensor(1..=4, 3)) {
        let pairs: Vec<(usize, usize)> = (1..=x.order()).map(|n| (n, n)).collect();
        let y = x.map(|v| v * 0.5 - 1.0);
        let s = tensor_product(&x, &y, &ModePairing::new(pairs)).unwrap();
        let want = inner(&x, &y).unwrap();
        prop_assert!((s.to_scalar().unwrap() - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn matrix_product_is_tt_product(a in matrix(4), c in 1usize..=4) {
        let b = Tensor::ramp(vec![a.extents()[1], c]).unwrap();
        prop_assert!(rel(&tt_pair_product(&a, &b).unwrap(), &matmul(&a, &b).unwrap()) <= 1e-14);
    }
}

#[test]
fn single_precision_identities() {
    let a = Tensor32::ramp(vec![2, 3]).unwrap();
    let b = Tensor32::ramp(vec![3, 2]).unwrap().map(|v| v - 3.0);
    let c = Tensor32::ramp(vec![3, 2]).unwrap();
    let d = Tensor32::ramp(vec![2, 2]).unwrap();
    let lhs = matmul(&kronecker(&a, &d).unwrap(), &kronecker(&b, &d.transpose().unwrap()).unwrap()).unwrap();
    let rhs = kronecker(&matmul(&a, &b).unwrap(), &matmul(&d, &d.transpose().unwrap()).unwrap()).unwrap();
    assert!(lhs.max_abs_diff(&rhs) <= 1e-4);
    let kr = khatri_rao(&b, &c).unwrap();
    assert_eq!(kr.extents(), &[9, 2]);
}
