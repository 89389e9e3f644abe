mod common;

use common::*;
use fuchsia::linalg::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn recovers_conjugated_jordan_forms() {
    let mut rng = rng(7);
    for &(sep, max_block, pert, cond) in &[
        (1.0, 4, 1e-12, 100.0),
        (0.1, 3, 1e-12, 100.0),
        (1.0, 6, 1e-12, 100.0),
        (1e-3, 3, 0.0, 100.0),
    ] {
        for _ in 0..100 {
            let n = rng.gen_range(2..=6);
            let blocks = random_jordan_blocks(&mut rng, n, sep, max_block);
            let s = matrix_with_condition(&mut rng, n, cond);
            let m = &conjugate(&s, &jordan_matrix(&blocks))
                + &random_matrix(&mut rng, n).scale(c(pert, 0.0));
            let js = jordan_structure(&m, DEFAULT_CLUSTER_TOL).unwrap();
            assert_eq!(
                js.shape(),
                shape_of(&blocks),
                "sep {sep}: {blocks:?} vs {:?}",
                js.blocks
            );
            for (lambda, sizes) in &blocks {
                let hit = js
                    .blocks
                    .iter()
                    .find(|b| &b.sizes == sizes && (b.eigenvalue - lambda).norm() < 1e-4);
                assert!(hit.is_some(), "{lambda} missing from {:?}", js.blocks);
            }
        }
    }
}

#[test]
fn eigenvalues_of_near_scalar_matrix() {
    let mut rng = rng(11);
    let m = &ComplexMatrix::identity(5).scale(c(2.0, -1.0))
        + &random_matrix(&mut rng, 5).scale(c(1e-13, 0.0));
    let ev = eigen_decompose(&m).unwrap();
    assert_eq!(ev.len(), 1);
    assert_eq!(ev[0].multiplicity, 5);
    assert!((ev[0].value - c(2.0, -1.0)).norm() < 1e-12);
}

#[test]
fn similarity_of_conjugated_pairs() {
    let mut rng = rng(13);
    for _ in 0..40 {
        let n = rng.gen_range(2..=4);
        let blocks = random_jordan_blocks(&mut rng, n, 1.0, 3);
        let j = jordan_matrix(&blocks);
        let a = conjugate(&matrix_with_condition(&mut rng, n, 10.0), &j);
        let b = conjugate(&matrix_with_condition(&mut rng, n, 10.0), &j);
        match similarity_transform(&a, &b, 1e-9).unwrap() {
            Similarity::Similar { transform, .. } => {
                let back = conjugate(&transform, &a);
                assert!(back.distance(&b) < 1e-6 * b.frobenius_norm().max(1.0));
            }
            other => panic!("{blocks:?}: {other:?}"),
        }
    }
}

#[test]
fn similarity_rejects_different_structures() {
    let j1 = jordan_matrix(&[(c(1.0, 0.0), vec![2, 1])]);
    let j2 = jordan_matrix(&[(c(1.0, 0.0), vec![1, 1, 1])]);
    let j3 = jordan_matrix(&[(c(1.0, 0.0), vec![3])]);
    let j4 = jordan_matrix(&[(c(1.0, 0.0), vec![2]), (c(2.0, 0.0), vec![1])]);
    for other in [&j2, &j3, &j4] {
        assert_eq!(
            similarity_transform(&j1, other, 1e-9).unwrap(),
            Similarity::StructureMismatch
        );
    }
}

#[test]
fn exponential_of_jordan_block() {
    // exp(J3(l)) = e^l [[1, 1, 1/2], [0, 1, 1], [0, 0, 1]]
    let l = c(0.3, 1.1);
    let e = matrix_exp(&jordan_matrix(&[(l, vec![3])])).unwrap();
    let el = l.exp();
    let want = ComplexMatrix::from_rows(&[
        vec![el, el, el * 0.5],
        vec![c(0.0, 0.0), el, el],
        vec![c(0.0, 0.0), c(0.0, 0.0), el],
    ])
    .unwrap();
    assert!(e.distance(&want) < 1e-14);
}

fn arb_matrix(max_norm: f64) -> impl Strategy<Value = ComplexMatrix> {
    (2usize..=5, any::<u64>(), 0.01..max_norm).prop_map(|(n, seed, norm)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_matrix_with_norm(&mut rng, n, norm)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_inverse_and_determinant(a in arb_matrix(20.0)) {
        let e = matrix_exp(&a).unwrap();
        let inv = matrix_exp(&-&a).unwrap();
        let prod = &e * &inv;
        let scale = e.frobenius_norm() * inv.frobenius_norm();
        prop_assert!(prod.distance(&ComplexMatrix::identity(a.dim())) < 1e-13 * scale);
        let det = e.determinant();
        let want = a.trace().exp();
        prop_assert!((det - want).norm() < 1e-11 * want.norm().max(1.0) * scale.powf(a.dim() as f64 / 2.0));
    }

    #[test]
    fn jordan_shape_is_similarity_invariant(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = random_jordan_blocks(&mut rng, n, 0.7, 3);
        let j = jordan_matrix(&blocks);
        let m = conjugate(&matrix_with_condition(&mut rng, n, 50.0), &j);
        let js = jordan_structure(&m, DEFAULT_CLUSTER_TOL).unwrap();
        prop_assert_eq!(js.shape(), shape_of(&blocks));
        prop_assert_eq!(js.dimension(), n);
    }
}
