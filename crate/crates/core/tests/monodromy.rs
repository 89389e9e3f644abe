mod common;

use std::f64::consts::PI;

use common::*;
use fuchsia::linalg::{jordan_structure, matrix_exp, ComplexMatrix, DEFAULT_CLUSTER_TOL};
use fuchsia::monodromy::*;
use fuchsia::system::FuchsianSystem;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scalar_system(alpha: f64) -> FuchsianSystem {
    FuchsianSystem::new(
        vec![c(0.0, 0.0), c(1.0, 0.0)],
        vec![
            ComplexMatrix::from_diagonal(&[c(alpha, 0.0)]),
            ComplexMatrix::from_diagonal(&[c(-alpha, 0.0)]),
        ],
        1e-12,
    )
    .unwrap()
}

#[test]
fn scalar_multipliers() {
    // f = (z / (z - 1))^alpha
    let rep = monodromy(&scalar_system(0.25), 1e-11).unwrap();
    assert!((rep.matrices[0].get(0, 0) - c(0.0, 1.0)).norm() < 1e-9);
    assert!((rep.matrices[1].get(0, 0) - c(0.0, -1.0)).norm() < 1e-9);
    assert!(rep.product_identity_holds());
}

#[test]
fn zero_residues_give_identity() {
    let sys = FuchsianSystem::new(
        vec![c(0.0, 0.0), c(1.0, 1.0), c(-1.0, 0.5)],
        vec![ComplexMatrix::zeros(2); 3],
        1e-12,
    )
    .unwrap();
    let rep = monodromy(&sys, 1e-9).unwrap();
    for m in &rep.matrices {
        assert_eq!(*m, ComplexMatrix::identity(2));
    }
}

#[test]
fn commuting_residues_match_closed_form() {
    let mut rng = rng(21);
    for _ in 0..5 {
        let sys = commuting_system(&mut rng, 3, 3);
        let rep = monodromy(&sys, 1e-10).unwrap();
        for (m, b) in rep.matrices.iter().zip(sys.residues()) {
            assert!(max_entry_diff(m, &diagonal_generator(b)) < 1e-8);
        }
    }
}

#[test]
fn forward_then_reverse_is_identity() {
    let mut rng = rng(22);
    let sys = generic_system(&mut rng, 2, 3, 0.8);
    let loops = build_loops(sys.poles(), None).unwrap();
    let path = &loops.loops[0];
    let (t, e) = continue_solution(&sys, path, 1e-10).unwrap();
    let (r, er) = continue_solution(&sys, &path.reversed(), 1e-10).unwrap();
    let prod = &r * &t;
    assert!(prod.distance(&ComplexMatrix::identity(2)) <= 2.0 * (e + er));
}

#[test]
fn clockwise_loop_gives_inverse() {
    let mut rng = rng(23);
    let sys = generic_system(&mut rng, 2, 3, 0.8);
    let rep = monodromy(&sys, 1e-10).unwrap();
    for (j, l) in rep.loops.loops.iter().enumerate() {
        let (inv, _) = continue_solution(&sys, &l.reversed(), 1e-10).unwrap();
        let prod = &inv * &rep.matrices[j];
        assert!(prod.distance(&ComplexMatrix::identity(2)) < 1e-8);
    }
}

#[test]
fn determinant_is_exponential_of_trace() {
    let mut rng = rng(24);
    for _ in 0..5 {
        let sys = generic_system(&mut rng, 3, 3, 1.0);
        let rep = monodromy(&sys, 1e-10).unwrap();
        for (m, b) in rep.matrices.iter().zip(sys.residues()) {
            let want = (c(0.0, 2.0 * PI) * b.trace()).exp();
            assert!((m.determinant() - want).norm() < 1e-7);
        }
    }
}

#[test]
fn base_point_changes_matrices_by_conjugation() {
    let mut rng = rng(25);
    let sys = generic_system(&mut rng, 2, 3, 0.8);
    let a = monodromy(&sys, 1e-10).unwrap();
    let b = monodromy_from(&sys, Some(c(0.3, -2.7)), 1e-10).unwrap();
    assert!(b.product_identity_holds());
    for (ma, mb) in a.matrices.iter().zip(&b.matrices) {
        let sa = jordan_structure(ma, DEFAULT_CLUSTER_TOL).unwrap();
        let sb = jordan_structure(mb, DEFAULT_CLUSTER_TOL).unwrap();
        assert!(sa.matches(&sb, 1e-7));
    }
}

#[test]
fn halving_tolerance_does_not_inflate_defect() {
    let mut rng = rng(26);
    for _ in 0..3 {
        let sys = generic_system(&mut rng, 2, 4, 1.0);
        let coarse = monodromy(&sys, 1e-7).unwrap().product_defect();
        let fine = monodromy(&sys, 5e-8).unwrap().product_defect();
        // below about 1e-13 the defect is roundoff
        assert!(fine <= 2.0 * coarse + 1e-13, "{coarse:e} -> {fine:e}");
    }
}

#[test]
fn collinear_poles_detour_with_clearance() {
    let poles = [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
    let loops = build_loops(&poles, Some(c(5.0, 0.0))).unwrap();
    for (j, l) in loops.loops.iter().enumerate() {
        assert!(l.is_closed());
        assert_eq!(l.start_point(), c(5.0, 0.0));
        let audit = audit_clearance(l.segments(), &poles);
        assert!(audit >= loops.radii[j] / 2.0 - 1e-15);
    }
    // loop to pole 0 passes poles 2 and 1
    assert!(loops.loops[0].segments().len() > 3);

    let b = |x: f64, y: f64| {
        ComplexMatrix::from_rows(&[vec![c(x, 0.0), c(y, 0.1)], vec![c(0.05, 0.0), c(-x, 0.0)]])
            .unwrap()
    };
    let (b0, b1) = (b(0.2, 0.1), b(-0.1, 0.3));
    let b2 = -&(&b0 + &b1);
    let sys = FuchsianSystem::new(poles.to_vec(), vec![b0, b1, b2], 1e-12).unwrap();
    let rep = monodromy_from(&sys, Some(c(5.0, 0.0)), 1e-10).unwrap();
    assert!(rep.product_defect() < 1e-8, "{}", rep.product_defect());
}

#[test]
fn verify_generic_system() {
    let mut rng = rng(27);
    let sys = generic_system(&mut rng, 2, 3, 0.4);
    let report = verify_theorem(&sys, 1e-6).unwrap();
    assert!(report.verdict);
    for p in &report.poles {
        assert_eq!(p.status, PoleStatus::Pass);
        assert!(p.conjugator_residual.unwrap() <= 1e-6);
    }
    assert!(report.cross_check_difference < 1e-6);
}

#[test]
fn verify_marks_resonant_pole() {
    let b0 = ComplexMatrix::from_real_rows(&[vec![0.0, 0.3], vec![0.0, 1.0]]).unwrap();
    let b1 = ComplexMatrix::from_real_rows(&[vec![0.2, 0.0], vec![0.1, -0.4]]).unwrap();
    let b2 = -&(&b0 + &b1);
    let sys = FuchsianSystem::new(
        vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, 2.0)],
        vec![b0, b1, b2],
        1e-12,
    )
    .unwrap();
    let report = verify_theorem(&sys, 1e-6).unwrap();
    assert_eq!(report.poles[0].status, PoleStatus::HypothesisUnmet);
    assert!(report.resonant_poles().contains(&0));
}

#[test]
fn bad_tolerance_rejected() {
    assert!(matches!(
        monodromy(&scalar_system(0.1), 0.0),
        Err(MonodromyError::BadTolerance { .. })
    ));
}

#[test]
fn generator_agrees_with_matrix_exp() {
    let b = ComplexMatrix::from_rows(&[
        vec![c(0.1, 0.0), c(0.2, 0.0)],
        vec![c(0.0, 0.0), c(0.3, 0.0)],
    ])
    .unwrap();
    let sys =
        FuchsianSystem::new(vec![c(0.0, 0.0), c(3.0, 0.0)], vec![b.clone(), -&b], 1e-12).unwrap();
    let rep = monodromy(&sys, 1e-11).unwrap();
    // a single commuting pair: M_0 = exp(2 pi i B)
    let want = matrix_exp(&b.scale(c(0.0, 2.0 * PI))).unwrap();
    assert!(rep.matrices[0].distance(&want) < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn loop_product_is_identity(seed in any::<u64>(), n in 2usize..=5, p in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = generic_system(&mut rng, p, n, 1.0);
        let rep = monodromy(&sys, 1e-9).unwrap();
        prop_assert!(rep.product_identity_holds(), "defect {:e} bound {:e}", rep.product_defect(), rep.product_bound());
    }
}
