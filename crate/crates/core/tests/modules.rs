use proptest::prelude::*;
use qlens_core::coeff::QLaurent;
use qlens_core::expr::{Monomial, NormalForm};
use qlens_core::linalg::SparseMatrix;
use qlens_core::modules::{
    canonical_projection, is_isomorphic, k_invariant, line_bundle_model, line_bundle_projection, model_membership,
    verify_line_bundle_iso, verify_projection, wp_matrix_units, KInvariant, ProjectionRep, UnitizedElement,
};
use qlens_core::rep::{edge_safe_deviation, level_projection, shift_power, RepParams, TruncOp};
use qlens_core::sample::{random_homogeneous_normalform, random_unitary};
use qlens_core::{Error, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn inv(rho: usize, t: &[i64]) -> KInvariant {
    KInvariant::new(rho, t.to_vec()).unwrap()
}

fn one(l: u32, n: usize) -> UnitizedElement {
    UnitizedElement::one(l, n)
}

#[test]
fn verify_projection_examples() {
    let id = ProjectionRep::identity(2, 16, 1);
    assert!(verify_projection(&id, TOL).passed);
    let p2 = ProjectionRep::diagonal(2, 16, vec![UnitizedElement::level_projection(16, &[2, 2])]).unwrap();
    assert!(verify_projection(&p2, TOL).passed);
    let half = id.scale(C64::new(0.5, 0.0));
    let report = verify_projection(&half, TOL);
    assert!(!report.passed);
    assert!((report.idempotent - 0.25).abs() < 1e-15);
}

#[test]
fn invariant_examples() {
    assert_eq!(k_invariant(&ProjectionRep::identity(3, 16, 1), TOL).unwrap(), inv(1, &[0, 0, 0]));
    let p2 = ProjectionRep::diagonal(2, 16, vec![UnitizedElement::level_projection(16, &[2, 2])]).unwrap();
    assert_eq!(k_invariant(&p2, TOL).unwrap(), inv(0, &[2, 2]));
    let p = ProjectionRep::diagonal(2, 16, vec![one(2, 16), UnitizedElement::level_projection(16, &[3, 3])]).unwrap();
    assert_eq!(k_invariant(&p, TOL).unwrap(), inv(1, &[3, 3]));
    // Explicit trace over the full truncated space: tr = rho N + t_s per leg.
    for s in 1..=2 {
        let total: C64 = (0..2).map(|i| p.get(i, i).leg_operator(s).trace()).sum();
        assert!((total.re - (16.0 + 3.0)).abs() < 1e-12);
    }
}

#[test]
fn invariant_errors() {
    let half = ProjectionRep::identity(1, 8, 1).scale(C64::new(0.5, 0.0));
    assert!(matches!(k_invariant(&half, TOL), Err(Error::InvariantUndefined { .. })));
    assert!(matches!(KInvariant::new(0, vec![-1, 2]), Err(Error::InvalidInvariant(_))));
    assert!(matches!(canonical_projection(&KInvariant { rho: 0, t: vec![-1] }, 8), Err(Error::InvalidInvariant(_))));
    assert!(matches!(canonical_projection(&inv(1, &[9]), 8), Err(Error::Truncation(_))));
}

#[test]
fn canonical_examples() {
    let p = canonical_projection(&inv(0, &[1, 0]), 16).unwrap();
    assert_eq!(p, ProjectionRep::diagonal(2, 16, vec![UnitizedElement::level_projection(16, &[1, 0])]).unwrap());

    let p = canonical_projection(&inv(2, &[-1, 3]), 16).unwrap();
    let expected = ProjectionRep::diagonal(
        2,
        16,
        vec![
            one(2, 16),
            one(2, 16).sub(&UnitizedElement::level_projection(16, &[1, 0])),
            UnitizedElement::level_projection(16, &[0, 3]),
        ],
    )
    .unwrap();
    assert_eq!(p, expected);
    assert_eq!(p.r(), 3);

    // I_1, padded by the zero block of the (rho+1) x (rho+1) form.
    let p = canonical_projection(&inv(1, &[0, 0, 0]), 16).unwrap();
    assert_eq!(p.get(0, 0), &one(3, 16));
    assert_eq!(p.get(1, 1), &UnitizedElement::zero(3, 16));
    assert!(is_isomorphic(&p, &ProjectionRep::identity(3, 16, 1), TOL).unwrap());
}

#[test]
fn classification_round_trip() {
    for l in 1..=3u32 {
        let ranges: Vec<i64> = (-4..=4).collect();
        let mut ts: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..l {
            ts = ts.into_iter().flat_map(|t| ranges.iter().map(move |&x| [t.clone(), vec![x]].concat())).collect();
        }
        for rho in 0..=3 {
            for t in &ts {
                let Ok(i) = KInvariant::new(rho, t.clone()) else {
                    assert!(rho == 0 && t.iter().any(|&x| x < 0));
                    continue;
                };
                let p = canonical_projection(&i, 16).unwrap();
                assert_eq!(k_invariant(&p, TOL).unwrap(), i);
            }
        }
    }
}

#[test]
fn direct_sum_is_additive() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let l = rng.gen_range(1..=3usize);
        let draw = |rng: &mut ChaCha8Rng| loop {
            let rho = rng.gen_range(0..=3);
            let t: Vec<i64> = (0..l).map(|_| rng.gen_range(-4..=4)).collect();
            if let Ok(i) = KInvariant::new(rho, t) {
                return i;
            }
        };
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        let p = canonical_projection(&a, 16).unwrap().direct_sum(&canonical_projection(&b, 16).unwrap()).unwrap();
        assert_eq!(k_invariant(&p, TOL).unwrap(), a.sum(&b));
    }
}

#[test]
fn isomorphism_examples() {
    let c = canonical_projection(&inv(1, &[1, 1]), 16).unwrap();
    assert!(is_isomorphic(&c, &line_bundle_projection(1, 2, 16).unwrap(), TOL).unwrap());
    assert!(!is_isomorphic(&ProjectionRep::identity(2, 16, 1), &ProjectionRep::identity(2, 16, 2), TOL).unwrap());
}

#[test]
fn invariant_survives_unitary_conjugation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let l = rng.gen_range(1..=3u32);
        let rho = rng.gen_range(1..=2);
        let t: Vec<i64> = (0..l).map(|_| rng.gen_range(-3..=3)).collect();
        let p = canonical_projection(&KInvariant::new(rho, t).unwrap(), 24).unwrap();
        let u = random_unitary(&mut rng, l, 24, p.r(), 6);
        let conj = u.adjoint().mul(&p).unwrap().mul(&u).unwrap();
        assert!(verify_projection(&conj, 1e-12).passed);
        assert!(is_isomorphic(&p, &conj, TOL).unwrap());
    }
}

#[test]
fn line_bundle_examples() {
    let p = line_bundle_projection(0, 2, 16).unwrap();
    assert_eq!(k_invariant(&p, TOL).unwrap(), inv(1, &[0, 0]));
    assert!(is_isomorphic(&p, &ProjectionRep::identity(2, 16, 1), TOL).unwrap());

    let p = line_bundle_projection(2, 3, 16).unwrap();
    let expected =
        ProjectionRep::diagonal(3, 16, vec![one(3, 16), UnitizedElement::level_projection(16, &[2, 2, 2])]).unwrap();
    assert_eq!(p, expected);
    assert_eq!(k_invariant(&p, TOL).unwrap(), inv(1, &[2, 2, 2]));

    let p = line_bundle_projection(-2, 3, 16).unwrap();
    let expected =
        ProjectionRep::diagonal(3, 16, vec![one(3, 16).sub(&UnitizedElement::level_projection(16, &[2, 2, 2]))])
            .unwrap();
    assert_eq!(p, expected);
    assert_eq!(k_invariant(&p, TOL).unwrap(), inv(1, &[-2, -2, -2]));

    assert!(matches!(line_bundle_projection(16, 1, 16), Err(Error::Truncation(_))));
}

#[test]
fn index_relation_and_non_freeness() {
    for l in 1..=3u32 {
        for n in -4..=4 {
            let p = line_bundle_projection(n, l, 32).unwrap();
            assert_eq!(k_invariant(&p, TOL).unwrap(), inv(1, &vec![n; l as usize]));
        }
        let l1 = line_bundle_projection(1, l, 32).unwrap();
        assert!(!is_isomorphic(&l1, &ProjectionRep::identity(l, 32, 1), TOL).unwrap());
    }
}

#[test]
fn model_generator_relations() {
    for l in 1..=3 {
        let params = RepParams::new(0.5, l, 32, 4).unwrap();
        for n in -4i64..=4 {
            let model = line_bundle_model(n, &params).unwrap();
            let basis = params.legs_basis();
            assert_eq!(model.generator, shift_power(basis, n));
            let t = &model.generator;
            let k = n.unsigned_abs() as usize;
            let id = TruncOp::identity(basis);
            let pk = level_projection(basis, k);
            if n >= 0 {
                assert!(edge_safe_deviation(&t.mul(&t.adjoint()).unwrap(), &id, k + 1).unwrap() == 0.0);
                assert_eq!(t.adjoint().mul(t).unwrap(), id.sub(&pk).unwrap());
            } else {
                assert_eq!(t.mul(&t.adjoint()).unwrap(), id.sub(&pk).unwrap());
                // (I - P) T' = T'.
                assert_eq!(id.sub(&pk).unwrap().mul(t).unwrap(), *t);
            }
        }
    }
}

#[test]
fn iso_examples() {
    for (n, l) in [(0, 2), (1, 2), (-3, 1)] {
        let params = RepParams::new(0.5, l, 32, 4).unwrap();
        let report = verify_line_bundle_iso(n, &params, 100, TOL, 1).unwrap();
        assert!(report.passed, "{report:?}");
    }
}

#[test]
fn iso_all_degrees() {
    for l in 1..=3 {
        let params = RepParams::new(0.5, l, 32, 4).unwrap();
        for n in -4..=4 {
            let report = verify_line_bundle_iso(n, &params, 20, TOL, 2).unwrap();
            assert!(report.passed, "{report:?}");
        }
    }
}

#[test]
fn powers_of_c_lie_in_the_model() {
    for l in 1..=3 {
        for q in [0.3, 0.5, 0.8] {
            let params = RepParams::new(q, l, 64, 4).unwrap();
            for n in 0..=3 {
                let cn = NormalForm::c(l).pow(n as u32);
                let r = model_membership(&cn, n, &params, 8).unwrap();
                assert!((r.coefficient - C64::new(1.0, 0.0)).norm() < 1e-15);
                assert!(r.max_excess <= 1e-14, "l={l} q={q} n={n}: {r:?}");
            }
        }
    }
}

#[test]
fn homogeneous_elements_lie_in_the_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for l in 1..=3 {
        let params = RepParams::new(0.5, l, 64, 4).unwrap();
        for n in -3..=3 {
            for _ in 0..5 {
                let x = random_homogeneous_normalform(&mut rng, l, n, 3, 4);
                let r = model_membership(&x, n, &params, 8).unwrap();
                assert!(r.max_excess <= 1e-12, "l={l} n={n}: {r:?}");
            }
        }
    }
}

#[test]
fn membership_rejects_wrong_degree() {
    let params = RepParams::new(0.5, 2, 32, 4).unwrap();
    let c = NormalForm::term(2, Monomial::new(1, 0, 0), QLaurent::one());
    assert!(matches!(model_membership(&c, 0, &params, 4), Err(Error::NotHomogeneous { expected: 0 })));
}

#[test]
fn degree_zero_part_gives_matrix_units() {
    for l in 1..=3 {
        let params = RepParams::new(0.5, l, 32, 4).unwrap();
        let r = wp_matrix_units(&params, 6, 1e-9).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.units_checked, 36 * l as usize);
    }
}

#[test]
fn unitized_adjoint_conjugates() {
    let m = SparseMatrix::from_triplets(3, 3, [(0, 2, C64::new(1.0, 2.0))]);
    let a = UnitizedElement::new(C64::new(0.0, 1.0), vec![m]).unwrap();
    let b = a.adjoint();
    assert_eq!(b.scalar, C64::new(0.0, -1.0));
    assert_eq!(b.compact[0].get(2, 0), C64::new(1.0, -2.0));
}

proptest! {
    #[test]
    fn invariant_round_trip(l in 1u32..=3, rho in 0usize..=3, raw in proptest::collection::vec(-4i64..=4, 3)) {
        let t: Vec<i64> = raw[..l as usize].iter().map(|&x| if rho == 0 { x.abs() } else { x }).collect();
        let i = KInvariant::new(rho, t).unwrap();
        prop_assert_eq!(k_invariant(&canonical_projection(&i, 12).unwrap(), TOL).unwrap(), i);
    }
}

mod basics {
    use qlens_core::linalg::SparseMatrix;
    use qlens_core::modules::*;
    use qlens_core::C64;

    #[test]
    fn unitized_product_rule() {
        let m = SparseMatrix::from_triplets(2, 2, [(0, 1, C64::new(1.0, 0.0))]);
        let a = UnitizedElement::new(C64::new(2.0, 0.0), vec![m.clone()]).unwrap();
        let b = UnitizedElement::new(C64::new(0.0, 1.0), vec![m.adjoint()]).unwrap();
        let ab = a.mul(&b);
        // Agrees with multiplying the operators lambda I + M.
        let direct = a.leg_operator(1).mul(&b.leg_operator(1));
        assert_eq!(ab.leg_operator(1), direct);
        assert_eq!(ab.scalar, C64::new(0.0, 2.0));
    }

    #[test]
    fn invariant_display() {
        assert_eq!(std::format!("{}", KInvariant::new(1, vec![-2, 3]).unwrap()), "(1; -2, 3)");
    }
}
