use proptest::prelude::*;
use qlens_core::expr::{normalize, parse, ExprTree, Gen, Monomial, NormalForm, RULES};
use qlens_core::rep::{
    d_eigenvalue, edge_safe_deviation, edge_safe_equal, irrep_generator, merged_generator, op_norm, rep_expr,
    rep_normalform, shift_power, weight, Basis, Coord, RepParams, Target, TruncOp,
};
use qlens_core::{Error, C64};

fn params(q: f64, l: u32) -> RepParams {
    RepParams::new(q, l, 64, 16).unwrap()
}

fn c64(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[test]
fn weight_example() {
    assert!((weight(0.5, 1, 1, 1) - 0.866_025_403_784_438_6).abs() < 1e-15);
}

#[test]
fn d_eigenvalue_example() {
    let p = params(0.5, 2);
    let d = irrep_generator(Gen::D, 1, &p).unwrap();
    assert_eq!(d.get(Coord::new(0, 1, 0), Coord::new(0, 1, 0)), c64(0.5));
    assert_eq!(d_eigenvalue(0.5, 2, 1, 0), 0.5);
}

#[test]
fn c_kills_bottom_vector() {
    for l in 1..=3 {
        let p = params(0.3, l);
        for s in 1..=l as usize {
            let c = irrep_generator(Gen::C, s, &p).unwrap();
            assert!(c.matrix().entries().all(|(_, j, _)| j != 0));
        }
    }
}

#[test]
fn leg_out_of_range() {
    let p = params(0.5, 2);
    assert!(matches!(irrep_generator(Gen::C, 3, &p), Err(Error::LegOutOfRange { s: 3, l: 2 })));
    assert!(matches!(irrep_generator(Gen::C, 0, &p), Err(Error::LegOutOfRange { .. })));
}

#[test]
fn params_validation() {
    assert!(RepParams::new(1.0, 1, 8, 4).is_err());
    assert!(RepParams::new(0.5, 0, 8, 4).is_err());
    assert!(RepParams::new(0.5, 1, 1, 4).is_err());
    assert!(RepParams::new(0.5, 1, 8, 0).is_err());
    assert!(params(0.5, 1).with_lambda(c64(2.0)).is_err());
}

#[test]
fn merged_d_lowers_window() {
    let p = params(0.5, 2);
    let d = merged_generator(Gen::D, &p).unwrap();
    for s in 1..=2 {
        for pp in [0usize, 3, 10] {
            let v = d.get(Coord::new(-1, s, pp), Coord::new(0, s, pp));
            assert!((v.re - d_eigenvalue(0.5, 2, s, pp)).abs() < 1e-16 && v.im == 0.0);
        }
    }
    let p1 = params(0.5, 1);
    let d1 = merged_generator(Gen::D, &p1).unwrap();
    assert_eq!(d1.get(Coord::new(-1, 1, 0), Coord::new(0, 1, 0)), c64(0.5));
    // The bottom of the window is dropped.
    assert!(d1.get(Coord::new(-17, 1, 0), Coord::new(-16, 1, 0)) == c64(0.0));
}

#[test]
fn merged_c_preserves_window() {
    let p = params(0.8, 3);
    let c = merged_generator(Gen::C, &p).unwrap();
    let b = c.basis();
    for (i, j, _) in c.matrix().entries() {
        assert_eq!(b.coord(i).t, b.coord(j).t);
        assert_eq!(b.coord(i).p + 1, b.coord(j).p);
    }
}

#[test]
fn unit_maps_to_identity() {
    let p = params(0.5, 2);
    for target in [Target::Irrep(1), Target::Legs, Target::Merged] {
        let one = rep_normalform(&NormalForm::one(2), target, &p).unwrap();
        assert_eq!(one, TruncOp::identity(target.basis(&p).unwrap()));
    }
}

#[test]
fn cstar_c_relation_at_l1() {
    let p = params(0.5, 1);
    let e = parse("c* . c - (1 - q^-2 . d . d*)").unwrap();
    for target in [Target::Irrep(1), Target::Merged] {
        let a = rep_expr(&e, target, &p).unwrap();
        assert!(edge_safe_equal(&a, &TruncOp::zero(a.basis()), 3, 1e-12).unwrap());
    }
    // At p=1 both sides act as 0.75 on e_1.
    let lhs = rep_expr(&parse("c* . c").unwrap(), Target::Irrep(1), &p).unwrap();
    let v = lhs.get(Coord::new(0, 1, 1), Coord::new(0, 1, 1));
    assert!((v.re - 0.75).abs() < 1e-15);
}

#[test]
fn lambda_scaling() {
    let base = params(0.5, 3);
    for lambda in [C64::new(0.0, 1.0), C64::from_polar(1.0, 0.3)] {
        let p = base.with_lambda(lambda).unwrap();
        for s in 1..=3 {
            let d1 = irrep_generator(Gen::D, s, &base).unwrap();
            let dl = irrep_generator(Gen::D, s, &p).unwrap();
            assert_eq!(dl, d1.scale(lambda));
            assert_eq!(irrep_generator(Gen::C, s, &p).unwrap(), irrep_generator(Gen::C, s, &base).unwrap());
        }
    }
}

#[test]
fn edge_safe_examples() {
    let basis = Basis::Irrep { s: 1, n: 10 };
    let s = shift_power(basis, 1);
    let prod = s.mul(&s.adjoint()).unwrap();
    assert!(edge_safe_equal(&prod, &TruncOp::identity(basis), 1, 0.0 + 1e-300).unwrap());
    assert!(!edge_safe_equal(&s.adjoint().mul(&s).unwrap(), &TruncOp::identity(basis), 1, 1e-3).unwrap());
    assert!(edge_safe_equal(&s, &s, 5, 1e-300).unwrap());
    assert!(matches!(edge_safe_equal(&s, &s, 10, 1.0), Err(Error::DegenerateWindow { .. })));

    for l in 1..=3u32 {
        let p = params(0.5, l);
        let cd = rep_expr(&parse("c . d").unwrap(), Target::Merged, &p).unwrap();
        let dc = rep_expr(&parse("d . c").unwrap(), Target::Merged, &p).unwrap();
        let ql = 0.5f64.powi(l as i32);
        assert!(edge_safe_equal(&cd, &dc.scale(c64(ql)), l as usize + 1, 1e-10).unwrap());
    }
}

#[test]
fn op_norm_examples() {
    assert!((op_norm(&TruncOp::identity(Basis::Irrep { s: 1, n: 8 })) - 1.0).abs() < 1e-12);
    assert_eq!(op_norm(&TruncOp::zero(Basis::Irrep { s: 1, n: 8 })), 0.0);
    let d = irrep_generator(Gen::D, 1, &params(0.5, 1)).unwrap();
    assert!((op_norm(&d) - 0.5).abs() < 1e-12);
}

#[test]
fn rewrite_rules_hold_in_every_model() {
    for l in 1..=3u32 {
        for q in [0.3, 0.5, 0.8] {
            let p = params(q, l);
            for rule in RULES {
                let lhs = rule.lhs_expr();
                let rhs = rule.rhs_expr(l);
                let margin = rhs.degree().max(2) + 1;
                let mut targets = vec![Target::Merged];
                targets.extend((1..=l as usize).map(Target::Irrep));
                for target in targets {
                    let a = rep_expr(&lhs, target, &p).unwrap();
                    let b = rep_expr(&rhs, target, &p).unwrap();
                    let dev = edge_safe_deviation(&a, &b, margin).unwrap();
                    assert!(dev < 1e-10, "{} l={l} q={q} {target:?}: {dev:e}", rule.name());
                }
            }
        }
    }
}

#[test]
fn d_is_normal() {
    for l in 1..=3u32 {
        let p = params(0.5, l);
        for target in [Target::Merged, Target::Legs] {
            let d = rep_expr(&ExprTree::d(), target, &p).unwrap();
            let comm = d.mul(&d.adjoint()).unwrap().sub(&d.adjoint().mul(&d).unwrap()).unwrap();
            assert!(edge_safe_equal(&comm, &TruncOp::zero(comm.basis()), 2, 1e-15).unwrap());
        }
    }
}

#[test]
fn c_is_a_compact_perturbation_of_the_shift() {
    for l in 1..=3u32 {
        for q in [0.3, 0.5, 0.8] {
            let p = params(q, l);
            let c = merged_generator(Gen::C, &p).unwrap();
            let diff = c.sub(&shift_power(c.basis(), 1)).unwrap();
            let b = diff.basis();
            let levels: Vec<usize> = (0..b.dim()).filter(|&i| b.coord(i).p >= 32).collect();
            let tail = TruncOp::new(Basis::Irrep { s: 1, n: levels.len() }, diff.matrix().submatrix(&levels, &levels))
                .unwrap();
            let big_p = 32i32;
            let bound = 2.0 * q.powi(2 * (big_p * l as i32 + 1 - l as i32));
            assert!(op_norm(&tail) <= bound, "l={l} q={q}");
        }
    }
}

#[test]
fn monomials_match_generator_products() {
    let p = RepParams::new(0.6, 2, 12, 5).unwrap();
    for c_pow in -3..=3i64 {
        for j in 0..=2u32 {
            for k in 0..=2u32 {
                let m = Monomial::new(c_pow, j, k);
                let nf = NormalForm::term(2, m, qlens_core::coeff::QLaurent::one());
                for target in [Target::Irrep(2), Target::Merged] {
                    let direct = rep_normalform(&nf, target, &p).unwrap();
                    let product = rep_expr(&m.to_expr(), target, &p).unwrap();
                    let dev = direct.sub(&product).unwrap().matrix().max_abs();
                    assert!(dev < 1e-15, "{m} {target:?}: {dev:e}");
                }
            }
        }
    }
}

fn arb_expr() -> impl Strategy<Value = ExprTree> {
    let leaf = prop_oneof![
        Just(ExprTree::c()),
        Just(ExprTree::d()),
        Just(ExprTree::c().adjoint()),
        Just(ExprTree::d().adjoint()),
        (-1i64..=1).prop_map(|k| ExprTree::Scalar(qlens_core::coeff::QLaurent::q_pow(k))),
    ];
    leaf.prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(b)),
            inner.prop_map(ExprTree::adjoint),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normal_form_agrees_with_tree_evaluation(e in arb_expr(), l in 1u32..=3) {
        let p = RepParams::new(0.5, l, 24, 10).unwrap();
        let nf = normalize(&e, l);
        let margin = e.degree().max(nf.max_len()) + 1;
        prop_assume!(margin < 10);
        let a = rep_normalform(&nf, Target::Merged, &p).unwrap();
        let b = rep_expr(&e, Target::Merged, &p).unwrap();
        prop_assert!(edge_safe_deviation(&a, &b, margin).unwrap() < 1e-11);
    }

    #[test]
    fn adjoint_is_conjugate_transpose(e in arb_expr(), l in 1u32..=3) {
        let p = RepParams::new(0.7, l, 16, 6).unwrap();
        let a = rep_expr(&e, Target::Legs, &p).unwrap();
        let b = rep_expr(&e.clone().adjoint(), Target::Legs, &p).unwrap();
        prop_assert_eq!(a.adjoint(), b);
    }
}

mod basics {
    use qlens_core::rep::*;

    #[test]
    fn basis_index_round_trip() {
        for basis in [Basis::Irrep { s: 2, n: 5 }, Basis::Legs { l: 3, n: 4 }, Basis::Merged { l: 2, w: 3, n: 4 }] {
            for i in 0..basis.dim() {
                assert_eq!(basis.index(basis.coord(i)), Some(i));
            }
        }
    }

    #[test]
    fn weight_vanishes_at_bottom() {
        for l in 1..4 {
            for s in 1..=l as usize {
                assert_eq!(weight(0.5, l, s, 0), 0.0);
                assert!(weight(0.5, l, s, 1) > 0.0);
            }
        }
    }

    #[test]
    fn safe_indices_reject_degenerate_windows() {
        assert!(Basis::Irrep { s: 1, n: 4 }.safe_indices(4).is_err());
        assert!(Basis::Merged { l: 1, w: 2, n: 10 }.safe_indices(2).is_err());
        assert_eq!(Basis::Irrep { s: 1, n: 4 }.safe_indices(1).unwrap(), [0, 1, 2]);
    }
}
