use qlens_core::expr::{normalize, parse, NormalForm};
use qlens_core::groupoid::{chi_element, embed_c, embed_d, embed_normalform, GElement};
use qlens_core::rep::{edge_safe_deviation, rep_normalform, Basis, RepParams, Target, TruncOp};
use qlens_core::sample::random_generator_word;
use qlens_core::structure::{character_pi0, eval_loop, in_ideal, lift, symbol, toeplitz_symbol, CircleLaurent};
use qlens_core::{Error, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 64;

fn params(q: f64, l: u32) -> RepParams {
    RepParams::new(q, l, N, 16).unwrap()
}

fn z() -> CircleLaurent {
    CircleLaurent::monomial(1, C64::new(1.0, 0.0))
}

fn lambdas() -> [C64; 3] {
    [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::from_polar(1.0, 0.3)]
}

#[test]
fn generator_symbols() {
    for l in 1..=3 {
        let p = params(0.5, l);
        let c = embed_c(&p);
        assert_eq!(symbol(&c), z());
        assert!(symbol(&embed_d(&p)).is_zero());
        assert_eq!(symbol(&c.convolve(&c.involve()).unwrap()), CircleLaurent::one());
    }
}

#[test]
fn character_examples() {
    let p = params(0.5, 2);
    let mu = C64::from_polar(1.0, 1.1);
    assert_eq!(character_pi0(&embed_c(&p), mu).unwrap(), mu);
    assert_eq!(character_pi0(&embed_d(&p), mu).unwrap(), C64::new(0.0, 0.0));
    let c3 = embed_normalform(&NormalForm::c(2).pow(3), &p).unwrap();
    assert!((character_pi0(&c3, mu).unwrap() - mu.powi(3)).norm() < 1e-15);
    assert!(matches!(character_pi0(&c3, C64::new(1.5, 0.0)), Err(Error::Domain(_))));
}

#[test]
fn ideal_examples() {
    let p = params(0.5, 2);
    assert!(in_ideal(&embed_d(&p)));
    assert!(!in_ideal(&embed_c(&p)));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let f = embed_normalform(&random_generator_word(&mut rng, 2, 4), &p).unwrap();
        let g = symbol(&f);
        let rest = f.sub(&lift(&g, 2)).unwrap();
        assert!(in_ideal(&rest));
        assert_eq!(symbol(&lift(&g, 2)), g);
        assert_eq!(in_ideal(&f), g.is_zero());
    }
}

#[test]
fn symbol_is_multiplicative() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for l in 1..=3 {
        let p = params(0.5, l);
        for _ in 0..20 {
            let f = embed_normalform(&random_generator_word(&mut rng, l, 3), &p).unwrap();
            let g = embed_normalform(&random_generator_word(&mut rng, l, 3), &p).unwrap();
            let lhs = symbol(&f.convolve(&g).unwrap());
            let rhs = symbol(&f).mul(&symbol(&g));
            assert!(lhs.max_deviation(&rhs) <= 1e-12);
        }
    }
}

#[test]
fn loop_examples() {
    let (q, l) = (0.5, 2);
    let p = params(q, l);
    for lambda in lambdas() {
        for s in 1..=2 {
            let d = eval_loop(&embed_d(&p), lambda, s, N).unwrap();
            let pl = p.with_lambda(lambda).unwrap();
            assert_eq!(d, rep_normalform(&NormalForm::d(l), Target::Irrep(s), &pl).unwrap());
            let c = eval_loop(&embed_c(&p), lambda, s, N).unwrap();
            assert_eq!(c, eval_loop(&embed_c(&p), C64::new(1.0, 0.0), s, N).unwrap());
            let one = eval_loop(&GElement::unit(l), lambda, s, N).unwrap();
            assert_eq!(one, TruncOp::identity(Basis::Irrep { s, n: N }));
        }
    }
    assert!(eval_loop(&embed_c(&p), lambda_off(), 1, N).is_err());
    assert!(eval_loop(&embed_c(&p), C64::new(1.0, 0.0), 3, N).is_err());
}

fn lambda_off() -> C64 {
    C64::new(0.5, 0.0)
}

#[test]
fn loops_of_embedded_elements_are_the_irreps() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for l in 1..=3 {
        let p = params(0.8, l);
        for _ in 0..10 {
            let x = random_generator_word(&mut rng, l, 4);
            let f = embed_normalform(&x, &p).unwrap();
            for lambda in lambdas() {
                let pl = p.with_lambda(lambda).unwrap();
                for s in 1..=l as usize {
                    let a = eval_loop(&f, lambda, s, N).unwrap();
                    let b = rep_normalform(&x, Target::Irrep(s), &pl).unwrap();
                    let margin = x.max_len() + 1;
                    assert!(edge_safe_deviation(&a, &b, margin).unwrap() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn toeplitz_examples() {
    for l in 1..=3 {
        for q in [0.3, 0.5, 0.8] {
            let p = params(q, l);
            let half = (N / 2) as i32;
            let c_bound = 2.0 * q.powi(2 * (half * l as i32 + 1 - l as i32)) + 1e-14;
            let d_bound = q.powi(half * l as i32) + 1e-14;
            for s in 1..=l as usize {
                let c = eval_loop(&embed_c(&p), C64::new(0.0, 1.0), s, N).unwrap();
                assert!(toeplitz_symbol(&c, 2, 2, c_bound).unwrap().max_deviation(&z()) <= c_bound);
                let d = eval_loop(&embed_d(&p), C64::new(0.0, 1.0), s, N).unwrap();
                assert!(toeplitz_symbol(&d, 2, 2, d_bound).unwrap().max_deviation(&CircleLaurent::zero()) <= d_bound);
            }
        }
    }
}

#[test]
fn non_toeplitz_input_is_diagnosed() {
    let basis = Basis::Irrep { s: 1, n: 32 };
    let ramp =
        TruncOp::from_coords(basis, basis.coords().map(|c| (c, c, C64::new(c.p as f64, 0.0))).collect::<Vec<_>>());
    match toeplitz_symbol(&ramp, 1, 2, 1e-6) {
        Err(Error::NotToeplitz { diagonal: 0, deviation }) => assert!(deviation > 1.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn matched_symbols_and_character_factorisation() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for l in 1..=3 {
        for q in [0.3, 0.5, 0.8] {
            let p = params(q, l);
            // Truncation bound plus a floating-point floor; at small q the bound alone underflows eps.
            let bound = 2.0 * q.powi((N as i32 / 2) * l as i32 - l as i32) + 1e-14;
            for _ in 0..5 {
                let x = random_generator_word(&mut rng, l, 4);
                let f = embed_normalform(&x, &p).unwrap();
                let sigma = symbol(&f);
                for lambda in lambdas() {
                    for s in 1..=l as usize {
                        let m = eval_loop(&f, lambda, s, N).unwrap();
                        let read = toeplitz_symbol(&m, 6, 2, bound).unwrap();
                        assert!(read.max_deviation(&sigma) <= bound, "l={l} q={q} s={s}: {read} vs {sigma}");
                        let mu = C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
                        let chi = character_pi0(&f, mu).unwrap();
                        let coeff_sum: f64 = read.sub(&sigma).coeffs().map(|(_, a)| a.norm()).sum();
                        assert!((read.eval(mu) - chi).norm() <= coeff_sum + 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn chi_lifts_monomials() {
    for n in -3..=3 {
        let g = CircleLaurent::monomial(n, C64::new(2.0, -1.0));
        let f = lift(&g, 2);
        assert_eq!(symbol(&f), g);
        assert_eq!(f.max_difference(&chi_element(n, 2).scale(C64::new(2.0, -1.0)), 20), 0.0);
    }
    let cc = normalize(&parse("c . c*").unwrap(), 1);
    let p = params(0.5, 1);
    assert_eq!(symbol(&embed_normalform(&cc, &p).unwrap()), CircleLaurent::one());
}

mod basics {
    use super::*;
    use num_traits::One;

    #[test]
    fn laurent_arithmetic() {
        let z = CircleLaurent::monomial(1, C64::one());
        let zi = CircleLaurent::monomial(-1, C64::one());
        assert_eq!(z.mul(&zi), CircleLaurent::one());
        assert!(z.sub(&z).is_zero());
        let mu = C64::from_polar(1.0, 0.4);
        assert!((z.add(&zi).eval(mu) - C64::new(2.0 * 0.4f64.cos(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn identity_has_symbol_one() {
        let m = TruncOp::identity(Basis::Irrep { s: 1, n: 16 });
        assert_eq!(toeplitz_symbol(&m, 2, 2, 1e-12).unwrap(), CircleLaurent::one());
    }

    #[test]
    fn degenerate_window() {
        let m = TruncOp::identity(Basis::Irrep { s: 1, n: 8 });
        assert!(toeplitz_symbol(&m, 2, 2, 1e-12).is_err());
    }
}
