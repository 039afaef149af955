//! Seeded random inputs for the property suites.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::coeff::{GaussRational, QLaurent};
use crate::expr::{ExprTree, Letter, Monomial, NormalForm, Rule, RULES};
use crate::groupoid::{GElement, Morphism};
use crate::linalg::SparseMatrix;
use crate::modules::{ProjectionRep, UnitizedElement};
use crate::C64;

/// `u . q^e` with `u` in `{1, -1, i, -i}` and `e` in `{-1, 0, 1}`. Unit
/// coefficients keep accidental numerical roots in `q` out of the samples.
pub fn unit_coefficient<R: Rng + ?Sized>(rng: &mut R) -> QLaurent {
    let unit = match rng.gen_range(0..4) {
        0 => GaussRational::from_int(1),
        1 => GaussRational::from_int(-1),
        2 => GaussRational::i(),
        _ => -GaussRational::i(),
    };
    QLaurent::monomial(unit, rng.gen_range(-1..=1))
}

fn random_letter<R: Rng + ?Sized>(rng: &mut R) -> Letter {
    *[Letter::C, Letter::Cs, Letter::D, Letter::Ds].choose(rng).expect("nonempty")
}

fn word_expr(word: &[Letter]) -> ExprTree {
    word.iter().map(|l| l.to_expr()).reduce(ExprTree::mul).unwrap_or_else(|| ExprTree::Scalar(QLaurent::one()))
}

fn random_word<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Letter> {
    (0..len).map(|_| random_letter(rng)).collect()
}

/// A sum of one to three scaled words of length at most `max_degree`.
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, max_degree: usize) -> ExprTree {
    let terms = rng.gen_range(1..=3);
    (0..terms)
        .map(|_| {
            let len = rng.gen_range(0..=max_degree);
            ExprTree::Scalar(unit_coefficient(rng)).mul(word_expr(&random_word(rng, len)))
        })
        .reduce(ExprTree::add)
        .expect("at least one term")
}

/// An expression that vanishes in the algebra: `a . (lhs - rhs) . b` for a
/// random rewrite rule, padded by random words while the total word length
/// stays within `max_degree` (the bare relation is used when it alone
/// exceeds it), optionally added to a random expression and its copy.
pub fn random_zero_expr<R: Rng + ?Sized>(rng: &mut R, l: u32, max_degree: usize) -> ExprTree {
    let rule: Rule = *RULES.choose(rng).expect("nonempty");
    let rhs = rule.rhs_expr(l);
    let core_len = rhs.degree().max(2);
    let room = max_degree.saturating_sub(core_len);
    let left = rng.gen_range(0..=room);
    let right = rng.gen_range(0..=room - left);
    let relation = rule.lhs_expr().sub(rhs);
    let zero = word_expr(&random_word(rng, left))
        .mul(relation)
        .mul(word_expr(&random_word(rng, right)))
        .mul(ExprTree::Scalar(unit_coefficient(rng)));
    if rng.gen_bool(0.5) {
        let e = random_expr(rng, room.max(1));
        zero.add(e.clone()).sub(e)
    } else {
        zero
    }
}

/// A normal form with up to `max_terms` PBW monomials of length at most
/// `max_len`.
pub fn random_normalform<R: Rng + ?Sized>(rng: &mut R, l: u32, max_terms: usize, max_len: usize) -> NormalForm {
    let mut out = NormalForm::zero(l);
    for _ in 0..rng.gen_range(1..=max_terms) {
        let m = random_monomial(rng, max_len);
        out = out.add(&NormalForm::term(l, m, unit_coefficient(rng)));
    }
    out
}

fn random_monomial<R: Rng + ?Sized>(rng: &mut R, max_len: usize) -> Monomial {
    let len = rng.gen_range(0..=max_len);
    let c = rng.gen_range(0..=len);
    let d = rng.gen_range(0..=len - c);
    let ds = len - c - d;
    let c_pow = if rng.gen_bool(0.5) { c as i64 } else { -(c as i64) };
    Monomial::new(c_pow, d as u32, ds as u32)
}

/// A normal form homogeneous of degree `n` (monomials `C(e) d^j d*^k` with
/// `e - j + k = n`, `|e| + j + k <= max_len`). Requires `|n| <= max_len`.
pub fn random_homogeneous_normalform<R: Rng + ?Sized>(
    rng: &mut R,
    l: u32,
    n: i64,
    max_terms: usize,
    max_len: usize,
) -> NormalForm {
    assert!(n.unsigned_abs() as usize <= max_len, "degree {n} needs words longer than {max_len}");
    let max_len = max_len as i64;
    let mut candidates = Vec::new();
    for e in -max_len..=max_len {
        for j in 0..=max_len {
            let k = n - e + j;
            if k >= 0 && e.abs() + j + k <= max_len {
                candidates.push(Monomial::new(e, j as u32, k as u32));
            }
        }
    }
    let mut out = NormalForm::zero(l);
    for _ in 0..rng.gen_range(1..=max_terms) {
        let m = *candidates.choose(rng).expect("degree reachable");
        out = out.add(&NormalForm::term(l, m, unit_coefficient(rng)));
    }
    out
}

fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// A finitely supported element with up to `max_points` point masses on
/// layers `|k|, |m| <= 2` and levels `p < p_max`.
pub fn random_finite_element<R: Rng + ?Sized>(rng: &mut R, l: u32, max_points: usize, p_max: usize) -> GElement {
    let mut entries = Vec::new();
    for _ in 0..rng.gen_range(1..=max_points) {
        let k = rng.gen_range(-2..=2);
        let m: i64 = rng.gen_range(-2..=2);
        let s = rng.gen_range(1..=l as usize);
        let lo = (-m).max(0) as usize;
        let p = rng.gen_range(lo..p_max.max(lo + 1));
        let g = Morphism::finite(k, m, s, p).expect("valid by construction");
        entries.push((g, random_complex(rng)));
    }
    GElement::finite(l, entries).expect("valid by construction")
}

/// The normal form of a [`random_expr`].
pub fn random_generator_word<R: Rng + ?Sized>(rng: &mut R, l: u32, max_len: usize) -> NormalForm {
    let e = random_expr(rng, max_len);
    crate::expr::normalize(&e, l)
}

/// A Haar-like random `k x k` unitary, row-major: Gram-Schmidt applied to a
/// matrix of uniform entries.
pub fn random_unitary_matrix<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<C64> {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(k);
    while cols.len() < k {
        let mut v: Vec<C64> = (0..k).map(|_| random_complex(rng)).collect();
        for _ in 0..2 {
            for u in &cols {
                let dot: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, a) in v.iter_mut().zip(u) {
                    *x -= dot * a;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>();
        let norm = num_traits::Float::sqrt(norm);
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    (0..k * k).map(|idx| cols[idx % k][idx / k]).collect()
}

/// A random unitary in `M_r((K^l)^+)`: a scalar unitary times a diagonal of
/// `I + (V - I)`, with `V` unitary on the levels below `block` of each leg.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, l: u32, n: usize, r: usize, block: usize) -> ProjectionRep {
    let block = block.min(n);
    let u0 = random_unitary_matrix(rng, r);
    let scalar = (0..r * r).map(|idx| UnitizedElement::scalar(l, n, u0[idx])).collect();
    let scalar = ProjectionRep::new(l, n, r, scalar).expect("consistent shapes");
    let diag = (0..r)
        .map(|_| {
            let compact = (0..l)
                .map(|_| {
                    let v = random_unitary_matrix(rng, block);
                    let entries = (0..block * block).map(|idx| {
                        let (i, j) = (idx / block, idx % block);
                        let id = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                        (i, j, v[idx] - id)
                    });
                    SparseMatrix::from_triplets(n, n, entries)
                })
                .collect();
            UnitizedElement::new(C64::new(1.0, 0.0), compact).expect("consistent shapes")
        })
        .collect();
    let diag = ProjectionRep::diagonal(l, n, diag).expect("consistent shapes");
    scalar.mul(&diag).expect("consistent shapes")
}
