use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::ExprTree;
use crate::coeff::QLaurent;

/// A PBW monomial `c^i d^j d*^k` (`c_pow = i >= 0`) or `c*^i d^j d*^k`
/// (`c_pow = -i < 0`). The two families share the `i = 0` monomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub c_pow: i64,
    pub d_pow: u32,
    pub ds_pow: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { c_pow: 0, d_pow: 0, ds_pow: 0 };

    pub fn new(c_pow: i64, d_pow: u32, ds_pow: u32) -> Self {
        Monomial { c_pow, d_pow, ds_pow }
    }

    /// Grading with `deg c = 1`, `deg d = -1`.
    pub fn degree(&self) -> i64 {
        self.c_pow - i64::from(self.d_pow) + i64::from(self.ds_pow)
    }

    pub fn len(&self) -> usize {
        self.c_pow.unsigned_abs() as usize + self.d_pow as usize + self.ds_pow as usize
    }

    pub fn is_empty(&self) -> bool {
        *self == Monomial::ONE
    }

    /// The monomial as a product of generators, left to right.
    pub fn to_expr(&self) -> ExprTree {
        let mut factors: Vec<ExprTree> = Vec::new();
        let c = if self.c_pow >= 0 { ExprTree::c() } else { ExprTree::c().adjoint() };
        factors.extend(core::iter::repeat_n(c, self.c_pow.unsigned_abs() as usize));
        factors.extend(core::iter::repeat_n(ExprTree::d(), self.d_pow as usize));
        factors.extend(core::iter::repeat_n(ExprTree::d().adjoint(), self.ds_pow as usize));
        factors.into_iter().reduce(ExprTree::mul).unwrap_or_else(|| ExprTree::Scalar(QLaurent::one()))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        let mut push = |name: &str, n: u64| match n {
            0 => {}
            1 => parts.push(String::from(name)),
            n => parts.push(alloc::format!("{name}^{n}")),
        };
        if self.c_pow >= 0 {
            push("c", self.c_pow as u64);
        } else {
            push("c*", self.c_pow.unsigned_abs());
        }
        push("d", u64::from(self.d_pow));
        push("d*", u64::from(self.ds_pow));
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join(" . "))
        }
    }
}

/// A canonical element of `O(L_q(l;1,l))`: a finite linear combination of
/// PBW monomials with nonzero exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalForm {
    l: u32,
    terms: BTreeMap<Monomial, QLaurent>,
}

/// `Π_e (1 - q^e x)` as coefficients of `x^0, x^1, ...`.
fn one_minus_product(exponents: impl Iterator<Item = i64>) -> Vec<QLaurent> {
    let mut poly = vec![QLaurent::one()];
    for e in exponents {
        let factor = -QLaurent::q_pow(e);
        let mut next = vec![QLaurent::zero(); poly.len() + 1];
        for (r, a) in poly.iter().enumerate() {
            next[r] += a;
            next[r + 1] += &(a * &factor);
        }
        poly = next;
    }
    poly
}

/// Writes `C(a) C(b) = C(a+b) · Σ_r g_r (d d*)^r`, where `C(e)` is `c^e` for
/// `e >= 0` and `c*^{-e}` otherwise; returns the `g_r`.
fn c_product(l: i64, a: i64, b: i64) -> Vec<QLaurent> {
    if (a >= 0 && b >= 0) || (a <= 0 && b <= 0) {
        return vec![QLaurent::one()];
    }
    if a > 0 {
        // c^a c*^n = c^{a-m} G_m(x) c*^{n-m}, G_m(x) = Π_{u<lm} (1 - q^{2u} x),
        // and G(x) c*^k = c*^k G(q^{2lk} x).
        let n = -b;
        let m = a.min(n);
        let shift = 2 * l * (n - m);
        one_minus_product((0..l * m).map(|u| 2 * u + shift))
    } else {
        // c*^n c^b = c*^{n-m} H_m(x) c^{b-m}, H_m(x) = Π_{1<=u<=lm} (1 - q^{-2u} x),
        // and H(x) c^k = c^k H(q^{-2lk} x).
        let n = -a;
        let m = n.min(b);
        let shift = -2 * l * (b - m);
        one_minus_product((1..=l * m).map(|u| -2 * u + shift))
    }
}

impl NormalForm {
    pub fn zero(l: u32) -> Self {
        assert!(l >= 1, "weight parameter l must be positive");
        NormalForm { l, terms: BTreeMap::new() }
    }

    pub fn one(l: u32) -> Self {
        NormalForm::scalar(l, QLaurent::one())
    }

    pub fn scalar(l: u32, s: QLaurent) -> Self {
        NormalForm::term(l, Monomial::ONE, s)
    }

    pub fn term(l: u32, m: Monomial, coeff: QLaurent) -> Self {
        let mut nf = NormalForm::zero(l);
        nf.add_term(m, &coeff);
        nf
    }

    pub fn c(l: u32) -> Self {
        NormalForm::term(l, Monomial::new(1, 0, 0), QLaurent::one())
    }

    pub fn d(l: u32) -> Self {
        NormalForm::term(l, Monomial::new(0, 1, 0), QLaurent::one())
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &QLaurent)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Option<&QLaurent> {
        self.terms.get(m)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, coeff: &QLaurent) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_default();
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &NormalForm) -> NormalForm {
        assert_eq!(self.l, other.l, "mixing normal forms with different l");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c);
        }
        out
    }

    pub fn neg(&self) -> NormalForm {
        NormalForm { l: self.l, terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }

    pub fn sub(&self, other: &NormalForm) -> NormalForm {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &QLaurent) -> NormalForm {
        let mut out = NormalForm::zero(self.l);
        for (m, c) in &self.terms {
            out.add_term(*m, &(c * s));
        }
        out
    }

    /// Product in the algebra, computed by the closed commutation formulas.
    pub fn mul(&self, other: &NormalForm) -> NormalForm {
        assert_eq!(self.l, other.l, "mixing normal forms with different l");
        let l = i64::from(self.l);
        let mut out = NormalForm::zero(self.l);
        for (m1, a1) in &self.terms {
            let passed = i64::from(m1.d_pow) + i64::from(m1.ds_pow);
            for (m2, a2) in &other.terms {
                // d^j d*^k C(b) = q^{-l b (j+k)} C(b) d^j d*^k
                let twist = QLaurent::q_pow(-l * m2.c_pow * passed);
                let base = &(a1 * a2) * &twist;
                let c_pow = m1.c_pow + m2.c_pow;
                for (r, g) in c_product(l, m1.c_pow, m2.c_pow).iter().enumerate() {
                    if g.is_zero() {
                        continue;
                    }
                    let r = r as u32;
                    let mono = Monomial::new(c_pow, m1.d_pow + m2.d_pow + r, m1.ds_pow + m2.ds_pow + r);
                    out.add_term(mono, &(&base * g));
                }
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> NormalForm {
        (0..n).fold(NormalForm::one(self.l), |acc, _| acc.mul(self))
    }

    /// The *-adjoint: `(C(e) d^j d*^k)* = q^{l e (j+k)} C(-e) d^k d*^j`.
    pub fn adjoint(&self) -> NormalForm {
        let l = i64::from(self.l);
        let mut out = NormalForm::zero(self.l);
        for (m, a) in &self.terms {
            let passed = i64::from(m.d_pow) + i64::from(m.ds_pow);
            let coeff = a.conj().shift(l * m.c_pow * passed);
            out.add_term(Monomial::new(-m.c_pow, m.ds_pow, m.d_pow), &coeff);
        }
        out
    }

    /// Splits into homogeneous components keyed by degree.
    pub fn degree_decompose(&self) -> BTreeMap<i64, NormalForm> {
        let mut out: BTreeMap<i64, NormalForm> = BTreeMap::new();
        for (m, a) in &self.terms {
            out.entry(m.degree()).or_insert_with(|| NormalForm::zero(self.l)).add_term(*m, a);
        }
        out
    }

    pub fn is_homogeneous(&self) -> Option<i64> {
        let mut degs = self.terms.keys().map(Monomial::degree);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn max_len(&self) -> usize {
        self.terms.keys().map(Monomial::len).max().unwrap_or(0)
    }

    /// The normal form as an expression tree (scalar times PBW word, summed).
    pub fn to_expr(&self) -> ExprTree {
        self.terms
            .iter()
            .map(|(m, a)| ExprTree::Scalar(a.clone()).mul(m.to_expr()))
            .reduce(ExprTree::add)
            .unwrap_or_else(|| ExprTree::Scalar(QLaurent::zero()))
    }
}

impl fmt::Display for NormalForm {
    /// Grammar text, e.g. `q^-2 . c . d` or `1 - q^-2 . d . d*`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (m, a)) in self.terms.iter().enumerate() {
            let text = if a.len() == 1 {
                let coeff = alloc::format!("{a}");
                match (a.is_one(), m.is_empty()) {
                    (true, _) => alloc::format!("{m}"),
                    (false, true) => coeff,
                    (false, false) => alloc::format!("{coeff} . {m}"),
                }
            } else if m.is_empty() {
                alloc::format!("({a})")
            } else {
                alloc::format!("({a}) . {m}")
            };
            match (idx, text.strip_prefix('-')) {
                (0, _) => f.write_str(&text)?,
                (_, Some(rest)) => write!(f, " - {rest}")?,
                (_, None) => write!(f, " + {text}")?,
            }
        }
        Ok(())
    }
}
