//! Exact scalars: Laurent polynomials in the real deformation parameter `q`
//! with Gaussian-rational coefficients.

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result, C64};

/// A complex number `re + i·im` with rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        GaussRational::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    /// `num/den` as a real Gaussian rational. Panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        GaussRational::new(BigRational::new(BigInt::from(num), BigInt::from(den)), BigRational::zero())
    }

    pub fn i() -> Self {
        GaussRational::new(BigRational::zero(), BigRational::one())
    }

    pub fn conj(&self) -> Self {
        GaussRational::new(self.re.clone(), -self.im.clone())
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }

    fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// True when the leading nonzero part is negative, so the value prints
    /// naturally behind a minus sign.
    fn is_negative_like(&self) -> bool {
        if self.im.is_zero() {
            self.re.is_negative()
        } else {
            self.re.is_zero() && self.im.is_negative()
        }
    }
}

impl Zero for GaussRational {
    fn zero() -> Self {
        GaussRational::default()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRational {
    fn one() -> Self {
        GaussRational::from_int(1)
    }
}

impl Add for GaussRational {
    type Output = GaussRational;
    fn add(self, rhs: GaussRational) -> GaussRational {
        GaussRational::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for GaussRational {
    type Output = GaussRational;
    fn sub(self, rhs: GaussRational) -> GaussRational {
        GaussRational::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational::new(-self.re, -self.im)
    }
}

impl Mul for GaussRational {
    type Output = GaussRational;
    fn mul(self, rhs: GaussRational) -> GaussRational {
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        GaussRational::new(re, im)
    }
}

impl<'a> Mul<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn mul(self, rhs: &GaussRational) -> GaussRational {
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        GaussRational::new(re, im)
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        alloc::format!("{}", r.numer())
    } else {
        alloc::format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRational {
    /// Prints in the expression grammar: `3/4`, `i`, `2 . i`, `(1 + 2 . i)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let imag = |im: &BigRational| -> String {
            if im.is_one() {
                String::from("i")
            } else {
                alloc::format!("{} . i", fmt_rational(im))
            }
        };
        if self.im.is_zero() {
            if self.re.is_negative() {
                write!(f, "-{}", fmt_rational(&-self.re.clone()))
            } else {
                f.write_str(&fmt_rational(&self.re))
            }
        } else if self.re.is_zero() {
            if self.im.is_negative() {
                write!(f, "-{}", imag(&-self.im.clone()))
            } else {
                f.write_str(&imag(&self.im))
            }
        } else {
            let sign = if self.im.is_negative() { "-" } else { "+" };
            write!(f, "({} {} {})", fmt_rational(&self.re), sign, imag(&self.im.abs()))
        }
    }
}

/// A finite sum `Σ a_k q^k` with `a_k` Gaussian rationals. Zero
/// coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QLaurent {
    terms: BTreeMap<i64, GaussRational>,
}

impl QLaurent {
    pub fn zero() -> Self {
        QLaurent::default()
    }

    pub fn one() -> Self {
        QLaurent::constant(GaussRational::one())
    }

    pub fn constant(c: GaussRational) -> Self {
        QLaurent::monomial(c, 0)
    }

    pub fn from_int(n: i64) -> Self {
        QLaurent::constant(GaussRational::from_int(n))
    }

    /// `q^k`.
    pub fn q_pow(k: i64) -> Self {
        QLaurent::monomial(GaussRational::one(), k)
    }

    /// `c · q^k`.
    pub fn monomial(c: GaussRational, k: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        QLaurent { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|c| c.is_one())
    }

    /// Iterates `(exponent, coefficient)` in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &GaussRational)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, k: i64, c: GaussRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&k) {
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.terms.insert(k, sum);
                }
            }
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    /// Complex conjugate. `q` is real, so only the coefficients change.
    pub fn conj(&self) -> Self {
        QLaurent { terms: self.terms.iter().map(|(k, c)| (*k, c.conj())).collect() }
    }

    /// Multiplies by `q^shift`. Panics if an exponent overflows.
    pub fn shift(&self, shift: i64) -> Self {
        QLaurent { terms: self.terms.iter().map(|(k, c)| (checked_exp(*k, shift), c.clone())).collect() }
    }

    pub fn scale(&self, c: &GaussRational) -> Self {
        let mut out = QLaurent::zero();
        for (k, a) in &self.terms {
            out.add_term(*k, a * c);
        }
        out
    }

    /// Numeric value at `q = q_val`, which must lie in `(0, 1)`.
    pub fn eval(&self, q_val: f64) -> Result<C64> {
        if !(q_val > 0.0 && q_val < 1.0) {
            return Err(Error::Domain(alloc::format!("q = {q_val} is not in (0,1)")));
        }
        Ok(self.eval_unchecked(q_val))
    }

    pub(crate) fn eval_unchecked(&self, q_val: f64) -> C64 {
        self.terms.iter().map(|(k, c)| c.to_c64() * pow_int(q_val, *k)).sum()
    }
}

/// `x^k` for a signed exponent.
pub(crate) fn pow_int(x: f64, k: i64) -> f64 {
    let k = i32::try_from(k).expect("exponent out of i32 range");
    num_traits::Float::powi(x, k)
}

fn checked_exp(a: i64, b: i64) -> i64 {
    a.checked_add(b).expect("q-exponent overflow")
}

impl From<GaussRational> for QLaurent {
    fn from(c: GaussRational) -> Self {
        QLaurent::constant(c)
    }
}

impl<'a> Add<&'a QLaurent> for &'a QLaurent {
    type Output = QLaurent;
    fn add(self, rhs: &QLaurent) -> QLaurent {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for QLaurent {
    type Output = QLaurent;
    fn add(mut self, rhs: QLaurent) -> QLaurent {
        self += &rhs;
        self
    }
}

impl AddAssign<&QLaurent> for QLaurent {
    fn add_assign(&mut self, rhs: &QLaurent) {
        for (k, c) in &rhs.terms {
            self.add_term(*k, c.clone());
        }
    }
}

impl<'a> Sub<&'a QLaurent> for &'a QLaurent {
    type Output = QLaurent;
    fn sub(self, rhs: &QLaurent) -> QLaurent {
        self + &(-rhs)
    }
}

impl Sub for QLaurent {
    type Output = QLaurent;
    fn sub(self, rhs: QLaurent) -> QLaurent {
        &self - &rhs
    }
}

impl Neg for &QLaurent {
    type Output = QLaurent;
    fn neg(self) -> QLaurent {
        QLaurent { terms: self.terms.iter().map(|(k, c)| (*k, -c.clone())).collect() }
    }
}

impl Neg for QLaurent {
    type Output = QLaurent;
    fn neg(self) -> QLaurent {
        -&self
    }
}

impl<'a> Mul<&'a QLaurent> for &'a QLaurent {
    type Output = QLaurent;
    fn mul(self, rhs: &QLaurent) -> QLaurent {
        let mut out = QLaurent::zero();
        for (ka, a) in &self.terms {
            for (kb, b) in &rhs.terms {
                out.add_term(checked_exp(*ka, *kb), a * b);
            }
        }
        out
    }
}

impl Mul for QLaurent {
    type Output = QLaurent;
    fn mul(self, rhs: QLaurent) -> QLaurent {
        &self * &rhs
    }
}

impl fmt::Display for QLaurent {
    /// Prints as a sum in the expression grammar, e.g. `1 - q^2`, `-3/2 . q^-1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (k, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative_like();
            let mag = if negative { -c.clone() } else { c.clone() };
            match (idx, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let qpart = match *k {
                0 => None,
                1 => Some(String::from("q")),
                k => Some(alloc::format!("q^{k}")),
            };
            match qpart {
                None => write!(f, "{mag}")?,
                Some(qp) if mag.is_one() => f.write_str(&qp)?,
                Some(qp) if mag.is_real() => write!(f, "{mag} . {qp}")?,
                Some(qp) => write!(f, "{mag} . {qp}")?,
            }
        }
        Ok(())
    }
}
