//! The symbol map and the Toeplitz-loop picture.
//!
//! Restricting an element to the fibre at infinity gives a Laurent
//! polynomial on the circle, `symbol(f)(z) = sum_m f(0,m,inf) z^-m`. Its
//! kernel is the ideal of elements with vanishing tails. Evaluating the
//! `k`-direction at `lambda` gives, on each leg, a Toeplitz-type loop whose
//! asymptotic diagonals recover the same symbol.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{Float, One, Zero};

use crate::groupoid::{chi_element, GElement};
use crate::rep::{check_leg, Basis, Coord, TruncOp};
use crate::{Error, Result, C64};

/// Laurent polynomial on the unit circle, stored by Fourier coefficient.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CircleLaurent {
    coeffs: BTreeMap<i64, C64>,
}

impl CircleLaurent {
    pub fn zero() -> Self {
        CircleLaurent::default()
    }

    pub fn one() -> Self {
        CircleLaurent::monomial(0, C64::one())
    }

    /// `a z^n`.
    pub fn monomial(n: i64, a: C64) -> Self {
        let mut out = CircleLaurent::zero();
        out.add_coeff(n, a);
        out
    }

    pub fn from_coeffs(coeffs: impl IntoIterator<Item = (i64, C64)>) -> Self {
        let mut out = CircleLaurent::zero();
        for (n, a) in coeffs {
            out.add_coeff(n, a);
        }
        out
    }

    fn add_coeff(&mut self, n: i64, a: C64) {
        let slot = self.coeffs.entry(n).or_insert_with(C64::zero);
        *slot += a;
        if slot.is_zero() {
            self.coeffs.remove(&n);
        }
    }

    pub fn coeff(&self, n: i64) -> C64 {
        self.coeffs.get(&n).copied().unwrap_or_else(C64::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coeffs.iter().map(|(n, a)| (*n, *a))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &CircleLaurent) -> CircleLaurent {
        let mut out = self.clone();
        for (n, a) in other.coeffs() {
            out.add_coeff(n, a);
        }
        out
    }

    pub fn sub(&self, other: &CircleLaurent) -> CircleLaurent {
        let mut out = self.clone();
        for (n, a) in other.coeffs() {
            out.add_coeff(n, -a);
        }
        out
    }

    /// Pointwise product, i.e. convolution of coefficients.
    pub fn mul(&self, other: &CircleLaurent) -> CircleLaurent {
        let mut out = CircleLaurent::zero();
        for (n, a) in self.coeffs() {
            for (m, b) in other.coeffs() {
                out.add_coeff(n + m, a * b);
            }
        }
        out
    }

    /// Value at a point of the circle.
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs().map(|(n, a)| a * z.powi(i32::try_from(n).expect("exponent out of range"))).sum()
    }

    /// Largest coefficient difference.
    pub fn max_deviation(&self, other: &CircleLaurent) -> f64 {
        self.sub(other).coeffs().map(|(_, a)| a.norm()).fold(0.0, f64::max)
    }
}

impl fmt::Display for CircleLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<_> = self.coeffs().map(|(n, a)| format!("({}{:+}i) z^{n}", a.re, a.im)).collect();
        f.write_str(&parts.join(" + "))
    }
}

fn check_unit(mu: C64, what: &str) -> Result<()> {
    if Float::abs(mu.norm() - 1.0) > 1e-12 {
        return Err(Error::Domain(format!("|{what}| = {} must be 1", mu.norm())));
    }
    Ok(())
}

/// `sum_m f(0,m,inf) z^-m`.
pub fn symbol(f: &GElement) -> CircleLaurent {
    CircleLaurent::from_coeffs(f.layers().map(|((_, m), layer)| (-m, layer.tail())))
}

/// The character `pi_0^mu`: the symbol evaluated at `mu`.
pub fn character_pi0(f: &GElement, mu: C64) -> Result<C64> {
    check_unit(mu, "mu")?;
    Ok(symbol(f).eval(mu))
}

/// True iff every tail vanishes.
pub fn in_ideal(f: &GElement) -> bool {
    f.layers().all(|(_, layer)| layer.tail().is_zero())
}

/// Lifts `sum a_n z^n` to `sum a_n chi_{C_n}`.
pub fn lift(g: &CircleLaurent, l: u32) -> GElement {
    let chis: Vec<(C64, GElement)> = g.coeffs().map(|(n, a)| (a, chi_element(n, l))).collect();
    let refs: Vec<(C64, &GElement)> = chis.iter().map(|(a, x)| (*a, x)).collect();
    GElement::linear_combination(l, &refs).expect("same l")
}

/// The loop `a_s(lambda)` on leg `s`, truncated at level `n`:
/// entry `(p+m, p)` is `sum_k lambda^-k f(k,m,(s,p))`.
pub fn eval_loop(f: &GElement, lambda: C64, s: usize, n: usize) -> Result<TruncOp> {
    check_unit(lambda, "lambda")?;
    check_leg(s, f.l())?;
    let basis = Basis::Irrep { s, n };
    let mut entries = Vec::new();
    for ((k, m), _) in f.layers() {
        let phase = lambda.powi(-i32::try_from(k).expect("layer index out of range"));
        for p in 0..n {
            let row = p as i64 + m;
            if row < 0 || row >= n as i64 {
                continue;
            }
            let v = f.eval(k, m, s, p);
            if !v.is_zero() {
                entries.push((Coord::new(0, s, row as usize), Coord::new(0, s, p), phase * v));
            }
        }
    }
    Ok(TruncOp::from_coords(basis, entries))
}

/// Reads the asymptotic Toeplitz symbol of a single-leg operator: the
/// coefficient of `z^j` (`|j| <= band`) is the mean of `M[p-j, p]` over the
/// columns `N/2 <= p < N - margin - band`. Fails with the offending diagonal
/// if its entries spread more than `tol` from their mean.
pub fn toeplitz_symbol(m: &TruncOp, band: usize, margin: usize, tol: f64) -> Result<CircleLaurent> {
    let Basis::Irrep { s, n } = m.basis() else {
        return Err(Error::BasisMismatch(format!("expected a single-leg operator, got {:?}", m.basis())));
    };
    if band + margin >= n || n / 2 >= n - margin - band {
        return Err(Error::DegenerateWindow { margin: band + margin, extent: n - n / 2 });
    }
    let cols = n / 2..n - margin - band;
    let count = cols.len() as f64;
    let band = band as i64;
    let mut out = CircleLaurent::zero();
    for j in -band..=band {
        let entries: Vec<C64> =
            cols.clone().map(|p| m.get(Coord::new(0, s, (p as i64 - j) as usize), Coord::new(0, s, p))).collect();
        let mean = entries.iter().sum::<C64>() / count;
        let deviation = entries.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
        if deviation > tol {
            return Err(Error::NotToeplitz { diagonal: j, deviation });
        }
        out.add_coeff(j, mean);
    }
    Ok(out)
}
