//! The groupoid `F` and its convolution algebra.
//!
//! Morphisms are `(k, m, p)_s` with `p, p + m >= 0`, composed by
//! `(k,m,p)_s (k',m',p')_s = (k+k', m+m', p')_s` when `p = p' + m'`, plus the
//! group `{(0, m, inf)}` at the fixed point. Elements are finite families of
//! `(k, m)` layers; each layer carries its value at infinity (the tail) and a
//! certificate for how fast the finite values approach it.
//!
//! The induced representation acts on the merged basis by
//! `e_(t,s,p) -> sum f(k,m,(s,p)) e_(t+k,s,p+m)`, so that `c` and `d` embed
//! as the layers `(0,-1)` and `(-1,0)`.

mod element;
mod morphism;

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::{One, Zero};

pub use element::{Decay, Evaluator, GElement, Layer};
pub use morphism::{Fiber, Morphism};

use crate::coeff::pow_int;
use crate::expr::{Monomial, NormalForm};
use crate::rep::{d_eigenvalue, weight, Coord, RepParams, TruncOp};
use crate::{Error, Result, C64};

/// `c` as the layer `(0,-1)` with values `w_{p,s}` and tail 1.
pub fn embed_c(params: &RepParams) -> GElement {
    let (q, l) = (params.q, params.l);
    let f: Evaluator = Arc::new(move |s, p| C64::new(weight(q, l, s, p), 0.0));
    // 1 - w_{p,s} <= sum_m q^{2(pl+s-m)} <= l q^{2-2l} (q^{2l})^p
    let decay = Decay { c: f64::from(l) * pow_int(q, 2 - 2 * i64::from(l)), r: pow_int(q, 2 * i64::from(l)) };
    GElement::from_layers(l, [((0, -1), Layer::lazy(f, C64::one(), decay))]).expect("valid layer")
}

/// `d` as the layer `(-1,0)` with values `q^{pl+s}` and tail 0.
pub fn embed_d(params: &RepParams) -> GElement {
    let (q, l) = (params.q, params.l);
    let f: Evaluator = Arc::new(move |s, p| C64::new(d_eigenvalue(q, l, s, p), 0.0));
    let decay = Decay { c: q, r: pow_int(q, i64::from(l)) };
    GElement::from_layers(l, [((-1, 0), Layer::lazy(f, C64::zero(), decay))]).expect("valid layer")
}

/// The generator images and their adjoints.
struct Embedder {
    l: u32,
    factors: [GElement; 4],
}

impl Embedder {
    fn new(params: &RepParams) -> Self {
        let c = embed_c(params);
        let d = embed_d(params);
        let cs = c.involve();
        let ds = d.involve();
        Embedder { l: params.l, factors: [c, cs, d, ds] }
    }

    fn monomial(&self, m: &Monomial) -> Result<GElement> {
        let [c, cs, d, ds] = &self.factors;
        let c_factor = if m.c_pow >= 0 { c } else { cs };
        let word = core::iter::repeat_n(c_factor, m.c_pow.unsigned_abs() as usize)
            .chain(core::iter::repeat_n(d, m.d_pow as usize))
            .chain(core::iter::repeat_n(ds, m.ds_pow as usize));
        let mut acc: Option<GElement> = None;
        for g in word {
            acc = Some(match acc {
                None => g.clone(),
                Some(a) => a.convolve(g)?,
            });
        }
        Ok(acc.unwrap_or_else(|| GElement::unit(self.l)))
    }
}

/// Image of a normal form: monomials as convolution products of the
/// generator images, extended linearly.
pub fn embed_normalform(n: &NormalForm, params: &RepParams) -> Result<GElement> {
    params.validate()?;
    if n.l() != params.l {
        return Err(Error::Domain(alloc::format!("normal form has l = {}, params have l = {}", n.l(), params.l)));
    }
    let embedder = Embedder::new(params);
    let mut parts = Vec::new();
    for (m, a) in n.terms() {
        parts.push((a.eval_unchecked(params.q), embedder.monomial(m)?));
    }
    let refs: Vec<(C64, &GElement)> = parts.iter().map(|(a, g)| (*a, g)).collect();
    GElement::linear_combination(params.l, &refs)
}

/// The indicator of `C_n = {(0,-n,p)_s : p >= n} u {(0,-n,inf)}`.
pub fn chi_element(n: i64, l: u32) -> GElement {
    let one: Evaluator = Arc::new(|_, _| C64::one());
    let horizon = n.max(0) as usize;
    let layer = Layer::new(BTreeMap::new(), Some(one), horizon, C64::one(), Decay::EXACT);
    GElement::from_layers(l, [((0, -n), layer)]).expect("valid layer")
}

/// `rho~(f) e_(t,s,p)` without truncation.
pub fn induced_apply(f: &GElement, at: Coord) -> Vec<(Coord, C64)> {
    f.layers()
        .filter(|&((_, m), _)| at.p as i64 + m >= 0)
        .map(|((k, m), _)| {
            let v = f.eval(k, m, at.s, at.p);
            (Coord::new(at.t + k, at.s, (at.p as i64 + m) as usize), v)
        })
        .filter(|(_, v)| !v.is_zero())
        .collect()
}

/// The induced representation on the merged basis, truncated to `|t| <= W`
/// and `p < N`.
pub fn induced_rep(f: &GElement, params: &RepParams) -> Result<TruncOp> {
    params.validate()?;
    if f.l() != params.l {
        return Err(Error::Domain(alloc::format!("element has l = {}, params have l = {}", f.l(), params.l)));
    }
    let basis = params.merged_basis();
    let entries: Vec<(Coord, Coord, C64)> =
        basis.coords().flat_map(|col| induced_apply(f, col).into_iter().map(move |(row, v)| (row, col, v))).collect();
    Ok(TruncOp::from_coords(basis, entries))
}

/// `rho_n(f)` on the legs basis for `f` homogeneous of degree `n`:
/// `<e_(s,p+mu), rho_n(f) e_(s,p)> = f(mu+n, mu, (s,p))`.
pub fn rho_n(f: &GElement, n: i64, params: &RepParams) -> Result<TruncOp> {
    f.check_homogeneous(n)?;
    let basis = params.legs_basis();
    let mut entries = Vec::new();
    for col in basis.coords() {
        for ((k, m), _) in f.layers() {
            debug_assert_eq!(k - m, n);
            if col.p as i64 + m < 0 {
                continue;
            }
            let v = f.eval(k, m, col.s, col.p);
            if !v.is_zero() {
                entries.push((Coord::new(0, col.s, (col.p as i64 + m) as usize), col, v));
            }
        }
    }
    Ok(TruncOp::from_coords(basis, entries))
}

/// `u_m . rho~(f) . u_{m-n}^{-1}`, where `u_m` identifies the orbit slice
/// `X_m = {e_(t,s,p) : t = p + m}` with the legs basis.
pub fn rho_n_via_shift(f: &GElement, n: i64, m0: i64, params: &RepParams) -> Result<TruncOp> {
    f.check_homogeneous(n)?;
    let basis = params.legs_basis();
    let mut entries = Vec::new();
    for col in basis.coords() {
        let start = Coord::new(col.p as i64 + m0 - n, col.s, col.p);
        for (img, v) in induced_apply(f, start) {
            if img.t != img.p as i64 + m0 {
                return Err(Error::NotHomogeneous { expected: n });
            }
            entries.push((Coord::new(0, img.s, img.p), col, v));
        }
    }
    Ok(TruncOp::from_coords(basis, entries))
}

/// The truncated legs-basis operator `(+)_s S^n` (`(S*)^{|n|}` for `n < 0`).
pub fn shift_model(n: i64, params: &RepParams) -> TruncOp {
    crate::rep::shift_power(params.legs_basis(), n)
}
