use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::{Float, One, Zero};

use super::{Fiber, Morphism};
use crate::{Error, Result, C64};

/// Pure evaluator `(s, p) -> value`.
pub type Evaluator = Arc<dyn Fn(usize, usize) -> C64 + Send + Sync>;

type ScaledLayers = Vec<(C64, Arc<Layer>)>;

/// Certificate `|value(s,p) - tail| <= c r^p` at every valid point of a layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decay {
    pub c: f64,
    pub r: f64,
}

impl Decay {
    pub const EXACT: Decay = Decay { c: 0.0, r: 0.5 };

    pub fn bound(&self, p: usize) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        self.c * Float::powi(self.r, i32::try_from(p).unwrap_or(i32::MAX))
    }
}

/// One `(k, m)` layer of an element: the values over all valid `(s, p)`.
#[derive(Clone)]
pub struct Layer {
    exceptional: BTreeMap<(usize, usize), C64>,
    tail_fn: Option<Evaluator>,
    horizon: usize,
    tail: C64,
    decay: Decay,
}

impl core::fmt::Debug for Layer {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Layer")
            .field("exceptional", &self.exceptional)
            .field("lazy", &self.tail_fn.is_some())
            .field("horizon", &self.horizon)
            .field("tail", &self.tail)
            .field("decay", &self.decay)
            .finish()
    }
}

impl Layer {
    /// A layer whose value is `exceptional[(s,p)]` where present, otherwise
    /// `tail_fn(s,p)` for `p >= horizon` and zero below it.
    pub fn new(
        exceptional: BTreeMap<(usize, usize), C64>,
        tail_fn: Option<Evaluator>,
        horizon: usize,
        tail: C64,
        decay: Decay,
    ) -> Self {
        let mut exceptional = exceptional;
        if tail_fn.is_none() {
            exceptional.retain(|_, v| !v.is_zero());
        }
        Layer { exceptional, tail_fn, horizon, tail, decay }
    }

    /// A finitely supported layer with tail zero and a certificate with
    /// `r = 1/2` computed from its entries.
    pub fn finite(entries: BTreeMap<(usize, usize), C64>) -> Self {
        let c = entries.iter().map(|(&(_, p), v)| v.norm() * Float::powi(2.0, p as i32)).fold(0.0, f64::max);
        Layer::new(entries, None, 0, C64::zero(), Decay { c, r: 0.5 })
    }

    pub fn lazy(f: Evaluator, tail: C64, decay: Decay) -> Self {
        Layer::new(BTreeMap::new(), Some(f), 0, tail, decay)
    }

    pub fn value(&self, s: usize, p: usize) -> C64 {
        if let Some(v) = self.exceptional.get(&(s, p)) {
            return *v;
        }
        match &self.tail_fn {
            Some(f) if p >= self.horizon => f(s, p),
            _ => C64::zero(),
        }
    }

    pub fn tail(&self) -> C64 {
        self.tail
    }

    pub fn decay(&self) -> Decay {
        self.decay
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn exceptional(&self) -> &BTreeMap<(usize, usize), C64> {
        &self.exceptional
    }

    pub fn is_finite(&self) -> bool {
        self.tail_fn.is_none()
    }
}

/// An element of the convolution algebra of `F`: a finite family of layers
/// indexed by `(k, m)`.
#[derive(Clone, Debug)]
pub struct GElement {
    l: u32,
    layers: BTreeMap<(i64, i64), Arc<Layer>>,
}

fn valid(m: i64, p: usize) -> bool {
    p as i64 + m >= 0
}

impl GElement {
    pub fn zero(l: u32) -> Self {
        GElement { l, layers: BTreeMap::new() }
    }

    /// Builds an element from layers, checking the tail and validity
    /// invariants.
    pub fn from_layers(l: u32, layers: impl IntoIterator<Item = ((i64, i64), Layer)>) -> Result<Self> {
        let mut out = GElement::zero(l);
        for ((k, m), layer) in layers {
            if k != 0 && !layer.tail.is_zero() {
                return Err(Error::InvalidMorphism(format!("layer ({k},{m}) has nonzero tail at infinity")));
            }
            for &(s, p) in layer.exceptional.keys() {
                if s == 0 || s > l as usize || !valid(m, p) {
                    return Err(Error::InvalidMorphism(format!("({k},{m},{p})_{s}")));
                }
            }
            if out.layers.insert((k, m), Arc::new(layer)).is_some() {
                return Err(Error::InvalidMorphism(format!("duplicate layer ({k},{m})")));
            }
        }
        Ok(out)
    }

    /// The unit: value 1 on every unit morphism, including `(0,0,inf)`.
    pub fn unit(l: u32) -> Self {
        let one: Evaluator = Arc::new(|_, _| C64::one());
        let layer = Layer::lazy(one, C64::one(), Decay::EXACT);
        GElement { l, layers: BTreeMap::from([((0, 0), Arc::new(layer))]) }
    }

    /// The point mass at a finite morphism.
    pub fn delta(l: u32, g: Morphism) -> Result<Self> {
        g.validate()?;
        let Fiber::Finite { s, p } = g.fiber else {
            return Err(Error::InvalidMorphism(format!("{g}: point masses live on finite fibres")));
        };
        if s > l as usize {
            return Err(Error::LegOutOfRange { s, l: l as usize });
        }
        let layer = Layer::finite(BTreeMap::from([((s, p), C64::one())]));
        Self::from_layers(l, [((g.k, g.m), layer)])
    }

    /// Finitely supported element from `(morphism, value)` pairs; repeated
    /// morphisms are summed.
    pub fn finite(l: u32, entries: impl IntoIterator<Item = (Morphism, C64)>) -> Result<Self> {
        let mut maps: BTreeMap<(i64, i64), BTreeMap<(usize, usize), C64>> = BTreeMap::new();
        for (g, v) in entries {
            g.validate()?;
            let Fiber::Finite { s, p } = g.fiber else {
                return Err(Error::InvalidMorphism(format!("{g}: point masses live on finite fibres")));
            };
            *maps.entry((g.k, g.m)).or_default().entry((s, p)).or_insert_with(C64::zero) += v;
        }
        Self::from_layers(l, maps.into_iter().map(|(km, map)| (km, Layer::finite(map))))
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn layers(&self) -> impl Iterator<Item = ((i64, i64), &Layer)> {
        self.layers.iter().map(|(km, l)| (*km, l.as_ref()))
    }

    pub fn layer(&self, k: i64, m: i64) -> Option<&Layer> {
        self.layers.get(&(k, m)).map(Arc::as_ref)
    }

    pub fn layer_keys(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.layers.keys().copied()
    }

    pub fn is_finitely_supported(&self) -> bool {
        self.layers.values().all(|l| l.is_finite())
    }

    /// Value at `(k, m, p)_s`; zero at invalid points and absent layers.
    pub fn eval(&self, k: i64, m: i64, s: usize, p: usize) -> C64 {
        if s == 0 || s > self.l as usize || !valid(m, p) {
            return C64::zero();
        }
        self.layers.get(&(k, m)).map_or(C64::zero(), |l| l.value(s, p))
    }

    pub fn eval_at(&self, g: &Morphism) -> C64 {
        match g.fiber {
            Fiber::Finite { s, p } => self.eval(g.k, g.m, s, p),
            Fiber::Infinity => self.tail(g.k, g.m),
        }
    }

    /// Value at `(k, m, inf)`.
    pub fn tail(&self, k: i64, m: i64) -> C64 {
        self.layers.get(&(k, m)).map_or(C64::zero(), |l| l.tail)
    }

    /// Degrees `k - m` of the layers present.
    pub fn degrees(&self) -> BTreeSet<i64> {
        self.layers.keys().map(|(k, m)| k - m).collect()
    }

    /// `sum_i a_i f_i`.
    pub fn linear_combination(l: u32, terms: &[(C64, &GElement)]) -> Result<Self> {
        let mut groups: BTreeMap<(i64, i64), ScaledLayers> = BTreeMap::new();
        for (a, f) in terms {
            if f.l != l {
                return Err(Error::Domain(format!("mixing elements with l = {} and l = {l}", f.l)));
            }
            if a.is_zero() {
                continue;
            }
            for (km, layer) in &f.layers {
                groups.entry(*km).or_default().push((*a, layer.clone()));
            }
        }
        let mut out = GElement::zero(l);
        for (km, parts) in groups {
            let tail: C64 = parts.iter().map(|(a, ly)| a * ly.tail).sum();
            let layer = if parts.iter().all(|(_, ly)| ly.is_finite()) {
                let mut map: BTreeMap<(usize, usize), C64> = BTreeMap::new();
                for (a, ly) in &parts {
                    for (sp, v) in &ly.exceptional {
                        *map.entry(*sp).or_insert_with(C64::zero) += a * v;
                    }
                }
                map.retain(|_, v| !v.is_zero());
                if map.is_empty() {
                    continue;
                }
                Layer::finite(map)
            } else {
                let decay = Decay {
                    c: parts.iter().map(|(a, ly)| a.norm() * ly.decay.c).sum(),
                    r: parts.iter().map(|(_, ly)| ly.decay.r).fold(0.0, f64::max),
                };
                let f: Evaluator = Arc::new(move |s, p| parts.iter().map(|(a, ly)| a * ly.value(s, p)).sum());
                Layer::lazy(f, tail, decay)
            };
            out.layers.insert(km, Arc::new(layer));
        }
        Ok(out)
    }

    pub fn add(&self, other: &GElement) -> Result<GElement> {
        Self::linear_combination(self.l, &[(C64::one(), self), (C64::one(), other)])
    }

    pub fn sub(&self, other: &GElement) -> Result<GElement> {
        Self::linear_combination(self.l, &[(C64::one(), self), (-C64::one(), other)])
    }

    pub fn scale(&self, a: C64) -> GElement {
        Self::linear_combination(self.l, &[(a, self)]).expect("same l")
    }

    /// Convolution `(f*g)(k,m,(s,p)) = sum f(k1,m1,(s,p+m2)) g(k2,m2,(s,p))`.
    pub fn convolve(&self, g: &GElement) -> Result<GElement> {
        if self.l != g.l {
            return Err(Error::Domain(format!("convolving l = {} with l = {}", self.l, g.l)));
        }
        type Pair = (i64, Arc<Layer>, Arc<Layer>);
        let mut groups: BTreeMap<(i64, i64), Vec<Pair>> = BTreeMap::new();
        for (&(k1, m1), lf) in &self.layers {
            for (&(k2, m2), lg) in &g.layers {
                groups.entry((k1 + k2, m1 + m2)).or_default().push((m2, lf.clone(), lg.clone()));
            }
        }
        let mut out = GElement::zero(self.l);
        for (km, pairs) in groups {
            let tail: C64 = pairs.iter().map(|(_, lf, lg)| lf.tail * lg.tail).sum();
            let layer = if pairs.iter().all(|(_, lf, lg)| lf.is_finite() && lg.is_finite()) {
                let mut map: BTreeMap<(usize, usize), C64> = BTreeMap::new();
                for (m2, lf, lg) in &pairs {
                    for (&(s, p), b) in &lg.exceptional {
                        let p1 = (p as i64 + m2) as usize;
                        if let Some(a) = lf.exceptional.get(&(s, p1)) {
                            *map.entry((s, p)).or_insert_with(C64::zero) += a * b;
                        }
                    }
                }
                map.retain(|_, v| !v.is_zero());
                if map.is_empty() {
                    continue;
                }
                Layer::finite(map)
            } else {
                let r = pairs.iter().flat_map(|(_, lf, lg)| [lf.decay.r, lg.decay.r]).fold(0.0, f64::max);
                let c = pairs
                    .iter()
                    .map(|(m2, lf, lg)| {
                        let (tf, tg) = (lf.tail.norm(), lg.tail.norm());
                        let m2 = i32::try_from(*m2).expect("layer offset out of range");
                        let mut c = lf.decay.c * Float::powi(lf.decay.r, m2) * (tg + lg.decay.c) + tf * lg.decay.c;
                        if m2 < 0 {
                            c += tf * tg * Float::powi(r, m2);
                        }
                        c
                    })
                    .sum();
                let f: Evaluator = Arc::new(move |s, p| {
                    pairs
                        .iter()
                        .filter(|(m2, _, _)| p as i64 + m2 >= 0)
                        .map(|(m2, lf, lg)| lf.value(s, (p as i64 + m2) as usize) * lg.value(s, p))
                        .sum()
                });
                Layer::lazy(f, tail, Decay { c, r })
            };
            out.layers.insert(km, Arc::new(layer));
        }
        Ok(out)
    }

    /// `f*(g) = conj f(g^-1)`.
    pub fn involve(&self) -> GElement {
        let mut out = GElement::zero(self.l);
        for (&(k, m), layer) in &self.layers {
            // The new layer (-k, -m) at level p reads the old one at p - m.
            let tail = layer.tail.conj();
            let new = if layer.is_finite() {
                let map =
                    layer.exceptional.iter().map(|(&(s, p), v)| ((s, (p as i64 + m) as usize), v.conj())).collect();
                Layer::finite(map)
            } else {
                let src = layer.clone();
                let f: Evaluator = Arc::new(move |s, p| src.value(s, (p as i64 - m) as usize).conj());
                let m_i32 = i32::try_from(m).expect("layer offset out of range");
                let decay = Decay { c: layer.decay.c * Float::powi(layer.decay.r, -m_i32), r: layer.decay.r };
                Layer::lazy(f, tail, decay)
            };
            out.layers.insert((-k, -m), Arc::new(new));
        }
        out
    }

    /// The layers with `k - m = n`.
    pub fn degree_component(&self, n: i64) -> GElement {
        GElement {
            l: self.l,
            layers: self.layers.iter().filter(|((k, m), _)| k - m == n).map(|(km, l)| (*km, l.clone())).collect(),
        }
    }

    /// Degree if every layer has the same `k - m`; `None` for zero.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut degs = self.degrees().into_iter();
        let first = degs.next()?;
        degs.next().is_none().then_some(first)
    }

    pub fn check_homogeneous(&self, n: i64) -> Result<()> {
        if self.layers.keys().all(|(k, m)| k - m == n) {
            Ok(())
        } else {
            Err(Error::NotHomogeneous { expected: n })
        }
    }

    /// Largest pointwise difference over all valid points with `p < horizon`
    /// and over the tails.
    pub fn max_difference(&self, other: &GElement, horizon: usize) -> f64 {
        let keys: BTreeSet<(i64, i64)> = self.layers.keys().chain(other.layers.keys()).copied().collect();
        let mut worst = 0.0f64;
        for (k, m) in keys {
            worst = worst.max((self.tail(k, m) - other.tail(k, m)).norm());
            for s in 1..=self.l as usize {
                for p in 0..horizon {
                    worst = worst.max((self.eval(k, m, s, p) - other.eval(k, m, s, p)).norm());
                }
            }
        }
        worst
    }

    /// Largest ratio violation of the decay certificates, sampled at valid
    /// points `p < horizon`: returns `max (|value - tail| - c r^p)`, which is
    /// at most zero (up to rounding) when every certificate is sound.
    pub fn decay_violation(&self, horizon: usize) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (&(_, m), layer) in &self.layers {
            for s in 1..=self.l as usize {
                for p in (0..horizon).filter(|&p| valid(m, p)) {
                    let excess = (layer.value(s, p) - layer.tail).norm() - layer.decay.bound(p);
                    worst = worst.max(excess);
                }
            }
        }
        worst
    }
}
