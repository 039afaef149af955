//! Property suites over the truncated models, returned as structured
//! reports.
//!
//! Each suite sweeps a list of `(l, q)` pairs using the truncation,
//! tolerance, seed and sample count of a [`RunConfig`]. Randomness is
//! seeded per pair from `seed`, so reports are reproducible.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Float, One};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{normalize, Gen, NormalForm, RULES};
use crate::groupoid::{
    chi_element, embed_c, embed_d, embed_normalform, induced_rep, rho_n, rho_n_via_shift, shift_model, GElement,
};
use crate::linalg::{norm_below, spectral_norm};
use crate::modules::{
    canonical_projection, is_isomorphic, k_invariant, line_bundle_projection, model_membership, verify_line_bundle_iso,
    KInvariant, ProjectionRep,
};
use crate::rep::{edge_safe_deviation, merged_generator, rep_expr, RepParams, Target};
use crate::sample::{
    random_expr, random_finite_element, random_generator_word, random_homogeneous_normalform, random_normalform,
    random_zero_expr,
};
use crate::structure::{eval_loop, in_ideal, lift, symbol, toeplitz_symbol, CircleLaurent};
use crate::{Error, Result, C64};

/// Operator-norm threshold separating zero from non-zero expressions.
pub const FAITHFUL_THRESHOLD: f64 = 1e-8;
/// Tolerance for convolution associativity and symbol multiplicativity.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Floor added to truncation bounds that fall below double precision.
pub const FLOAT_FLOOR: f64 = 1e-14;

/// Truncation and sampling parameters shared by all suites.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub q: f64,
    pub l: u32,
    pub n: usize,
    pub w: usize,
    pub tol: f64,
    pub margin: usize,
    pub seed: u64,
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { q: 0.5, l: 2, n: 64, w: 16, tol: 1e-9, margin: 8, seed: 0, samples: 100 }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::Domain(format!("q = {} must lie in (0, 1)", self.q)));
        }
        if self.l == 0 {
            return Err(Error::Domain("l must be positive".into()));
        }
        if self.n < 8 {
            return Err(Error::Domain(format!("N = {} must be at least 8", self.n)));
        }
        if self.w < 4 {
            return Err(Error::Domain(format!("W = {} must be at least 4", self.w)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Domain(format!("tol = {} must be positive", self.tol)));
        }
        Ok(())
    }

    pub fn params(&self, l: u32, q: f64) -> Result<RepParams> {
        RepParams::new(q, l, self.n, self.w)
    }

    /// The single pair `(l, q)` of this configuration.
    pub fn pair(&self) -> Vec<(u32, f64)> {
        vec![(self.l, self.q)]
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

/// `l in {1, 2, 3}` crossed with `q in {0.3, 0.5, 0.8}`.
pub fn standard_grid() -> Vec<(u32, f64)> {
    let mut out = Vec::new();
    for l in 1..=3 {
        for q in [0.3, 0.5, 0.8] {
            out.push((l, q));
        }
    }
    out
}

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub note: String,
}

impl CheckReport {
    fn new(name: &str, max_deviation: f64, tolerance: f64, samples: usize, note: String) -> Self {
        CheckReport { name: name.into(), passed: max_deviation <= tolerance, max_deviation, tolerance, samples, note }
    }
}

fn salt(l: u32, q: f64, tag: u64) -> u64 {
    (u64::from(l) << 32) ^ q.to_bits() ^ tag
}

/// Every rewrite rule as an edge-safe operator identity in the merged model
/// and in each irreducible representation.
pub fn relations(cfg: &RunConfig, grid: &[(u32, f64)]) -> Result<CheckReport> {
    let (mut worst, mut count) = (0.0f64, 0);
    for &(l, q) in grid {
        let p = cfg.params(l, q)?;
        let mut targets = vec![Target::Merged];
        targets.extend((1..=l as usize).map(Target::Irrep));
        for rule in RULES {
            let lhs = rule.lhs_expr();
            let rhs = rule.rhs_expr(l);
            for &target in &targets {
                let a = rep_expr(&lhs, target, &p)?;
                let b = rep_expr(&rhs, target, &p)?;
                worst = worst.max(edge_safe_deviation(&a, &b, cfg.margin)?);
                count += 1;
            }
        }
    }
    Ok(CheckReport::new("relations", worst, cfg.tol, count, format!("{} rules, {} pairs", RULES.len(), grid.len())))
}

/// Half the samples are random expressions, half are consequences of the
/// relations; each normal form must vanish exactly when the merged operator
/// is below [`FAITHFUL_THRESHOLD`] on the edge-safe block. Disagreements are
/// split into non-zero normal forms whose operator falls below the threshold
/// and zero normal forms whose operator does not.
pub fn faithfulness(cfg: &RunConfig, grid: &[(u32, f64)], max_degree: usize) -> Result<CheckReport> {
    let (mut below, mut above, mut zeros, mut count) = (0usize, 0usize, 0usize, 0usize);
    let mut smallest = f64::INFINITY;
    let mut first = String::new();
    for &(l, q) in grid {
        let p = cfg.params(l, q)?;
        let mut rng = cfg.rng(salt(l, q, 2));
        for i in 0..cfg.samples {
            let e =
                if i % 2 == 0 { random_zero_expr(&mut rng, l, max_degree) } else { random_expr(&mut rng, max_degree) };
            let nf = normalize(&e, l);
            let margin = cfg.margin.max(e.degree() + 1);
            let block = rep_expr(&e, Target::Merged, &p)?.safe_block(margin)?;
            let small = norm_below(&block, FAITHFUL_THRESHOLD);
            zeros += usize::from(nf.is_zero());
            if small != nf.is_zero() {
                if below + above == 0 {
                    first = format!("; first at l={l} q={q}: {e} = {nf}");
                }
                if small {
                    below += 1;
                    smallest = smallest.min(spectral_norm(&block));
                } else {
                    above += 1;
                }
            }
            count += 1;
        }
    }
    let below_note = if below > 0 { format!(" (smallest norm {smallest:.3e})") } else { String::new() };
    Ok(CheckReport::new(
        "faithfulness",
        (below + above) as f64,
        0.0,
        count,
        format!(
            "{} disagreements: {below} non-zero below threshold{below_note}, {above} zero above threshold; \
             {zeros} zero normal forms{first}",
            below + above
        ),
    ))
}

/// `rho~(f * g) = rho~(f) rho~(g)` and `rho~(f*) = rho~(f)*` on the merged
/// model, plus associativity of the convolution.
pub fn groupoid_homomorphism(cfg: &RunConfig, grid: &[(u32, f64)]) -> Result<CheckReport> {
    let (mut hom, mut assoc, mut count) = (0.0f64, 0.0f64, 0);
    for &(l, q) in grid {
        let p = cfg.params(l, q)?;
        let mut rng = cfg.rng(salt(l, q, 3));
        for _ in 0..cfg.samples {
            let f = random_finite_element(&mut rng, l, 6, 12);
            let g = random_finite_element(&mut rng, l, 6, 12);
            let h = random_finite_element(&mut rng, l, 4, 12);
            let fg = f.convolve(&g)?;
            let rf = induced_rep(&f, &p)?;
            let lhs = induced_rep(&fg, &p)?;
            let rhs = rf.mul(&induced_rep(&g, &p)?)?;
            hom = hom.max(edge_safe_deviation(&lhs, &rhs, cfg.margin)?);
            let star = induced_rep(&f.involve(), &p)?;
            hom = hom.max(edge_safe_deviation(&star, &rf.adjoint(), cfg.margin)?);
            let a = fg.convolve(&h)?;
            let b = f.convolve(&g.convolve(&h)?)?;
            assoc = assoc.max(a.max_difference(&b, 24));
            count += 1;
        }
    }
    let mut report = CheckReport::new(
        "groupoid-homomorphism",
        hom,
        cfg.tol,
        count,
        format!("associativity deviation {assoc:e} (tolerance {ALGEBRA_TOL:e})"),
    );
    report.passed &= assoc <= ALGEBRA_TOL;
    Ok(report)
}

/// `rho~(embed(c)) = pi~(c)` and `rho~(embed(d)) = pi~(d)` entrywise.
pub fn generator_embedding(cfg: &RunConfig, grid: &[(u32, f64)]) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    for &(l, q) in grid {
        let p = cfg.params(l, q)?;
        for (f, g) in [(embed_c(&p), Gen::C), (embed_d(&p), Gen::D)] {
            let a = induced_rep(&f, &p)?;
            let b = merged_generator(g, &p)?;
            worst = worst.max(a.matrix().sub(b.matrix()).max_abs());
        }
    }
    Ok(CheckReport::new("generator-embedding", worst, 0.0, 2 * grid.len(), "exact entrywise comparison".into()))
}

/// `f - lift(symbol(f))` lies in the ideal, the symbol is multiplicative,
/// `symbol(c) = z` and `symbol(d) = 0`.
pub fn exact_sequence(cfg: &RunConfig, grid: &[(u32, f64)]) -> Result<CheckReport> {
    let (mut worst, mut count, mut outside) = (0.0f64, 0, 0usize);
    let mut generators_ok = true;
    for &(l, q) in grid {
        let p = cfg.params(l, q)?;
        generators_ok &= symbol(&embed_c(&p)) == CircleLaurent::monomial(1, C64::one());
        generators_ok &= symbol(&embed_d(&p)).is_zero();
        let mut rng = cfg.rng(salt(l, q, 5));
        for _ in 0..cfg.samples {
            let f = embed_normalform(&random_generator_word(&mut rng, l, 4), &p)?;
            let g = embed_normalform(&random_generator_word(&mut rng, l, 4), &p)?;
            let sf = symbol(&f);
            if !in_ideal(&f.sub(&lift(&sf, l))?) {
                outside += 1;
            }
            worst = worst.max(symbol(&f.convolve(&g)?).max_deviation(&sf.mul(&symbol(&g))));
            count += 1;
        }
    }
    let mut report = CheckReport::new(
        "exact-sequence",
        worst,
        ALGEBRA_TOL,
        count,
        format!("{outside} remainders outside the ideal; generator symbols exact: {generators_ok}"),
    );
    report.passed &= outside == 0 && generators_ok;
    Ok(report)
}

/// The asymptotic Toeplitz symbol of every loop `a_s(lambda)` against
/// `symbol(f)`. The bound is `2 q^{(N/2) l - l}` plus [`FLOAT_FLOOR`]; the
/// reported deviation is the largest ratio of error to bound.
pub fn matched_symbols(cfg: &RunConfig, grid: &[(u32, f64)]) -> Result<CheckReport> {
    let lambdas = [C64::one(), C64::new(0.0, 1.0), C64::from_polar(1.0, 0.3)];
    let (mut ratio, mut worst, mut count) = (0.0f64, 0.0f64, 0);
    for &(l, q) in grid {
        let p = cfg.params(l, q)?;
        let exponent = i32::try_from((cfg.n / 2) * l as usize - l as usize).unwrap_or(i32::MAX);
        let bound = 2.0 * Float::powi(q, exponent) + FLOAT_FLOOR;
        let mut rng = cfg.rng(salt(l, q, 6));
        for _ in 0..cfg.samples {
            let f = embed_normalform(&random_generator_word(&mut rng, l, 4), &p)?;
            let sigma = symbol(&f);
            for lambda in lambdas {
                for s in 1..=l as usize {
                    let m = eval_loop(&f, lambda, s, cfg.n)?;
                    let dev = match toeplitz_symbol(&m, 6, 2, bound) {
                        Ok(read) => read.max_deviation(&sigma),
                        Err(Error::NotToeplitz { deviation, .. }) => deviation,
                        Err(e) => return Err(e),
                    };
                    worst = worst.max(dev);
                    ratio = ratio.max(dev / bound);
                    count += 1;
                }
            }
        }
    }
    Ok(CheckReport::new("matched-symbols", ratio, 1.0, count, format!("largest absolute deviation {worst:e}")))
}

/// `rho_{n,m}` does not depend on the slice `m`, and `rho_n(chi_{C_n})` is
/// the shift power.
pub fn slice_independence(cfg: &RunConfig, grid: &[(u32, f64)]) -> Result<CheckReport> {
    let (mut worst, mut count) = (0.0f64, 0);
    for &(l, q) in grid {
        let p = cfg.params(l, q)?;
        let mut rng = cfg.rng(salt(l, q, 7));
        for n in -3i64..=3 {
            let chi = rho_n(&chi_element(n, l), n, &p)?;
            worst = worst.max(chi.matrix().sub(shift_model(n, &p).matrix()).max_abs());
            let samples = cfg.samples.clamp(1, 5);
            for _ in 0..samples {
                let f = embed_normalform(&random_homogeneous_normalform(&mut rng, l, n, 3, 5), &p)?;
                for m in [0, 3] {
                    let a = rho_n_via_shift(&f, n, m, &p)?;
                    worst = worst.max(a.matrix().sub(rho_n(&f, n, &p)?.matrix()).max_abs());
                    count += 1;
                }
            }
        }
    }
    Ok(CheckReport::new("slice-independence", worst, 0.0, count, "n in [-3, 3], m in {0, 3}".into()))
}

/// Every invariant with `rho <= 3`, `|t_s| <= 4` survives
/// `canonical_projection` then `k_invariant`; direct sums add invariants.
pub fn classification(cfg: &RunConfig, ls: &[u32]) -> Result<CheckReport> {
    let (mut failures, mut count) = (0usize, 0usize);
    let mut rng = cfg.rng(8);
    for &l in ls {
        let mut ts: Vec<Vec<i64>> = vec![Vec::new()];
        for _ in 0..l {
            ts = ts.into_iter().flat_map(|t| (-4..=4).map(move |x| [t.clone(), vec![x]].concat())).collect();
        }
        let mut valid = Vec::new();
        for rho in 0..=3 {
            for t in &ts {
                if let Ok(inv) = KInvariant::new(rho, t.clone()) {
                    let back = k_invariant(&canonical_projection(&inv, cfg.n)?, cfg.tol);
                    failures += usize::from(back.as_ref() != Ok(&inv));
                    count += 1;
                    valid.push(inv);
                }
            }
        }
        for _ in 0..cfg.samples.min(50) {
            let a = &valid[rng.gen_range(0..valid.len())];
            let b = &valid[rng.gen_range(0..valid.len())];
            let sum = canonical_projection(a, cfg.n)?.direct_sum(&canonical_projection(b, cfg.n)?)?;
            failures += usize::from(k_invariant(&sum, cfg.tol).as_ref() != Ok(&a.sum(b)));
            count += 1;
        }
    }
    Ok(CheckReport::new("classification", failures as f64, 0.0, count, format!("{failures} failures")))
}

/// Index relation, the explicit module isomorphisms, and non-freeness of
/// `L[1]`.
pub fn line_bundles(cfg: &RunConfig, ls: &[u32], degrees: &[i64]) -> Result<CheckReport> {
    let (mut worst, mut index_failures, mut count) = (0.0f64, 0usize, 0);
    let mut free = false;
    for &l in ls {
        let p = cfg.params(l, cfg.q)?;
        for &n in degrees {
            let expected = KInvariant::new(1, vec![n; l as usize])?;
            let proj = line_bundle_projection(n, l, cfg.n)?;
            index_failures += usize::from(k_invariant(&proj, cfg.tol).as_ref() != Ok(&expected));
            let seed = cfg.seed ^ salt(l, cfg.q, n as u64);
            worst = worst.max(verify_line_bundle_iso(n, &p, cfg.samples, cfg.tol, seed)?.max_deviation);
            count += cfg.samples;
        }
        free |= is_isomorphic(&line_bundle_projection(1, l, cfg.n)?, &ProjectionRep::identity(l, cfg.n, 1), cfg.tol)?;
    }
    let mut report = CheckReport::new(
        "line-bundles",
        worst,
        cfg.tol,
        count,
        format!("{index_failures} index-relation failures; L[1] free: {free}"),
    );
    report.passed &= index_failures == 0 && !free;
    Ok(report)
}

/// The grading law on normal forms (exact) and on their embeddings
/// (relative to `1 + sum |coefficient|` of the product, at
/// [`ALGEBRA_TOL`]), and
/// membership of `rho_n(embed(x))` in the module model.
pub fn degree_structure(cfg: &RunConfig, grid: &[(u32, f64)]) -> Result<CheckReport> {
    let (mut worst, mut exact_failures, mut count) = (0.0f64, 0usize, 0);
    let mut excess = f64::NEG_INFINITY;
    for &(l, q) in grid {
        let p = cfg.params(l, q)?;
        let mut rng = cfg.rng(salt(l, q, 10));
        for _ in 0..cfg.samples {
            let x = random_normalform(&mut rng, l, 3, 3);
            let y = random_normalform(&mut rng, l, 3, 3);
            let (dx, dy) = (x.degree_decompose(), y.degree_decompose());
            let xy = x.mul(&y).degree_decompose();
            let mut expected: alloc::collections::BTreeMap<i64, NormalForm> = Default::default();
            for (a, xa) in &dx {
                for (b, yb) in &dy {
                    let slot = expected.entry(a + b).or_insert_with(|| NormalForm::zero(l));
                    *slot = slot.add(&xa.mul(yb));
                }
            }
            expected.retain(|_, v| !v.is_zero());
            exact_failures += usize::from(expected != xy);

            let xy_nf = x.mul(&y);
            // Rounding in the embedding scales with the coefficients, which the rewrite
            // rules inflate by powers of q^-2 before they cancel.
            let mut scale = 1.0f64;
            for (_, a) in xy_nf.terms() {
                scale += a.eval(q)?.norm();
            }
            let fxy = embed_normalform(&xy_nf, &p)?;
            for n in xy.keys() {
                let parts = dx
                    .iter()
                    .filter_map(|(a, xa)| dy.get(&(n - a)).map(|yb| (xa, yb)))
                    .map(|(xa, yb)| embed_normalform(xa, &p)?.convolve(&embed_normalform(yb, &p)?))
                    .collect::<Result<Vec<GElement>>>()?;
                let refs: Vec<(C64, &GElement)> = parts.iter().map(|g| (C64::one(), g)).collect();
                let sum = GElement::linear_combination(l, &refs)?;
                worst = worst.max(fxy.degree_component(*n).max_difference(&sum, 24) / scale);
            }
            count += 1;
        }
        for n in -3i64..=3 {
            let x = random_homogeneous_normalform(&mut rng, l, n, 3, 4);
            let r = model_membership(&x, n, &p, cfg.margin)?;
            excess = excess.max(r.max_excess);
        }
    }
    let mut report = CheckReport::new(
        "degree-structure",
        worst,
        ALGEBRA_TOL,
        count,
        format!("{exact_failures} exact grading failures; membership excess over the tail bound {excess:e}"),
    );
    report.passed &= exact_failures == 0 && excess <= ALGEBRA_TOL;
    Ok(report)
}
