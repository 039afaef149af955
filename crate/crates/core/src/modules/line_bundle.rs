//! Operator models of the line bundles `M_n` and their identification with
//! projective modules over `(K^l)^+`.
//!
//! On the legs basis, `M_n = (+)_s K + C T_n` with `T_n = rho_n(chi_{C_n})`,
//! which is `(+)_s S^n` for `n >= 0` and `(+)_s (S*)^{|n|}` for `n < 0`.

use alloc::format;
use alloc::vec::Vec;

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeff::QLaurent;
use crate::expr::{Monomial, NormalForm};
use crate::groupoid::{chi_element, embed_normalform, rho_n};
use crate::rep::{edge_safe_deviation, level_projection, Basis, Coord, RepParams, TruncOp};
use crate::{Error, Result, C64};

/// `M_n` on the truncated legs basis.
#[derive(Clone, Debug)]
pub struct ModuleModel {
    pub degree: i64,
    pub params: RepParams,
    /// `T_n`.
    pub generator: TruncOp,
    /// `(+)_s P_{|n|}`.
    pub projection: TruncOp,
}

/// `k + lambda T_n`.
#[derive(Clone, Debug)]
pub struct ModuleElement {
    pub compact: TruncOp,
    pub coeff: C64,
}

impl ModuleModel {
    pub fn element(&self, e: &ModuleElement) -> Result<TruncOp> {
        e.compact.add(&self.generator.scale(e.coeff))
    }

    pub fn basis(&self) -> Basis {
        self.params.legs_basis()
    }
}

/// Builds `M_n`; requires `|n| < N`.
pub fn line_bundle_model(degree: i64, params: &RepParams) -> Result<ModuleModel> {
    params.validate()?;
    let k = degree.unsigned_abs() as usize;
    if k >= params.n {
        return Err(Error::Truncation(format!("|n| = {k} needs N > {k}")));
    }
    let generator = rho_n(&chi_element(degree, params.l), degree, params)?;
    let projection = level_projection(params.legs_basis(), k);
    Ok(ModuleModel { degree, params: *params, generator, projection })
}

/// Deviations of the module isomorphism checks, each the largest entry on
/// the edge-safe block.
#[derive(Clone, Debug, PartialEq)]
pub struct IsoReport {
    pub degree: i64,
    pub samples: usize,
    /// `T*T + P = I` and `T T* = I` (`n >= 0`), or `T T* = I - P` and
    /// `T*T = I` (`n < 0`).
    pub relations: f64,
    /// Inverse after forward, on the domain.
    pub domain_round_trip: f64,
    /// Forward after inverse, on `M_n`.
    pub module_round_trip: f64,
    pub left_linearity: f64,
    pub max_deviation: f64,
    pub passed: bool,
}

/// A random element of `(+)_s K` supported on the levels `p < block`.
fn random_compact<R: Rng + ?Sized>(rng: &mut R, basis: Basis, block: usize) -> TruncOp {
    let mut entries = Vec::new();
    for s in basis.legs() {
        for i in 0..block {
            for j in 0..block {
                if rng.gen_bool(0.5) {
                    let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    entries.push((Coord::new(0, s, i), Coord::new(0, s, j), v));
                }
            }
        }
    }
    TruncOp::from_coords(basis, entries)
}

fn random_scalar<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// `lambda I + K`.
fn random_unitized<R: Rng + ?Sized>(rng: &mut R, basis: Basis, block: usize) -> Result<TruncOp> {
    TruncOp::scalar(basis, random_scalar(rng)).add(&random_compact(rng, basis, block))
}

/// Checks the maps `phi(x, y) = xT + y`, `phi^-1(k + lambda T) =
/// (lambda I + kT*, kP)` for `n >= 0`, and `psi(z) = zT'`,
/// `psi^-1(k + lambda T') = (lambda I + kT'*)(I - P)` for `n < 0`, on random
/// samples whose compact parts live on the levels below `N / 4`.
pub fn verify_line_bundle_iso(
    degree: i64,
    params: &RepParams,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<IsoReport> {
    if degree.unsigned_abs() as usize + 2 >= params.n {
        return Err(Error::Truncation(format!("|n| = {} needs N > {}", degree.abs(), degree.abs() + 2)));
    }
    let model = line_bundle_model(degree, params)?;
    let basis = model.basis();
    let margin = degree.unsigned_abs() as usize + 1;
    let block = (params.n / 4).max(1).min(params.n - margin);
    let t = &model.generator;
    let ts = t.adjoint();
    let p = &model.projection;
    let id = TruncOp::identity(basis);
    let dev = |a: &TruncOp, b: &TruncOp| edge_safe_deviation(a, b, margin);

    let relations = if degree >= 0 {
        dev(&ts.mul(t)?.add(p)?, &id)?.max(dev(&t.mul(&ts)?, &id)?)
    } else {
        dev(&t.mul(&ts)?, &id.sub(p)?)?.max(dev(&ts.mul(t)?, &id)?)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut domain_round_trip, mut module_round_trip, mut left_linearity) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let a = random_unitized(&mut rng, basis, block)?;
        let module = ModuleElement { compact: random_compact(&mut rng, basis, block), coeff: random_scalar(&mut rng) };
        let m = model.element(&module)?;
        if degree >= 0 {
            let phi = |x: &TruncOp, y: &TruncOp| x.mul(t)?.add(y);
            let phi_inv = |k: &TruncOp, lambda: C64| -> Result<(TruncOp, TruncOp)> {
                Ok((TruncOp::scalar(basis, lambda).add(&k.mul(&ts)?)?, k.mul(p)?))
            };
            let x = random_unitized(&mut rng, basis, block)?;
            let y = random_compact(&mut rng, basis, block).mul(p)?;
            let image = phi(&x, &y)?;
            // Split the image back into k + lambda T: the scalar part of x is the T coefficient.
            let lambda = x.get(Coord::new(0, 1, block), Coord::new(0, 1, block));
            let k = image.sub(&t.scale(lambda))?;
            let (x2, y2) = phi_inv(&k, lambda)?;
            domain_round_trip = domain_round_trip.max(dev(&x2, &x)?).max(dev(&y2, &y)?);
            let (x3, y3) = phi_inv(&module.compact, module.coeff)?;
            module_round_trip = module_round_trip.max(dev(&phi(&x3, &y3)?, &m)?);
            let lhs = phi(&a.mul(&x)?, &a.mul(&y)?)?;
            left_linearity = left_linearity.max(dev(&lhs, &a.mul(&image)?)?);
        } else {
            let complement = id.sub(p)?;
            let psi_inv = |k: &TruncOp, lambda: C64| -> Result<TruncOp> {
                TruncOp::scalar(basis, lambda).add(&k.mul(&ts)?)?.mul(&complement)
            };
            let z = random_unitized(&mut rng, basis, block)?.mul(&complement)?;
            let image = z.mul(t)?;
            let lambda = z.get(Coord::new(0, 1, block), Coord::new(0, 1, block));
            let k = image.sub(&t.scale(lambda))?;
            domain_round_trip = domain_round_trip.max(dev(&psi_inv(&k, lambda)?, &z)?);
            let back = psi_inv(&module.compact, module.coeff)?.mul(t)?;
            module_round_trip = module_round_trip.max(dev(&back, &m)?);
            left_linearity = left_linearity.max(dev(&a.mul(&z)?.mul(t)?, &a.mul(&image)?)?);
        }
    }
    let max_deviation = relations.max(domain_round_trip).max(module_round_trip).max(left_linearity);
    Ok(IsoReport {
        degree,
        samples,
        relations,
        domain_round_trip,
        module_round_trip,
        left_linearity,
        max_deviation,
        passed: max_deviation < tol,
    })
}

/// How far `rho_n(x) - tau T_n` is from the decay envelope of its layers.
#[derive(Clone, Debug, PartialEq)]
pub struct MembershipReport {
    /// `tau`, the coefficient of `T_n`.
    pub coefficient: C64,
    /// Largest entry of the remainder over the columns `N/2 <= p < N - margin`.
    pub max_residual: f64,
    /// Largest excess of an entry over its layer's bound `C r^p`; at most
    /// zero when the envelope holds.
    pub max_excess: f64,
}

/// Splits `rho_n(x)` for homogeneous `x` of degree `n` as `k + tau T_n` and
/// measures the remainder `k` against the decay bounds on the columns
/// `N/2 <= p < N - margin`.
pub fn model_membership(x: &NormalForm, degree: i64, params: &RepParams, margin: usize) -> Result<MembershipReport> {
    let f = embed_normalform(x, params)?;
    f.check_homogeneous(degree)?;
    let model = line_bundle_model(degree, params)?;
    let coefficient = f.tail(0, -degree);
    let remainder = rho_n(&f, degree, params)?.sub(&model.generator.scale(coefficient))?;
    let n = params.n;
    if n / 2 + margin >= n {
        return Err(Error::DegenerateWindow { margin, extent: n - n / 2 });
    }
    let (mut max_residual, mut max_excess) = (0.0f64, f64::NEG_INFINITY);
    for ((_, m), layer) in f.layers() {
        for s in 1..=params.l as usize {
            for p in n / 2..n - margin {
                let row = p as i64 + m;
                if row < 0 || row >= n as i64 {
                    continue;
                }
                let v = remainder.get(Coord::new(0, s, row as usize), Coord::new(0, s, p)).norm();
                max_residual = max_residual.max(v);
                max_excess = max_excess.max(v - layer.decay().bound(p));
            }
        }
    }
    Ok(MembershipReport {
        coefficient,
        max_residual,
        max_excess: if max_excess.is_finite() { max_excess } else { 0.0 },
    })
}

/// Matrix units of `rho_0` recovered from `dd*` and `cd`.
#[derive(Clone, Debug, PartialEq)]
pub struct WpReport {
    pub levels: usize,
    pub units_checked: usize,
    /// Largest entry deviation from the standard matrix units.
    pub max_deviation: f64,
    pub passed: bool,
}

/// Spot-checks that the degree-zero part generates the matrix units on the
/// levels `p < levels` of every leg: `rho_0(dd*)` is diagonal with simple
/// spectrum, its spectral projections are the rank-one `E_pp`, and
/// `E_{p-1,p-1} rho_0(cd) E_pp` is a non-zero multiple of `E_{p-1,p}`.
pub fn wp_matrix_units(params: &RepParams, levels: usize, tol: f64) -> Result<WpReport> {
    params.validate()?;
    if levels + 1 >= params.n {
        return Err(Error::Truncation(format!("{levels} levels need N > {}", levels + 1)));
    }
    let l = params.l;
    let basis = params.legs_basis();
    let dds = NormalForm::term(l, Monomial::new(0, 1, 1), QLaurent::one());
    let cd = NormalForm::term(l, Monomial::new(1, 1, 0), QLaurent::one());
    let a = rho_n(&embed_normalform(&dds, params)?, 0, params)?;
    let b = rho_n(&embed_normalform(&cd, params)?, 0, params)?;

    let mut max_deviation = 0.0f64;
    let off_diagonal = a.matrix().entries().filter(|&(i, j, _)| i != j).map(|(_, _, v)| v.norm()).fold(0.0, f64::max);
    max_deviation = max_deviation.max(off_diagonal);
    let eig: Vec<C64> = (0..basis.dim()).map(|i| a.matrix().get(i, i)).collect();
    let unit = |s: usize, i: usize, j: usize| {
        TruncOp::from_coords(basis, [(Coord::new(0, s, i), Coord::new(0, s, j), C64::one())])
    };
    let mut units_checked = 0;
    for s in 1..=l as usize {
        // Spectral projections of the diagonal operator `a`.
        let mut e = Vec::with_capacity(levels);
        for p in 0..levels {
            let idx = basis.index(Coord::new(0, s, p)).expect("in basis");
            let lambda = eig[idx];
            let gap = eig
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != idx)
                .map(|(_, v)| (v - lambda).norm())
                .fold(f64::INFINITY, f64::min);
            if gap <= 16.0 * f64::EPSILON * lambda.norm() {
                return Err(Error::Domain(format!("eigenvalue at (s={s}, p={p}) is not simple")));
            }
            let proj: Vec<(Coord, Coord, C64)> = basis
                .coords()
                .filter(|c| (eig[basis.index(*c).expect("in basis")] - lambda).norm() < gap / 2.0)
                .map(|c| (c, c, C64::one()))
                .collect();
            e.push(TruncOp::from_coords(basis, proj));
        }
        // Off-diagonal units between neighbouring levels.
        let mut up = Vec::with_capacity(levels);
        for p in 1..levels {
            let raw = e[p - 1].mul(&b)?.mul(&e[p])?;
            let scale = raw.get(Coord::new(0, s, p - 1), Coord::new(0, s, p));
            if scale.norm() == 0.0 {
                return Err(Error::Domain(format!("rho_0(cd) vanishes between levels {} and {p}", p - 1)));
            }
            up.push(raw.scale(scale.inv()));
        }
        for (i, ei) in e.iter().enumerate() {
            for j in 0..levels {
                // E_ij as a product of neighbouring units and their adjoints.
                let mut acc = ei.clone();
                if i < j {
                    for u in &up[i..j] {
                        acc = acc.mul(u)?;
                    }
                } else {
                    for u in up[j..i].iter().rev() {
                        acc = acc.mul(&u.adjoint())?;
                    }
                }
                max_deviation = max_deviation.max(acc.sub(&unit(s, i, j))?.matrix().max_abs());
                units_checked += 1;
            }
        }
    }
    Ok(WpReport { levels, units_checked, max_deviation, passed: max_deviation < tol })
}
