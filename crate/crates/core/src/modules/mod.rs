//! Projections over the unitisation `(K^l)^+` and the line bundles.
//!
//! An element of `(K^l)^+` is a scalar `lambda` plus one compact operator
//! per leg, acting as `lambda I + M_s` on leg `s`. Projections in
//! `M_r((K^l)^+)` are classified up to unitary equivalence by
//! `(rho; t_1, ..., t_l)`: the rank of the scalar part and, per leg, the sum
//! of the traces of the diagonal compact parts.

mod line_bundle;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Float, One, Zero};

use crate::linalg::SparseMatrix;
use crate::{Error, Result, C64};

pub use line_bundle::{
    line_bundle_model, model_membership, verify_line_bundle_iso, wp_matrix_units, IsoReport, MembershipReport,
    ModuleElement, ModuleModel, WpReport,
};

/// `lambda I + (+)_s M_s`, with each `M_s` an `N x N` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitizedElement {
    pub scalar: C64,
    pub compact: Vec<SparseMatrix>,
}

impl UnitizedElement {
    pub fn new(scalar: C64, compact: Vec<SparseMatrix>) -> Result<Self> {
        let n = compact.first().map_or(0, SparseMatrix::rows);
        if compact.is_empty() || compact.iter().any(|m| m.rows() != n || m.cols() != n) {
            return Err(Error::Truncation(format!("need one square N x N block per leg, N = {n}")));
        }
        Ok(UnitizedElement { scalar, compact })
    }

    pub fn scalar(l: u32, n: usize, a: C64) -> Self {
        UnitizedElement { scalar: a, compact: vec![SparseMatrix::zeros(n, n); l as usize] }
    }

    pub fn zero(l: u32, n: usize) -> Self {
        Self::scalar(l, n, C64::zero())
    }

    pub fn one(l: u32, n: usize) -> Self {
        Self::scalar(l, n, C64::one())
    }

    /// `(0, (+)_s P_{k_s})`.
    pub fn level_projection(n: usize, ks: &[usize]) -> Self {
        let compact = ks.iter().map(|&k| diag_ones(n, 0..k.min(n), 1.0)).collect();
        UnitizedElement { scalar: C64::zero(), compact }
    }

    pub fn l(&self) -> usize {
        self.compact.len()
    }

    pub fn n(&self) -> usize {
        self.compact[0].rows()
    }

    pub fn add(&self, other: &Self) -> Self {
        UnitizedElement {
            scalar: self.scalar + other.scalar,
            compact: self.compact.iter().zip(&other.compact).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        UnitizedElement {
            scalar: self.scalar - other.scalar,
            compact: self.compact.iter().zip(&other.compact).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn scale(&self, a: C64) -> Self {
        UnitizedElement { scalar: self.scalar * a, compact: self.compact.iter().map(|m| m.scale(a)).collect() }
    }

    /// `(lambda, M)(mu, K) = (lambda mu, MK + lambda K + mu M)`.
    pub fn mul(&self, other: &Self) -> Self {
        let compact = self
            .compact
            .iter()
            .zip(&other.compact)
            .map(|(m, k)| m.mul(k).add(&k.scale(self.scalar)).add(&m.scale(other.scalar)))
            .collect();
        UnitizedElement { scalar: self.scalar * other.scalar, compact }
    }

    pub fn adjoint(&self) -> Self {
        UnitizedElement {
            scalar: self.scalar.conj(),
            compact: self.compact.iter().map(SparseMatrix::adjoint).collect(),
        }
    }

    /// Largest of `|lambda|` and the compact entries.
    pub fn max_norm(&self) -> f64 {
        self.compact.iter().map(SparseMatrix::max_abs).fold(self.scalar.norm(), f64::max)
    }

    /// The operator `lambda I + M_s` on leg `s` (1-based).
    pub fn leg_operator(&self, s: usize) -> SparseMatrix {
        SparseMatrix::scalar(self.n(), self.scalar).add(&self.compact[s - 1])
    }
}

fn diag_ones(n: usize, levels: core::ops::Range<usize>, v: f64) -> SparseMatrix {
    SparseMatrix::from_triplets(n, n, levels.map(|p| (p, p, C64::new(v, 0.0))))
}

/// An `r x r` matrix over `(K^l)^+`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionRep {
    l: u32,
    n: usize,
    r: usize,
    entries: Vec<UnitizedElement>,
}

impl ProjectionRep {
    pub fn new(l: u32, n: usize, r: usize, entries: Vec<UnitizedElement>) -> Result<Self> {
        if entries.len() != r * r {
            return Err(Error::Truncation(format!("{} entries for an {r} x {r} matrix", entries.len())));
        }
        for e in &entries {
            if e.l() != l as usize || e.n() != n {
                return Err(Error::Truncation(format!(
                    "entry with l = {}, N = {} in a matrix with l = {l}, N = {n}",
                    e.l(),
                    e.n()
                )));
            }
        }
        Ok(ProjectionRep { l, n, r, entries })
    }

    /// Block-diagonal matrix from its diagonal entries.
    pub fn diagonal(l: u32, n: usize, diag: Vec<UnitizedElement>) -> Result<Self> {
        let r = diag.len();
        let mut entries = vec![UnitizedElement::zero(l, n); r * r];
        for (i, d) in diag.into_iter().enumerate() {
            entries[i * r + i] = d;
        }
        Self::new(l, n, r, entries)
    }

    pub fn identity(l: u32, n: usize, r: usize) -> Self {
        Self::diagonal(l, n, vec![UnitizedElement::one(l, n); r]).expect("consistent shapes")
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn get(&self, i: usize, j: usize) -> &UnitizedElement {
        &self.entries[i * self.r + j]
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if (self.l, self.n, self.r) != (other.l, other.n, other.r) {
            return Err(Error::Truncation(format!(
                "shape (l={}, N={}, r={}) vs (l={}, N={}, r={})",
                self.l, self.n, self.r, other.l, other.n, other.r
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let r = self.r;
        let mut entries = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                let mut acc = UnitizedElement::zero(self.l, self.n);
                for k in 0..r {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
                }
                entries.push(acc);
            }
        }
        Self::new(self.l, self.n, r, entries)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.sub(b)).collect();
        Self::new(self.l, self.n, self.r, entries)
    }

    pub fn scale(&self, a: C64) -> Self {
        ProjectionRep { entries: self.entries.iter().map(|e| e.scale(a)).collect(), ..self.clone() }
    }

    pub fn adjoint(&self) -> Self {
        let r = self.r;
        let entries = (0..r * r).map(|idx| self.get(idx % r, idx / r).adjoint()).collect();
        ProjectionRep { entries, ..self.clone() }
    }

    /// Largest entry norm.
    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(UnitizedElement::max_norm).fold(0.0, f64::max)
    }

    /// The `r x r` matrix of scalar components, row-major.
    pub fn scalar_part(&self) -> Vec<C64> {
        self.entries.iter().map(|e| e.scalar).collect()
    }

    /// Block direct sum `P (+) Q`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if (self.l, self.n) != (other.l, other.n) {
            return Err(Error::Truncation(format!(
                "direct sum of (l={}, N={}) and (l={}, N={})",
                self.l, self.n, other.l, other.n
            )));
        }
        let r = self.r + other.r;
        let mut entries = vec![UnitizedElement::zero(self.l, self.n); r * r];
        for i in 0..self.r {
            for j in 0..self.r {
                entries[i * r + j] = self.get(i, j).clone();
            }
        }
        for i in 0..other.r {
            for j in 0..other.r {
                entries[(self.r + i) * r + self.r + j] = other.get(i, j).clone();
            }
        }
        Self::new(self.l, self.n, r, entries)
    }
}

/// Deviations reported by [`verify_projection`].
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionReport {
    pub idempotent: f64,
    pub self_adjoint: f64,
    pub scalar_idempotent: f64,
    pub passed: bool,
}

/// Checks `P^2 = P`, `P* = P` and idempotency of the scalar part, each as a
/// largest entry norm.
pub fn verify_projection(p: &ProjectionRep, tol: f64) -> ProjectionReport {
    let idempotent = p.mul(p).and_then(|pp| pp.sub(p)).map_or(f64::INFINITY, |d| d.max_norm());
    let self_adjoint = p.adjoint().sub(p).map_or(f64::INFINITY, |d| d.max_norm());
    let r = p.r;
    let s = p.scalar_part();
    let mut scalar_idempotent = 0.0f64;
    for i in 0..r {
        for j in 0..r {
            let sq: C64 = (0..r).map(|k| s[i * r + k] * s[k * r + j]).sum();
            scalar_idempotent = scalar_idempotent.max((sq - s[i * r + j]).norm());
        }
    }
    let passed = idempotent < tol && self_adjoint < tol && scalar_idempotent < tol;
    ProjectionReport { idempotent, self_adjoint, scalar_idempotent, passed }
}

/// The complete invariant `(rho; t_1, ..., t_l)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KInvariant {
    pub rho: usize,
    pub t: Vec<i64>,
}

impl KInvariant {
    pub fn new(rho: usize, t: Vec<i64>) -> Result<Self> {
        let inv = KInvariant { rho, t };
        inv.validate()?;
        Ok(inv)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t.is_empty() {
            return Err(Error::InvalidInvariant("at least one leg is required".into()));
        }
        if self.rho == 0 && self.t.iter().any(|&t| t < 0) {
            return Err(Error::InvalidInvariant(format!("rho = 0 requires t >= 0, got {:?}", self.t)));
        }
        Ok(())
    }

    /// `(rho_P + rho_Q; t_P + t_Q)`.
    pub fn sum(&self, other: &KInvariant) -> KInvariant {
        KInvariant { rho: self.rho + other.rho, t: self.t.iter().zip(&other.t).map(|(a, b)| a + b).collect() }
    }
}

impl core::fmt::Display for KInvariant {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "({};", self.rho)?;
        for (i, t) in self.t.iter().enumerate() {
            write!(f, "{}{t}", if i == 0 { " " } else { ", " })?;
        }
        f.write_str(")")
    }
}

fn round_checked(x: C64, tol: f64) -> Result<i64> {
    let r = Float::round(x.re);
    let residue = (x - C64::new(r, 0.0)).norm();
    if residue > tol {
        return Err(Error::InvariantUndefined { residue });
    }
    Ok(r as i64)
}

/// `rho = tr(scalar part)`, `t_s = sum_i tr(compact part of P_ii on leg s)`,
/// each rounded; fails when a residue exceeds `tol` or `P` is not a
/// projection.
pub fn k_invariant(p: &ProjectionRep, tol: f64) -> Result<KInvariant> {
    let report = verify_projection(p, tol);
    if !report.passed {
        let residue = report.idempotent.max(report.self_adjoint).max(report.scalar_idempotent);
        return Err(Error::InvariantUndefined { residue });
    }
    let rho_trace: C64 = (0..p.r).map(|i| p.get(i, i).scalar).sum();
    let rho = round_checked(rho_trace, tol)?;
    let t = (0..p.l as usize)
        .map(|s| round_checked((0..p.r).map(|i| p.get(i, i).compact[s].trace()).sum(), tol))
        .collect::<Result<Vec<_>>>()?;
    KInvariant::new(usize::try_from(rho).map_err(|_| Error::InvariantUndefined { residue: rho_trace.norm() })?, t)
}

/// The representative `(+)_s P_{t_s}` for `rho = 0`, otherwise
/// `I_{rho-1} (+) (I - (+)_s P_{n_s}) (+) ((+)_s P_{m_s})` with
/// `n_s = max(-t_s, 0)` and `m_s = max(t_s, 0)`.
pub fn canonical_projection(inv: &KInvariant, n: usize) -> Result<ProjectionRep> {
    inv.validate()?;
    let l = inv.t.len() as u32;
    if let Some(&t) = inv.t.iter().find(|t| t.unsigned_abs() as usize >= n) {
        return Err(Error::Truncation(format!("|t_s| = {} needs N > {}", t.abs(), t.abs())));
    }
    let ms: Vec<usize> = inv.t.iter().map(|&t| t.max(0) as usize).collect();
    if inv.rho == 0 {
        return ProjectionRep::diagonal(l, n, vec![UnitizedElement::level_projection(n, &ms)]);
    }
    let ns: Vec<usize> = inv.t.iter().map(|&t| (-t).max(0) as usize).collect();
    let mut diag = vec![UnitizedElement::one(l, n); inv.rho - 1];
    diag.push(UnitizedElement::one(l, n).sub(&UnitizedElement::level_projection(n, &ns)));
    diag.push(UnitizedElement::level_projection(n, &ms));
    ProjectionRep::diagonal(l, n, diag)
}

/// Unitary equivalence, decided by the invariant.
pub fn is_isomorphic(p: &ProjectionRep, q: &ProjectionRep, tol: f64) -> Result<bool> {
    Ok(k_invariant(p, tol)? == k_invariant(q, tol)?)
}

/// `I_1 (+) ((+)_s P_n)` in `M_2` for `n >= 0`, and `I - (+)_s P_{-n}` in
/// `M_1` for `n < 0`.
pub fn line_bundle_projection(degree: i64, l: u32, n: usize) -> Result<ProjectionRep> {
    let k = degree.unsigned_abs() as usize;
    if k >= n {
        return Err(Error::Truncation(format!("|n| = {k} needs N > {k}")));
    }
    let ks = vec![k; l as usize];
    if degree >= 0 {
        ProjectionRep::diagonal(l, n, vec![UnitizedElement::one(l, n), UnitizedElement::level_projection(n, &ks)])
    } else {
        ProjectionRep::diagonal(l, n, vec![UnitizedElement::one(l, n).sub(&UnitizedElement::level_projection(n, &ks))])
    }
}
