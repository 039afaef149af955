//! Truncated operator models.
//!
//! `pi_s^lambda` acts on `l^2(Z_>=)` with basis `e_p` by
//!
//! ```text
//! c e_p = w_{p,s} e_{p-1},   w_{p,s} = prod_{m=1}^{l} (1 - q^{2(pl+s-m)})^{1/2}
//! d e_p = lambda q^{pl+s} e_p
//! ```
//!
//! and the merged representation on `l^2(Z) (x) (+)_s l^2(Z_>=)` by
//! `c = id (x) (+)_s pi_s^1(c)` and `d = U (x) (+)_s pi_s^1(d)` with `U` the
//! backward bilateral shift in the window coordinate `t`. Every model is cut
//! off hard at level `N` (and window radius `W`); statements about truncated
//! operators are only made on the edge-safe block.

use alloc::format;
use alloc::vec::Vec;

use num_traits::{Float, One};

use crate::coeff::pow_int;
use crate::expr::{ExprTree, Gen, Monomial, NormalForm};
use crate::linalg::{self, SparseMatrix};
use crate::{Error, Result, C64};

/// Index set of a truncated model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    /// `{e_p : 0 <= p < n}` for the single leg `s`.
    Irrep { s: usize, n: usize },
    /// `{e_(s,p)}` for all legs `1 <= s <= l`.
    Legs { l: usize, n: usize },
    /// `{e_(t,s,p) : -w <= t <= w}`.
    Merged { l: usize, w: usize, n: usize },
}

/// Coordinates of a basis vector. `t` is zero outside the merged basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub t: i64,
    pub s: usize,
    pub p: usize,
}

impl Coord {
    pub fn new(t: i64, s: usize, p: usize) -> Self {
        Coord { t, s, p }
    }
}

impl Basis {
    pub fn levels(&self) -> usize {
        match *self {
            Basis::Irrep { n, .. } | Basis::Legs { n, .. } | Basis::Merged { n, .. } => n,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Basis::Irrep { n, .. } => n,
            Basis::Legs { l, n } => l * n,
            Basis::Merged { l, w, n } => (2 * w + 1) * l * n,
        }
    }

    /// Legs present in this basis.
    pub fn legs(&self) -> core::ops::RangeInclusive<usize> {
        match *self {
            Basis::Irrep { s, .. } => s..=s,
            Basis::Legs { l, .. } | Basis::Merged { l, .. } => 1..=l,
        }
    }

    pub fn index(&self, c: Coord) -> Option<usize> {
        match *self {
            Basis::Irrep { s, n } => (c.t == 0 && c.s == s && c.p < n).then_some(c.p),
            Basis::Legs { l, n } => (c.t == 0 && (1..=l).contains(&c.s) && c.p < n).then(|| (c.s - 1) * n + c.p),
            Basis::Merged { l, w, n } => {
                let w = w as i64;
                if c.t < -w || c.t > w || !(1..=l).contains(&c.s) || c.p >= n {
                    return None;
                }
                Some((((c.t + w) as usize) * l + (c.s - 1)) * n + c.p)
            }
        }
    }

    pub fn coord(&self, idx: usize) -> Coord {
        assert!(idx < self.dim(), "index {idx} outside basis of dimension {}", self.dim());
        match *self {
            Basis::Irrep { s, .. } => Coord::new(0, s, idx),
            Basis::Legs { n, .. } => Coord::new(0, idx / n + 1, idx % n),
            Basis::Merged { l, w, n } => {
                let p = idx % n;
                let rest = idx / n;
                Coord::new((rest / l) as i64 - w as i64, rest % l + 1, p)
            }
        }
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.dim()).map(|i| self.coord(i))
    }

    /// Indices of basis vectors with `p < N - margin` (and `|t| < W - margin`).
    pub fn safe_indices(&self, margin: usize) -> Result<Vec<usize>> {
        let n = self.levels();
        if margin >= n {
            return Err(Error::DegenerateWindow { margin, extent: n });
        }
        if let Basis::Merged { w, .. } = *self {
            if margin >= w {
                return Err(Error::DegenerateWindow { margin, extent: w });
            }
        }
        let w_lim = match *self {
            Basis::Merged { w, .. } => (w - margin) as i64,
            _ => i64::MAX,
        };
        Ok((0..self.dim())
            .filter(|&i| {
                let c = self.coord(i);
                c.p < n - margin && c.t.abs() < w_lim
            })
            .collect())
    }
}

/// A truncated operator: a sparse matrix over an explicit basis.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncOp {
    basis: Basis,
    matrix: SparseMatrix,
}

impl TruncOp {
    pub fn new(basis: Basis, matrix: SparseMatrix) -> Result<Self> {
        let d = basis.dim();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::BasisMismatch(format!(
                "{}x{} matrix for basis of dimension {d}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(TruncOp { basis, matrix })
    }

    pub fn zero(basis: Basis) -> Self {
        TruncOp { basis, matrix: SparseMatrix::zeros(basis.dim(), basis.dim()) }
    }

    pub fn identity(basis: Basis) -> Self {
        Self::scalar(basis, C64::one())
    }

    pub fn scalar(basis: Basis, s: C64) -> Self {
        TruncOp { basis, matrix: SparseMatrix::scalar(basis.dim(), s) }
    }

    /// Builds `e_col -> value e_row` from coordinate triplets; triplets
    /// leaving the basis are dropped.
    pub fn from_coords(basis: Basis, entries: impl IntoIterator<Item = (Coord, Coord, C64)>) -> Self {
        let d = basis.dim();
        let triplets = entries.into_iter().filter_map(|(r, c, v)| Some((basis.index(r)?, basis.index(c)?, v)));
        TruncOp { basis, matrix: SparseMatrix::from_triplets(d, d, triplets) }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SparseMatrix {
        self.matrix
    }

    /// Matrix entry `<e_row, A e_col>`; zero for coordinates outside the basis.
    pub fn get(&self, row: Coord, col: Coord) -> C64 {
        match (self.basis.index(row), self.basis.index(col)) {
            (Some(i), Some(j)) => self.matrix.get(i, j),
            _ => C64::new(0.0, 0.0),
        }
    }

    fn check_same(&self, other: &TruncOp) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch(format!("{:?} vs {:?}", self.basis, other.basis)));
        }
        Ok(())
    }

    pub fn add(&self, other: &TruncOp) -> Result<TruncOp> {
        self.check_same(other)?;
        Ok(TruncOp { basis: self.basis, matrix: self.matrix.add(&other.matrix) })
    }

    pub fn sub(&self, other: &TruncOp) -> Result<TruncOp> {
        self.check_same(other)?;
        Ok(TruncOp { basis: self.basis, matrix: self.matrix.sub(&other.matrix) })
    }

    pub fn mul(&self, other: &TruncOp) -> Result<TruncOp> {
        self.check_same(other)?;
        Ok(TruncOp { basis: self.basis, matrix: self.matrix.mul(&other.matrix) })
    }

    pub fn scale(&self, s: C64) -> TruncOp {
        TruncOp { basis: self.basis, matrix: self.matrix.scale(s) }
    }

    pub fn adjoint(&self) -> TruncOp {
        TruncOp { basis: self.basis, matrix: self.matrix.adjoint() }
    }

    /// The edge-safe block as a plain matrix.
    pub fn safe_block(&self, margin: usize) -> Result<SparseMatrix> {
        let idx = self.basis.safe_indices(margin)?;
        Ok(self.matrix.submatrix(&idx, &idx))
    }
}

/// Parameters of a truncated model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepParams {
    pub q: f64,
    pub l: u32,
    pub lambda: C64,
    /// Truncation level `N`.
    pub n: usize,
    /// Window radius `W` of the merged model.
    pub w: usize,
}

impl RepParams {
    pub fn new(q: f64, l: u32, n: usize, w: usize) -> Result<Self> {
        let p = RepParams { q, l, lambda: C64::one(), n, w };
        p.validate()?;
        Ok(p)
    }

    pub fn with_lambda(self, lambda: C64) -> Result<Self> {
        let p = RepParams { lambda, ..self };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::Domain(format!("q = {} must lie in (0,1)", self.q)));
        }
        if self.l == 0 {
            return Err(Error::Domain("l must be positive".into()));
        }
        if Float::abs(self.lambda.norm() - 1.0) > 1e-12 {
            return Err(Error::Domain(format!("|lambda| = {} must be 1", self.lambda.norm())));
        }
        if self.n < 2 {
            return Err(Error::Domain(format!("truncation N = {} must be at least 2", self.n)));
        }
        if self.w < 1 {
            return Err(Error::Domain(format!("window W = {} must be at least 1", self.w)));
        }
        Ok(())
    }

    pub fn irrep_basis(&self, s: usize) -> Result<Basis> {
        check_leg(s, self.l)?;
        Ok(Basis::Irrep { s, n: self.n })
    }

    pub fn legs_basis(&self) -> Basis {
        Basis::Legs { l: self.l as usize, n: self.n }
    }

    pub fn merged_basis(&self) -> Basis {
        Basis::Merged { l: self.l as usize, w: self.w, n: self.n }
    }
}

pub(crate) fn check_leg(s: usize, l: u32) -> Result<()> {
    if s == 0 || s > l as usize {
        return Err(Error::LegOutOfRange { s, l: l as usize });
    }
    Ok(())
}

/// The weight `w_{p,s}`; zero at `p = 0`.
pub fn weight(q: f64, l: u32, s: usize, p: usize) -> f64 {
    if p == 0 {
        return 0.0;
    }
    let base = (p as i64) * (l as i64) + s as i64;
    (1..=l as i64).map(|m| Float::sqrt(1.0 - pow_int(q, 2 * (base - m)))).product()
}

/// The eigenvalue `q^{pl+s}` of `pi_s^1(d)`.
pub fn d_eigenvalue(q: f64, l: u32, s: usize, p: usize) -> f64 {
    pow_int(q, (p as i64) * (l as i64) + s as i64)
}

/// Which model to evaluate in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// `pi_s^lambda` for one leg.
    Irrep(usize),
    /// `(+)_s pi_s^lambda`.
    Legs,
    /// The merged representation.
    Merged,
}

impl Target {
    pub fn basis(self, params: &RepParams) -> Result<Basis> {
        match self {
            Target::Irrep(s) => params.irrep_basis(s),
            Target::Legs => Ok(params.legs_basis()),
            Target::Merged => Ok(params.merged_basis()),
        }
    }
}

/// Image of a PBW monomial `C(e) d^j d*^k` on one basis vector, or `None`
/// when it leaves the truncation or vanishes.
fn apply_monomial(m: &Monomial, col: Coord, basis: &Basis, params: &RepParams) -> Option<(Coord, C64)> {
    let (q, l) = (params.q, params.l);
    let (j, k) = (m.d_pow as i64, m.ds_pow as i64);
    let dv = d_eigenvalue(q, l, col.s, col.p);
    let mut value = C64::one();
    for _ in 0..j + k {
        value *= dv;
    }
    let mut at = col;
    if let Basis::Merged { w, .. } = *basis {
        let w = w as i64;
        if col.t + k > w || col.t + k - j < -w {
            return None;
        }
        at.t = col.t + k - j;
    } else {
        value *= params.lambda.powi(j as i32) * params.lambda.conj().powi(k as i32);
    }
    if m.c_pow >= 0 {
        let e = m.c_pow as usize;
        if at.p < e {
            return None;
        }
        for level in (at.p + 1 - e..=at.p).rev() {
            value *= weight(q, l, at.s, level);
        }
        at.p -= e;
    } else {
        let e = m.c_pow.unsigned_abs() as usize;
        if at.p + e >= basis.levels() {
            return None;
        }
        for level in at.p + 1..=at.p + e {
            value *= weight(q, l, at.s, level);
        }
        at.p += e;
    }
    (value != C64::new(0.0, 0.0)).then_some((at, value))
}

fn monomial_op(m: &Monomial, basis: Basis, params: &RepParams) -> TruncOp {
    let entries = basis
        .coords()
        .filter_map(|col| apply_monomial(m, col, &basis, params).map(|(row, v)| (row, col, v)))
        .collect::<Vec<_>>();
    TruncOp::from_coords(basis, entries)
}

/// `pi_s^lambda(g)` truncated at level `N`.
pub fn irrep_generator(g: Gen, s: usize, params: &RepParams) -> Result<TruncOp> {
    params.validate()?;
    generator(g, Target::Irrep(s), params)
}

/// `pi~(g)` truncated to the window `|t| <= W`, levels `p < N`.
pub fn merged_generator(g: Gen, params: &RepParams) -> Result<TruncOp> {
    generator(g, Target::Merged, params)
}

pub fn generator(g: Gen, target: Target, params: &RepParams) -> Result<TruncOp> {
    params.validate()?;
    let basis = target.basis(params)?;
    let m = match g {
        Gen::C => Monomial::new(1, 0, 0),
        Gen::D => Monomial::new(0, 1, 0),
    };
    Ok(monomial_op(&m, basis, params))
}

/// Evaluates a normal form term by term. Each PBW monomial is the product
/// of the truncated generator matrices in PBW order.
pub fn rep_normalform(n: &NormalForm, target: Target, params: &RepParams) -> Result<TruncOp> {
    params.validate()?;
    if n.l() != params.l {
        return Err(Error::Domain(format!("normal form has l = {}, model has l = {}", n.l(), params.l)));
    }
    let basis = target.basis(params)?;
    let d = basis.dim();
    let mut triplets = Vec::new();
    for (m, coeff) in n.terms() {
        let a = coeff.eval_unchecked(params.q);
        for col in basis.coords() {
            if let Some((row, v)) = apply_monomial(m, col, &basis, params) {
                triplets.push((basis.index(row).unwrap(), basis.index(col).unwrap(), a * v));
            }
        }
    }
    TruncOp::new(basis, SparseMatrix::from_triplets(d, d, triplets))
}

/// Evaluates an expression tree as a product of truncated matrices,
/// without passing through the normal form.
pub fn rep_expr(e: &ExprTree, target: Target, params: &RepParams) -> Result<TruncOp> {
    params.validate()?;
    let basis = target.basis(params)?;
    let c = generator(Gen::C, target, params)?;
    let d = generator(Gen::D, target, params)?;
    eval_tree(e, basis, &c, &d, params.q)
}

fn eval_tree(e: &ExprTree, basis: Basis, c: &TruncOp, d: &TruncOp, q: f64) -> Result<TruncOp> {
    Ok(match e {
        ExprTree::Scalar(s) => TruncOp::scalar(basis, s.eval_unchecked(q)),
        ExprTree::Gen(Gen::C) => c.clone(),
        ExprTree::Gen(Gen::D) => d.clone(),
        ExprTree::Adjoint(a) => eval_tree(a, basis, c, d, q)?.adjoint(),
        ExprTree::Mul(a, b) => eval_tree(a, basis, c, d, q)?.mul(&eval_tree(b, basis, c, d, q)?)?,
        ExprTree::Add(a, b) => eval_tree(a, basis, c, d, q)?.add(&eval_tree(b, basis, c, d, q)?)?,
        ExprTree::Sub(a, b) => eval_tree(a, basis, c, d, q)?.sub(&eval_tree(b, basis, c, d, q)?)?,
        ExprTree::Neg(a) => eval_tree(a, basis, c, d, q)?.scale(C64::new(-1.0, 0.0)),
        ExprTree::Pow(a, k) => {
            let base = eval_tree(a, basis, c, d, q)?;
            let mut acc = TruncOp::identity(basis);
            let mut sq = base;
            let mut k = *k;
            while k > 0 {
                if k & 1 == 1 {
                    acc = acc.mul(&sq)?;
                }
                k >>= 1;
                if k > 0 {
                    sq = sq.mul(&sq)?;
                }
            }
            acc
        }
    })
}

/// Largest entry deviation between `a` and `b` on the edge-safe block.
pub fn edge_safe_deviation(a: &TruncOp, b: &TruncOp, margin: usize) -> Result<f64> {
    a.check_same(b)?;
    let idx = a.basis.safe_indices(margin)?;
    let mut safe = alloc::vec![false; a.basis.dim()];
    for &i in &idx {
        safe[i] = true;
    }
    let diff = a.matrix.sub(&b.matrix);
    Ok(diff.entries().filter(|&(i, j, _)| safe[i] && safe[j]).map(|(_, _, v)| v.norm()).fold(0.0, f64::max))
}

/// True iff every entry with both indices in the edge-safe block differs by
/// less than `tol`.
pub fn edge_safe_equal(a: &TruncOp, b: &TruncOp, margin: usize, tol: f64) -> Result<bool> {
    Ok(edge_safe_deviation(a, b, margin)? < tol)
}

/// Largest singular value.
pub fn op_norm(a: &TruncOp) -> f64 {
    linalg::spectral_norm(&a.matrix)
}

/// The unweighted shift power acting on the level coordinate of every leg
/// (and trivially on `t`): `S^n` for `n >= 0` (`e_p -> e_{p-n}`), and
/// `(S*)^{|n|}` for `n < 0`.
pub fn shift_power(basis: Basis, n: i64) -> TruncOp {
    let entries = basis.coords().filter_map(|c| {
        let p = c.p as i64 - n;
        (p >= 0).then(|| (Coord { p: p as usize, ..c }, c, C64::one()))
    });
    TruncOp::from_coords(basis, entries.collect::<Vec<_>>())
}

/// `(+)_s P_k`: the projection onto levels `p < k` on every leg.
pub fn level_projection(basis: Basis, k: usize) -> TruncOp {
    let entries = basis.coords().filter(|c| c.p < k).map(|c| (c, c, C64::one()));
    TruncOp::from_coords(basis, entries.collect::<Vec<_>>())
}
