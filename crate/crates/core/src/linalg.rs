//! Small complex linear-algebra kernels: a row-list sparse matrix for the
//! truncated operator models, a dense matrix for the module computations,
//! and a Lanczos estimate of the largest singular value.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_traits::{Float, Zero};

use crate::C64;

/// Sparse complex matrix stored as per-row lists sorted by column. Exact
/// zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, C64)>>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, data: vec![Vec::new(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, C64::new(1.0, 0.0))
    }

    pub fn scalar(n: usize, s: C64) -> Self {
        let mut m = Self::zeros(n, n);
        if !s.is_zero() {
            for (i, row) in m.data.iter_mut().enumerate() {
                row.push((i, s));
            }
        }
        m
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, entries: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let mut data: Vec<Vec<(usize, C64)>> = vec![Vec::new(); rows];
        for (i, j, v) in entries {
            assert!(i < rows && j < cols, "triplet ({i},{j}) outside {rows}x{cols}");
            data[i].push((j, v));
        }
        for row in &mut data {
            row.sort_by_key(|(j, _)| *j);
            let mut merged: Vec<(usize, C64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some((lj, lv)) if *lj == j => *lv += v,
                    _ => merged.push((j, v)),
                }
            }
            merged.retain(|(_, v)| !v.is_zero());
            *row = merged;
        }
        SparseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, C64)] {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let row = &self.data[i];
        match row.binary_search_by_key(&j, |(c, _)| *c) {
            Ok(k) => row[k].1,
            Err(_) => C64::zero(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.data.iter().enumerate().flat_map(|(i, row)| row.iter().map(move |&(j, v)| (i, j, v)))
    }

    fn combine(&self, other: &SparseMatrix, sign: f64) -> SparseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let entries = self.entries().chain(other.entries().map(|(i, j, v)| (i, j, v * sign)));
        SparseMatrix::from_triplets(self.rows, self.cols, entries)
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &SparseMatrix) -> SparseMatrix {
        self.combine(other, -1.0)
    }

    pub fn scale(&self, s: C64) -> SparseMatrix {
        if s.is_zero() {
            return SparseMatrix::zeros(self.rows, self.cols);
        }
        let data = self
            .data
            .iter()
            .map(|row| row.iter().map(|&(j, v)| (j, v * s)).filter(|(_, v)| !v.is_zero()).collect())
            .collect();
        SparseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut acc = vec![C64::zero(); other.cols];
        let mut touched = vec![false; other.cols];
        let mut cols: Vec<usize> = Vec::new();
        let mut data = Vec::with_capacity(self.rows);
        for row in &self.data {
            for &(k, a) in row {
                for &(j, b) in &other.data[k] {
                    if !touched[j] {
                        touched[j] = true;
                        cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            cols.sort_unstable();
            let mut out = Vec::with_capacity(cols.len());
            for &j in &cols {
                if !acc[j].is_zero() {
                    out.push((j, acc[j]));
                }
                acc[j] = C64::zero();
                touched[j] = false;
            }
            cols.clear();
            data.push(out);
        }
        SparseMatrix { rows: self.rows, cols: other.cols, data }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> SparseMatrix {
        let entries = self.entries().map(|(i, j, v)| (j, i, v.conj()));
        SparseMatrix::from_triplets(self.cols, self.rows, entries)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for (_, j, v) in self.entries() {
            sums[j] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.data.iter().map(|row| row.iter().map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// The submatrix on the given (sorted, distinct) row and column indices.
    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> SparseMatrix {
        let mut col_map = vec![usize::MAX; self.cols];
        for (new, &old) in col_idx.iter().enumerate() {
            col_map[old] = new;
        }
        let data = row_idx
            .iter()
            .map(|&i| {
                self.data[i].iter().filter(|(j, _)| col_map[*j] != usize::MAX).map(|&(j, v)| (col_map[j], v)).collect()
            })
            .collect();
        SparseMatrix { rows: row_idx.len(), cols: col_idx.len(), data }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols);
        self.data.iter().map(|row| row.iter().map(|&(j, v)| v * x[j]).sum()).collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.entries() {
            out[(i, j)] = v;
        }
        out
    }
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![C64::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        DenseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        DenseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: C64) -> DenseMatrix {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entry modulus over the leading `k x k` block.
    pub fn max_abs_leading(&self, k: usize) -> f64 {
        let k_r = k.min(self.rows);
        let k_c = k.min(self.cols);
        (0..k_r).flat_map(|i| (0..k_c).map(move |j| (i, j))).map(|(i, j)| self[(i, j)].norm()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

const LANCZOS_MAX_STEPS: usize = 400;

fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn norm2(v: &[C64]) -> f64 {
    Float::sqrt(v.iter().map(|a| a.norm_sqr()).sum::<f64>())
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let off = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        d = alpha[i] - x - if i == 0 { 0.0 } else { off / d };
        if d == 0.0 {
            d = -f64::EPSILON * (Float::abs(x) + 1e-300);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn largest_tridiagonal_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let r = if i > 0 { Float::abs(beta[i - 1]) } else { 0.0 } + if i + 1 < n { Float::abs(beta[i]) } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Largest singular value, by Lanczos with full reorthogonalisation on
/// `A* A`.
pub fn spectral_norm(a: &SparseMatrix) -> f64 {
    if a.nnz() == 0 {
        return 0.0;
    }
    let ah = a.adjoint();
    let n = a.cols();
    let mut v: Vec<C64> = (0..n)
        .map(|i| {
            let x = i as f64;
            C64::new(1.0 + 0.5 * Float::sin(1.3 * x), 0.3 * Float::cos(0.7 * x))
        })
        .collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut theta = 0.0;
    let mut stable = 0;
    for _ in 0..n.min(LANCZOS_MAX_STEPS) {
        let mut w = ah.matvec(&a.matvec(&v));
        alpha.push(inner(&v, &w).re);
        basis.push(v);
        for _ in 0..2 {
            for u in &basis {
                let h = inner(u, &w);
                w.iter_mut().zip(u).for_each(|(x, y)| *x -= h * y);
            }
        }
        let next = largest_tridiagonal_eigenvalue(&alpha, &beta);
        let b = norm2(&w);
        let converged = Float::abs(next - theta) <= 1e-15 * next.max(f64::MIN_POSITIVE);
        theta = next;
        if b <= 1e-14 * theta.max(f64::MIN_POSITIVE) {
            break;
        }
        stable = if converged { stable + 1 } else { 0 };
        if stable >= 3 {
            break;
        }
        beta.push(b);
        v = w.into_iter().map(|x| x / b).collect();
    }
    Float::sqrt(theta.max(0.0))
}

/// Decides `||A|| < threshold` using cheap bounds first:
/// `max |a_ij| <= ||A|| <= sqrt(||A||_1 ||A||_inf)`.
pub fn norm_below(a: &SparseMatrix, threshold: f64) -> bool {
    if a.max_abs() >= threshold {
        return false;
    }
    if Float::sqrt(a.norm_one() * a.norm_inf()) < threshold {
        return true;
    }
    spectral_norm(a) < threshold
}
