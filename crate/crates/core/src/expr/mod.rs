//! *-polynomials in the generators `c`, `d` of `O(L_q(l;1,l))` and their
//! reduction to the PBW basis `{c^i d^j d*^k} ∪ {c*^i d^j d*^k}`.
//!
//! The reduction rules, for weight parameter `l`, are
//!
//! ```text
//! d c   -> q^-l c d        d* c  -> q^-l c d*
//! d c*  -> q^l  c* d       d* c* -> q^l  c* d*
//! d* d  -> d d*
//! c c*  -> Π_{m=0}^{l-1} (1 - q^{2m} d d*)
//! c* c  -> Π_{m=1}^{l}   (1 - q^{-2m} d d*)
//! ```
//!
//! [`normalize`] applies them as a word-rewriting system; [`NormalForm::mul`]
//! multiplies normal forms by a closed formula. The two routes are checked
//! against each other and against the operator models in [`crate::rep`].

mod normal;
mod parse;
mod rewrite;

use alloc::boxed::Box;
use core::fmt;

use crate::coeff::QLaurent;

pub use normal::{Monomial, NormalForm};
pub use parse::parse;
pub use rewrite::{normalize, normalize_with, rule_rhs, Letter, Rule, Strategy, RULES};

/// Generators of the coordinate algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    C,
    D,
}

/// Abstract syntax of a *-polynomial expression.
#[derive(Clone, Debug, PartialEq)]
pub enum ExprTree {
    Scalar(QLaurent),
    Gen(Gen),
    Adjoint(Box<ExprTree>),
    Mul(Box<ExprTree>, Box<ExprTree>),
    Add(Box<ExprTree>, Box<ExprTree>),
    Sub(Box<ExprTree>, Box<ExprTree>),
    Neg(Box<ExprTree>),
    Pow(Box<ExprTree>, u32),
}

// Tree constructors, not arithmetic: `mul` builds a node instead of evaluating.
#[allow(clippy::should_implement_trait)]
impl ExprTree {
    pub fn c() -> Self {
        ExprTree::Gen(Gen::C)
    }

    pub fn d() -> Self {
        ExprTree::Gen(Gen::D)
    }

    pub fn scalar(s: QLaurent) -> Self {
        ExprTree::Scalar(s)
    }

    pub fn adjoint(self) -> Self {
        ExprTree::Adjoint(Box::new(self))
    }

    pub fn mul(self, rhs: ExprTree) -> Self {
        ExprTree::Mul(Box::new(self), Box::new(rhs))
    }

    pub fn add(self, rhs: ExprTree) -> Self {
        ExprTree::Add(Box::new(self), Box::new(rhs))
    }

    pub fn sub(self, rhs: ExprTree) -> Self {
        ExprTree::Sub(Box::new(self), Box::new(rhs))
    }

    pub fn pow(self, n: u32) -> Self {
        ExprTree::Pow(Box::new(self), n)
    }

    /// Upper bound on the word length of any monomial in the expansion.
    pub fn degree(&self) -> usize {
        match self {
            ExprTree::Scalar(_) => 0,
            ExprTree::Gen(_) => 1,
            ExprTree::Adjoint(e) | ExprTree::Neg(e) => e.degree(),
            ExprTree::Mul(a, b) => a.degree() + b.degree(),
            ExprTree::Add(a, b) | ExprTree::Sub(a, b) => a.degree().max(b.degree()),
            ExprTree::Pow(e, n) => e.degree() * (*n as usize),
        }
    }
}

impl fmt::Display for ExprTree {
    /// Fully parenthesised text in the expression grammar; `parse` reads it
    /// back to an equal tree up to scalar folding.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprTree::Scalar(s) => write!(f, "({s})"),
            ExprTree::Gen(Gen::C) => f.write_str("c"),
            ExprTree::Gen(Gen::D) => f.write_str("d"),
            ExprTree::Adjoint(e) => write!(f, "({e})*"),
            ExprTree::Mul(a, b) => write!(f, "({a} . {b})"),
            ExprTree::Add(a, b) => write!(f, "({a} + {b})"),
            ExprTree::Sub(a, b) => write!(f, "({a} - {b})"),
            ExprTree::Neg(e) => write!(f, "(-{e})"),
            ExprTree::Pow(e, n) => write!(f, "({e})^{n}"),
        }
    }
}
