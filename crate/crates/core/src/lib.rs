//! Computational models for the quantum lens space `L_q(l;1,l)` and the line
//! bundles over the quantum teardrop `WP_q(1,l)`.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. It provides:
//!
//! - [`coeff`]: exact Laurent polynomials in `q` over the Gaussian rationals;
//! - [`expr`]: a parser for *-polynomials in `c`, `d` and a term-rewriting
//!   normaliser onto the PBW basis;
//! - [`rep`]: truncated operator models of the irreducible representations
//!   and of the merged faithful representation;
//! - [`groupoid`]: the groupoid `F`, lazily evaluated elements of its
//!   convolution algebra, the induced representation and the grading;
//! - [`structure`]: the symbol map, the characters `pi_0^mu`, the ideal and
//!   the Toeplitz-loop description;
//! - [`modules`]: projections over the unitisation `(K^l)^+`, their complete
//!   invariant, and the line-bundle identification;
//! - [`checks`]: the property suites, returned as structured reports.
#![no_std]

extern crate alloc;

pub mod checks;
pub mod coeff;
mod error;
pub mod expr;
pub mod groupoid;
pub mod linalg;
pub mod modules;
pub mod rep;
pub mod sample;
pub mod structure;

pub use error::{Error, Result};

/// Complex scalar used by every numeric model.
pub type C64 = num_complex::Complex64;
