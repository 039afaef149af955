use alloc::string::String;

/// Errors raised by the computational core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("leg s={s} out of range 1..={l}")]
    LegOutOfRange { s: usize, l: usize },
    #[error("degenerate comparison window: margin {margin} >= extent {extent}")]
    DegenerateWindow { margin: usize, extent: usize },
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("morphisms are not composable: {0}")]
    NotComposable(String),
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),
    #[error("element is not homogeneous of degree {expected}")]
    NotHomogeneous { expected: i64 },
    #[error("diagonal {diagonal} is not Toeplitz: max deviation {deviation:e}")]
    NotToeplitz { diagonal: i64, deviation: f64 },
    #[error("invariant undefined: trace residue {residue:e} exceeds tolerance")]
    InvariantUndefined { residue: f64 },
    #[error("invalid invariant: {0}")]
    InvalidInvariant(String),
    #[error("truncation too small: {0}")]
    Truncation(String),
}

pub type Result<T> = core::result::Result<T, Error>;
