use alloc::format;
use core::fmt;

use crate::{Error, Result};

/// The unit-space point a morphism lives over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fiber {
    /// Level `p` of leg `s`.
    Finite { s: usize, p: usize },
    /// The fixed point at infinity.
    Infinity,
}

/// A morphism `(k, m, p)_s` from `p` to `p + m`, or `(0, m, inf)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Morphism {
    pub k: i64,
    pub m: i64,
    pub fiber: Fiber,
}

impl Morphism {
    pub fn finite(k: i64, m: i64, s: usize, p: usize) -> Result<Self> {
        let g = Morphism { k, m, fiber: Fiber::Finite { s, p } };
        g.validate()?;
        Ok(g)
    }

    pub fn infinity(m: i64) -> Self {
        Morphism { k: 0, m, fiber: Fiber::Infinity }
    }

    pub fn unit(s: usize, p: usize) -> Self {
        Morphism { k: 0, m: 0, fiber: Fiber::Finite { s, p } }
    }

    pub fn validate(&self) -> Result<()> {
        match self.fiber {
            Fiber::Finite { s, p } => {
                if s == 0 {
                    return Err(Error::InvalidMorphism(format!("{self}: legs start at 1")));
                }
                if (p as i64) + self.m < 0 {
                    return Err(Error::InvalidMorphism(format!("{self}: range p+m is negative")));
                }
            }
            Fiber::Infinity => {
                if self.k != 0 {
                    return Err(Error::InvalidMorphism(format!("{self}: k must vanish at infinity")));
                }
            }
        }
        Ok(())
    }

    /// Source level.
    pub fn source(&self) -> Fiber {
        self.fiber
    }

    /// Range level `p + m`.
    pub fn range(&self) -> Fiber {
        match self.fiber {
            Fiber::Finite { s, p } => Fiber::Finite { s, p: (p as i64 + self.m) as usize },
            Fiber::Infinity => Fiber::Infinity,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.k == 0 && self.m == 0
    }

    /// Grading `deg (k, m, p)_s = k - m`.
    pub fn degree(&self) -> i64 {
        self.k - self.m
    }

    /// `self . other`, defined when the source of `self` is the range of
    /// `other`.
    pub fn compose(&self, other: &Morphism) -> Result<Morphism> {
        if self.source() != other.range() {
            return Err(Error::NotComposable(format!("{self} . {other}")));
        }
        Ok(Morphism { k: self.k + other.k, m: self.m + other.m, fiber: other.fiber })
    }

    pub fn inverse(&self) -> Morphism {
        Morphism { k: -self.k, m: -self.m, fiber: self.range() }
    }
}

impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.fiber {
            Fiber::Finite { s, p } => write!(f, "({},{},{})_{}", self.k, self.m, p, s),
            Fiber::Infinity => write!(f, "({},{},inf)", self.k, self.m),
        }
    }
}
