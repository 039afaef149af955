use alloc::boxed::Box;
use alloc::string::{String, ToString};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{ExprTree, Gen};
use crate::coeff::{GaussRational, QLaurent};
use crate::{Error, Result};

const MAX_POWER: u32 = 1024;

/// Parses the ASCII expression grammar:
///
/// ```text
/// expr    := ['+'|'-'] term (('+'|'-') term)*
/// term    := postfix ('.' postfix)*
/// postfix := atom ('*' | '^' uint)*
/// atom    := 'c' | 'd' | 'i' | uint ['/' uint] | 'q' ['^' int] | '(' expr ')'
/// ```
///
/// `.` is the product and postfix `*` the adjoint. Whitespace is ignored.
pub fn parse(text: &str) -> Result<ExprTree> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let tree = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(tree)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<ExprTree> {
        let mut acc = if self.eat(b'-') {
            ExprTree::Neg(Box::new(self.term()?))
        } else {
            self.eat(b'+');
            self.term()?
        };
        loop {
            if self.eat(b'+') {
                acc = acc.add(self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<ExprTree> {
        let mut acc = self.postfix()?;
        while self.eat(b'.') {
            acc = acc.mul(self.postfix()?);
        }
        Ok(acc)
    }

    fn postfix(&mut self) -> Result<ExprTree> {
        let mut acc = self.atom()?;
        loop {
            if self.eat(b'*') {
                acc = acc.adjoint();
            } else if self.eat(b'^') {
                let n = self.uint()?;
                let n =
                    u32::try_from(&n).ok().filter(|n| *n <= MAX_POWER).ok_or_else(|| self.err("exponent too large"))?;
                acc = acc.pow(n);
            } else {
                return Ok(acc);
            }
        }
    }

    fn atom(&mut self) -> Result<ExprTree> {
        let Some(b) = self.peek() else {
            return Err(self.err("unexpected end of input"));
        };
        match b {
            b'c' => {
                self.pos += 1;
                Ok(ExprTree::Gen(Gen::C))
            }
            b'd' => {
                self.pos += 1;
                Ok(ExprTree::Gen(Gen::D))
            }
            b'i' => {
                self.pos += 1;
                Ok(ExprTree::Scalar(GaussRational::i().into()))
            }
            b'q' => {
                self.pos += 1;
                let k = if self.eat(b'^') { self.int()? } else { 1 };
                Ok(ExprTree::Scalar(QLaurent::q_pow(k)))
            }
            b'(' => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(inner)
            }
            b'0'..=b'9' => {
                let num = self.uint()?;
                let den = if self.eat(b'/') {
                    let at = self.pos;
                    let den = self.uint()?;
                    if den.is_zero() {
                        return Err(Error::Syntax { pos: at, msg: String::from("zero denominator") });
                    }
                    den
                } else {
                    BigInt::from(1)
                };
                let r = GaussRational::new(BigRational::new(num, den), BigRational::zero());
                Ok(ExprTree::Scalar(r.into()))
            }
            _ => Err(self.err("expected an atom")),
        }
    }

    fn uint(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a non-negative integer"));
        }
        BigInt::parse_bytes(&self.src[start..self.pos], 10).ok_or_else(|| self.err("bad integer"))
    }

    fn int(&mut self) -> Result<i64> {
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let at = self.pos;
        let n = self.uint()?;
        let n = if neg { -n } else { n };
        i64::try_from(&n).map_err(|_| Error::Syntax { pos: at, msg: String::from("exponent out of range") })
    }
}
