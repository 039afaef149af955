use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::normal::{Monomial, NormalForm};
use super::{ExprTree, Gen};
use crate::coeff::QLaurent;

/// Letters of words in the generators and their adjoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    C,
    Cs,
    D,
    Ds,
}

impl Letter {
    pub fn star(self) -> Letter {
        match self {
            Letter::C => Letter::Cs,
            Letter::Cs => Letter::C,
            Letter::D => Letter::Ds,
            Letter::Ds => Letter::D,
        }
    }

    pub fn to_expr(self) -> ExprTree {
        match self {
            Letter::C => ExprTree::c(),
            Letter::Cs => ExprTree::c().adjoint(),
            Letter::D => ExprTree::d(),
            Letter::Ds => ExprTree::d().adjoint(),
        }
    }
}

/// The seven reduction rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    DC,
    DsC,
    DCs,
    DsCs,
    DsD,
    CCs,
    CsC,
}

pub const RULES: [Rule; 7] = [Rule::DC, Rule::DsC, Rule::DCs, Rule::DsCs, Rule::DsD, Rule::CCs, Rule::CsC];

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::DC => "d c -> q^-l c d",
            Rule::DsC => "d* c -> q^-l c d*",
            Rule::DCs => "d c* -> q^l c* d",
            Rule::DsCs => "d* c* -> q^l c* d*",
            Rule::DsD => "d* d -> d d*",
            Rule::CCs => "c c* -> prod_{m=0}^{l-1} (1 - q^{2m} d d*)",
            Rule::CsC => "c* c -> prod_{m=1}^{l} (1 - q^{-2m} d d*)",
        }
    }

    pub fn lhs(self) -> [Letter; 2] {
        use Letter::*;
        match self {
            Rule::DC => [D, C],
            Rule::DsC => [Ds, C],
            Rule::DCs => [D, Cs],
            Rule::DsCs => [Ds, Cs],
            Rule::DsD => [Ds, D],
            Rule::CCs => [C, Cs],
            Rule::CsC => [Cs, C],
        }
    }

    fn matching(pair: (Letter, Letter)) -> Option<Rule> {
        RULES.into_iter().find(|r| r.lhs() == [pair.0, pair.1])
    }

    /// Left-hand side as an expression.
    pub fn lhs_expr(self) -> ExprTree {
        let [a, b] = self.lhs();
        a.to_expr().mul(b.to_expr())
    }

    /// Right-hand side as an expression.
    pub fn rhs_expr(self, l: u32) -> ExprTree {
        rule_rhs(self, l)
            .into_iter()
            .map(|(coeff, word)| word.into_iter().map(Letter::to_expr).fold(ExprTree::Scalar(coeff), ExprTree::mul))
            .reduce(ExprTree::add)
            .unwrap_or_else(|| ExprTree::Scalar(QLaurent::zero()))
    }
}

/// The rule's right-hand side as `(coefficient, word)` pairs.
pub fn rule_rhs(rule: Rule, l: u32) -> Vec<(QLaurent, Vec<Letter>)> {
    use Letter::*;
    let l = i64::from(l);
    match rule {
        Rule::DC => vec![(QLaurent::q_pow(-l), vec![C, D])],
        Rule::DsC => vec![(QLaurent::q_pow(-l), vec![C, Ds])],
        Rule::DCs => vec![(QLaurent::q_pow(l), vec![Cs, D])],
        Rule::DsCs => vec![(QLaurent::q_pow(l), vec![Cs, Ds])],
        Rule::DsD => vec![(QLaurent::one(), vec![D, Ds])],
        Rule::CCs => expand_in_ddstar((0..l).map(|m| 2 * m)),
        Rule::CsC => expand_in_ddstar((1..=l).map(|m| -2 * m)),
    }
}

/// Expands `Π_e (1 - q^e d d*)` into words `(d d*)^r`.
fn expand_in_ddstar(exponents: impl Iterator<Item = i64>) -> Vec<(QLaurent, Vec<Letter>)> {
    let mut poly = vec![QLaurent::one()];
    for e in exponents {
        let factor = -QLaurent::q_pow(e);
        let mut next = vec![QLaurent::zero(); poly.len() + 1];
        for (r, a) in poly.iter().enumerate() {
            next[r] += a;
            next[r + 1] += &(a * &factor);
        }
        poly = next;
    }
    poly.into_iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(r, a)| {
            let word = core::iter::repeat_n([Letter::D, Letter::Ds], r).flatten().collect();
            (a, word)
        })
        .collect()
}

/// Which redex to contract when several are available.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Leftmost,
    Rightmost,
    /// Uniformly random redex, reproducible from the seed.
    Random(u64),
}

type LinComb = BTreeMap<Vec<Letter>, QLaurent>;

fn push(acc: &mut LinComb, word: Vec<Letter>, coeff: &QLaurent) {
    if coeff.is_zero() {
        return;
    }
    match acc.entry(word) {
        Entry::Occupied(mut slot) => {
            *slot.get_mut() += coeff;
            if slot.get().is_zero() {
                slot.remove();
            }
        }
        Entry::Vacant(slot) => {
            slot.insert(coeff.clone());
        }
    }
}

struct Rewriter {
    l: u32,
    strategy: Strategy,
    rng: ChaCha8Rng,
}

impl Rewriter {
    fn redexes(word: &[Letter]) -> Vec<(usize, Rule)> {
        word.windows(2).enumerate().filter_map(|(i, w)| Rule::matching((w[0], w[1])).map(|r| (i, r))).collect()
    }

    fn reduce(&mut self, input: LinComb) -> LinComb {
        let mut pending = input;
        let mut done = LinComb::new();
        while let Some((word, coeff)) = pending.pop_first() {
            let redexes = Self::redexes(&word);
            if redexes.is_empty() {
                push(&mut done, word, &coeff);
                continue;
            }
            let (pos, rule) = match self.strategy {
                Strategy::Leftmost => redexes[0],
                Strategy::Rightmost => redexes[redexes.len() - 1],
                Strategy::Random(_) => redexes[self.rng.gen_range(0..redexes.len())],
            };
            for (c, replacement) in rule_rhs(rule, self.l) {
                let mut next = Vec::with_capacity(word.len() + replacement.len());
                next.extend_from_slice(&word[..pos]);
                next.extend_from_slice(&replacement);
                next.extend_from_slice(&word[pos + 2..]);
                push(&mut pending, next, &(&coeff * &c));
            }
        }
        done
    }

    fn expand(&mut self, e: &ExprTree) -> LinComb {
        match e {
            ExprTree::Scalar(s) => {
                let mut out = LinComb::new();
                push(&mut out, Vec::new(), s);
                out
            }
            ExprTree::Gen(g) => {
                let letter = match g {
                    Gen::C => Letter::C,
                    Gen::D => Letter::D,
                };
                let mut out = LinComb::new();
                push(&mut out, vec![letter], &QLaurent::one());
                out
            }
            ExprTree::Adjoint(inner) => {
                let mut out = LinComb::new();
                for (word, c) in self.expand(inner) {
                    let starred = word.iter().rev().map(|x| x.star()).collect();
                    push(&mut out, starred, &c.conj());
                }
                self.reduce(out)
            }
            ExprTree::Mul(a, b) => {
                let lhs = self.expand(a);
                let rhs = self.expand(b);
                self.product(&lhs, &rhs)
            }
            ExprTree::Add(a, b) => {
                let mut out = self.expand(a);
                for (w, c) in self.expand(b) {
                    push(&mut out, w, &c);
                }
                out
            }
            ExprTree::Sub(a, b) => {
                let mut out = self.expand(a);
                for (w, c) in self.expand(b) {
                    push(&mut out, w, &(-&c));
                }
                out
            }
            ExprTree::Neg(a) => self.expand(a).into_iter().map(|(w, c)| (w, -c)).collect(),
            ExprTree::Pow(a, n) => {
                let base = self.expand(a);
                let mut acc = LinComb::new();
                push(&mut acc, Vec::new(), &QLaurent::one());
                for _ in 0..*n {
                    acc = self.product(&acc, &base);
                }
                acc
            }
        }
    }

    fn product(&mut self, lhs: &LinComb, rhs: &LinComb) -> LinComb {
        let mut out = LinComb::new();
        for (w1, c1) in lhs {
            for (w2, c2) in rhs {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                push(&mut out, w, &(c1 * c2));
            }
        }
        self.reduce(out)
    }
}

fn word_to_monomial(word: &[Letter]) -> Monomial {
    let mut c_pow = 0i64;
    let (mut d, mut ds) = (0u32, 0u32);
    for letter in word {
        match letter {
            Letter::C => c_pow += 1,
            Letter::Cs => c_pow -= 1,
            Letter::D => d += 1,
            Letter::Ds => ds += 1,
        }
    }
    Monomial::new(c_pow, d, ds)
}

/// Reduces `e` to PBW normal form by leftmost-first rewriting.
pub fn normalize(e: &ExprTree, l: u32) -> NormalForm {
    normalize_with(e, l, Strategy::Leftmost)
}

/// Reduces `e` to PBW normal form with the given redex-selection strategy.
/// The result does not depend on the strategy.
pub fn normalize_with(e: &ExprTree, l: u32, strategy: Strategy) -> NormalForm {
    assert!(l >= 1, "weight parameter l must be positive");
    let seed = match strategy {
        Strategy::Random(seed) => seed,
        _ => 0,
    };
    let mut rw = Rewriter { l, strategy, rng: ChaCha8Rng::seed_from_u64(seed) };
    let reduced = rw.expand(e);
    let mut nf = NormalForm::zero(l);
    for (word, c) in reduced {
        debug_assert!(Rewriter::redexes(&word).is_empty());
        nf.add_term(word_to_monomial(&word), &c);
    }
    nf
}
