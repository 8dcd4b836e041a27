//! Propositional formulas over a named atom vocabulary.
//!
//! Formulas are plain trees; no normal form is ever imposed, so two formulas
//! are equal only when they were written the same way. Conditions rely on this
//! when they are treated as multisets.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// A propositional atom. Names start with an ASCII letter and continue with
/// letters, digits or underscores.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(String);

impl Atom {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(Atom(name))
        } else {
            Err(Error::Syntax {
                offset: 0,
                message: format!("`{name}` is not a valid atom name"),
            })
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

/// Anything that can answer "is this atom true?".
pub trait Assignment {
    fn value_of(&self, atom: &str) -> Option<bool>;
}

impl Assignment for HashMap<String, bool> {
    fn value_of(&self, atom: &str) -> Option<bool> {
        self.get(atom).copied()
    }
}

impl Assignment for BTreeMap<String, bool> {
    fn value_of(&self, atom: &str) -> Option<bool> {
        self.get(atom).copied()
    }
}

impl<A: Assignment + ?Sized> Assignment for &A {
    fn value_of(&self, atom: &str) -> Option<bool> {
        (**self).value_of(atom)
    }
}

impl Formula {
    /// Atom reference. Panics on an invalid identifier; use [`Atom::new`] for
    /// untrusted names.
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(Atom::new(name).expect("invalid atom name"))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn iff(l: Formula, r: Formula) -> Formula {
        Formula::Iff(Box::new(l), Box::new(r))
    }

    /// A positive or negative literal on `name`.
    pub fn literal(name: &str, value: bool) -> Formula {
        if value {
            Formula::atom(name)
        } else {
            Formula::not(Formula::atom(name))
        }
    }

    /// Classical two-valued satisfaction.
    pub fn eval(&self, v: &impl Assignment) -> Result<bool> {
        Ok(match self {
            Formula::Atom(a) => v
                .value_of(a.name())
                .ok_or_else(|| Error::UnboundAtom(a.name().to_string()))?,
            Formula::Not(f) => !f.eval(v)?,
            Formula::And(l, r) => l.eval(v)? & r.eval(v)?,
            Formula::Or(l, r) => l.eval(v)? | r.eval(v)?,
            Formula::Implies(l, r) => !l.eval(v)? | r.eval(v)?,
            Formula::Iff(l, r) => l.eval(v)? == r.eval(v)?,
        })
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Iff(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    /// If the formula is a literal, its atom and polarity.
    pub fn as_literal(&self) -> Option<(&Atom, bool)> {
        match self {
            Formula::Atom(a) => Some((a, true)),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Atom(a) => Some((a, false)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Leaves of a left-or-right nested conjunction of literals, in written
    /// order. `None` when any leaf is not a literal.
    pub fn conjunct_literals(&self) -> Option<Vec<Formula>> {
        let mut out = Vec::new();
        if self.push_conjuncts(&mut out) {
            Some(out)
        } else {
            None
        }
    }

    fn push_conjuncts(&self, out: &mut Vec<Formula>) -> bool {
        match self {
            Formula::And(l, r) => l.push_conjuncts(out) && r.push_conjuncts(out),
            f if f.as_literal().is_some() => {
                out.push(f.clone());
                true
            }
            _ => false,
        }
    }

    /// Resolve atom names to indices once so the formula can be evaluated
    /// against packed valuations.
    pub fn bind(&self, resolve: &impl Fn(&str) -> Option<usize>) -> Result<BoundFormula> {
        let bin = |l: &Formula, r: &Formula| -> Result<(Box<BoundFormula>, Box<BoundFormula>)> {
            Ok((Box::new(l.bind(resolve)?), Box::new(r.bind(resolve)?)))
        };
        Ok(match self {
            Formula::Atom(a) => BoundFormula::Atom(
                resolve(a.name()).ok_or_else(|| Error::UnboundAtom(a.name().to_string()))?,
            ),
            Formula::Not(f) => BoundFormula::Not(Box::new(f.bind(resolve)?)),
            Formula::And(l, r) => {
                let (l, r) = bin(l, r)?;
                BoundFormula::And(l, r)
            }
            Formula::Or(l, r) => {
                let (l, r) = bin(l, r)?;
                BoundFormula::Or(l, r)
            }
            Formula::Implies(l, r) => {
                let (l, r) = bin(l, r)?;
                BoundFormula::Implies(l, r)
            }
            Formula::Iff(l, r) => {
                let (l, r) = bin(l, r)?;
                BoundFormula::Iff(l, r)
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Not(_) => 5,
            Formula::Atom(_) => 6,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, child: &Formula, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

/// Canonical printer: minimal parentheses under the grammar's precedence.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.precedence();
        let (l, r, op, right_assoc) = match self {
            Formula::Atom(a) => return write!(f, "{a}"),
            Formula::Not(inner) => {
                f.write_str("!")?;
                return write_operand(f, inner, inner.precedence() < p);
            }
            Formula::And(l, r) => (l, r, "&", false),
            Formula::Or(l, r) => (l, r, "|", false),
            Formula::Implies(l, r) => (l, r, "->", true),
            Formula::Iff(l, r) => (l, r, "<->", true),
        };
        let (lp, rp) = if right_assoc {
            (l.precedence() <= p, r.precedence() < p)
        } else {
            (l.precedence() < p, r.precedence() <= p)
        };
        write_operand(f, l, lp)?;
        write!(f, " {op} ")?;
        write_operand(f, r, rp)
    }
}

/// A formula with atoms resolved to vocabulary indices.
#[derive(Debug, Clone)]
pub enum BoundFormula {
    Atom(usize),
    Not(Box<BoundFormula>),
    And(Box<BoundFormula>, Box<BoundFormula>),
    Or(Box<BoundFormula>, Box<BoundFormula>),
    Implies(Box<BoundFormula>, Box<BoundFormula>),
    Iff(Box<BoundFormula>, Box<BoundFormula>),
}

impl BoundFormula {
    /// Evaluate against a packed valuation (bit `i` of the word slice is atom `i`).
    #[inline]
    pub fn eval_bits(&self, bits: &[u64]) -> bool {
        match self {
            BoundFormula::Atom(i) => bits[i / 64] >> (i % 64) & 1 == 1,
            BoundFormula::Not(f) => !f.eval_bits(bits),
            BoundFormula::And(l, r) => l.eval_bits(bits) && r.eval_bits(bits),
            BoundFormula::Or(l, r) => l.eval_bits(bits) || r.eval_bits(bits),
            BoundFormula::Implies(l, r) => !l.eval_bits(bits) || r.eval_bits(bits),
            BoundFormula::Iff(l, r) => l.eval_bits(bits) == r.eval_bits(bits),
        }
    }
}

/// A formula read at a particular time step (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimedFormula {
    pub formula: Formula,
    pub time: usize,
}

impl TimedFormula {
    pub fn new(formula: Formula, time: usize) -> Self {
        TimedFormula { formula, time }
    }
}

impl fmt::Display for TimedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.formula, self.time)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn val(pairs: &[(&str, bool)]) -> HashMap<String, bool> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn eval_conjunction() {
        let f = Formula::and(Formula::atom("r"), Formula::atom("w"));
        assert!(f.eval(&val(&[("r", true), ("w", true)])).unwrap());
        assert!(!f.eval(&val(&[("r", true), ("w", false)])).unwrap());
    }

    #[test]
    fn implication_matches_material_conditional() {
        let imp = Formula::implies(Formula::atom("r"), Formula::atom("w"));
        let alt = Formula::or(Formula::not(Formula::atom("r")), Formula::atom("w"));
        for r in [false, true] {
            for w in [false, true] {
                let v = val(&[("r", r), ("w", w)]);
                assert_eq!(imp.eval(&v).unwrap(), alt.eval(&v).unwrap());
            }
        }
    }

    #[test]
    fn maze_room_a_observation() {
        // room a at time 1 senses N=1 E=0 S=1 W=1
        let v = val(&[
            ("L_a", true),
            ("N", true),
            ("E", false),
            ("S", true),
            ("W", true),
        ]);
        let f = Formula::and(
            Formula::and(Formula::not(Formula::atom("E")), Formula::atom("S")),
            Formula::atom("W"),
        );
        assert!(f.eval(&v).unwrap());
    }

    #[test]
    fn unbound_atom_is_named() {
        let f = Formula::or(Formula::atom("r"), Formula::atom("x"));
        let err = f.eval(&val(&[("r", false)])).unwrap_err();
        assert_eq!(err, Error::UnboundAtom("x".into()));
    }

    #[test]
    fn atoms_are_collected() {
        let f = Formula::and(Formula::atom("r"), Formula::atom("w"));
        let names: Vec<_> = f.atoms().into_iter().map(|a| a.0).collect();
        assert_eq!(names, ["r", "w"]);
        let g = Formula::atom("L_q");
        assert_eq!(g.atoms().len(), 1);
    }

    #[test]
    fn printer_uses_minimal_parens() {
        let f = Formula::and(
            Formula::or(Formula::atom("a"), Formula::atom("b")),
            Formula::not(Formula::and(Formula::atom("c"), Formula::atom("d"))),
        );
        assert_eq!(f.to_string(), "(a | b) & !(c & d)");
        let g = Formula::implies(
            Formula::implies(Formula::atom("a"), Formula::atom("b")),
            Formula::atom("c"),
        );
        assert_eq!(g.to_string(), "(a -> b) -> c");
        let h = Formula::and(
            Formula::atom("a"),
            Formula::and(Formula::atom("b"), Formula::atom("c")),
        );
        assert_eq!(h.to_string(), "a & (b & c)");
    }

    #[test]
    fn conjunct_literals_flattens() {
        let f = Formula::and(
            Formula::and(Formula::literal("N", false), Formula::literal("E", false)),
            Formula::literal("S", true),
        );
        let lits = f.conjunct_literals().unwrap();
        assert_eq!(lits.len(), 3);
        assert_eq!(lits[2], Formula::atom("S"));
        let g = Formula::and(
            Formula::atom("a"),
            Formula::or(Formula::atom("b"), Formula::atom("c")),
        );
        assert!(g.conjunct_literals().is_none());
    }

    #[test]
    fn bound_eval_agrees_with_named_eval() {
        let names = ["a", "b", "c"];
        let f = Formula::iff(
            Formula::atom("a"),
            Formula::implies(Formula::atom("b"), Formula::not(Formula::atom("c"))),
        );
        let bound = f.bind(&|n| names.iter().position(|x| *x == n)).unwrap();
        for bits in 0u64..8 {
            let v: HashMap<String, bool> = names
                .iter()
                .enumerate()
                .map(|(i, n)| (n.to_string(), bits >> i & 1 == 1))
                .collect();
            assert_eq!(bound.eval_bits(&[bits]), f.eval(&v).unwrap());
        }
    }
}
