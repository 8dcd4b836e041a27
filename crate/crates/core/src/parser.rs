//! Concrete syntax for formulas, timed conditions and probability queries.
//!
//! ```text
//! formula   := iff
//! iff       := imp ("<->" iff)?
//! imp       := or ("->" imp)?
//! or        := and ("|" and)*
//! and       := unary ("&" unary)*
//! unary     := "!" unary | atom | "(" formula ")"
//! timed     := formula "@" integer ("&" formula "@" integer)*
//! item      := timed | "OBS" atoms "=" bits "@" integer
//! atoms     := identifier                 (one atom per character)
//!            | "(" atom ("," atom)* ")"
//! condition := item ("," item)*
//! query     := "P(" [timed ("," timed)*] "|" [condition] ")"
//! ```
//!
//! `->` and `<->` associate to the right, `&` and `|` to the left. After a
//! complete `formula "@" integer`, a `|` always separates target from
//! condition, so disjunctions inside queries need no extra parentheses.
//! Conjoined timed formulas must share their time and form one item.

use crate::engine::Condition;
use crate::error::{Error, Result};
use crate::formula::{Formula, TimedFormula};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Not,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
    At,
    Comma,
    Eq,
    Number(String),
    Ident(String),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Imp => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::At => "`@`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'!' => Tok::Not,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'@' => Tok::At,
            b',' => Tok::Comma,
            b'=' => Tok::Eq,
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    i += 1;
                    Tok::Imp
                } else {
                    return Err(syntax(start, "expected `->`"));
                }
            }
            b'<' => {
                if text[i..].starts_with("<->") {
                    i += 2;
                    Tok::Iff
                } else {
                    return Err(syntax(start, "expected `<->`"));
                }
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Number(text[start..i].to_string())));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let found = text[i..].chars().next().unwrap_or('\0');
                return Err(Error::UnknownToken { offset: i, found });
            }
        };
        i += 1;
        out.push((start, tok));
    }
    Ok(out)
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        offset,
        message: message.into(),
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            end: text.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, ahead: usize) -> Option<&Tok> {
        self.toks.get(self.pos + ahead).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn unexpected(&self, wanted: &str) -> Error {
        match self.peek() {
            Some(t) => syntax(
                self.offset(),
                format!("expected {wanted}, found {}", t.describe()),
            ),
            None => syntax(self.end, format!("expected {wanted}, found end of input")),
        }
    }

    fn finish(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            Err(self.unexpected("end of input"))
        } else {
            Ok(())
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.implication()?;
        if self.eat(&Tok::Iff) {
            let rhs = self.formula()?;
            Ok(Formula::iff(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn implication(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Imp) {
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Or) {
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.bump();
                let f = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Ident(name)) => {
                let f = Formula::atom(name);
                self.bump();
                Ok(f)
            }
            _ => Err(self.unexpected("a formula")),
        }
    }

    fn time(&mut self) -> Result<usize> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Number(n)) => match n.parse::<usize>() {
                Ok(t) if t >= 1 => Ok(t),
                _ => Err(syntax(
                    at,
                    format!("time must be an integer >= 1, got `{n}`"),
                )),
            },
            _ => {
                self.pos -= 1;
                Err(self.unexpected("a time step"))
            }
        }
    }

    /// `f@t`, or `f@t & g@t & ...` as the single item `(f & g & ...)@t`.
    fn timed(&mut self) -> Result<TimedFormula> {
        let mut formula = self.formula()?;
        self.expect(&Tok::At)?;
        let time = self.time()?;
        while self.eat(&Tok::And) {
            let next = self.formula()?;
            self.expect(&Tok::At)?;
            let at = self.offset();
            let t = self.time()?;
            if t != time {
                return Err(syntax(
                    at,
                    format!("conjoined items must share a time, found @{time} and @{t}"),
                ));
            }
            formula = Formula::and(formula, next);
        }
        Ok(TimedFormula::new(formula, time))
    }

    fn starts_observation(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == "OBS")
            && matches!(self.peek_at(1), Some(Tok::Ident(_)) | Some(Tok::LParen))
    }

    /// `OBS NESW=0011 @2` expands to one timed literal per atom.
    fn observation(&mut self, out: &mut Vec<TimedFormula>) -> Result<()> {
        self.bump();
        let atoms_at = self.offset();
        let atoms: Vec<String> = match self.bump() {
            Some(Tok::Ident(run)) => run.chars().map(String::from).collect(),
            Some(Tok::LParen) => {
                let mut names = Vec::new();
                loop {
                    match self.bump() {
                        Some(Tok::Ident(n)) => names.push(n),
                        _ => {
                            self.pos -= 1;
                            return Err(self.unexpected("an atom name"));
                        }
                    }
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(&Tok::RParen)?;
                names
            }
            _ => unreachable!("checked by starts_observation"),
        };
        self.expect(&Tok::Eq)?;
        let bits_at = self.offset();
        let bits = match self.bump() {
            Some(Tok::Number(b)) => b,
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("a bit string"));
            }
        };
        if bits.bytes().any(|b| b != b'0' && b != b'1') {
            return Err(syntax(bits_at, format!("`{bits}` is not a bit string")));
        }
        if bits.len() != atoms.len() {
            return Err(syntax(
                atoms_at,
                format!("{} atoms but {} bits", atoms.len(), bits.len()),
            ));
        }
        if let Some(bad) = atoms.iter().find(|a| !crate::formula::is_identifier(a)) {
            return Err(syntax(
                atoms_at,
                format!("`{bad}` is not a valid atom name"),
            ));
        }
        self.expect(&Tok::At)?;
        let time = self.time()?;
        for (name, bit) in atoms.iter().zip(bits.bytes()) {
            out.push(TimedFormula::new(Formula::literal(name, bit == b'1'), time));
        }
        Ok(())
    }

    fn condition_items(&mut self, out: &mut Vec<TimedFormula>) -> Result<()> {
        loop {
            if self.starts_observation() {
                self.observation(out)?;
            } else {
                out.push(self.timed()?);
            }
            if !self.eat(&Tok::Comma) {
                return Ok(());
            }
        }
    }
}

/// Parse a single formula.
pub fn parse(text: &str) -> Result<Formula> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_timed(text: &str) -> Result<TimedFormula> {
    let mut p = Parser::new(text)?;
    let t = p.timed()?;
    p.finish()?;
    Ok(t)
}

/// Parse a comma-separated condition. Blank input is the empty condition.
pub fn parse_condition(text: &str) -> Result<Condition> {
    let mut p = Parser::new(text)?;
    let mut items = Vec::new();
    if p.peek().is_some() {
        p.condition_items(&mut items)?;
    }
    p.finish()?;
    Ok(Condition::new(items))
}

/// A parsed `P(targets | condition)` query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub target: Condition,
    pub condition: Condition,
}

pub fn parse_query(text: &str) -> Result<Query> {
    let mut p = Parser::new(text)?;
    match p.bump() {
        Some(Tok::Ident(s)) if s == "P" => {}
        _ => {
            p.pos -= 1;
            return Err(p.unexpected("`P(`"));
        }
    }
    p.expect(&Tok::LParen)?;
    let mut target = Vec::new();
    if p.peek() != Some(&Tok::Or) {
        loop {
            target.push(p.timed()?);
            if !p.eat(&Tok::Comma) {
                break;
            }
        }
    }
    p.expect(&Tok::Or)?;
    let mut condition = Vec::new();
    if p.peek() != Some(&Tok::RParen) {
        p.condition_items(&mut condition)?;
    }
    p.expect(&Tok::RParen)?;
    p.finish()?;
    Ok(Query {
        target: Condition::new(target),
        condition: Condition::new(condition),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Formula {
        Formula::atom(n)
    }

    #[test]
    fn conjunction() {
        assert_eq!(parse("r & w").unwrap(), Formula::and(a("r"), a("w")));
    }

    #[test]
    fn negated_literals_associate_left() {
        let f = parse("!N & !E & S & W").unwrap();
        let expected = Formula::and(
            Formula::and(
                Formula::and(Formula::not(a("N")), Formula::not(a("E"))),
                a("S"),
            ),
            a("W"),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn precedence_ladder() {
        let f = parse("a <-> b -> c | d & !e").unwrap();
        let expected = Formula::iff(
            a("a"),
            Formula::implies(
                a("b"),
                Formula::or(a("c"), Formula::and(a("d"), Formula::not(a("e")))),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn arrows_associate_right() {
        assert_eq!(
            parse("a -> b -> c").unwrap(),
            Formula::implies(a("a"), Formula::implies(a("b"), a("c")))
        );
        assert_eq!(
            parse("a <-> b <-> c").unwrap(),
            Formula::iff(a("a"), Formula::iff(a("b"), a("c")))
        );
    }

    #[test]
    fn syntax_error_reports_offset() {
        match parse("r & ").unwrap_err() {
            Error::Syntax { offset, .. } => assert_eq!(offset, 4),
            e => panic!("unexpected {e:?}"),
        }
        match parse("(r | w").unwrap_err() {
            Error::Syntax { offset, .. } => assert_eq!(offset, 6),
            e => panic!("unexpected {e:?}"),
        }
        match parse("r w").unwrap_err() {
            Error::Syntax { offset, .. } => assert_eq!(offset, 2),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn illegal_character() {
        assert_eq!(
            parse("r $ w").unwrap_err(),
            Error::UnknownToken {
                offset: 2,
                found: '$'
            }
        );
    }

    #[test]
    fn timed_needs_positive_time() {
        assert_eq!(
            parse_timed("L_b@2").unwrap(),
            TimedFormula::new(a("L_b"), 2)
        );
        assert!(matches!(parse_timed("L_b@0"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_timed("L_b"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn query_with_disjunction_in_target() {
        let q = parse_query("P(a | b@1 | c@2, d@1)").unwrap();
        assert_eq!(
            q.target.items(),
            &[TimedFormula::new(Formula::or(a("a"), a("b")), 1)]
        );
        assert_eq!(q.condition.len(), 2);
    }

    #[test]
    fn query_with_empty_sides() {
        let q = parse_query("P(L_q@1 |)").unwrap();
        assert_eq!(q.target.len(), 1);
        assert!(q.condition.is_empty());
        let q = parse_query("P(| r@3)").unwrap();
        assert!(q.target.is_empty());
        assert_eq!(q.condition.len(), 1);
    }

    #[test]
    fn observation_shorthand_expands() {
        let c = parse_condition("OBS NESW=0011 @2").unwrap();
        let expected: Vec<_> = ["!N", "!E", "S", "W"]
            .iter()
            .map(|s| TimedFormula::new(parse(s).unwrap(), 2))
            .collect();
        assert_eq!(c.items(), expected.as_slice());

        let c = parse_condition("OBS (Front,Back)=10 @1, r@3").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.items()[1], TimedFormula::new(Formula::not(a("Back")), 1));
    }

    #[test]
    fn observation_width_mismatch() {
        assert!(matches!(
            parse_condition("OBS NESW=001 @2"),
            Err(Error::Syntax { offset: 4, .. })
        ));
        assert!(matches!(
            parse_condition("OBS NE=12 @2"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn blank_condition_is_empty() {
        assert!(parse_condition("  ").unwrap().is_empty());
    }

    #[test]
    fn conjoined_timed_literals_form_one_item() {
        let c = parse_condition("!N@1 & S@1, W@2").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(
            c.items()[0],
            TimedFormula::new(Formula::and(Formula::not(a("N")), a("S")), 1)
        );
        assert_eq!(c.split_literals().len(), 3);
        assert!(matches!(
            parse_condition("N@1 & S@2"),
            Err(Error::Syntax { offset: 8, .. })
        ));
    }
}
