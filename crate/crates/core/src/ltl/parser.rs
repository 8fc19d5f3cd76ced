//! Recursive-descent parser for the goal/subgoal text dialect.
//!
//! ```text
//! then_stmt      := implies_stmt ("then" implies_stmt)*
//! implies_stmt   := or_stmt ("implies" implies_stmt)?
//! or_stmt        := and_stmt ("or" and_stmt)*
//! and_stmt       := primitive_stmt ("and" primitive_stmt)*
//! primitive_stmt := "not" primitive_stmt
//!                 | ("forall" | "exists") VAR "." "(" then_stmt ")"
//!                 | ("forn" "(" N ")" | "forn" N | "forn<N>") VAR "." "(" then_stmt ")"
//!                 | NAME "(" [term ("," term)*] ")"
//!                 | "(" then_stmt ")"
//! ```

use std::fmt;

use thiserror::Error;

use super::ast::{Atom, AtomKind, Formula, Term};
use crate::world::ObjectRef;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at byte {}: expected {}, found {}",
            self.offset,
            self.expected.join(" | "),
            self.found
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    ObjId(String, u32),
    Num(usize),
    LParen,
    RParen,
    Comma,
    Dot,
    ForNCount(usize),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::ObjId(c, i) => format!("`{c}.{i}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::ForNCount(n) => format!("`forn{n}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match c {
            b'(' => {
                out.push((Tok::LParen, start));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, start));
                i += 1;
            }
            b',' => {
                out.push((Tok::Comma, start));
                i += 1;
            }
            b'.' => {
                out.push((Tok::Dot, start));
                i += 1;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = text[start..i].parse().map_err(|_| ParseError {
                    offset: start,
                    expected: vec!["number".into()],
                    found: text[start..i].to_string(),
                })?;
                out.push((Tok::Num(n), start));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                // `name.123` is an object id; `x0.` followed by anything else is a binder
                if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                    let mut j = i + 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    let id = text[i + 1..j].parse().map_err(|_| ParseError {
                        offset: i + 1,
                        expected: vec!["object id".into()],
                        found: text[i + 1..j].to_string(),
                    })?;
                    out.push((Tok::ObjId(word.to_string(), id), start));
                    i = j;
                    continue;
                }
                let lower = word.to_ascii_lowercase();
                if let Some(digits) = lower.strip_prefix("forn") {
                    if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
                        out.push((Tok::ForNCount(digits.parse().unwrap_or(0)), start));
                        continue;
                    }
                    if digits.is_empty() && i < bytes.len() && bytes[i] == b'<' {
                        let close = text[i..].find('>').map(|p| p + i);
                        if let Some(close) = close {
                            if let Ok(n) = text[i + 1..close].trim().parse() {
                                out.push((Tok::ForNCount(n), start));
                                i = close + 1;
                                continue;
                            }
                        }
                    }
                }
                out.push((Tok::Ident(word.to_string()), start));
            }
            _ => {
                return Err(ParseError {
                    offset: start,
                    expected: vec!["token".into()],
                    found: format!("`{}`", &text[start..].chars().next().unwrap_or('?')),
                })
            }
        }
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn is_kw(t: &Tok, kw: &str) -> bool {
    matches!(t, Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
}

const KEYWORDS: [&str; 8] = ["then", "or", "and", "not", "forall", "exists", "forn", "implies"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.err(&[what])
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if is_kw(self.peek(), kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn then_stmt(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.implies_stmt()?];
        while self.eat_kw("then") {
            items.push(self.implies_stmt()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::Then(items)
        })
    }

    fn implies_stmt(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or_stmt()?;
        if self.eat_kw("implies") {
            let rhs = self.implies_stmt()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or_stmt(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.and_stmt()?];
        while self.eat_kw("or") {
            items.push(self.and_stmt()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::Or(items)
        })
    }

    fn and_stmt(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.primitive()?];
        while self.eat_kw("and") {
            items.push(self.primitive()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::And(items)
        })
    }

    fn binder(&mut self) -> Result<(String, Formula), ParseError> {
        let var = match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.iter().any(|k| s.eq_ignore_ascii_case(k)) => {
                self.bump();
                s
            }
            _ => return self.err(&["variable name"]),
        };
        self.expect(Tok::Dot, "`.`")?;
        self.expect(Tok::LParen, "`(`")?;
        let body = self.then_stmt()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok((var, body))
    }

    fn primitive(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.then_stmt()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::ForNCount(n) => {
                self.bump();
                let (v, body) = self.binder()?;
                Ok(Formula::ForN(v, n, Box::new(body)))
            }
            Tok::Ident(word) => {
                let lower = word.to_ascii_lowercase();
                match lower.as_str() {
                    "not" => {
                        self.bump();
                        Ok(Formula::not(self.primitive()?))
                    }
                    "forall" | "exists" => {
                        self.bump();
                        let (v, body) = self.binder()?;
                        Ok(if lower == "forall" {
                            Formula::Forall(v, Box::new(body))
                        } else {
                            Formula::Exists(v, Box::new(body))
                        })
                    }
                    "forn" => {
                        self.bump();
                        let n = match self.peek() {
                            Tok::Num(n) => {
                                let n = *n;
                                self.bump();
                                n
                            }
                            Tok::LParen => {
                                self.bump();
                                let n = match self.bump() {
                                    Tok::Num(n) => n,
                                    _ => {
                                        self.pos -= 1;
                                        return self.err(&["count"]);
                                    }
                                };
                                self.expect(Tok::RParen, "`)`")?;
                                n
                            }
                            _ => return self.err(&["`(`", "count"]),
                        };
                        let (v, body) = self.binder()?;
                        Ok(Formula::ForN(v, n, Box::new(body)))
                    }
                    "then" | "or" | "and" | "implies" => {
                        self.err(&["proposition", "`(`", "`not`", "quantifier"])
                    }
                    _ => {
                        self.bump();
                        self.atom(word)
                    }
                }
            }
            _ => self.err(&["proposition", "`(`", "`not`", "quantifier"]),
        }
    }

    fn atom(&mut self, name: String) -> Result<Formula, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let term = match self.peek().clone() {
                    Tok::Ident(s) if !KEYWORDS.iter().any(|k| s.eq_ignore_ascii_case(k)) => {
                        Term::Name(s)
                    }
                    Tok::ObjId(c, id) => match ObjectRef::new(&c, id) {
                        Ok(o) => Term::Obj(o),
                        Err(_) => return self.err(&["object"]),
                    },
                    _ => return self.err(&["argument"]),
                };
                self.bump();
                args.push(term);
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RParen => break,
                    _ => return self.err(&["`,`", "`)`"]),
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(Formula::Atom(Atom {
            name,
            args,
            kind: AtomKind::Unresolved,
        }))
    }
}

/// Parse a formula. Atoms come back [`AtomKind::Unresolved`]; see
/// [`super::resolve`].
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.then_stmt()?;
    if *p.peek() != Tok::Eof {
        return p.err(&["`then`", "`or`", "`and`", "`implies`", "end of input"]);
    }
    Ok(f)
}
