//! Minimal s-expression reader shared by the PDDL and BDDL front ends.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct SexprError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, PartialEq, Eq)]
pub enum Sexpr {
    Atom(String, usize),
    List(Vec<Sexpr>, usize),
}

impl Sexpr {
    pub fn offset(&self) -> usize {
        match self {
            Sexpr::Atom(_, o) | Sexpr::List(_, o) => *o,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(s, _) => Some(s),
            Sexpr::List(..) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List(items, _) => Some(items),
            Sexpr::Atom(..) => None,
        }
    }

    /// Lower-cased head atom of a list.
    pub fn head(&self) -> Option<String> {
        self.list()?.first()?.atom().map(|s| s.to_ascii_lowercase())
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom(s, _) => f.write_str(s),
            Sexpr::List(items, _) => {
                f.write_str("(")?;
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn error_at(text: &str, offset: usize, message: impl Into<String>) -> SexprError {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = offset - before.rfind('\n').map(|p| p + 1).unwrap_or(0) + 1;
    SexprError {
        offset,
        line,
        column,
        message: message.into(),
    }
}

/// Read every top-level expression. `;` starts a comment.
pub fn parse_all(text: &str) -> Result<Vec<Sexpr>, SexprError> {
    let bytes = text.as_bytes();
    let mut stack: Vec<(Vec<Sexpr>, usize)> = vec![(Vec::new(), 0)];
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                stack.push((Vec::new(), i));
                i += 1;
            }
            b')' => {
                if stack.len() == 1 {
                    return Err(error_at(text, i, "unbalanced `)`"));
                }
                let (items, start) = stack.pop().unwrap();
                stack.last_mut().unwrap().0.push(Sexpr::List(items, start));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && !matches!(bytes[i], b'(' | b')' | b';')
                {
                    i += 1;
                }
                stack
                    .last_mut()
                    .unwrap()
                    .0
                    .push(Sexpr::Atom(text[start..i].to_string(), start));
            }
        }
    }
    if stack.len() > 1 {
        let (_, start) = stack.last().unwrap();
        return Err(error_at(text, *start, "unclosed `(`"));
    }
    Ok(stack.pop().unwrap().0)
}
