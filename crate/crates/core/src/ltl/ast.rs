use std::fmt;

use crate::world::ObjectRef;

/// Argument of an atom. `Name` is a bare identifier as written; it is either
/// a bound variable or an id-less object mention (`character`) that
/// resolution maps to the unique object of that category.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Name(String),
    Obj(ObjectRef),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Name(n) => f.write_str(n),
            Term::Obj(o) => write!(f, "{o}"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomKind {
    /// Not yet classified against a vocabulary.
    Unresolved,
    State,
    Action,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub name: String,
    pub args: Vec<Term>,
    pub kind: AtomKind,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
    ForN(String, usize, Box<Formula>),
    Then(Vec<Formula>),
}

impl Formula {
    pub fn state(name: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(Atom {
            name: name.to_ascii_lowercase(),
            args,
            kind: AtomKind::State,
        })
    }

    pub fn action(name: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(Atom {
            name: name.to_ascii_uppercase(),
            args,
            kind: AtomKind::Action,
        })
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn contains_then(&self) -> bool {
        match self {
            Formula::Atom(_) => false,
            Formula::Then(_) => true,
            Formula::Not(f)
            | Formula::Forall(_, f)
            | Formula::Exists(_, f)
            | Formula::ForN(_, _, f) => f.contains_then(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(Formula::contains_then),
            Formula::Implies(a, b) => a.contains_then() || b.contains_then(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(f)
            | Formula::Forall(_, f)
            | Formula::Exists(_, f)
            | Formula::ForN(_, _, f) => 1 + f.depth(),
            Formula::And(fs) | Formula::Or(fs) | Formula::Then(fs) => {
                1 + fs.iter().map(Formula::depth).max().unwrap_or(0)
            }
            Formula::Implies(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Children of a top-level `Then`, or the formula itself.
    pub fn segments(&self) -> Vec<&Formula> {
        match self {
            Formula::Then(fs) => fs.iter().collect(),
            f => vec![f],
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Formula::Atom(a) => out.push(a),
            Formula::Not(f)
            | Formula::Forall(_, f)
            | Formula::Exists(_, f)
            | Formula::ForN(_, _, f) => f.collect_atoms(out),
            Formula::And(fs) | Formula::Or(fs) | Formula::Then(fs) => {
                fs.iter().for_each(|f| f.collect_atoms(out))
            }
            Formula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Then(_) => 0,
            Formula::Implies(..) => 1,
            Formula::Or(_) => 2,
            Formula::And(_) => 3,
            Formula::Not(_) => 4,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            f.write_str("(")?;
            self.write_at(f, 0)?;
            return f.write_str(")");
        }
        let join = |f: &mut fmt::Formatter<'_>, fs: &[Formula], sep: &str, min: u8| {
            for (i, c) in fs.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                c.write_at(f, min)?;
            }
            Ok(())
        };
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => {
                f.write_str("not ")?;
                g.write_at(f, 4)
            }
            // nested same-operator children keep their parentheses so that
            // parsing the rendering gives back the same tree
            Formula::And(fs) => join(f, fs, " and ", 4),
            Formula::Or(fs) => join(f, fs, " or ", 3),
            Formula::Then(fs) => join(f, fs, " then ", 1),
            Formula::Implies(a, b) => {
                a.write_at(f, 2)?;
                f.write_str(" implies ")?;
                b.write_at(f, 1)
            }
            Formula::Forall(v, g) => {
                write!(f, "forall {v}. (")?;
                g.write_at(f, 0)?;
                f.write_str(")")
            }
            Formula::Exists(v, g) => {
                write!(f, "exists {v}. (")?;
                g.write_at(f, 0)?;
                f.write_str(")")
            }
            Formula::ForN(v, n, g) => {
                write!(f, "forn({n}) {v}. (")?;
                g.write_at(f, 0)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a:?}"),
            Formula::Not(g) => write!(f, "Not[{g:?}]"),
            Formula::And(fs) => write!(f, "And{fs:?}"),
            Formula::Or(fs) => write!(f, "Or{fs:?}"),
            Formula::Then(fs) => write!(f, "Then{fs:?}"),
            Formula::Implies(a, b) => write!(f, "Implies[{a:?}, {b:?}]"),
            Formula::Forall(v, g) => write!(f, "Forall[{v}, {g:?}]"),
            Formula::Exists(v, g) => write!(f, "Exists[{v}, {g:?}]"),
            Formula::ForN(v, n, g) => write!(f, "ForN[{v}, {n}, {g:?}]"),
        }
    }
}
