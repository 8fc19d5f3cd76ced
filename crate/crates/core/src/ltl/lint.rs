use std::fmt;

use super::ast::{AtomKind, Formula, Term};
use crate::world::{Universe, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HallucinationKind {
    Predicate,
    Action,
    Object,
}

impl fmt::Display for HallucinationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HallucinationKind::Predicate => "predicate",
            HallucinationKind::Action => "action",
            HallucinationKind::Object => "object",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LintFinding {
    Hallucination { kind: HallucinationKind, name: String },
    Arity { name: String, expected: usize, got: usize },
    /// A bare category name with several instances in the universe.
    AmbiguousObject(String),
    /// `forn` whose body contains `then`; evaluated per step range.
    ForNOverThen,
    /// `not` (or an implication antecedent) over `then`.
    TemporalNegation,
}

impl LintFinding {
    /// Grammar findings that make the formula unusable.
    pub fn is_error(&self) -> bool {
        !matches!(self, LintFinding::ForNOverThen)
    }
}

impl fmt::Display for LintFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LintFinding::Hallucination { kind, name } => write!(f, "hallucinated {kind} `{name}`"),
            LintFinding::Arity { name, expected, got } => {
                write!(f, "`{name}` takes {expected} argument(s), got {got}")
            }
            LintFinding::AmbiguousObject(n) => write!(f, "ambiguous object `{n}`"),
            LintFinding::ForNOverThen => f.write_str("forn over a temporal body"),
            LintFinding::TemporalNegation => f.write_str("negation over `then`"),
        }
    }
}

fn looks_like_action(name: &str) -> bool {
    name.chars().any(|c| c.is_ascii_alphabetic()) && !name.chars().any(|c| c.is_ascii_lowercase())
}

/// Vocabulary and universe check. Never fails; an empty result means clean.
pub fn lint(f: &Formula, vocab: &Vocabulary, u: &Universe) -> Vec<LintFinding> {
    let mut out = Vec::new();
    let mut scope = Vec::new();
    walk(f, vocab, u, &mut scope, &mut out);
    out.sort();
    out.dedup();
    out
}

fn walk(
    f: &Formula,
    vocab: &Vocabulary,
    u: &Universe,
    scope: &mut Vec<String>,
    out: &mut Vec<LintFinding>,
) {
    match f {
        Formula::Atom(a) => {
            let as_action = match a.kind {
                AtomKind::Action => true,
                AtomKind::State => false,
                AtomKind::Unresolved => {
                    vocab.is_action(&a.name) && (!vocab.is_predicate(&a.name) || looks_like_action(&a.name))
                }
            };
            let declared = if as_action {
                vocab.action_arity(&a.name)
            } else {
                vocab.predicate_arity(&a.name)
            };
            match declared {
                Some(n) if n != a.args.len() => out.push(LintFinding::Arity {
                    name: a.name.clone(),
                    expected: n,
                    got: a.args.len(),
                }),
                Some(_) => {}
                None => {
                    let kind = if looks_like_action(&a.name) {
                        HallucinationKind::Action
                    } else {
                        HallucinationKind::Predicate
                    };
                    out.push(LintFinding::Hallucination {
                        kind,
                        name: a.name.clone(),
                    });
                }
            }
            for t in &a.args {
                match t {
                    Term::Obj(o) if !u.contains(o) => out.push(LintFinding::Hallucination {
                        kind: HallucinationKind::Object,
                        name: o.to_string(),
                    }),
                    Term::Name(n) if !scope.contains(n) => {
                        let count = u.objects().filter(|o| o.category().eq_ignore_ascii_case(n)).count();
                        match count {
                            0 => out.push(LintFinding::Hallucination {
                                kind: HallucinationKind::Object,
                                name: n.clone(),
                            }),
                            1 => {}
                            _ => out.push(LintFinding::AmbiguousObject(n.clone())),
                        }
                    }
                    _ => {}
                }
            }
        }
        Formula::Not(g) => {
            if g.contains_then() {
                out.push(LintFinding::TemporalNegation);
            }
            walk(g, vocab, u, scope, out);
        }
        Formula::Implies(a, b) => {
            if a.contains_then() {
                out.push(LintFinding::TemporalNegation);
            }
            walk(a, vocab, u, scope, out);
            walk(b, vocab, u, scope, out);
        }
        Formula::And(fs) | Formula::Or(fs) | Formula::Then(fs) => {
            fs.iter().for_each(|g| walk(g, vocab, u, scope, out))
        }
        Formula::Forall(v, g) | Formula::Exists(v, g) | Formula::ForN(v, _, g) => {
            if matches!(f, Formula::ForN(..)) && g.contains_then() {
                out.push(LintFinding::ForNOverThen);
            }
            scope.push(v.clone());
            walk(g, vocab, u, scope, out);
            scope.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse;

    fn setup() -> (Vocabulary, Universe) {
        let mut v = Vocabulary::new();
        v.declare_predicate("nextto", 2);
        v.declare_predicate("ontop", 2);
        v.declare_action("RINSE", 1);
        let u = Universe::builder()
            .object("a.0".parse().unwrap(), &[])
            .object("b.1".parse().unwrap(), &[])
            .object("c.2".parse().unwrap(), &[])
            .object("countertop.84".parse().unwrap(), &[])
            .build();
        (v, u)
    }

    #[test]
    fn hallucinated_object() {
        let (v, u) = setup();
        let f = parse("ontop(a.0, kitchen.1)").unwrap();
        assert_eq!(
            lint(&f, &v, &u),
            vec![LintFinding::Hallucination {
                kind: HallucinationKind::Object,
                name: "kitchen.1".into()
            }]
        );
    }

    #[test]
    fn arity_error() {
        let (v, u) = setup();
        let f = parse("nextto(a.0, b.1, c.2)").unwrap();
        assert_eq!(
            lint(&f, &v, &u),
            vec![LintFinding::Arity {
                name: "nextto".into(),
                expected: 2,
                got: 3
            }]
        );
    }

    #[test]
    fn clean_and_flags() {
        let (v, u) = setup();
        assert!(lint(&parse("nextto(a.0, b.1) then RINSE(a.0)").unwrap(), &v, &u).is_empty());
        let f = parse("POUR(a.0) then shiny(b.1)").unwrap();
        let kinds: Vec<_> = lint(&f, &v, &u)
            .into_iter()
            .filter_map(|x| match x {
                LintFinding::Hallucination { kind, .. } => Some(kind),
                _ => None,
            })
            .collect();
        assert_eq!(kinds, vec![HallucinationKind::Predicate, HallucinationKind::Action]);
        let f = parse("forn(1) x. (nextto(x, a.0) then nextto(x, b.1))").unwrap();
        assert_eq!(lint(&f, &v, &u), vec![LintFinding::ForNOverThen]);
    }
}
