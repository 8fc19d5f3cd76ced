//! Goal and trajectory language over finite traces.
//!
//! Formulas are parsed into [`Formula`] with unresolved atoms, then
//! [`resolve`]d against a vocabulary and object universe, which classifies
//! each atom as a state or action proposition and binds id-less object
//! mentions. [`evaluate`] checks a resolved or unresolved formula on a
//! [`Trajectory`].

mod ast;
mod eval;
mod lint;
mod parser;

use std::collections::BTreeSet;

use thiserror::Error;

pub use ast::{Atom, AtomKind, Formula, Term};
pub use eval::{evaluate, holds_at};
pub use lint::{lint, HallucinationKind, LintFinding};
pub use parser::{parse, ParseError};

use crate::world::{GroundAction, Universe, Vocabulary, WorldState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtlError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("free variable `{0}`")]
    FreeVariable(String),
    #[error("negation over a temporal subformula: {0}")]
    TemporalNegation(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("vocabulary error: {0}")]
    Vocabulary(String),
    #[error("malformed trajectory: {0}")]
    Trajectory(String),
}

/// States `s_0..s_n` and actions `a_1..a_n`; step `i` pairs `s_i` with the
/// action that produced it (none at step 0).
#[derive(Debug, Clone)]
pub struct Trajectory {
    states: Vec<WorldState>,
    actions: Vec<GroundAction>,
}

impl Trajectory {
    pub fn new(states: Vec<WorldState>, actions: Vec<GroundAction>) -> Result<Self, LtlError> {
        if states.is_empty() {
            return Err(LtlError::Trajectory("no states".into()));
        }
        if states.len() != actions.len() + 1 {
            return Err(LtlError::Trajectory(format!(
                "{} states for {} actions",
                states.len(),
                actions.len()
            )));
        }
        Ok(Trajectory { states, actions })
    }

    pub fn single(state: WorldState) -> Self {
        Trajectory {
            states: vec![state],
            actions: Vec::new(),
        }
    }

    pub fn states(&self) -> &[WorldState] {
        &self.states
    }

    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    /// Index of the last step.
    pub fn last_step(&self) -> usize {
        self.actions.len()
    }

    pub fn universe(&self) -> &Universe {
        self.states[0].universe()
    }

    /// Action that led into step `i`.
    pub fn incoming(&self, i: usize) -> Option<&GroundAction> {
        if i == 0 {
            None
        } else {
            self.actions.get(i - 1)
        }
    }
}

fn is_upper_name(s: &str) -> bool {
    s.chars().any(|c| c.is_ascii_alphabetic()) && !s.chars().any(|c| c.is_ascii_lowercase())
}

/// Decide whether an atom names an action or a state predicate.
pub fn classify(name: &str, vocab: &Vocabulary) -> AtomKind {
    let is_action = vocab.is_action(name);
    let is_pred = vocab.is_predicate(name);
    match (is_action, is_pred) {
        (true, false) => AtomKind::Action,
        (true, true) if is_upper_name(name) => AtomKind::Action,
        _ => AtomKind::State,
    }
}

/// Reject negation over `then` (the semantics are not defined).
pub fn validate(f: &Formula) -> Result<(), LtlError> {
    match f {
        Formula::Atom(_) => Ok(()),
        Formula::Not(g) => {
            if g.contains_then() {
                Err(LtlError::TemporalNegation(f.to_string()))
            } else {
                validate(g)
            }
        }
        Formula::Implies(a, b) => {
            if a.contains_then() {
                return Err(LtlError::TemporalNegation(f.to_string()));
            }
            validate(a)?;
            validate(b)
        }
        Formula::And(fs) | Formula::Or(fs) | Formula::Then(fs) => fs.iter().try_for_each(validate),
        Formula::Forall(_, g) | Formula::Exists(_, g) | Formula::ForN(_, _, g) => validate(g),
    }
}

/// Classify atoms, normalize names and bind object mentions.
///
/// A bare name that is not a bound variable refers to the unique object of
/// that category; if there is none (or several), it is a free variable.
pub fn resolve(f: &Formula, vocab: &Vocabulary, universe: &Universe) -> Result<Formula, LtlError> {
    validate(f)?;
    let mut scope = Vec::new();
    resolve_in(f, vocab, universe, &mut scope)
}

fn resolve_in(
    f: &Formula,
    vocab: &Vocabulary,
    universe: &Universe,
    scope: &mut Vec<String>,
) -> Result<Formula, LtlError> {
    let rec = |g: &Formula, scope: &mut Vec<String>| resolve_in(g, vocab, universe, scope);
    Ok(match f {
        Formula::Atom(a) => Formula::Atom(resolve_atom(a, vocab, universe, scope)?),
        Formula::Not(g) => Formula::not(rec(g, scope)?),
        Formula::And(fs) => Formula::And(fs.iter().map(|g| rec(g, scope)).collect::<Result<_, _>>()?),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|g| rec(g, scope)).collect::<Result<_, _>>()?),
        Formula::Then(fs) => Formula::Then(fs.iter().map(|g| rec(g, scope)).collect::<Result<_, _>>()?),
        Formula::Implies(a, b) => Formula::Implies(Box::new(rec(a, scope)?), Box::new(rec(b, scope)?)),
        Formula::Forall(v, g) | Formula::Exists(v, g) | Formula::ForN(v, _, g) => {
            scope.push(v.clone());
            let body = rec(g, scope);
            scope.pop();
            let body = Box::new(body?);
            match f {
                Formula::Forall(..) => Formula::Forall(v.clone(), body),
                Formula::Exists(..) => Formula::Exists(v.clone(), body),
                Formula::ForN(_, n, _) => Formula::ForN(v.clone(), *n, body),
                _ => unreachable!(),
            }
        }
    })
}

fn resolve_atom(
    a: &Atom,
    vocab: &Vocabulary,
    universe: &Universe,
    scope: &[String],
) -> Result<Atom, LtlError> {
    let kind = match a.kind {
        AtomKind::Unresolved => classify(&a.name, vocab),
        k => k,
    };
    let name = match kind {
        AtomKind::Action => a.name.to_ascii_uppercase(),
        _ => a.name.to_ascii_lowercase(),
    };
    let declared = match kind {
        AtomKind::Action => vocab.action_arity(&name),
        _ => vocab.predicate_arity(&name),
    };
    match declared {
        Some(n) if n != a.args.len() => {
            return Err(LtlError::Vocabulary(format!(
                "`{name}` expects {n} argument(s), got {}",
                a.args.len()
            )))
        }
        None if kind == AtomKind::State && vocab.predicates().next().is_some() => {
            return Err(LtlError::Vocabulary(format!("unknown predicate `{name}`")))
        }
        None if kind == AtomKind::Action && vocab.actions().next().is_some() => {
            return Err(LtlError::Vocabulary(format!("unknown action `{name}`")))
        }
        _ => {}
    }
    let mut args = Vec::with_capacity(a.args.len());
    for t in &a.args {
        args.push(match t {
            Term::Name(n) if scope.iter().any(|v| v == n) => Term::Name(n.clone()),
            Term::Name(n) => match universe.unique_of_category(n) {
                Some(o) => Term::Obj(o.clone()),
                None => return Err(LtlError::FreeVariable(n.clone())),
            },
            Term::Obj(o) => {
                if !universe.contains(o) {
                    return Err(LtlError::UnknownObject(o.to_string()));
                }
                Term::Obj(o.clone())
            }
        });
    }
    Ok(Atom { name, args, kind })
}

/// Object mentions of a resolved formula, for relevance filtering.
pub fn mentioned_objects(f: &Formula) -> BTreeSet<crate::world::ObjectRef> {
    f.atoms()
        .into_iter()
        .flat_map(|a| a.args.iter())
        .filter_map(|t| match t {
            Term::Obj(o) => Some(o.clone()),
            Term::Name(_) => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::world::ObjectRef;

    fn universe() -> Universe {
        Universe::builder()
            .object("character.65".parse().unwrap(), &[])
            .object("chair.1".parse().unwrap(), &[])
            .object("cup.1".parse().unwrap(), &[])
            .object("cup.2".parse().unwrap(), &[])
            .build()
    }

    fn vocab() -> Vocabulary {
        let mut v = Vocabulary::new();
        v.declare_predicate("ontop", 2);
        v.declare_predicate("on", 1);
        v.declare_action("WATCH", 1);
        v.declare_action("WALK", 1);
        v
    }

    #[test]
    fn resolution_binds_unique_categories() {
        let f = parse("ontop(character, chair)").unwrap();
        let r = resolve(&f, &vocab(), &universe()).unwrap();
        assert_eq!(r.to_string(), "ontop(character.65, chair.1)");
        let f = parse("ontop(character, cup)").unwrap();
        assert_eq!(
            resolve(&f, &vocab(), &universe()),
            Err(LtlError::FreeVariable("cup".into()))
        );
    }

    #[test]
    fn classification_by_vocabulary() {
        let f = parse("WATCH(cup.1) then ON(cup.1)").unwrap();
        let r = resolve(&f, &vocab(), &universe()).unwrap();
        let kinds: Vec<_> = r.atoms().iter().map(|a| a.kind).collect();
        assert_eq!(kinds, vec![AtomKind::Action, AtomKind::State]);
        assert_eq!(r.to_string(), "WATCH(cup.1) then on(cup.1)");
    }

    #[test]
    fn negated_then_rejected() {
        let f = parse("not (on(cup.1) then on(cup.2))").unwrap();
        assert!(matches!(
            resolve(&f, &vocab(), &universe()),
            Err(LtlError::TemporalNegation(_))
        ));
    }

    #[test]
    fn arity_and_unknown_objects() {
        let f = parse("on(cup.1, cup.2)").unwrap();
        assert!(matches!(resolve(&f, &vocab(), &universe()), Err(LtlError::Vocabulary(_))));
        let f = parse("on(kitchen.1)").unwrap();
        assert_eq!(
            resolve(&f, &vocab(), &universe()),
            Err(LtlError::UnknownObject("kitchen.1".into()))
        );
    }

    #[test]
    fn trajectory_shape() {
        let s = WorldState::new(Arc::new(universe()), []).unwrap();
        assert!(Trajectory::new(vec![s.clone()], vec![]).is_ok());
        let a = GroundAction::new("walk", vec![ObjectRef::new("chair", 1).unwrap()]);
        assert!(Trajectory::new(vec![s.clone()], vec![a]).is_err());
    }
}
