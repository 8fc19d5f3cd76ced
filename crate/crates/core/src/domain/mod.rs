//! Operator schemas in a PDDL subset, grounding, applicability and effects.

mod builtin;
mod cond;
mod pddl;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

pub use builtin::{builtin, builtin_source, BUILTIN_NAMES};
pub use cond::{parse_arg, parse_cond, parse_typed_vars, Arg, Cond, Diagnosis, Env, LitPattern, TypedVar};
pub use pddl::{load_domain, parse_action_blocks};

use crate::sexpr::SexprError;
use crate::world::{GroundAction, Literal, ObjectRef, Proposition, Universe, Vocabulary, WorldError, WorldState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("parse error: {0}")]
    Parse(#[from] SexprError),
    #[error("vocabulary error: {0}")]
    Vocabulary(String),
    #[error("invalid schema `{action}`: {message}")]
    Invalid { action: String, message: String },
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("binding error for `{action}`: {message}")]
    Binding { action: String, message: String },
    #[error("precondition of {action} violated: {}", render_lits(.unsatisfied))]
    PreconditionViolated {
        action: String,
        unsatisfied: Vec<Literal>,
    },
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("unknown built-in domain `{0}`")]
    UnknownBuiltin(String),
}

fn render_lits(ls: &[Literal]) -> String {
    ls.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Clone, PartialEq, Eq)]
pub struct OperatorSchema {
    pub name: String,
    pub params: Vec<TypedVar>,
    pub precondition: Cond,
    pub effect: Cond,
    /// Precondition variables that are neither parameters nor quantified;
    /// read existentially.
    pub implicit: Vec<TypedVar>,
}

impl std::fmt::Debug for OperatorSchema {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_pddl())
    }
}

impl OperatorSchema {
    /// Canonical upper-case name.
    pub fn key(&self) -> String {
        self.name.to_ascii_uppercase()
    }

    pub fn to_pddl(&self) -> String {
        let params = self
            .params
            .iter()
            .map(|p| format!("?{} - {}", p.name, p.ty))
            .collect::<Vec<_>>()
            .join(" ");
        format!(
            "(:action {}\n  :parameters ({})\n  :precondition {}\n  :effect {}\n)",
            self.name.to_ascii_lowercase(),
            params,
            self.precondition,
            self.effect
        )
    }
}

/// Agent conventions that the generic core needs to know about.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Conventions {
    /// Unary holding predicates, one per hand.
    pub hands: Vec<String>,
    pub auto_navigation: bool,
    pub navigate_action: Option<String>,
    /// Unary predicate meaning "the agent can reach this object".
    pub adjacency_predicate: Option<String>,
    /// Movement and perception actions; never counted as redundant.
    pub navigation: Vec<String>,
}

impl Conventions {
    pub fn is_navigation(&self, action: &str) -> bool {
        self.navigation.iter().any(|n| n.eq_ignore_ascii_case(action))
            || self.navigate_action.as_deref().is_some_and(|n| n.eq_ignore_ascii_case(action))
    }
}

/// An instantiated operator.
#[derive(Debug, Clone)]
pub struct Grounded {
    pub action: GroundAction,
    pub precondition: Cond,
    pub effect: Cond,
}

#[derive(Clone)]
pub struct Domain {
    pub name: String,
    vocab: Vocabulary,
    schemas: Vec<OperatorSchema>,
    index: BTreeMap<String, usize>,
    pub conventions: Conventions,
    fluents: BTreeSet<String>,
    pub warnings: Vec<String>,
}

impl std::fmt::Debug for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Domain")
            .field("name", &self.name)
            .field("actions", &self.index.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Domain {
    pub(crate) fn from_parts(
        name: String,
        vocab: Vocabulary,
        schemas: Vec<OperatorSchema>,
        conventions: Conventions,
        warnings: Vec<String>,
    ) -> Domain {
        let mut d = Domain {
            name,
            vocab,
            schemas: Vec::new(),
            index: BTreeMap::new(),
            conventions,
            fluents: BTreeSet::new(),
            warnings,
        };
        for s in schemas {
            d.insert(s);
        }
        d
    }

    fn insert(&mut self, s: OperatorSchema) {
        self.vocab.declare_action(&s.name, s.params.len());
        let key = s.key();
        if let Some(&i) = self.index.get(&key) {
            self.schemas[i] = s;
        } else {
            self.index.insert(key, self.schemas.len());
            self.schemas.push(s);
        }
        self.fluents = self
            .schemas
            .iter()
            .flat_map(|s| s.effect.predicates())
            .map(|(p, _)| p.to_string())
            .collect();
    }

    pub fn empty() -> Domain {
        Domain::from_parts(String::new(), Vocabulary::new(), Vec::new(), Conventions::default(), Vec::new())
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn schemas(&self) -> &[OperatorSchema] {
        &self.schemas
    }

    pub fn schema(&self, name: &str) -> Option<&OperatorSchema> {
        self.index
            .get(&name.to_ascii_uppercase())
            .map(|&i| &self.schemas[i])
    }

    /// Predicates changed by some effect.
    pub fn fluents(&self) -> &BTreeSet<String> {
        &self.fluents
    }

    pub fn is_static(&self, predicate: &str) -> bool {
        !self.fluents.contains(&predicate.to_ascii_lowercase())
    }

    /// Copy with `schema` replacing (or adding) the operator of the same name.
    pub fn with_schema(&self, schema: OperatorSchema) -> Domain {
        let mut d = self.clone();
        for (p, n) in schema
            .precondition
            .predicates()
            .into_iter()
            .chain(schema.effect.predicates())
        {
            if !d.vocab.is_predicate(p) && p != "=" {
                d.vocab.declare_predicate(p, n);
            }
        }
        d.insert(schema);
        d
    }

    /// Copy keeping only the named operators.
    pub fn restricted_to(&self, names: &BTreeSet<String>) -> Domain {
        let keep: Vec<OperatorSchema> = self
            .schemas
            .iter()
            .filter(|s| names.contains(&s.key()))
            .cloned()
            .collect();
        let mut vocab = Vocabulary::new();
        for (p, n) in self.vocab.predicates() {
            vocab.declare_predicate(p, n);
        }
        Domain::from_parts(self.name.clone(), vocab, keep, self.conventions.clone(), self.warnings.clone())
    }

    /// Instantiate `name` on `args`, checking arity and parameter types.
    pub fn ground(&self, name: &str, args: &[ObjectRef], u: &Universe) -> Result<Grounded, DomainError> {
        let schema = self
            .schema(name)
            .ok_or_else(|| DomainError::UnknownAction(name.to_string()))?;
        ground(schema, args, u)
    }

    pub fn ground_action(&self, a: &GroundAction, u: &Universe) -> Result<Grounded, DomainError> {
        self.ground(a.name(), a.args(), u)
    }

    pub fn applicable(&self, state: &WorldState, a: &GroundAction) -> Result<bool, DomainError> {
        let g = self.ground_action(a, state.universe())?;
        Ok(g.precondition.holds(state, &mut Vec::new()))
    }

    /// Add and delete sets of `a` in `state`. Adds win over deletes of the
    /// same fact.
    pub fn effect_delta(
        &self,
        state: &WorldState,
        a: &GroundAction,
    ) -> Result<(BTreeSet<Proposition>, BTreeSet<Proposition>), DomainError> {
        let g = self.ground_action(a, state.universe())?;
        Ok(grounded_delta(&g, state))
    }

    pub fn apply(&self, state: &WorldState, a: &GroundAction) -> Result<WorldState, DomainError> {
        let g = self.ground_action(a, state.universe())?;
        let mut env = Vec::new();
        let d = g.precondition.diagnose(state, &mut env, false);
        if !d.ok {
            return Err(DomainError::PreconditionViolated {
                action: a.to_string(),
                unsatisfied: d.unsatisfied.into_iter().collect(),
            });
        }
        let (add, del) = grounded_delta(&g, state);
        Ok(state.apply_delta(&add, &del)?)
    }

    /// Whether the object properties permit `a` at all: the precondition
    /// with fluent literals relaxed is satisfiable, and the binding types fit.
    pub fn affordable(&self, state: &WorldState, a: &GroundAction) -> Result<bool, DomainError> {
        match self.ground_action(a, state.universe()) {
            Ok(g) => Ok(g.precondition.relaxed(state, &mut Vec::new(), &self.fluents, false)),
            Err(DomainError::Binding { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// All type-compatible ground actions, sorted by name then arguments.
    pub fn ground_actions(&self, u: &Universe) -> Vec<GroundAction> {
        let mut out = Vec::new();
        for s in &self.schemas {
            let bindings = Cond::bindings(&s.params, u);
            for b in bindings {
                out.push(GroundAction::new(&s.name, b.into_iter().map(|(_, o)| o).collect()));
            }
        }
        out.sort();
        out
    }
}

/// Free-function form of [`Domain::ground`].
pub fn ground(schema: &OperatorSchema, args: &[ObjectRef], u: &Universe) -> Result<Grounded, DomainError> {
    let bad = |message: String| DomainError::Binding {
        action: schema.key(),
        message,
    };
    if args.len() != schema.params.len() {
        return Err(bad(format!(
            "expects {} argument(s), got {}",
            schema.params.len(),
            args.len()
        )));
    }
    let mut map = BTreeMap::new();
    for (p, o) in schema.params.iter().zip(args) {
        if !u.contains(o) {
            return Err(bad(format!("unknown object `{o}`")));
        }
        if !u.is_of_type(o, &p.ty) {
            return Err(bad(format!("`{o}` is not of type `{}`", p.ty)));
        }
        map.insert(p.name.clone(), o.clone());
    }
    let mut pre = schema.precondition.substitute(&map);
    if !schema.implicit.is_empty() {
        pre = Cond::Exists(schema.implicit.clone(), Box::new(pre));
    }
    Ok(Grounded {
        action: GroundAction::new(&schema.name, args.to_vec()),
        precondition: pre,
        effect: schema.effect.substitute(&map),
    })
}

pub fn grounded_delta(g: &Grounded, state: &WorldState) -> (BTreeSet<Proposition>, BTreeSet<Proposition>) {
    let (mut add, mut del) = (BTreeSet::new(), BTreeSet::new());
    g.effect.collect_effects(state, &mut Vec::new(), &mut add, &mut del);
    let del = del.difference(&add).cloned().collect();
    (add, del)
}

/// Load a domain by built-in name or from PDDL text.
pub fn resolve_domain(name_or_text: &str) -> Result<Arc<Domain>, DomainError> {
    if let Some(d) = builtin(name_or_text) {
        return Ok(d);
    }
    load_domain(name_or_text).map(Arc::new)
}
