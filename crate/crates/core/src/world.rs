//! Object-centric symbolic world state.
//!
//! A [`WorldState`] is a closed-world snapshot: a fixed [`Universe`] of objects
//! (with static property tags) plus the set of grounded [`Proposition`]s that
//! currently hold. Anything not recorded is false.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{predicate}` expects {expected} argument(s), got {got}")]
    Arity {
        predicate: String,
        expected: usize,
        got: usize,
    },
    #[error("delta both adds and deletes {0}")]
    ConflictingDelta(String),
    #[error("states belong to different universes")]
    UniverseMismatch,
    #[error("malformed object reference `{0}`")]
    BadObject(String),
    #[error("malformed proposition `{0}`")]
    BadProposition(String),
    #[error("duplicate object `{0}`")]
    DuplicateObject(String),
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// An object instance, rendered `category.id` (e.g. `fridge.97`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectRef {
    category: Arc<str>,
    id: u32,
}

impl ObjectRef {
    pub fn new(category: &str, id: u32) -> Result<Self, WorldError> {
        if !is_identifier(category) {
            return Err(WorldError::BadObject(format!("{category}.{id}")));
        }
        Ok(ObjectRef {
            category: Arc::from(category),
            id,
        })
    }

    pub fn category(&self) -> &str {
        &self.category
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    /// Lenient parse used on ingest: accepts `fridge.97`, and the dataset
    /// spellings `fridge_97` and `jar.n.01_1` (synset suffix dropped).
    pub fn parse_lenient(text: &str) -> Result<Self, WorldError> {
        let text = text.trim();
        if let Ok(obj) = text.parse() {
            return Ok(obj);
        }
        // `name_<digits>` with optional `.n.NN` synset part before the underscore
        if let Some(pos) = text.rfind('_') {
            let (head, tail) = (&text[..pos], &text[pos + 1..]);
            if !tail.is_empty() && tail.chars().all(|c| c.is_ascii_digit()) {
                let id: u32 = tail
                    .parse()
                    .map_err(|_| WorldError::BadObject(text.to_string()))?;
                let category = strip_synset(head);
                return ObjectRef::new(category, id);
            }
        }
        Err(WorldError::BadObject(text.to_string()))
    }
}

/// `jar.n.01` -> `jar`; other strings pass through unchanged.
pub fn strip_synset(name: &str) -> &str {
    let parts: Vec<&str> = name.rsplitn(3, '.').collect();
    if parts.len() == 3
        && parts[0].chars().all(|c| c.is_ascii_digit())
        && parts[1].len() == 1
        && parts[1].chars().all(|c| c.is_ascii_alphabetic())
    {
        parts[2]
    } else {
        name
    }
}

impl FromStr for ObjectRef {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (category, id) = s
            .rsplit_once('.')
            .ok_or_else(|| WorldError::BadObject(s.to_string()))?;
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_digit()) {
            return Err(WorldError::BadObject(s.to_string()));
        }
        let id = id
            .parse()
            .map_err(|_| WorldError::BadObject(s.to_string()))?;
        ObjectRef::new(category, id)
    }
}

impl fmt::Display for ObjectRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.category, self.id)
    }
}

impl fmt::Debug for ObjectRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A grounded atom such as `open(fridge.97)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Proposition {
    predicate: Arc<str>,
    args: Vec<ObjectRef>,
}

impl Proposition {
    /// Predicate names are case-insensitive and stored lower-case.
    pub fn new(predicate: &str, args: Vec<ObjectRef>) -> Self {
        Proposition {
            predicate: Arc::from(predicate.to_ascii_lowercase().as_str()),
            args,
        }
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    pub fn args(&self) -> &[ObjectRef] {
        &self.args
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// `(pred a.1 b.2)`
    pub fn to_pddl(&self) -> String {
        let mut out = format!("({}", self.predicate);
        for a in &self.args {
            out.push(' ');
            out.push_str(&a.to_string());
        }
        out.push(')');
        out
    }
}

impl FromStr for Proposition {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || WorldError::BadProposition(s.to_string());
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = s[..open].trim();
        if !is_identifier(name) {
            return Err(bad());
        }
        let inner = s[open + 1..s.len() - 1].trim();
        let args = if inner.is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(ObjectRef::parse_lenient)
                .collect::<Result<Vec<_>, _>>()?
        };
        Ok(Proposition::new(name, args))
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A proposition with a polarity; `not stained(fridge.97)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub prop: Proposition,
    pub positive: bool,
}

impl Literal {
    pub fn pos(prop: Proposition) -> Self {
        Literal {
            prop,
            positive: true,
        }
    }

    pub fn neg(prop: Proposition) -> Self {
        Literal {
            prop,
            positive: false,
        }
    }

    pub fn holds_in(&self, state: &WorldState) -> bool {
        state.holds(&self.prop) == self.positive
    }
}

impl FromStr for Literal {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        if let Some(rest) = lower.strip_prefix("not ") {
            let offset = t.len() - rest.len();
            return Ok(Literal::neg(t[offset..].trim().parse()?));
        }
        if let Some(rest) = lower.strip_prefix("not(") {
            if t.ends_with(')') {
                let offset = t.len() - rest.len();
                return Ok(Literal::neg(t[offset..t.len() - 1].trim().parse()?));
            }
        }
        Ok(Literal::pos(t.parse()?))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.prop)
        } else {
            write!(f, "not {}", self.prop)
        }
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A concrete action instance such as `RIGHT_GRASP(rag.0)`. Names are stored
/// upper-case.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAction {
    name: Arc<str>,
    args: Vec<ObjectRef>,
}

impl GroundAction {
    pub fn new(name: &str, args: Vec<ObjectRef>) -> Self {
        GroundAction {
            name: Arc::from(name.to_ascii_uppercase().as_str()),
            args,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn args(&self) -> &[ObjectRef] {
        &self.args
    }
}

impl fmt::Display for GroundAction {
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

impl fmt::Debug for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Declared predicate and action arities of a domain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    predicates: BTreeMap<String, usize>,
    actions: BTreeMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_predicate(&mut self, name: &str, arity: usize) {
        self.predicates.insert(name.to_ascii_lowercase(), arity);
    }

    pub fn declare_action(&mut self, name: &str, arity: usize) {
        self.actions.insert(name.to_ascii_uppercase(), arity);
    }

    pub fn predicate_arity(&self, name: &str) -> Option<usize> {
        self.predicates.get(&name.to_ascii_lowercase()).copied()
    }

    pub fn action_arity(&self, name: &str) -> Option<usize> {
        self.actions.get(&name.to_ascii_uppercase()).copied()
    }

    pub fn is_predicate(&self, name: &str) -> bool {
        self.predicate_arity(name).is_some()
    }

    pub fn is_action(&self, name: &str) -> bool {
        self.action_arity(name).is_some()
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&str, usize)> {
        self.predicates.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn actions(&self) -> impl Iterator<Item = (&str, usize)> {
        self.actions.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn check(&self, p: &Proposition) -> Result<(), WorldError> {
        match self.predicate_arity(p.predicate()) {
            None => Err(WorldError::UnknownPredicate(p.predicate().to_string())),
            Some(n) if n != p.arity() => Err(WorldError::Arity {
                predicate: p.predicate().to_string(),
                expected: n,
                got: p.arity(),
            }),
            Some(_) => Ok(()),
        }
    }
}

/// Fixed, finite object universe with static property tags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Universe {
    objects: BTreeSet<ObjectRef>,
    properties: BTreeMap<ObjectRef, BTreeSet<String>>,
}

impl Universe {
    pub fn builder() -> UniverseBuilder {
        UniverseBuilder::default()
    }

    pub fn contains(&self, o: &ObjectRef) -> bool {
        self.objects.contains(o)
    }

    pub fn objects(&self) -> impl Iterator<Item = &ObjectRef> + '_ {
        self.objects.iter()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn properties(&self, o: &ObjectRef) -> impl Iterator<Item = &str> + '_ {
        self.properties
            .get(o)
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
    }

    pub fn has_property(&self, o: &ObjectRef, tag: &str) -> bool {
        self.properties
            .get(o)
            .is_some_and(|s| s.contains(&tag.to_ascii_lowercase()))
    }

    /// Objects admitted by a PDDL-style type: `object` admits everything,
    /// otherwise the category or a property tag must equal the type.
    pub fn objects_of_type<'a>(&'a self, ty: &'a str) -> impl Iterator<Item = &'a ObjectRef> + 'a {
        self.objects.iter().filter(move |o| self.is_of_type(o, ty))
    }

    pub fn is_of_type(&self, o: &ObjectRef, ty: &str) -> bool {
        let ty = strip_synset(ty);
        ty.eq_ignore_ascii_case("object")
            || o.category().eq_ignore_ascii_case(ty)
            || self.has_property(o, ty)
    }

    pub fn categories(&self) -> BTreeSet<&str> {
        self.objects.iter().map(|o| o.category()).collect()
    }

    /// The only object of `category`, if exactly one exists.
    pub fn unique_of_category(&self, category: &str) -> Option<&ObjectRef> {
        let category = strip_synset(category);
        let mut it = self
            .objects
            .iter()
            .filter(|o| o.category().eq_ignore_ascii_case(category));
        let first = it.next()?;
        if it.next().is_some() {
            None
        } else {
            Some(first)
        }
    }
}

#[derive(Debug, Default)]
pub struct UniverseBuilder {
    objects: BTreeSet<ObjectRef>,
    properties: BTreeMap<ObjectRef, BTreeSet<String>>,
}

impl UniverseBuilder {
    pub fn object(mut self, o: ObjectRef, props: &[&str]) -> Self {
        self.add(o, props.iter().map(|s| s.to_string()));
        self
    }

    pub fn add<I: IntoIterator<Item = String>>(&mut self, o: ObjectRef, props: I) {
        self.objects.insert(o.clone());
        let entry = self.properties.entry(o).or_default();
        for p in props {
            entry.insert(p.to_ascii_lowercase());
        }
    }

    pub fn try_add<I: IntoIterator<Item = String>>(
        &mut self,
        o: ObjectRef,
        props: I,
    ) -> Result<(), WorldError> {
        if self.objects.contains(&o) {
            return Err(WorldError::DuplicateObject(o.to_string()));
        }
        self.add(o, props);
        Ok(())
    }

    pub fn build(self) -> Universe {
        Universe {
            objects: self.objects,
            properties: self.properties,
        }
    }
}

/// Immutable closed-world snapshot. Equality and hashing consider the fact
/// set only, so states reached along different paths deduplicate.
#[derive(Clone)]
pub struct WorldState {
    universe: Arc<Universe>,
    facts: BTreeSet<Proposition>,
}

impl WorldState {
    pub fn new(
        universe: Arc<Universe>,
        facts: impl IntoIterator<Item = Proposition>,
    ) -> Result<Self, WorldError> {
        let facts: BTreeSet<Proposition> = facts.into_iter().collect();
        for p in &facts {
            check_objects(&universe, p)?;
        }
        Ok(WorldState { universe, facts })
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn facts(&self) -> &BTreeSet<Proposition> {
        &self.facts
    }

    /// Closed-world truth, with no vocabulary checks. Unary propositions
    /// also hold when the object carries the predicate as a property tag.
    pub fn holds(&self, p: &Proposition) -> bool {
        self.facts.contains(p)
            || (p.arity() == 1 && self.universe.has_property(&p.args()[0], p.predicate()))
    }

    /// Checked truth query.
    pub fn satisfies(&self, p: &Proposition, vocab: &Vocabulary) -> Result<bool, WorldError> {
        check_objects(&self.universe, p)?;
        vocab.check(p)?;
        Ok(self.holds(p))
    }

    pub fn apply_delta(
        &self,
        add: &BTreeSet<Proposition>,
        del: &BTreeSet<Proposition>,
    ) -> Result<WorldState, WorldError> {
        if let Some(p) = add.intersection(del).next() {
            return Err(WorldError::ConflictingDelta(p.to_string()));
        }
        for p in add.iter().chain(del.iter()) {
            check_objects(&self.universe, p)?;
        }
        let mut facts = self.facts.clone();
        for p in del {
            facts.remove(p);
        }
        facts.extend(add.iter().cloned());
        Ok(WorldState {
            universe: Arc::clone(&self.universe),
            facts,
        })
    }

    /// `(added, removed)` going from `self` to `other`.
    pub fn diff(
        &self,
        other: &WorldState,
    ) -> Result<(BTreeSet<Proposition>, BTreeSet<Proposition>), WorldError> {
        if !Arc::ptr_eq(&self.universe, &other.universe) && self.universe != other.universe {
            return Err(WorldError::UniverseMismatch);
        }
        let added = other.facts.difference(&self.facts).cloned().collect();
        let removed = self.facts.difference(&other.facts).cloned().collect();
        Ok((added, removed))
    }

    /// Canonical rendering: sorted facts joined by `; `.
    pub fn canonical(&self) -> String {
        self.facts
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    }
}

fn check_objects(u: &Universe, p: &Proposition) -> Result<(), WorldError> {
    for o in p.args() {
        if !u.contains(o) {
            return Err(WorldError::UnknownObject(o.to_string()));
        }
    }
    Ok(())
}

impl PartialEq for WorldState {
    fn eq(&self, other: &Self) -> bool {
        self.facts == other.facts
    }
}

impl Eq for WorldState {}

impl Hash for WorldState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.facts.hash(state);
    }
}

impl fmt::Debug for WorldState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WorldState{{{}}}", self.canonical())
    }
}
