use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::sexpr::Sexpr;
use crate::world::{Literal, ObjectRef, Proposition, Universe, WorldState};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arg {
    /// `?name`, stored without the question mark.
    Var(String),
    Obj(ObjectRef),
    /// A constant without an id; denotes the unique object of that category.
    Const(String),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Var(v) => write!(f, "?{v}"),
            Arg::Obj(o) => write!(f, "{o}"),
            Arg::Const(c) => f.write_str(c),
        }
    }
}

impl fmt::Debug for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypedVar {
    pub name: String,
    pub ty: String,
}

impl fmt::Debug for TypedVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{} - {}", self.name, self.ty)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LitPattern {
    pub predicate: String,
    pub args: Vec<Arg>,
    pub positive: bool,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Cond {
    Lit(LitPattern),
    And(Vec<Cond>),
    Or(Vec<Cond>),
    /// Negation of a compound; `(not atom)` is a negative [`Cond::Lit`].
    Not(Box<Cond>),
    Imply(Box<Cond>, Box<Cond>),
    When(Box<Cond>, Box<Cond>),
    Forall(Vec<TypedVar>, Box<Cond>),
    Exists(Vec<TypedVar>, Box<Cond>),
}

pub type Env = Vec<(String, ObjectRef)>;

fn lookup<'a>(env: &'a Env, v: &str) -> Option<&'a ObjectRef> {
    env.iter().rev().find(|(n, _)| n == v).map(|(_, o)| o)
}

pub(crate) fn resolve_arg(a: &Arg, env: &Env, u: &Universe) -> Option<ObjectRef> {
    match a {
        Arg::Var(v) => lookup(env, v).cloned(),
        Arg::Obj(o) => Some(o.clone()),
        Arg::Const(c) => u.unique_of_category(c).cloned(),
    }
}

/// Per-branch diagnosis of a condition in a state.
#[derive(Debug, Clone, Default)]
pub struct Diagnosis {
    pub ok: bool,
    pub satisfied: usize,
    pub unsatisfied: BTreeSet<Literal>,
}

impl Diagnosis {
    fn conj(parts: Vec<Diagnosis>) -> Diagnosis {
        let mut out = Diagnosis {
            ok: true,
            ..Default::default()
        };
        for p in parts {
            out.ok &= p.ok;
            out.satisfied += p.satisfied;
            out.unsatisfied.extend(p.unsatisfied);
        }
        out
    }

    fn best(parts: Vec<Diagnosis>) -> Diagnosis {
        parts
            .into_iter()
            .max_by(|a, b| {
                a.ok.cmp(&b.ok)
                    .then(a.satisfied.cmp(&b.satisfied))
                    .then(b.unsatisfied.len().cmp(&a.unsatisfied.len()))
            })
            .unwrap_or_default()
    }
}

impl Cond {
    pub fn and(items: Vec<Cond>) -> Cond {
        Cond::And(items)
    }

    pub fn is_empty_and(&self) -> bool {
        matches!(self, Cond::And(v) if v.is_empty())
    }

    /// Top-level conjuncts, with nested `and` flattened.
    pub fn conjuncts(&self) -> Vec<&Cond> {
        match self {
            Cond::And(items) => items.iter().flat_map(|c| c.conjuncts()).collect(),
            c => vec![c],
        }
    }

    pub fn predicates(&self) -> Vec<(&str, usize)> {
        let mut out = Vec::new();
        self.visit_lits(&mut |l| out.push((l.predicate.as_str(), l.args.len())));
        out
    }

    pub fn visit_lits<'a>(&'a self, f: &mut impl FnMut(&'a LitPattern)) {
        match self {
            Cond::Lit(l) => f(l),
            Cond::And(xs) | Cond::Or(xs) => xs.iter().for_each(|x| x.visit_lits(f)),
            Cond::Not(x) | Cond::Forall(_, x) | Cond::Exists(_, x) => x.visit_lits(f),
            Cond::Imply(a, b) | Cond::When(a, b) => {
                a.visit_lits(f);
                b.visit_lits(f);
            }
        }
    }

    /// Variables used but not bound by a quantifier inside `self`.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Cond::Lit(l) => {
                for a in &l.args {
                    if let Arg::Var(v) = a {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
            }
            Cond::And(xs) | Cond::Or(xs) => xs.iter().for_each(|x| x.collect_free(bound, out)),
            Cond::Not(x) => x.collect_free(bound, out),
            Cond::Imply(a, b) | Cond::When(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Cond::Forall(vs, x) | Cond::Exists(vs, x) => {
                let n = bound.len();
                bound.extend(vs.iter().map(|v| v.name.clone()));
                x.collect_free(bound, out);
                bound.truncate(n);
            }
        }
    }

    /// Replace free variables by objects. Quantified variables are left alone.
    pub fn substitute(&self, map: &BTreeMap<String, ObjectRef>) -> Cond {
        self.subst_in(map, &mut Vec::new())
    }

    fn subst_in(&self, map: &BTreeMap<String, ObjectRef>, bound: &mut Vec<String>) -> Cond {
        match self {
            Cond::Lit(l) => Cond::Lit(LitPattern {
                predicate: l.predicate.clone(),
                positive: l.positive,
                args: l
                    .args
                    .iter()
                    .map(|a| match a {
                        Arg::Var(v) if !bound.contains(v) => {
                            map.get(v).map(|o| Arg::Obj(o.clone())).unwrap_or_else(|| a.clone())
                        }
                        _ => a.clone(),
                    })
                    .collect(),
            }),
            Cond::And(xs) => Cond::And(xs.iter().map(|x| x.subst_in(map, bound)).collect()),
            Cond::Or(xs) => Cond::Or(xs.iter().map(|x| x.subst_in(map, bound)).collect()),
            Cond::Not(x) => Cond::Not(Box::new(x.subst_in(map, bound))),
            Cond::Imply(a, b) => Cond::Imply(Box::new(a.subst_in(map, bound)), Box::new(b.subst_in(map, bound))),
            Cond::When(a, b) => Cond::When(Box::new(a.subst_in(map, bound)), Box::new(b.subst_in(map, bound))),
            Cond::Forall(vs, x) | Cond::Exists(vs, x) => {
                let n = bound.len();
                bound.extend(vs.iter().map(|v| v.name.clone()));
                let body = Box::new(x.subst_in(map, bound));
                bound.truncate(n);
                if matches!(self, Cond::Forall(..)) {
                    Cond::Forall(vs.clone(), body)
                } else {
                    Cond::Exists(vs.clone(), body)
                }
            }
        }
    }

    fn ground_lit(l: &LitPattern, state: &WorldState, env: &Env) -> Option<Proposition> {
        let args: Option<Vec<ObjectRef>> = l
            .args
            .iter()
            .map(|a| resolve_arg(a, env, state.universe()))
            .collect();
        Some(Proposition::new(&l.predicate, args?))
    }

    fn lit_truth(l: &LitPattern, state: &WorldState, env: &Env) -> bool {
        if l.predicate == "=" {
            let args: Vec<_> = l
                .args
                .iter()
                .map(|a| resolve_arg(a, env, state.universe()))
                .collect();
            let eq = args.len() == 2 && args[0].is_some() && args[0] == args[1];
            return eq == l.positive;
        }
        match Self::ground_lit(l, state, env) {
            Some(p) => state.holds(&p) == l.positive,
            None => !l.positive,
        }
    }

    /// Bindings for a typed variable list, in universe order.
    pub(crate) fn bindings(vs: &[TypedVar], u: &Universe) -> Vec<Vec<(String, ObjectRef)>> {
        let mut out = vec![Vec::new()];
        for v in vs {
            let objs: Vec<&ObjectRef> = u.objects_of_type(&v.ty).collect();
            let mut next = Vec::with_capacity(out.len() * objs.len());
            for prefix in &out {
                for o in &objs {
                    let mut b = prefix.clone();
                    b.push((v.name.clone(), (*o).clone()));
                    next.push(b);
                }
            }
            out = next;
        }
        out
    }

    fn quantified(
        vs: &[TypedVar],
        body: &Cond,
        state: &WorldState,
        env: &mut Env,
        universal: bool,
        mut f: impl FnMut(&Cond, &WorldState, &mut Env) -> bool,
    ) -> bool {
        Self::quantify_from(vs, body, state, env, universal, &mut f)
    }

    fn quantify_from(
        vs: &[TypedVar],
        body: &Cond,
        state: &WorldState,
        env: &mut Env,
        universal: bool,
        f: &mut dyn FnMut(&Cond, &WorldState, &mut Env) -> bool,
    ) -> bool {
        let Some((v, rest)) = vs.split_first() else {
            return f(body, state, env);
        };
        let universe = std::sync::Arc::clone(state.universe());
        for o in universe.objects_of_type(&v.ty) {
            env.push((v.name.clone(), o.clone()));
            let r = Self::quantify_from(rest, body, state, env, universal, f);
            env.pop();
            if r != universal {
                return !universal;
            }
        }
        universal
    }

    /// Closed-world truth. `when` reads as implication here.
    pub fn holds(&self, state: &WorldState, env: &mut Env) -> bool {
        match self {
            Cond::Lit(l) => Self::lit_truth(l, state, env),
            Cond::And(xs) => xs.iter().all(|x| x.holds(state, env)),
            Cond::Or(xs) => xs.iter().any(|x| x.holds(state, env)),
            Cond::Not(x) => !x.holds(state, env),
            Cond::Imply(a, b) | Cond::When(a, b) => !a.holds(state, env) || b.holds(state, env),
            Cond::Forall(vs, x) => Self::quantified(vs, x, state, env, true, |c, s, e| c.holds(s, e)),
            Cond::Exists(vs, x) => Self::quantified(vs, x, state, env, false, |c, s, e| c.holds(s, e)),
        }
    }

    /// Truth of `self` (or of its negation when `neg`) with every literal
    /// over a predicate in `fluents` treated as satisfiable. A `false`
    /// result means no assignment of fluent facts can satisfy the condition.
    pub fn relaxed(&self, state: &WorldState, env: &mut Env, fluents: &BTreeSet<String>, neg: bool) -> bool {
        match self {
            Cond::Lit(l) => {
                if l.predicate != "=" && fluents.contains(&l.predicate) {
                    true
                } else {
                    Self::lit_truth(l, state, env) != neg
                }
            }
            Cond::And(xs) if !neg => xs.iter().all(|x| x.relaxed(state, env, fluents, false)),
            Cond::And(xs) => xs.iter().any(|x| x.relaxed(state, env, fluents, true)),
            Cond::Or(xs) if !neg => xs.iter().any(|x| x.relaxed(state, env, fluents, false)),
            Cond::Or(xs) => xs.iter().all(|x| x.relaxed(state, env, fluents, true)),
            Cond::Not(x) => x.relaxed(state, env, fluents, !neg),
            Cond::Imply(a, b) | Cond::When(a, b) => {
                if neg {
                    a.relaxed(state, env, fluents, false) && b.relaxed(state, env, fluents, true)
                } else {
                    a.relaxed(state, env, fluents, true) || b.relaxed(state, env, fluents, false)
                }
            }
            Cond::Forall(vs, x) => {
                Self::quantified(vs, x, state, env, !neg, |c, s, e| c.relaxed(s, e, fluents, neg))
            }
            Cond::Exists(vs, x) => {
                Self::quantified(vs, x, state, env, neg, |c, s, e| c.relaxed(s, e, fluents, neg))
            }
        }
    }

    /// Satisfied/unsatisfied ground literals in negation normal form,
    /// following the most satisfied branch of each disjunction.
    pub fn diagnose(&self, state: &WorldState, env: &mut Env, neg: bool) -> Diagnosis {
        match self {
            Cond::Lit(l) => {
                let ok = Self::lit_truth(l, state, env) != neg;
                let positive = l.positive != neg;
                let prop = Self::ground_lit(l, state, env)
                    .unwrap_or_else(|| Proposition::new(&l.predicate, Vec::new()));
                let mut d = Diagnosis {
                    ok,
                    ..Default::default()
                };
                if ok {
                    d.satisfied = 1;
                } else {
                    d.unsatisfied.insert(Literal { prop, positive });
                }
                d
            }
            Cond::And(xs) | Cond::Or(xs) => {
                let parts = xs.iter().map(|x| x.diagnose(state, env, neg)).collect();
                if matches!(self, Cond::And(_)) != neg {
                    Diagnosis::conj(parts)
                } else {
                    Diagnosis::best(parts)
                }
            }
            Cond::Not(x) => x.diagnose(state, env, !neg),
            Cond::Imply(a, b) | Cond::When(a, b) => {
                let parts = vec![a.diagnose(state, env, !neg), b.diagnose(state, env, neg)];
                if neg {
                    Diagnosis::conj(parts)
                } else {
                    Diagnosis::best(parts)
                }
            }
            Cond::Forall(vs, x) | Cond::Exists(vs, x) => {
                let mut parts = Vec::new();
                for b in Self::bindings(vs, state.universe()) {
                    let n = env.len();
                    env.extend(b);
                    parts.push(x.diagnose(state, env, neg));
                    env.truncate(n);
                }
                if matches!(self, Cond::Forall(..)) != neg {
                    Diagnosis::conj(parts)
                } else {
                    Diagnosis::best(parts)
                }
            }
        }
    }

    /// Effect literals, with `when` conditions read in `state`.
    pub fn collect_effects(
        &self,
        state: &WorldState,
        env: &mut Env,
        add: &mut BTreeSet<Proposition>,
        del: &mut BTreeSet<Proposition>,
    ) {
        match self {
            Cond::Lit(l) => {
                if let Some(p) = Self::ground_lit(l, state, env) {
                    if l.positive {
                        add.insert(p);
                    } else {
                        del.insert(p);
                    }
                }
            }
            Cond::And(xs) => xs.iter().for_each(|x| x.collect_effects(state, env, add, del)),
            Cond::When(c, e) => {
                if c.holds(state, env) {
                    e.collect_effects(state, env, add, del);
                }
            }
            Cond::Forall(vs, x) => {
                for b in Self::bindings(vs, state.universe()) {
                    let n = env.len();
                    env.extend(b);
                    x.collect_effects(state, env, add, del);
                    env.truncate(n);
                }
            }
            // rejected for effects at load time
            Cond::Or(_) | Cond::Not(_) | Cond::Imply(..) | Cond::Exists(..) => {}
        }
    }

    /// Constructs not allowed in an effect, by name.
    pub fn effect_violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        match self {
            Cond::Lit(_) => {}
            Cond::And(xs) => xs.iter().for_each(|x| out.extend(x.effect_violations())),
            Cond::When(_, e) => out.extend(e.effect_violations()),
            Cond::Forall(_, x) => out.extend(x.effect_violations()),
            Cond::Or(_) => out.push("or"),
            Cond::Not(_) => out.push("not over a compound"),
            Cond::Imply(..) => out.push("imply"),
            Cond::Exists(..) => out.push("exists"),
        }
        out
    }

    /// Depth of `when` nested inside `when` consequences.
    pub fn when_nesting(&self) -> usize {
        match self {
            Cond::When(_, e) => 1 + e.when_nesting(),
            Cond::Lit(_) => 0,
            Cond::And(xs) | Cond::Or(xs) => xs.iter().map(Cond::when_nesting).max().unwrap_or(0),
            Cond::Not(x) | Cond::Forall(_, x) | Cond::Exists(_, x) => x.when_nesting(),
            Cond::Imply(_, b) => b.when_nesting(),
        }
    }
}

impl fmt::Display for LitPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("(not ")?;
        }
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")?;
        if !self.positive {
            f.write_str(")")?;
        }
        Ok(())
    }
}

fn write_vars(f: &mut fmt::Formatter<'_>, vs: &[TypedVar]) -> fmt::Result {
    f.write_str("(")?;
    for (i, v) in vs.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "?{} - {}", v.name, v.ty)?;
    }
    f.write_str(")")
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, head: &str, xs: &[Cond]| {
            write!(f, "({head}")?;
            for x in xs {
                write!(f, " {x}")?;
            }
            f.write_str(")")
        };
        match self {
            Cond::Lit(l) => write!(f, "{l}"),
            Cond::And(xs) => list(f, "and", xs),
            Cond::Or(xs) => list(f, "or", xs),
            Cond::Not(x) => write!(f, "(not {x})"),
            Cond::Imply(a, b) => write!(f, "(imply {a} {b})"),
            Cond::When(a, b) => write!(f, "(when {a} {b})"),
            Cond::Forall(vs, x) => {
                f.write_str("(forall ")?;
                write_vars(f, vs)?;
                write!(f, " {x})")
            }
            Cond::Exists(vs, x) => {
                f.write_str("(exists ")?;
                write_vars(f, vs)?;
                write!(f, " {x})")
            }
        }
    }
}

impl fmt::Debug for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `?a ?b - t ?c` style lists; untyped variables get type `object`.
pub fn parse_typed_vars(items: &[Sexpr]) -> Result<Vec<TypedVar>, (usize, String)> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let tok = items[i]
            .atom()
            .ok_or((items[i].offset(), "expected a variable".to_string()))?;
        if tok == "-" {
            let ty = items
                .get(i + 1)
                .and_then(Sexpr::atom)
                .ok_or((items[i].offset(), "expected a type after `-`".to_string()))?;
            if pending.is_empty() {
                return Err((items[i].offset(), "type without variables".into()));
            }
            for v in pending.drain(..) {
                out.push(TypedVar {
                    name: v,
                    ty: ty.to_ascii_lowercase(),
                });
            }
            i += 2;
            continue;
        }
        let name = tok
            .strip_prefix('?')
            .ok_or((items[i].offset(), format!("expected `?var`, found `{tok}`")))?;
        pending.push(name.to_ascii_lowercase());
        i += 1;
    }
    for v in pending {
        out.push(TypedVar {
            name: v,
            ty: "object".into(),
        });
    }
    Ok(out)
}

pub fn parse_arg(tok: &str) -> Arg {
    if let Some(v) = tok.strip_prefix('?') {
        return Arg::Var(v.to_ascii_lowercase());
    }
    match ObjectRef::parse_lenient(tok) {
        Ok(o) => Arg::Obj(o),
        Err(_) => Arg::Const(tok.to_ascii_lowercase()),
    }
}

/// Parse a PDDL condition or effect expression.
pub fn parse_cond(e: &Sexpr) -> Result<Cond, (usize, String)> {
    let items = e
        .list()
        .ok_or((e.offset(), format!("expected a condition, found `{e}`")))?;
    let Some(head) = e.head() else {
        if items.is_empty() {
            return Ok(Cond::And(Vec::new()));
        }
        return Err((e.offset(), "expected an operator".into()));
    };
    let args = &items[1..];
    let arity = |n: usize| -> Result<(), (usize, String)> {
        if args.len() == n {
            Ok(())
        } else {
            Err((e.offset(), format!("`{head}` takes {n} operand(s), got {}", args.len())))
        }
    };
    Ok(match head.as_str() {
        "and" => Cond::And(args.iter().map(parse_cond).collect::<Result<_, _>>()?),
        "or" => Cond::Or(args.iter().map(parse_cond).collect::<Result<_, _>>()?),
        "not" => {
            arity(1)?;
            match parse_cond(&args[0])? {
                Cond::Lit(mut l) => {
                    l.positive = !l.positive;
                    Cond::Lit(l)
                }
                c => Cond::Not(Box::new(c)),
            }
        }
        "imply" | "when" => {
            arity(2)?;
            let a = Box::new(parse_cond(&args[0])?);
            let b = Box::new(parse_cond(&args[1])?);
            if head == "imply" {
                Cond::Imply(a, b)
            } else {
                Cond::When(a, b)
            }
        }
        "forall" | "exists" => {
            arity(2)?;
            let vars = args[0]
                .list()
                .ok_or((args[0].offset(), "expected a variable list".to_string()))?;
            let vars = parse_typed_vars(vars)?;
            let body = Box::new(parse_cond(&args[1])?);
            if head == "forall" {
                Cond::Forall(vars, body)
            } else {
                Cond::Exists(vars, body)
            }
        }
        _ => {
            let mut lits = Vec::with_capacity(args.len());
            for a in args {
                let tok = a
                    .atom()
                    .ok_or((a.offset(), format!("nested expression inside `{head}`")))?;
                lits.push(parse_arg(tok));
            }
            Cond::Lit(LitPattern {
                predicate: head,
                args: lits,
                positive: true,
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::sexpr::parse_all;

    fn cond(text: &str) -> Cond {
        parse_cond(&parse_all(text).unwrap()[0]).unwrap()
    }

    fn state(facts: &[&str]) -> WorldState {
        let u = Universe::builder()
            .object("a.1".parse().unwrap(), &["box"])
            .object("b.1".parse().unwrap(), &[])
            .build();
        WorldState::new(Arc::new(u), facts.iter().map(|f| f.parse().unwrap())).unwrap()
    }

    #[test]
    fn parse_and_render() {
        let c = cond("(and (p ?x) (not (q ?x ?y)) (forall (?z - box) (when (r ?z) (s ?z))))");
        assert_eq!(
            c.to_string(),
            "(and (p ?x) (not (q ?x ?y)) (forall (?z - box) (when (r ?z) (s ?z))))"
        );
        assert_eq!(c.free_vars(), ["x".to_string(), "y".to_string()].into());
        assert!(matches!(cond("(not (and (p ?x)))"), Cond::Not(_)));
    }

    #[test]
    fn closed_world_holds() {
        let s = state(&["p(a.1)"]);
        let mut env = Vec::new();
        assert!(cond("(p a.1)").holds(&s, &mut env));
        assert!(cond("(not (p b.1))").holds(&s, &mut env));
        assert!(cond("(forall (?x - box) (p ?x))").holds(&s, &mut env));
        assert!(!cond("(forall (?x) (p ?x))").holds(&s, &mut env));
        assert!(cond("(exists (?x) (and (p ?x) (box ?x)))").holds(&s, &mut env));
        assert!(cond("(imply (p b.1) (q b.1))").holds(&s, &mut env));
    }

    #[test]
    fn relaxation_only_checks_statics() {
        let s = state(&[]);
        let fluents: BTreeSet<String> = ["p".to_string()].into();
        let mut env = Vec::new();
        assert!(cond("(and (p a.1) (box a.1))").relaxed(&s, &mut env, &fluents, false));
        assert!(!cond("(and (p b.1) (box b.1))").relaxed(&s, &mut env, &fluents, false));
        assert!(cond("(not (and (p b.1) (box b.1)))").relaxed(&s, &mut env, &fluents, false));
    }

    #[test]
    fn diagnosis_picks_best_branch() {
        let s = state(&["p(a.1)"]);
        let c = cond("(or (and (p a.1) (q a.1)) (and (r a.1) (s a.1) (t a.1)))");
        let d = c.diagnose(&s, &mut Vec::new(), false);
        assert!(!d.ok);
        let unsat: Vec<String> = d.unsatisfied.iter().map(|l| l.to_string()).collect();
        assert_eq!(unsat, vec!["q(a.1)"]);
        let d = cond("(not (p a.1))").diagnose(&s, &mut Vec::new(), false);
        assert_eq!(d.unsatisfied.iter().next().unwrap().to_string(), "not p(a.1)");
    }

    #[test]
    fn effects_read_pre_state() {
        let s = state(&["p(a.1)"]);
        let e = cond("(and (q a.1) (not (p a.1)) (forall (?x) (when (p ?x) (r ?x))))");
        let (mut add, mut del) = (BTreeSet::new(), BTreeSet::new());
        e.collect_effects(&s, &mut Vec::new(), &mut add, &mut del);
        let add: Vec<String> = add.iter().map(|p| p.to_string()).collect();
        assert_eq!(add, vec!["q(a.1)", "r(a.1)"]);
        assert_eq!(del.len(), 1);
        assert!(cond("(or (p ?x))").effect_violations().contains(&"or"));
    }
}
