use std::collections::{BTreeMap, BTreeSet};

use serde_json::Value;

use super::{ActionGoal, ActionPattern, GoalError, GoalExpr, GoalSpec};
use crate::domain::{parse_arg, parse_typed_vars, Arg, TypedVar};
use crate::ltl::{self, AtomKind, Formula, Term};
use crate::sexpr::{parse_all, Sexpr};
use crate::world::{strip_synset, Literal, ObjectRef, Proposition, Universe, Vocabulary};

/// Relation names of goal records that the built-in domains spell
/// differently, by arity.
const RELATION_ALIASES: [(&str, usize, &str); 2] = [("on", 2, "ontop"), ("close", 2, "next_to")];

fn normalize_predicate(name: &str, arity: usize, vocab: &Vocabulary) -> Option<String> {
    let name = name.to_ascii_lowercase();
    if vocab.predicates().next().is_none() || vocab.predicate_arity(&name) == Some(arity) {
        return Some(name);
    }
    RELATION_ALIASES
        .iter()
        .find(|(from, n, to)| *from == name && *n == arity && vocab.predicate_arity(to) == Some(arity))
        .map(|(_, _, to)| to.to_string())
}

/// A predicted goal after linting.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictedGoal {
    pub literals: Vec<Literal>,
    pub actions: Vec<ActionGoal>,
    /// Items naming unknown predicates, actions or objects.
    pub hallucinated: Vec<String>,
    /// Items that could not be parsed.
    pub unparsed: Vec<String>,
}

impl PredictedGoal {
    /// As a goal, for scoring downstream modules against it.
    pub fn to_spec(&self) -> GoalSpec {
        GoalSpec::from_literals(&self.literals, self.actions.clone())
    }
}

/// Lint and normalize predicted goal items. Literal strings take the form
/// `pred(a.1, b.2)` or `not pred(a.1)`; action strings are action names,
/// optionally with alternatives (`LOOKAT|WATCH`) or arguments.
pub fn parse_predicted<S: AsRef<str>>(
    literals: &[S],
    actions: &[S],
    vocab: &Vocabulary,
    u: &Universe,
) -> PredictedGoal {
    let mut out = PredictedGoal::default();
    let mut seen = BTreeSet::new();
    let mut action_items: Vec<&str> = actions.iter().map(|s| s.as_ref()).collect();
    for item in literals.iter().map(|s| s.as_ref()) {
        let head = item.trim().split(['(', '|']).next().unwrap_or("").trim();
        if vocab.is_action(head) && !vocab.is_predicate(head) {
            action_items.push(item);
            continue;
        }
        let lit: Literal = match item.parse() {
            Ok(l) => l,
            Err(_) => {
                out.unparsed.push(item.to_string());
                continue;
            }
        };
        let Some(name) = normalize_predicate(lit.prop.predicate(), lit.prop.arity(), vocab) else {
            out.hallucinated.push(item.to_string());
            continue;
        };
        if lit.prop.args().iter().any(|o| !u.contains(o)) {
            out.hallucinated.push(item.to_string());
            continue;
        }
        let lit = Literal {
            prop: Proposition::new(&name, lit.prop.args().to_vec()),
            positive: lit.positive,
        };
        if seen.insert(lit.clone()) {
            out.literals.push(lit);
        }
    }
    for item in action_items {
        match item.parse::<ActionGoal>() {
            Ok(g) => {
                let known = vocab.actions().next().is_none()
                    || g.alternatives.iter().all(|p| vocab.is_action(&p.name));
                let objects_ok = g
                    .alternatives
                    .iter()
                    .all(|p| p.args.as_ref().is_none_or(|xs| xs.iter().all(|o| u.contains(o))));
                if known && objects_ok {
                    out.actions.push(g);
                } else {
                    out.hallucinated.push(item.to_string());
                }
            }
            Err(_) => out.unparsed.push(item.to_string()),
        }
    }
    out
}

/// The object with numeric id `id`, if exactly one exists.
pub fn resolve_vh_id(u: &Universe, id: u32) -> Option<ObjectRef> {
    let mut it = u.objects().filter(|o| o.id() == id);
    match (it.next(), it.next()) {
        (Some(o), None) => Some(o.clone()),
        _ => None,
    }
}

fn vh_relation(name: &str) -> String {
    let lower = name.to_ascii_lowercase();
    RELATION_ALIASES
        .iter()
        .find(|(from, _, _)| *from == lower)
        .map(|(_, _, to)| to.to_string())
        .unwrap_or(lower)
}

fn field_u32(v: &Value, key: &str) -> Result<u32, GoalError> {
    v.get(key)
        .and_then(Value::as_u64)
        .and_then(|n| u32::try_from(n).ok())
        .ok_or_else(|| GoalError::Parse(format!("missing numeric `{key}` in {v}")))
}

fn field_str<'a>(v: &'a Value, key: &str) -> Result<&'a str, GoalError> {
    v.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| GoalError::Parse(format!("missing `{key}` in {v}")))
}

/// Goal record with node goals (`id`, `class_name`, `state`), edge goals
/// (`from_id`, `relation_type`, `to_id`) and action goals. Edge ids resolve
/// against `u`.
pub fn from_vh_record(record: &Value, u: &Universe) -> Result<GoalSpec, GoalError> {
    from_vh_record_with_aliases(record, u, &BTreeMap::new())
}

/// [`from_vh_record`] where `aliases` names the object for an id ahead of
/// the lookup in `u`.
pub fn from_vh_record_with_aliases(
    record: &Value,
    u: &Universe,
    aliases: &BTreeMap<u32, ObjectRef>,
) -> Result<GoalSpec, GoalError> {
    let resolve = |id: u32| aliases.get(&id).cloned().or_else(|| resolve_vh_id(u, id));
    let mut conj = Vec::new();
    let goals = record
        .get("goal")
        .and_then(Value::as_array)
        .map(Vec::as_slice)
        .unwrap_or(&[]);
    for g in goals {
        if g.get("state").is_some() {
            let id = field_u32(g, "id")?;
            let class = field_str(g, "class_name")?;
            let o = ObjectRef::new(class, id).map_err(|e| GoalError::Parse(e.to_string()))?;
            let state = field_str(g, "state")?.to_ascii_lowercase();
            conj.push(GoalExpr::Lit {
                predicate: state,
                args: vec![Arg::Obj(o)],
                positive: true,
            });
        } else {
            let from = field_u32(g, "from_id")?;
            let to = field_u32(g, "to_id")?;
            let rel = vh_relation(field_str(g, "relation_type")?);
            let a = resolve(from).ok_or(GoalError::UnresolvedId(from))?;
            let b = resolve(to).ok_or(GoalError::UnresolvedId(to))?;
            conj.push(GoalExpr::Lit {
                predicate: rel,
                args: vec![Arg::Obj(a), Arg::Obj(b)],
                positive: true,
            });
        }
    }
    let actions = record
        .get("actions")
        .and_then(Value::as_array)
        .map(Vec::as_slice)
        .unwrap_or(&[])
        .iter()
        .map(|a| {
            a.as_str()
                .ok_or_else(|| GoalError::Parse(format!("action goal {a} is not a string")))?
                .parse()
        })
        .collect::<Result<Vec<ActionGoal>, _>>()?;
    Ok(GoalSpec {
        condition: GoalExpr::And(conj),
        actions,
    })
}

/// A BDDL-style problem: objects with their categories, initial facts and
/// the goal.
#[derive(Debug, Clone)]
pub struct BddlProblem {
    pub name: String,
    pub objects: Vec<(ObjectRef, String)>,
    pub init: Vec<Literal>,
    pub goal: GoalSpec,
}

fn perr(msg: impl Into<String>) -> GoalError {
    GoalError::Parse(msg.into())
}

fn bddl_object(tok: &str) -> Result<ObjectRef, GoalError> {
    ObjectRef::parse_lenient(tok).map_err(|e| perr(e.to_string()))
}

fn bddl_literal(e: &Sexpr) -> Result<Literal, GoalError> {
    let items = e.list().ok_or_else(|| perr(format!("expected a fact, got `{e}`")))?;
    if e.head().as_deref() == Some("not") {
        let inner = items.get(1).ok_or_else(|| perr("empty `not`"))?;
        let l = bddl_literal(inner)?;
        return Ok(Literal::neg(l.prop));
    }
    let name = items
        .first()
        .and_then(Sexpr::atom)
        .ok_or_else(|| perr(format!("expected a predicate in `{e}`")))?;
    let args = items[1..]
        .iter()
        .map(|a| a.atom().ok_or_else(|| perr(format!("nested argument in `{e}`"))).and_then(bddl_object))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Literal::pos(Proposition::new(name, args)))
}

fn one_var(e: &Sexpr) -> Result<TypedVar, GoalError> {
    let list = e.list().ok_or_else(|| perr(format!("expected `(?v - type)`, got `{e}`")))?;
    let vs = parse_typed_vars(list).map_err(|(_, m)| perr(m))?;
    match vs.as_slice() {
        [v] => Ok(v.clone()),
        _ => Err(perr(format!("expected one variable in `{e}`"))),
    }
}

fn bddl_cond(e: &Sexpr) -> Result<GoalExpr, GoalError> {
    let items = e.list().ok_or_else(|| perr(format!("expected a condition, got `{e}`")))?;
    let arg = |i: usize| items.get(i).ok_or_else(|| perr(format!("incomplete `{e}`")));
    let head = e.head().unwrap_or_default();
    Ok(match head.as_str() {
        "and" | "or" => {
            let xs = items[1..].iter().map(bddl_cond).collect::<Result<Vec<_>, _>>()?;
            if head == "and" {
                GoalExpr::And(xs)
            } else {
                GoalExpr::Or(xs)
            }
        }
        "not" => match bddl_cond(arg(1)?)? {
            GoalExpr::Lit { predicate, args, positive } => GoalExpr::Lit {
                predicate,
                args,
                positive: !positive,
            },
            x => GoalExpr::Not(Box::new(x)),
        },
        "imply" => GoalExpr::Or(vec![GoalExpr::Not(Box::new(bddl_cond(arg(1)?)?)), bddl_cond(arg(2)?)?]),
        "forall" | "exists" => {
            let v = one_var(arg(1)?)?;
            let body = Box::new(bddl_cond(arg(2)?)?);
            if head == "forall" {
                GoalExpr::Forall(v, body)
            } else {
                GoalExpr::Exists(v, body)
            }
        }
        "forn" => {
            let n = arg(1)?
                .list()
                .and_then(|l| l.first())
                .and_then(Sexpr::atom)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| perr(format!("expected `(n)` in `{e}`")))?;
            GoalExpr::ForN {
                n,
                var: one_var(arg(2)?)?,
                exact: false,
                body: Box::new(bddl_cond(arg(3)?)?),
            }
        }
        "forpairs" => GoalExpr::ForPairs(one_var(arg(1)?)?, one_var(arg(2)?)?, Box::new(bddl_cond(arg(3)?)?)),
        "fornpairs" => return Err(GoalError::Unsupported("fornpairs".into())),
        _ => {
            let name = items
                .first()
                .and_then(Sexpr::atom)
                .ok_or_else(|| perr(format!("expected a predicate in `{e}`")))?;
            let args = items[1..]
                .iter()
                .map(|a| {
                    a.atom()
                        .map(|t| match parse_arg(t) {
                            Arg::Var(v) => Arg::Var(v),
                            other => bddl_object(t).map(Arg::Obj).unwrap_or(other),
                        })
                        .ok_or_else(|| perr(format!("nested argument in `{e}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            GoalExpr::Lit {
                predicate: name.to_ascii_lowercase(),
                args,
                positive: true,
            }
        }
    })
}

/// Parse `(define (problem ...) (:objects ...) (:init ...) (:goal ...))`.
pub fn parse_bddl_problem(text: &str) -> Result<BddlProblem, GoalError> {
    let top = parse_all(text).map_err(|e| perr(e.to_string()))?;
    let def = top
        .iter()
        .find(|e| e.head().as_deref() == Some("define"))
        .ok_or_else(|| perr("expected `(define (problem ...) ...)`"))?;
    let mut p = BddlProblem {
        name: String::new(),
        objects: Vec::new(),
        init: Vec::new(),
        goal: GoalSpec::default(),
    };
    for sec in &def.list().unwrap()[1..] {
        let items = sec.list().unwrap_or(&[]);
        match sec.head().as_deref() {
            Some("problem") => p.name = items.get(1).and_then(Sexpr::atom).unwrap_or("").to_string(),
            Some(":objects") => {
                let mut pending = Vec::new();
                let mut it = items[1..].iter();
                while let Some(x) = it.next() {
                    let tok = x.atom().ok_or_else(|| perr("nested token in :objects"))?;
                    if tok == "-" {
                        let ty = it.next().and_then(Sexpr::atom).ok_or_else(|| perr("missing type in :objects"))?;
                        for o in pending.drain(..) {
                            p.objects.push((o, strip_synset(ty).to_string()));
                        }
                    } else {
                        pending.push(bddl_object(tok)?);
                    }
                }
                for o in pending {
                    let cat = o.category().to_string();
                    p.objects.push((o, cat));
                }
            }
            Some(":init") => {
                for f in &items[1..] {
                    p.init.push(bddl_literal(f)?);
                }
            }
            Some(":goal") => {
                let g = items.get(1).ok_or_else(|| perr("empty :goal"))?;
                p.goal.condition = bddl_cond(g)?;
            }
            _ => {}
        }
    }
    Ok(p)
}

/// A goal condition in BDDL syntax, either bare or inside a problem.
pub fn from_bddl(text: &str) -> Result<GoalSpec, GoalError> {
    let top = parse_all(text).map_err(|e| perr(e.to_string()))?;
    match top.as_slice() {
        [e] if e.head().as_deref() == Some("define") => Ok(parse_bddl_problem(text)?.goal),
        [e] if e.head().as_deref() == Some(":goal") => Ok(GoalSpec {
            condition: bddl_cond(e.list().unwrap().get(1).ok_or_else(|| perr("empty :goal"))?)?,
            actions: Vec::new(),
        }),
        [e] => Ok(GoalSpec {
            condition: bddl_cond(e)?,
            actions: Vec::new(),
        }),
        _ => Err(perr("expected a single goal expression")),
    }
}

fn action_pattern(f: &Formula, bound: Option<&str>) -> Option<ActionPattern> {
    let Formula::Atom(a) = f else { return None };
    if a.kind != AtomKind::Action {
        return None;
    }
    let mut objs = Vec::new();
    for t in &a.args {
        match t {
            Term::Obj(o) => objs.push(o.clone()),
            Term::Name(n) if Some(n.as_str()) == bound => {
                return Some(ActionPattern {
                    name: a.name.clone(),
                    args: None,
                })
            }
            Term::Name(_) => return None,
        }
    }
    Some(ActionPattern {
        name: a.name.clone(),
        args: Some(objs),
    })
}

fn action_segment(f: &Formula, bound: Option<&str>) -> Option<ActionGoal> {
    match f {
        Formula::Atom(_) => action_pattern(f, bound).map(|p| ActionGoal { alternatives: vec![p] }),
        Formula::Or(xs) => Some(ActionGoal {
            alternatives: xs
                .iter()
                .map(|x| action_segment(x, bound).map(|g| g.alternatives))
                .collect::<Option<Vec<_>>>()?
                .concat(),
        }),
        Formula::Exists(v, body) if bound.is_none() => action_segment(body, Some(v)),
        _ => None,
    }
}

fn state_expr(f: &Formula) -> Result<GoalExpr, GoalError> {
    let obj = |v: &str| TypedVar {
        name: v.to_string(),
        ty: "object".into(),
    };
    Ok(match f {
        Formula::Atom(a) if a.kind == AtomKind::Action => {
            return Err(GoalError::Unsupported(format!("action `{a}` inside a state condition")))
        }
        Formula::Atom(a) => GoalExpr::Lit {
            predicate: a.name.clone(),
            args: a
                .args
                .iter()
                .map(|t| match t {
                    Term::Obj(o) => Arg::Obj(o.clone()),
                    Term::Name(n) => Arg::Var(n.clone()),
                })
                .collect(),
            positive: true,
        },
        Formula::Not(x) => match state_expr(x)? {
            GoalExpr::Lit { predicate, args, positive } => GoalExpr::Lit {
                predicate,
                args,
                positive: !positive,
            },
            g => GoalExpr::Not(Box::new(g)),
        },
        Formula::And(xs) => GoalExpr::And(xs.iter().map(state_expr).collect::<Result<_, _>>()?),
        Formula::Or(xs) => GoalExpr::Or(xs.iter().map(state_expr).collect::<Result<_, _>>()?),
        Formula::Implies(a, b) => GoalExpr::Or(vec![GoalExpr::Not(Box::new(state_expr(a)?)), state_expr(b)?]),
        Formula::Forall(v, x) => GoalExpr::Forall(obj(v), Box::new(state_expr(x)?)),
        Formula::Exists(v, x) => GoalExpr::Exists(obj(v), Box::new(state_expr(x)?)),
        Formula::ForN(v, n, x) => GoalExpr::ForN {
            n: *n,
            var: obj(v),
            exact: true,
            body: Box::new(state_expr(x)?),
        },
        Formula::Then(_) => return Err(GoalError::Unsupported("nested `then` in a goal".into())),
    })
}

/// A goal in the LTL dialect, of the form `a_1 then ... then a_k then
/// condition`, where each `a_i` is an action (or a disjunction of actions,
/// optionally under one `exists`).
pub fn from_ltl(text: &str, vocab: &Vocabulary, u: &Universe) -> Result<GoalSpec, GoalError> {
    let f = ltl::parse(text).map_err(|e| perr(e.to_string()))?;
    let f = ltl::resolve(&f, vocab, u).map_err(|e| perr(e.to_string()))?;
    let segs = f.segments();
    let mut actions = Vec::new();
    let mut condition = GoalExpr::truth();
    for (i, s) in segs.iter().enumerate() {
        if let Some(g) = action_segment(s, None) {
            actions.push(g);
        } else if i + 1 == segs.len() {
            condition = state_expr(s)?;
        } else {
            return Err(GoalError::Unsupported(format!("state segment `{s}` before the final one")));
        }
    }
    Ok(GoalSpec { condition, actions })
}
