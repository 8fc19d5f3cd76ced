//! Goal specifications, grounding into goal options, satisfaction checks
//! and goal-interpretation scoring.

mod ingest;
mod score;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use ingest::{
    from_bddl, from_ltl, from_vh_record, from_vh_record_with_aliases, parse_bddl_problem, parse_predicted, resolve_vh_id, BddlProblem,
    PredictedGoal,
};
pub use score::{interpret_f1, F1Report, Prf};

use crate::domain::{Arg, TypedVar};
use crate::executor::{render_list, UnsatisfiedGoals};
use crate::ltl::Trajectory;
use crate::world::{GroundAction, Literal, ObjectRef, Proposition, Universe, WorldState};

pub const DEFAULT_OPTION_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GoalError {
    #[error("goal parse error: {0}")]
    Parse(String),
    #[error("unsupported goal form: {0}")]
    Unsupported(String),
    #[error("unresolved object id {0}")]
    UnresolvedId(u32),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
}

/// Quantified goal condition.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum GoalExpr {
    Lit { predicate: String, args: Vec<Arg>, positive: bool },
    And(Vec<GoalExpr>),
    Or(Vec<GoalExpr>),
    Not(Box<GoalExpr>),
    Forall(TypedVar, Box<GoalExpr>),
    Exists(TypedVar, Box<GoalExpr>),
    /// `exact` demands that no further object satisfy the body; otherwise
    /// any `n` objects suffice.
    ForN { n: usize, var: TypedVar, exact: bool, body: Box<GoalExpr> },
    ForPairs(TypedVar, TypedVar, Box<GoalExpr>),
}

impl GoalExpr {
    pub fn lit(l: &Literal) -> GoalExpr {
        GoalExpr::Lit {
            predicate: l.prop.predicate().to_string(),
            args: l.prop.args().iter().cloned().map(Arg::Obj).collect(),
            positive: l.positive,
        }
    }

    pub fn truth() -> GoalExpr {
        GoalExpr::And(Vec::new())
    }

    /// Categories named by quantifier types.
    pub fn quantified_types(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |e| match e {
            GoalExpr::Forall(v, _) | GoalExpr::Exists(v, _) | GoalExpr::ForN { var: v, .. } => out.push(v.ty.as_str()),
            GoalExpr::ForPairs(a, b, _) => {
                out.push(a.ty.as_str());
                out.push(b.ty.as_str());
            }
            _ => {}
        });
        out
    }

    fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a GoalExpr)) {
        f(self);
        match self {
            GoalExpr::Lit { .. } => {}
            GoalExpr::And(xs) | GoalExpr::Or(xs) => xs.iter().for_each(|x| x.visit(f)),
            GoalExpr::Not(x)
            | GoalExpr::Forall(_, x)
            | GoalExpr::Exists(_, x)
            | GoalExpr::ForN { body: x, .. }
            | GoalExpr::ForPairs(_, _, x) => x.visit(f),
        }
    }
}

impl fmt::Display for GoalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = |v: &TypedVar| format!("(?{} - {})", v.name, v.ty);
        match self {
            GoalExpr::Lit { predicate, args, positive } => {
                if !positive {
                    f.write_str("(not ")?;
                }
                write!(f, "({predicate}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")?;
                if !positive {
                    f.write_str(")")?;
                }
                Ok(())
            }
            GoalExpr::And(xs) | GoalExpr::Or(xs) => {
                f.write_str(if matches!(self, GoalExpr::And(_)) { "(and" } else { "(or" })?;
                for x in xs {
                    write!(f, " {x}")?;
                }
                f.write_str(")")
            }
            GoalExpr::Not(x) => write!(f, "(not {x})"),
            GoalExpr::Forall(v, x) => write!(f, "(forall {} {x})", var(v)),
            GoalExpr::Exists(v, x) => write!(f, "(exists {} {x})", var(v)),
            GoalExpr::ForN { n, var: v, exact, body } => {
                let kw = if *exact { "forn-exactly" } else { "forn" };
                write!(f, "({kw} ({n}) {} {body})", var(v))
            }
            GoalExpr::ForPairs(a, b, x) => write!(f, "(forpairs {} {} {x})", var(a), var(b)),
        }
    }
}

impl fmt::Debug for GoalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One acceptable action; `args: None` matches any arguments.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionPattern {
    pub name: String,
    pub args: Option<Vec<ObjectRef>>,
}

impl ActionPattern {
    pub fn matches(&self, a: &GroundAction) -> bool {
        self.name.eq_ignore_ascii_case(a.name()) && self.args.as_ref().is_none_or(|xs| xs.as_slice() == a.args())
    }
}

impl fmt::Display for ActionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(args) = &self.args {
            f.write_str(&render_list(args).replace('[', "(").replace(']', ")"))?;
        }
        Ok(())
    }
}

/// A required action, written `LOOKAT|WATCH` when alternatives are allowed.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionGoal {
    pub alternatives: Vec<ActionPattern>,
}

impl ActionGoal {
    pub fn matches(&self, a: &GroundAction) -> bool {
        self.alternatives.iter().any(|p| p.matches(a))
    }
}

impl fmt::Display for ActionGoal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.alternatives.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join("|"))
    }
}

impl fmt::Debug for ActionGoal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ActionGoal {
    type Err = GoalError;

    fn from_str(s: &str) -> Result<Self, GoalError> {
        let mut alternatives = Vec::new();
        for part in s.split('|') {
            let raw = crate::executor::parse_raw_action(part).map_err(GoalError::Parse)?;
            let args = if part.contains('(') || part.contains('<') {
                Some(
                    raw.args
                        .iter()
                        .map(|a| ObjectRef::parse_lenient(a).map_err(|e| GoalError::Parse(e.to_string())))
                        .collect::<Result<Vec<_>, _>>()?,
                )
            } else {
                None
            };
            alternatives.push(ActionPattern { name: raw.name, args });
        }
        Ok(ActionGoal { alternatives })
    }
}

/// A goal: a final-state condition plus an ordered list of required
/// actions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GoalSpec {
    pub condition: GoalExpr,
    pub actions: Vec<ActionGoal>,
}

impl Default for GoalSpec {
    fn default() -> Self {
        GoalSpec {
            condition: GoalExpr::truth(),
            actions: Vec::new(),
        }
    }
}

impl GoalSpec {
    pub fn from_literals<'a>(lits: impl IntoIterator<Item = &'a Literal>, actions: Vec<ActionGoal>) -> GoalSpec {
        GoalSpec {
            condition: GoalExpr::And(lits.into_iter().map(GoalExpr::lit).collect()),
            actions,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty() && matches!(&self.condition, GoalExpr::And(xs) if xs.is_empty())
    }

    /// Quantified categories without any instance in `u`.
    pub fn empty_categories(&self, u: &Universe) -> Vec<String> {
        let mut out: Vec<String> = self
            .condition
            .quantified_types()
            .into_iter()
            .filter(|ty| u.objects_of_type(ty).next().is_none())
            .map(str::to_string)
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for GoalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.actions.is_empty() {
            let acts: Vec<String> = self.actions.iter().map(|a| a.to_string()).collect();
            write!(f, "actions {} then ", acts.join(", "))?;
        }
        write!(f, "{}", self.condition)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GoalCategory {
    State,
    Relation,
    Action,
}

impl GoalCategory {
    pub fn of(l: &Literal) -> GoalCategory {
        if l.prop.arity() <= 1 {
            GoalCategory::State
        } else {
            GoalCategory::Relation
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GoalCategory::State => "state",
            GoalCategory::Relation => "relation",
            GoalCategory::Action => "action",
        }
    }

    pub const ALL: [GoalCategory; 3] = [GoalCategory::State, GoalCategory::Relation, GoalCategory::Action];
}

impl fmt::Display for GoalCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ground propositional goal in negation normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ground {
    Lit(Literal),
    And(Vec<Ground>),
    Or(Vec<Ground>),
}

impl Ground {
    pub fn negate(self) -> Ground {
        match self {
            Ground::Lit(l) => Ground::Lit(Literal {
                prop: l.prop,
                positive: !l.positive,
            }),
            Ground::And(xs) => Ground::Or(xs.into_iter().map(Ground::negate).collect()),
            Ground::Or(xs) => Ground::And(xs.into_iter().map(Ground::negate).collect()),
        }
    }

    pub fn holds(&self, s: &WorldState) -> bool {
        match self {
            Ground::Lit(l) => l.holds_in(s),
            Ground::And(xs) => xs.iter().all(|x| x.holds(s)),
            Ground::Or(xs) => xs.iter().any(|x| x.holds(s)),
        }
    }
}

type Env = Vec<(String, ObjectRef)>;

fn ground_arg(a: &Arg, env: &Env, u: &Universe) -> Result<ObjectRef, GoalError> {
    match a {
        Arg::Var(v) => env
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, o)| o.clone())
            // BDDL writes constants as `?fridge.n.01_1`
            .or_else(|| ObjectRef::parse_lenient(v).ok().filter(|o| u.contains(o)))
            .ok_or_else(|| GoalError::Parse(format!("free variable ?{v}"))),
        Arg::Obj(o) => Ok(o.clone()),
        Arg::Const(c) => u
            .unique_of_category(c)
            .cloned()
            .ok_or_else(|| GoalError::UnknownObject(c.clone())),
    }
}

fn instances(u: &Universe, ty: &str) -> Vec<ObjectRef> {
    u.objects_of_type(ty).cloned().collect()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Injective maps from `0..n` into `0..m` (n ≤ m), as image vectors.
fn injections(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, m: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for j in 0..m {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                go(n, m, cur, used, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, m, &mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// Substitute quantifiers by their instances over `u`.
pub fn ground_goal(e: &GoalExpr, u: &Universe, warnings: &mut Vec<String>) -> Result<Ground, GoalError> {
    ground_in(e, u, &mut Vec::new(), warnings)
}

fn ground_in(e: &GoalExpr, u: &Universe, env: &mut Env, warnings: &mut Vec<String>) -> Result<Ground, GoalError> {
    let body_for = |x: &GoalExpr, binds: &[(String, ObjectRef)], env: &mut Env, w: &mut Vec<String>| {
        let n = env.len();
        env.extend(binds.iter().cloned());
        let r = ground_in(x, u, env, w);
        env.truncate(n);
        r
    };
    Ok(match e {
        GoalExpr::Lit { predicate, args, positive } => {
            let args = args.iter().map(|a| ground_arg(a, env, u)).collect::<Result<Vec<_>, _>>()?;
            Ground::Lit(Literal {
                prop: Proposition::new(predicate, args),
                positive: *positive,
            })
        }
        GoalExpr::And(xs) => Ground::And(xs.iter().map(|x| ground_in(x, u, env, warnings)).collect::<Result<_, _>>()?),
        GoalExpr::Or(xs) => Ground::Or(xs.iter().map(|x| ground_in(x, u, env, warnings)).collect::<Result<_, _>>()?),
        GoalExpr::Not(x) => ground_in(x, u, env, warnings)?.negate(),
        GoalExpr::Forall(v, x) | GoalExpr::Exists(v, x) => {
            let objs = instances(u, &v.ty);
            if objs.is_empty() && matches!(e, GoalExpr::Forall(..)) {
                warnings.push(format!("EmptyDomain: forall over `{}` has no instances", v.ty));
            }
            let parts = objs
                .into_iter()
                .map(|o| body_for(x, &[(v.name.clone(), o)], env, warnings))
                .collect::<Result<Vec<_>, _>>()?;
            if matches!(e, GoalExpr::Forall(..)) {
                Ground::And(parts)
            } else {
                Ground::Or(parts)
            }
        }
        GoalExpr::ForN { n, var, exact, body } => {
            let objs = instances(u, &var.ty);
            let each = objs
                .iter()
                .map(|o| body_for(body, &[(var.name.clone(), o.clone())], env, warnings))
                .collect::<Result<Vec<_>, _>>()?;
            let mut options = Vec::new();
            for subset in combinations(objs.len(), *n) {
                let mut conj = Vec::new();
                for (i, g) in each.iter().enumerate() {
                    if subset.contains(&i) {
                        conj.push(g.clone());
                    } else if *exact {
                        conj.push(g.clone().negate());
                    }
                }
                options.push(Ground::And(conj));
            }
            Ground::Or(options)
        }
        GoalExpr::ForPairs(a, b, x) => {
            let (xs, ys) = (instances(u, &a.ty), instances(u, &b.ty));
            let swap = xs.len() > ys.len();
            let (small, large) = if swap { (&ys, &xs) } else { (&xs, &ys) };
            let mut options = Vec::new();
            for image in injections(small.len(), large.len()) {
                let mut conj = Vec::new();
                for (i, &j) in image.iter().enumerate() {
                    let (oa, ob) = if swap {
                        (large[j].clone(), small[i].clone())
                    } else {
                        (small[i].clone(), large[j].clone())
                    };
                    conj.push(body_for(x, &[(a.name.clone(), oa), (b.name.clone(), ob)], env, warnings)?);
                }
                options.push(Ground::And(conj));
            }
            Ground::Or(options)
        }
    })
}

type Clause = BTreeSet<Literal>;

fn consistent(c: &Clause) -> bool {
    c.iter().all(|l| {
        !c.contains(&Literal {
            prop: l.prop.clone(),
            positive: !l.positive,
        })
    })
}

/// Disjunctive normal form, truncated at `cap` clauses.
fn dnf(g: &Ground, cap: usize, overflow: &mut bool) -> Vec<Clause> {
    match g {
        Ground::Lit(l) => vec![[l.clone()].into()],
        Ground::Or(xs) => {
            let mut out = Vec::new();
            for x in xs {
                out.extend(dnf(x, cap, overflow));
                if out.len() > cap {
                    out.truncate(cap);
                    *overflow = true;
                    break;
                }
            }
            out
        }
        Ground::And(xs) => {
            let mut acc: Vec<Clause> = vec![Clause::new()];
            for x in xs {
                let part = dnf(x, cap, overflow);
                let mut next = Vec::new();
                'outer: for a in &acc {
                    for b in &part {
                        let mut c = a.clone();
                        c.extend(b.iter().cloned());
                        if consistent(&c) {
                            next.push(c);
                            if next.len() > cap {
                                next.truncate(cap);
                                *overflow = true;
                                break 'outer;
                            }
                        }
                    }
                }
                acc = next;
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
    }
}

/// One fully ground way to satisfy a goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalOption {
    pub literals: BTreeSet<Literal>,
    pub actions: Vec<ActionGoal>,
}

impl GoalOption {
    pub fn of_category(&self, c: GoalCategory) -> impl Iterator<Item = &Literal> {
        self.literals.iter().filter(move |l| GoalCategory::of(l) == c)
    }
}

#[derive(Debug, Clone)]
pub struct Expansion {
    pub options: Vec<GoalOption>,
    pub overflow: bool,
    pub warnings: Vec<String>,
    pub ground: Ground,
}

/// Ground options of `spec`, sorted and deduplicated; stops at `cap`.
pub fn expand_options(spec: &GoalSpec, u: &Universe, cap: usize) -> Result<Expansion, GoalError> {
    let cap = cap.max(1);
    let mut warnings = Vec::new();
    let ground = ground_goal(&spec.condition, u, &mut warnings)?;
    let mut overflow = false;
    let mut clauses = dnf(&ground, cap, &mut overflow);
    clauses.sort();
    clauses.dedup();
    let options = clauses
        .into_iter()
        .map(|literals| GoalOption {
            literals,
            actions: spec.actions.clone(),
        })
        .collect();
    Ok(Expansion {
        options,
        overflow,
        warnings,
        ground,
    })
}

/// Per-position matches of `goals` as a subsequence of `executed`, greedy
/// from the left. All true iff the whole list is a subsequence.
pub fn match_action_goals(goals: &[ActionGoal], executed: &[GroundAction]) -> Vec<bool> {
    let mut out = vec![false; goals.len()];
    let mut i = 0;
    for a in executed {
        if i < goals.len() && goals[i].matches(a) {
            out[i] = true;
            i += 1;
        }
    }
    out
}

fn option_score(o: &GoalOption, fin: &WorldState, acts_ok: bool) -> f64 {
    let sat = o.literals.iter().filter(|l| l.holds_in(fin)).count();
    let n = o.literals.len();
    if o.actions.is_empty() {
        if n == 0 {
            1.0
        } else {
            sat as f64 / n as f64
        }
    } else {
        (usize::from(acts_ok) + sat) as f64 / (1 + n) as f64
    }
}

/// Satisfaction detail for the best option.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalBreakdown {
    pub satisfied: bool,
    /// Index of the reported option; `None` when the goal has no option.
    pub option: Option<usize>,
    pub literals: Vec<(Literal, bool)>,
    pub actions: Vec<(ActionGoal, bool)>,
    pub score: f64,
    pub option_count: usize,
    pub overflow: bool,
    pub warnings: Vec<String>,
}

impl GoalBreakdown {
    pub fn category(&self, c: GoalCategory) -> Vec<(String, bool)> {
        match c {
            GoalCategory::Action => self.actions.iter().map(|(a, ok)| (a.to_string(), *ok)).collect(),
            _ => self
                .literals
                .iter()
                .filter(|(l, _)| GoalCategory::of(l) == c)
                .map(|(l, ok)| (l.to_string(), *ok))
                .collect(),
        }
    }

    /// Satisfied fraction for a category; `None` when it has no goals.
    pub fn recall(&self, c: GoalCategory) -> Option<f64> {
        let items = self.category(c);
        if items.is_empty() {
            None
        } else {
            Some(items.iter().filter(|(_, ok)| *ok).count() as f64 / items.len() as f64)
        }
    }

    pub fn unsatisfied(&self) -> UnsatisfiedGoals {
        let pick = |c| {
            self.category(c)
                .into_iter()
                .filter(|(_, ok)| !ok)
                .map(|(s, _)| s)
                .collect()
        };
        UnsatisfiedGoals {
            node: pick(GoalCategory::State),
            edge: pick(GoalCategory::Relation),
            action: pick(GoalCategory::Action),
        }
    }
}

/// Goal check against the final state and executed actions of a run.
pub fn check_final(
    spec: &GoalSpec,
    fin: &WorldState,
    executed: &[GroundAction],
    cap: usize,
) -> Result<GoalBreakdown, GoalError> {
    let exp = expand_options(spec, fin.universe(), cap)?;
    let act_matches = match_action_goals(&spec.actions, executed);
    let acts_ok = act_matches.iter().all(|&b| b);
    let mut best: Option<(usize, f64)> = None;
    for (i, o) in exp.options.iter().enumerate() {
        let s = option_score(o, fin, acts_ok);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    let actions: Vec<(ActionGoal, bool)> = spec.actions.iter().cloned().zip(act_matches).collect();
    let (option, score, literals) = match best {
        Some((i, s)) => (
            Some(i),
            s,
            exp.options[i]
                .literals
                .iter()
                .map(|l| (l.clone(), l.holds_in(fin)))
                .collect(),
        ),
        None => (None, 0.0, Vec::new()),
    };
    let satisfied = if exp.overflow {
        acts_ok && exp.ground.holds(fin)
    } else {
        score == 1.0 && option.is_some()
    };
    Ok(GoalBreakdown {
        satisfied,
        option,
        literals,
        actions,
        score,
        option_count: exp.options.len(),
        overflow: exp.overflow,
        warnings: exp.warnings,
    })
}

/// Whether the trajectory satisfies the goal, with the best option's detail.
pub fn check_satisfaction(spec: &GoalSpec, t: &Trajectory) -> Result<(bool, GoalBreakdown), GoalError> {
    let b = check_final(spec, t.states().last().unwrap(), t.actions(), DEFAULT_OPTION_CAP)?;
    Ok((b.satisfied, b))
}

/// Best satisfied fraction over goal options; the action list counts as a
/// single element.
pub fn partial_success(spec: &GoalSpec, t: &Trajectory) -> Result<f64, GoalError> {
    Ok(check_final(spec, t.states().last().unwrap(), t.actions(), DEFAULT_OPTION_CAP)?.score)
}
