//! Plan execution against a domain, with grammar and runtime failure
//! classification and replanning feedback.

mod feedback;
mod raw;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use feedback::{feedback_message, render_list, UnsatisfiedGoals};
pub use raw::{parse_raw_action, RawAction};

use crate::domain::{Domain, DomainError};
use crate::ltl::{HallucinationKind, Trajectory};
use crate::world::{GroundAction, Literal, ObjectRef, Universe, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GrammarError {
    Parsing,
    Hallucination(HallucinationKind),
    ArgNumber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuntimeError {
    Affordance,
    AdditionalStep,
    MissingStep,
    WrongOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum ErrorCategory {
    #[default]
    None,
    Grammar(GrammarError),
    Runtime(RuntimeError),
}

impl GrammarError {
    /// Report column the error is counted under.
    pub fn column(self) -> &'static str {
        match self {
            GrammarError::Parsing => "Parsing",
            GrammarError::Hallucination(_) => "Hallucination",
            GrammarError::ArgNumber => "Predicate-Arg Num",
        }
    }
}

impl RuntimeError {
    pub fn column(self) -> &'static str {
        match self {
            RuntimeError::Affordance => "Affordance",
            RuntimeError::AdditionalStep => "Additional Step",
            RuntimeError::MissingStep => "Missing Step",
            RuntimeError::WrongOrder => "Wrong Order",
        }
    }

    pub const ALL: [RuntimeError; 4] = [
        RuntimeError::WrongOrder,
        RuntimeError::MissingStep,
        RuntimeError::Affordance,
        RuntimeError::AdditionalStep,
    ];
}

impl ErrorCategory {
    pub fn column(self) -> Option<&'static str> {
        match self {
            ErrorCategory::None => None,
            ErrorCategory::Grammar(g) => Some(g.column()),
            ErrorCategory::Runtime(r) => Some(r.column()),
        }
    }

    pub fn is_none(self) -> bool {
        self == ErrorCategory::None
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorCategory::None => f.write_str("none"),
            ErrorCategory::Grammar(GrammarError::Hallucination(k)) => write!(f, "Hallucination({k})"),
            ErrorCategory::Grammar(g) => f.write_str(g.column()),
            ErrorCategory::Runtime(r) => f.write_str(r.column()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecutorError {
    #[error("internal contract violation: {0}")]
    InternalContractViolation(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarFinding {
    pub step: usize,
    pub error: GrammarError,
    pub detail: String,
}

/// Grammar check of one raw step; yields the ground action when clean.
pub fn lint_step(text: &str, domain: &Domain, u: &Universe) -> Result<GroundAction, (GrammarError, String)> {
    let raw = parse_raw_action(text).map_err(|e| (GrammarError::Parsing, e))?;
    let schema = domain.schema(&raw.name).ok_or_else(|| {
        (
            GrammarError::Hallucination(HallucinationKind::Action),
            format!("unknown action `{}`", raw.name),
        )
    })?;
    if schema.params.len() != raw.args.len() {
        return Err((
            GrammarError::ArgNumber,
            format!("{} takes {} argument(s), got {}", raw.name, schema.params.len(), raw.args.len()),
        ));
    }
    let mut args = Vec::with_capacity(raw.args.len());
    for a in &raw.args {
        match ObjectRef::parse_lenient(a) {
            Ok(o) if u.contains(&o) => args.push(o),
            _ => {
                return Err((
                    GrammarError::Hallucination(HallucinationKind::Object),
                    format!("unknown object `{a}`"),
                ))
            }
        }
    }
    Ok(GroundAction::new(&raw.name, args))
}

/// Per-step grammar findings for a whole plan; nothing is executed.
pub fn lint_plan<S: AsRef<str>>(plan: &[S], domain: &Domain, u: &Universe) -> Vec<GrammarFinding> {
    plan.iter()
        .enumerate()
        .filter_map(|(step, s)| {
            lint_step(s.as_ref(), domain, u)
                .err()
                .map(|(error, detail)| GrammarFinding { step, error, detail })
        })
        .collect()
}

/// Whether every positive effect literal of `a` already holds. Actions with
/// no positive effect and navigation actions are never redundant.
pub fn is_effect_redundant(domain: &Domain, state: &WorldState, a: &GroundAction) -> Result<bool, DomainError> {
    if domain.conventions.is_navigation(a.name()) {
        return Ok(false);
    }
    let (add, _) = domain.effect_delta(state, a)?;
    Ok(!add.is_empty() && add.iter().all(|p| state.holds(p)))
}

/// Unsatisfied precondition literals of the best-satisfied branch.
pub fn unsatisfied_precondition(
    domain: &Domain,
    state: &WorldState,
    a: &GroundAction,
) -> Result<Vec<Literal>, DomainError> {
    let g = domain.ground_action(a, state.universe())?;
    let d = g.precondition.diagnose(state, &mut Vec::new(), false);
    Ok(if d.ok { Vec::new() } else { d.unsatisfied.into_iter().collect() })
}

/// Runtime check in decision order. `Ok(None)` means the action may run.
/// `history` holds the states seen so far, oldest first; the current state
/// may be included.
pub fn check_runtime(
    domain: &Domain,
    state: &WorldState,
    history: &[WorldState],
    a: &GroundAction,
) -> Result<Option<(RuntimeError, Vec<Literal>)>, DomainError> {
    if !domain.affordable(state, a)? {
        return Ok(Some((RuntimeError::Affordance, Vec::new())));
    }
    if is_effect_redundant(domain, state, a)? {
        return Ok(Some((RuntimeError::AdditionalStep, Vec::new())));
    }
    let unsat = unsatisfied_precondition(domain, state, a)?;
    if unsat.is_empty() {
        return Ok(None);
    }
    let ever = |l: &Literal| history.iter().any(|s| l.holds_in(s));
    let kind = if unsat.iter().all(ever) {
        RuntimeError::WrongOrder
    } else {
        RuntimeError::MissingStep
    };
    Ok(Some((kind, unsat)))
}

/// Runtime category of a failing action.
pub fn categorize_failure(
    a: &GroundAction,
    state: &WorldState,
    history: &[WorldState],
    domain: &Domain,
) -> Result<RuntimeError, ExecutorError> {
    match check_runtime(domain, state, history, a)? {
        Some((kind, _)) => Ok(kind),
        None => Err(ExecutorError::InternalContractViolation(format!(
            "{a} is applicable and not redundant"
        ))),
    }
}

/// Decides whether an otherwise valid step fails anyway.
pub trait FailureInjector {
    fn fails(&mut self, step: usize, action: &GroundAction) -> bool;
}

/// Deterministic execution.
pub struct NoFailures;

impl FailureInjector for NoFailures {
    fn fails(&mut self, _: usize, _: &GroundAction) -> bool {
        false
    }
}

impl<F: FnMut(usize, &GroundAction) -> bool> FailureInjector for F {
    fn fails(&mut self, step: usize, action: &GroundAction) -> bool {
        self(step, action)
    }
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub index: usize,
    pub raw: String,
    pub action: Option<GroundAction>,
    /// Index of the pre-state in [`ExecutionTrace::states`].
    pub pre: usize,
    /// Index of the post-state; `None` when the step failed.
    pub post: Option<usize>,
    pub category: ErrorCategory,
    pub detail: String,
    /// Literals behind a MissingStep or WrongOrder verdict.
    pub unsatisfied: Vec<Literal>,
    /// Navigation applied implicitly before this step.
    pub navigated: Vec<GroundAction>,
    /// The step was valid but an injected failure stopped it.
    pub injected_failure: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Completed,
    StoppedAt(usize),
}

#[derive(Debug, Clone)]
pub struct ExecutionTrace {
    pub steps: Vec<StepRecord>,
    /// Every state visited, starting with the initial one.
    pub states: Vec<WorldState>,
    /// Actions applied, including implicit navigation.
    pub applied: Vec<GroundAction>,
    pub termination: Termination,
    /// Grammar findings over the whole plan, including steps never reached.
    pub grammar: Vec<GrammarFinding>,
}

impl ExecutionTrace {
    pub fn initial_state(&self) -> &WorldState {
        &self.states[0]
    }

    pub fn final_state(&self) -> &WorldState {
        self.states.last().expect("trace has an initial state")
    }

    pub fn is_completed(&self) -> bool {
        self.termination == Termination::Completed
    }

    pub fn failed_step(&self) -> Option<&StepRecord> {
        match self.termination {
            Termination::Completed => None,
            Termination::StoppedAt(k) => self.steps.get(k),
        }
    }

    /// Category of the stopping step; `None` for completed traces and for
    /// injected failures.
    pub fn category(&self) -> ErrorCategory {
        self.failed_step().map(|s| s.category).unwrap_or_default()
    }

    pub fn trajectory(&self) -> Trajectory {
        Trajectory::new(self.states.clone(), self.applied.clone()).expect("trace states chain")
    }

    /// Grammar classes present in the plan, once each.
    pub fn grammar_classes(&self) -> BTreeSet<GrammarError> {
        self.grammar.iter().map(|g| g.error).collect()
    }
}

/// Deterministic execution of `plan` from `initial`.
pub fn execute<S: AsRef<str>>(initial: &WorldState, plan: &[S], domain: &Domain) -> ExecutionTrace {
    execute_with(initial, plan, domain, &mut NoFailures)
}

/// Execution with a failure-injection hook consulted for every step that
/// passes all checks.
pub fn execute_with<S: AsRef<str>>(
    initial: &WorldState,
    plan: &[S],
    domain: &Domain,
    injector: &mut dyn FailureInjector,
) -> ExecutionTrace {
    let u = initial.universe().clone();
    let mut trace = ExecutionTrace {
        steps: Vec::new(),
        states: vec![initial.clone()],
        applied: Vec::new(),
        termination: Termination::Completed,
        grammar: lint_plan(plan, domain, &u),
    };
    for (index, raw) in plan.iter().enumerate() {
        let raw = raw.as_ref();
        let mut rec = StepRecord {
            index,
            raw: raw.to_string(),
            action: None,
            pre: trace.states.len() - 1,
            post: None,
            category: ErrorCategory::None,
            detail: String::new(),
            unsatisfied: Vec::new(),
            navigated: Vec::new(),
            injected_failure: false,
        };
        let ok = run_step(&mut trace, &mut rec, domain, &u, injector);
        trace.steps.push(rec);
        if !ok {
            trace.termination = Termination::StoppedAt(index);
            break;
        }
    }
    trace
}

fn run_step(
    trace: &mut ExecutionTrace,
    rec: &mut StepRecord,
    domain: &Domain,
    u: &Universe,
    injector: &mut dyn FailureInjector,
) -> bool {
    let a = match lint_step(&rec.raw, domain, u) {
        Ok(a) => a,
        Err((g, detail)) => {
            rec.category = ErrorCategory::Grammar(g);
            rec.detail = detail;
            return false;
        }
    };
    rec.action = Some(a.clone());
    if domain.conventions.auto_navigation {
        navigate_if_needed(trace, rec, domain, &a);
    }
    let state = trace.states.last().unwrap().clone();
    let verdict = match check_runtime(domain, &state, &trace.states, &a) {
        Ok(v) => v,
        Err(e) => {
            rec.category = ErrorCategory::Runtime(RuntimeError::Affordance);
            rec.detail = e.to_string();
            return false;
        }
    };
    if let Some((kind, unsat)) = verdict {
        rec.category = ErrorCategory::Runtime(kind);
        rec.detail = match kind {
            RuntimeError::Affordance => format!("object properties do not permit {a}"),
            RuntimeError::AdditionalStep => format!("the effect of {a} already holds"),
            _ => format!("unsatisfied: {}", render_list(&unsat)),
        };
        rec.unsatisfied = unsat;
        return false;
    }
    if injector.fails(rec.index, &a) {
        rec.injected_failure = true;
        rec.detail = format!("{a} failed to take effect");
        return false;
    }
    match domain.apply(&state, &a) {
        Ok(next) => {
            trace.states.push(next);
            trace.applied.push(a);
            rec.post = Some(trace.states.len() - 1);
            true
        }
        Err(e) => {
            rec.category = ErrorCategory::Runtime(RuntimeError::MissingStep);
            rec.detail = e.to_string();
            false
        }
    }
}

/// Applies the navigation action when adjacency literals are the only
/// unsatisfied part of the precondition.
fn navigate_if_needed(trace: &mut ExecutionTrace, rec: &mut StepRecord, domain: &Domain, a: &GroundAction) {
    let (Some(nav), Some(adj)) = (
        domain.conventions.navigate_action.as_deref(),
        domain.conventions.adjacency_predicate.as_deref(),
    ) else {
        return;
    };
    let state = trace.states.last().unwrap().clone();
    let Ok(unsat) = unsatisfied_precondition(domain, &state, a) else {
        return;
    };
    let only_adjacency = !unsat.is_empty()
        && unsat
            .iter()
            .all(|l| l.positive && l.prop.predicate() == adj && l.prop.arity() == 1);
    if !only_adjacency {
        return;
    }
    let mut cur = state;
    for l in unsat {
        let step = GroundAction::new(nav, l.prop.args().to_vec());
        match domain.apply(&cur, &step) {
            Ok(next) => {
                cur = next.clone();
                trace.states.push(next);
                trace.applied.push(step.clone());
                rec.navigated.push(step);
            }
            Err(_) => return,
        }
    }
    rec.pre = trace.states.len() - 1;
}
