//! Subgoal sequences: mapping each segment to actions by breadth-first
//! search and scoring the resulting plan.

use std::collections::{BTreeSet, HashSet, VecDeque};

use thiserror::Error;

use crate::domain::{grounded_delta, Domain, DomainError};
use crate::executor::{
    execute, is_effect_redundant, ErrorCategory, ExecutionTrace, GrammarError, RuntimeError,
};
use crate::goals::{check_final, GoalBreakdown, GoalError, GoalSpec};
use crate::ltl::{self, holds_at, Formula, LintFinding};
use crate::world::{GroundAction, ObjectRef, Universe, Vocabulary, WorldState};

pub const DEFAULT_DEPTH_CAP: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SubgoalError {
    #[error("{category:?}: {detail}")]
    Grammar { category: GrammarError, detail: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Goal(#[from] GoalError),
}

/// A predicted subgoal sequence.
#[derive(Debug, Clone)]
pub struct SubgoalPlan {
    pub source: String,
    /// The whole formula as parsed, for trajectory checks.
    pub formula: Formula,
    /// Resolved `then`-free segments, in order.
    pub segments: Vec<Formula>,
}

fn grammar(category: GrammarError, detail: impl Into<String>) -> SubgoalError {
    SubgoalError::Grammar {
        category,
        detail: detail.into(),
    }
}

fn lint_category(f: &LintFinding) -> GrammarError {
    match f {
        LintFinding::Hallucination { kind, .. } => GrammarError::Hallucination(*kind),
        LintFinding::Arity { .. } => GrammarError::ArgNumber,
        _ => GrammarError::Parsing,
    }
}

impl SubgoalPlan {
    /// Parse and lint a single-line subgoal sequence.
    pub fn parse(text: &str, vocab: &Vocabulary, u: &Universe) -> Result<SubgoalPlan, SubgoalError> {
        let formula = ltl::parse(text).map_err(|e| grammar(GrammarError::Parsing, e.to_string()))?;
        Self::from_formula(text, formula, vocab, u)
    }

    /// Segments given as separate strings.
    pub fn from_segments<S: AsRef<str>>(
        segments: &[S],
        vocab: &Vocabulary,
        u: &Universe,
    ) -> Result<SubgoalPlan, SubgoalError> {
        let mut parts = Vec::new();
        for s in segments {
            let f = ltl::parse(s.as_ref()).map_err(|e| grammar(GrammarError::Parsing, e.to_string()))?;
            parts.push(f);
        }
        let source = segments.iter().map(|s| format!("({})", s.as_ref())).collect::<Vec<_>>().join(" then ");
        let formula = match parts.len() {
            1 => parts.pop().unwrap(),
            _ => Formula::Then(parts),
        };
        Self::from_formula(&source, formula, vocab, u)
    }

    fn from_formula(source: &str, formula: Formula, vocab: &Vocabulary, u: &Universe) -> Result<SubgoalPlan, SubgoalError> {
        if let Some(f) = ltl::lint(&formula, vocab, u).into_iter().find(LintFinding::is_error) {
            return Err(grammar(lint_category(&f), f.to_string()));
        }
        ltl::validate(&formula).map_err(|e| grammar(GrammarError::Parsing, e.to_string()))?;
        let resolved = ltl::resolve(&formula, vocab, u).map_err(|e| grammar(GrammarError::Parsing, e.to_string()))?;
        let segments: Vec<Formula> = match resolved {
            Formula::Then(fs) => fs,
            f => vec![f],
        };
        if let Some(s) = segments.iter().find(|s| s.contains_then()) {
            return Err(grammar(GrammarError::Parsing, format!("nested `then` in segment `{s}`")));
        }
        Ok(SubgoalPlan {
            source: source.to_string(),
            formula,
            segments,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// An empty plan, satisfied by doing nothing.
    pub fn empty() -> SubgoalPlan {
        SubgoalPlan {
            source: String::new(),
            formula: Formula::And(Vec::new()),
            segments: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentOutcome {
    Reached,
    AlreadySatisfied,
    Unreachable,
}

#[derive(Debug, Clone)]
pub struct SegmentResult {
    pub actions: Vec<GroundAction>,
    pub outcome: SegmentOutcome,
    /// States expanded by the search.
    pub visited: usize,
    /// Minimal action sequences found, the chosen one first; at most
    /// `MapOptions::alternatives` are kept.
    pub alternatives: Vec<Vec<GroundAction>>,
    /// Number of minimal sequences seen, including those not kept.
    pub alternative_count: usize,
    /// For unreachable segments: best fraction of top-level conjuncts that
    /// held in any visited state, and those still false there.
    pub best_partial: f64,
    pub missing: Vec<String>,
    /// Whether the relevance filter had to be dropped.
    pub full_branching: bool,
}

#[derive(Debug, Clone)]
pub struct MappingResult {
    pub segments: Vec<SegmentResult>,
    pub plan: Vec<GroundAction>,
    pub failed_segment: Option<usize>,
}

impl MappingResult {
    pub fn is_complete(&self) -> bool {
        self.failed_segment.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct MapOptions {
    pub depth_cap: usize,
    pub alternatives: usize,
    /// Extra objects the relevance filter keeps (e.g. from the task goal).
    pub goal_objects: BTreeSet<ObjectRef>,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions {
            depth_cap: DEFAULT_DEPTH_CAP,
            alternatives: 4,
            goal_objects: BTreeSet::new(),
        }
    }
}

fn conjuncts(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::And(fs) => fs.iter().flat_map(conjuncts).collect(),
        f => vec![f],
    }
}

struct Search<'a> {
    domain: &'a Domain,
    candidates: Vec<GroundAction>,
}

impl Search<'_> {
    /// Actions the executor would accept without complaint.
    fn valid(&self, s: &WorldState, a: &GroundAction) -> Result<bool, DomainError> {
        Ok(self.domain.applicable(s, a)? && !is_effect_redundant(self.domain, s, a)?)
    }

    fn run(&self, seg: &Formula, start: &WorldState, opts: &MapOptions) -> Result<SegmentResult, DomainError> {
        let mut out = SegmentResult {
            actions: Vec::new(),
            outcome: SegmentOutcome::Unreachable,
            visited: 0,
            alternatives: Vec::new(),
            alternative_count: 0,
            best_partial: 0.0,
            missing: Vec::new(),
            full_branching: false,
        };
        let parts = conjuncts(seg);
        let mut best = (-1.0f64, Vec::new());
        let mut score = |s: &WorldState| {
            let missing: Vec<String> = parts
                .iter()
                .filter(|p| !holds_at(p, s, None))
                .map(|p| p.to_string())
                .collect();
            let frac = 1.0 - missing.len() as f64 / parts.len().max(1) as f64;
            if frac > best.0 {
                best = (frac, missing);
            }
        };
        score(start);
        let mut seen: HashSet<WorldState> = HashSet::from([start.clone()]);
        let mut layer: VecDeque<(WorldState, Vec<GroundAction>)> = VecDeque::from([(start.clone(), Vec::new())]);
        for _ in 0..opts.depth_cap {
            let mut next = VecDeque::new();
            for (s, path) in layer {
                out.visited += 1;
                for a in &self.candidates {
                    if !self.valid(&s, a)? {
                        continue;
                    }
                    let g = self.domain.ground_action(a, s.universe())?;
                    let (add, del) = grounded_delta(&g, &s);
                    let child = s.apply_delta(&add, &del).expect("grounded effects stay in the universe");
                    if holds_at(seg, &child, Some(a)) {
                        out.alternative_count += 1;
                        if out.alternatives.len() < opts.alternatives.max(1) {
                            let mut p = path.clone();
                            p.push(a.clone());
                            out.alternatives.push(p);
                        }
                    }
                    if out.alternative_count == 0 && seen.insert(child.clone()) {
                        score(&child);
                        let mut p = path.clone();
                        p.push(a.clone());
                        next.push_back((child, p));
                    }
                }
            }
            if out.alternative_count > 0 {
                out.outcome = SegmentOutcome::Reached;
                out.actions = out.alternatives[0].clone();
                return Ok(out);
            }
            layer = next;
            if layer.is_empty() {
                break;
            }
        }
        out.best_partial = best.0.max(0.0);
        out.missing = best.1;
        Ok(out)
    }
}

fn held(domain: &Domain, s: &WorldState) -> BTreeSet<ObjectRef> {
    s.facts()
        .iter()
        .filter(|p| domain.conventions.hands.iter().any(|h| h == p.predicate()))
        .filter_map(|p| p.args().last().cloned())
        .collect()
}

fn relevant_actions(all: &[GroundAction], objects: &BTreeSet<ObjectRef>) -> Vec<GroundAction> {
    all.iter()
        .filter(|a| {
            a.name().contains("OPEN") || a.args().iter().any(|o| objects.contains(o))
        })
        .cloned()
        .collect()
}

/// Map each segment, in order, to a shortest action sequence reaching it.
pub fn map_subgoals(
    plan: &SubgoalPlan,
    initial: &WorldState,
    domain: &Domain,
    opts: &MapOptions,
) -> Result<MappingResult, DomainError> {
    let all = domain.ground_actions(initial.universe());
    let mut cur = initial.clone();
    let mut result = MappingResult {
        segments: Vec::new(),
        plan: Vec::new(),
        failed_segment: None,
    };
    for (i, seg) in plan.segments.iter().enumerate() {
        if holds_at(seg, &cur, None) {
            result.segments.push(SegmentResult {
                actions: Vec::new(),
                outcome: SegmentOutcome::AlreadySatisfied,
                visited: 0,
                alternatives: vec![Vec::new()],
                alternative_count: 1,
                best_partial: 1.0,
                missing: Vec::new(),
                full_branching: false,
            });
            continue;
        }
        let mut objects: BTreeSet<ObjectRef> = plan.segments[i..].iter().flat_map(ltl::mentioned_objects).collect();
        objects.extend(opts.goal_objects.iter().cloned());
        objects.extend(held(domain, &cur));
        let filtered = relevant_actions(&all, &objects);
        let mut r = Search {
            domain,
            candidates: filtered.clone(),
        }
        .run(seg, &cur, opts)?;
        if r.outcome == SegmentOutcome::Unreachable && filtered.len() < all.len() {
            let visited = r.visited;
            r = Search {
                domain,
                candidates: all.clone(),
            }
            .run(seg, &cur, opts)?;
            r.visited += visited;
            r.full_branching = true;
        }
        if r.outcome == SegmentOutcome::Unreachable {
            result.failed_segment = Some(i);
            result.segments.push(r);
            break;
        }
        for a in &r.actions {
            cur = domain.apply(&cur, a)?;
        }
        result.plan.extend(r.actions.iter().cloned());
        result.segments.push(r);
    }
    Ok(result)
}

/// Category for a segment the search could not reach: Affordance when no
/// ground action adds a missing literal from the best state, otherwise
/// MissingStep.
fn unreachable_category(seg: &Formula, start: &WorldState, domain: &Domain) -> Result<RuntimeError, DomainError> {
    let wanted: Vec<&Formula> = conjuncts(seg).into_iter().filter(|p| !holds_at(p, start, None)).collect();
    for a in domain.ground_actions(start.universe()) {
        if !domain.affordable(start, &a)? {
            continue;
        }
        let g = domain.ground_action(&a, start.universe())?;
        let (add, del) = grounded_delta(&g, start);
        let after = start.apply_delta(&add, &del).expect("grounded effects stay in the universe");
        if wanted.iter().any(|p| holds_at(p, &after, None)) {
            return Ok(RuntimeError::MissingStep);
        }
    }
    Ok(RuntimeError::Affordance)
}

/// Scores of one evaluated subgoal plan.
#[derive(Debug, Clone)]
pub struct SubgoalEval {
    pub mapping: MappingResult,
    pub trace: ExecutionTrace,
    pub executable: bool,
    pub success: bool,
    pub partial: f64,
    /// Whether the whole subgoal formula holds on the produced trajectory.
    pub formula_holds: bool,
    pub category: ErrorCategory,
    pub failed_segment: Option<usize>,
    pub goal: GoalBreakdown,
}

#[derive(Debug, Clone)]
pub struct SubgoalTask<'a> {
    pub initial: &'a WorldState,
    pub goal: &'a GoalSpec,
    pub domain: &'a Domain,
}

fn score_plan(task: &SubgoalTask, actions: &[GroundAction], cap: usize) -> Result<(ExecutionTrace, GoalBreakdown), SubgoalError> {
    let text: Vec<String> = actions.iter().map(|a| a.to_string()).collect();
    let trace = execute(task.initial, &text, task.domain);
    let goal = check_final(task.goal, trace.final_state(), &trace.applied, cap)?;
    Ok((trace, goal))
}

/// Map, execute and score a subgoal plan against the task goal. Where the
/// last reached segment has several minimal sequences, the best goal score
/// among them is kept.
pub fn evaluate_subgoal_plan(
    plan: &SubgoalPlan,
    task: &SubgoalTask,
    opts: &MapOptions,
    option_cap: usize,
) -> Result<SubgoalEval, SubgoalError> {
    let mut opts = opts.clone();
    opts.goal_objects.extend(goal_objects(task.goal, task.initial.universe(), option_cap)?);
    let mapping = map_subgoals(plan, task.initial, task.domain, &opts)?;
    let (mut trace, mut goal) = score_plan(task, &mapping.plan, option_cap)?;
    if let (None, Some(last)) = (mapping.failed_segment, mapping.segments.last()) {
        let prefix = &mapping.plan[..mapping.plan.len() - last.actions.len()];
        for alt in last.alternatives.iter().skip(1) {
            let cand: Vec<GroundAction> = prefix.iter().chain(alt).cloned().collect();
            let (t, g) = score_plan(task, &cand, option_cap)?;
            if t.is_completed() && g.score > goal.score {
                trace = t;
                goal = g;
            }
        }
    }
    let (category, failed_segment) = match mapping.failed_segment {
        Some(i) => {
            let seg_start = trace.final_state();
            let kind = unreachable_category(&plan.segments[i], seg_start, task.domain)?;
            (ErrorCategory::Runtime(kind), Some(i))
        }
        None => (trace.category(), None),
    };
    let executable = mapping.is_complete() && trace.is_completed();
    let formula_holds = executable
        && (plan.is_empty() || ltl::evaluate(&plan.formula, &trace.trajectory(), task.domain.vocabulary()).unwrap_or(false));
    let success = executable && goal.satisfied;
    Ok(SubgoalEval {
        partial: goal.score,
        mapping,
        trace,
        executable,
        success,
        formula_holds,
        category,
        failed_segment,
        goal,
    })
}

fn goal_objects(goal: &GoalSpec, u: &Universe, cap: usize) -> Result<BTreeSet<ObjectRef>, GoalError> {
    let exp = crate::goals::expand_options(goal, u, cap)?;
    let mut out: BTreeSet<ObjectRef> = exp
        .options
        .iter()
        .flat_map(|o| o.literals.iter().flat_map(|l| l.prop.args().iter().cloned()))
        .collect();
    for g in &goal.actions {
        for p in &g.alternatives {
            out.extend(p.args.iter().flatten().cloned());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
