//! The four evaluation pipelines, their composition, the stochastic
//! replanning harness and the sensitivity table.

use std::collections::{BTreeMap, BTreeSet};

use anyhow::{anyhow, bail, Result};
use eai_core::domain::{parse_action_blocks, OperatorSchema};
use eai_core::executor::{execute_with, feedback_message, ErrorCategory, ExecutionTrace, NoFailures};
use eai_core::goals::{check_final, expand_options, interpret_f1, parse_predicted, GoalCategory, GoalSpec, Prf};
use eai_core::subgoal::{evaluate_subgoal_plan, MapOptions, SubgoalError, SubgoalPlan, SubgoalTask, DEFAULT_DEPTH_CAP};
use eai_core::tmodel::{
    categorize, compose, plan, program_predicates, score_operator, sensitivity, CategoryTable, PlanStatus,
    PlanningProblem, Tally, DEFAULT_NODE_BUDGET,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::data::{Module, PredictionRecord, Task};
use crate::report::{Report, Row, MALFORMED_PREDICTION, MISSING_PREDICTION};

#[derive(Debug, Clone)]
pub struct Options {
    pub depth_cap: usize,
    pub option_cap: usize,
    pub node_budget: usize,
    /// Worker threads; 0 lets the pool decide.
    pub parallel: usize,
    pub fail_prob: f64,
    pub seed: u64,
    /// Extra attempts after a failed action-sequencing run.
    pub retries: usize,
    /// Categories per task when the task file gives none.
    pub top_categories: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            depth_cap: DEFAULT_DEPTH_CAP,
            option_cap: eai_core::goals::DEFAULT_OPTION_CAP,
            node_budget: DEFAULT_NODE_BUDGET,
            parallel: 1,
            fail_prob: 0.0,
            seed: 0,
            retries: 0,
            top_categories: 2,
        }
    }
}

impl Options {
    /// Settings echoed in reports. The worker count is left out so that
    /// reports do not depend on it.
    pub fn describe(&self, module: &str) -> BTreeMap<String, Value> {
        let mut m = BTreeMap::new();
        m.insert("option_cap".into(), json!(self.option_cap));
        match module {
            "subgoal_decomposition" => {
                m.insert("depth_cap".into(), json!(self.depth_cap));
            }
            "transition_modeling" | "sensitivity" => {
                m.insert("node_budget".into(), json!(self.node_budget));
            }
            "action_sequencing" => {
                m.insert("fail_prob".into(), json!(self.fail_prob));
                m.insert("seed".into(), json!(self.seed));
                m.insert("retries".into(), json!(self.retries));
            }
            _ => {}
        }
        m
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        Ok(rayon::ThreadPoolBuilder::new().num_threads(self.parallel).build()?)
    }
}

/// Failure of the evaluator itself, as opposed to bad input.
#[derive(Debug, thiserror::Error)]
#[error("internal error: {0}")]
pub struct Internal(pub String);

fn internal(e: impl std::fmt::Display) -> anyhow::Error {
    anyhow!(Internal(e.to_string()))
}

fn base_row(t: &Task) -> Row {
    let mut r = Row::new(&t.id);
    r.extra = t.record.extra.clone();
    if !t.record.id_aliases.is_empty() {
        r.note("id_aliases", json!(t.record.id_aliases));
    }
    r
}

/// Runs `f` on every task in a pool of `opts.parallel` workers. Results
/// keep task order.
fn map_tasks<F>(tasks: &[Task], opts: &Options, f: F) -> Result<Vec<Row>>
where
    F: Fn(usize, &Task) -> Result<Row> + Sync,
{
    let pool = opts.pool()?;
    pool.install(|| tasks.par_iter().enumerate().map(|(i, t)| f(i, t)).collect())
}

fn check_predictions(tasks: &[Task], preds: &[PredictionRecord], module: Module) -> Result<BTreeMap<String, PredictionRecord>> {
    let ids: BTreeSet<&str> = tasks.iter().map(|t| t.id.as_str()).collect();
    let mut out = BTreeMap::new();
    for p in preds {
        if p.module != module {
            bail!("prediction for `{}` has module {}, expected {module}", p.id, p.module);
        }
        if !ids.contains(p.id.as_str()) {
            bail!("prediction for unknown task `{}`", p.id);
        }
        if out.insert(p.id.clone(), p.clone()).is_some() {
            bail!("two predictions for task `{}`", p.id);
        }
    }
    Ok(out)
}

/// Evaluates one module over a suite.
pub fn eval_suite(tasks: &[Task], preds: &[PredictionRecord], module: Module, opts: &Options) -> Result<Report> {
    let by_id = check_predictions(tasks, preds, module)?;
    let rows = match module {
        Module::TransitionModeling => {
            let cats = task_categories(tasks, opts);
            map_tasks(tasks, opts, |i, t| transition_row(t, by_id.get(&t.id), &cats[i], opts))?
        }
        _ => map_tasks(tasks, opts, |i, t| {
            let p = by_id.get(&t.id);
            match module {
                Module::GoalInterpretation => goal_row(t, p, opts),
                Module::ActionSequencing => action_row(t, p, &t.goal, i, opts),
                Module::SubgoalDecomposition => subgoal_row(t, p, &t.goal, opts),
                Module::TransitionModeling => unreachable!(),
            }
        })?,
    };
    finish(module.name(), opts, rows)
}

fn finish(module: &str, opts: &Options, rows: Vec<Row>) -> Result<Report> {
    let rep = Report::new(module, opts.describe(module), rows);
    if !rep.is_consistent() {
        return Err(internal("aggregates do not recompute from rows"));
    }
    Ok(rep)
}

fn missing(r: &mut Row) {
    r.flags.push(MISSING_PREDICTION.to_string());
}

fn malformed(r: &mut Row, e: &anyhow::Error) {
    r.flags.push(MALFORMED_PREDICTION.to_string());
    r.note("error", e.to_string());
}

fn prf_counts(r: &mut Row, prefix: &str, p: Prf) {
    r.count(format!("{prefix} TP"), p.tp as u64);
    r.count(format!("{prefix} FP"), p.fp as u64);
    r.count(format!("{prefix} FN"), p.fn_ as u64);
}

fn prf_metrics(r: &mut Row, prefix: &str, p: Prf) {
    r.metric(format!("{prefix} Precision"), p.precision());
    r.metric(format!("{prefix} Recall"), p.recall());
    r.metric(format!("{prefix} F1"), p.f1());
}

fn list(p: &PredictionRecord, key: &str) -> Result<Vec<String>> {
    p.strings(key).unwrap_or_else(|| Ok(Vec::new()))
}

fn goal_row(t: &Task, p: Option<&PredictionRecord>, opts: &Options) -> Result<Row> {
    let mut r = base_row(t);
    let u = t.initial.universe();
    let zero = |r: &mut Row| {
        for c in ["State", "Relation", "Action", "Overall"] {
            r.metric(format!("{c} F1"), 0.0);
        }
    };
    let Some(p) = p else {
        missing(&mut r);
        zero(&mut r);
        return Ok(r);
    };
    let items = list(p, "literals").and_then(|l| list(p, "actions").map(|a| (l, a)));
    let (lits, acts) = match items {
        Ok(x) => x,
        Err(e) => {
            malformed(&mut r, &e);
            zero(&mut r);
            return Ok(r);
        }
    };
    let pred = parse_predicted(&lits, &acts, t.domain.vocabulary(), u);
    let rep = interpret_f1(&pred, &t.goal, u, opts.option_cap).map_err(|e| anyhow!("task `{}`: {e}", t.id))?;
    for c in [GoalCategory::State, GoalCategory::Relation, GoalCategory::Action] {
        if let Some(prf) = rep.categories.get(&c) {
            let name = category_label(c);
            prf_counts(&mut r, name, *prf);
            prf_metrics(&mut r, name, *prf);
        }
    }
    prf_counts(&mut r, "Overall", rep.overall);
    prf_metrics(&mut r, "Overall", rep.overall);
    r.count("Hallucinated", pred.hallucinated.len() as u64);
    r.count("Unparsed", pred.unparsed.len() as u64);
    if !pred.hallucinated.is_empty() {
        r.note("hallucinated", &pred.hallucinated);
    }
    if !pred.unparsed.is_empty() {
        r.note("unparsed", &pred.unparsed);
    }
    r.note("option", rep.option);
    Ok(r)
}

fn category_label(c: GoalCategory) -> &'static str {
    match c {
        GoalCategory::State => "State",
        GoalCategory::Relation => "Relation",
        GoalCategory::Action => "Action",
    }
}

/// The seven error columns plus the success columns, all zero.
fn execution_columns(r: &mut Row) {
    for c in ["Task SR", "Execution SR", "Partial Success", "Action Failure"]
        .into_iter()
        .chain(crate::report::TABLE_COLUMNS[2..].iter().copied())
    {
        r.metric(c, 0.0);
    }
}

/// Scores of one executed plan against a goal.
#[derive(Debug, Clone)]
pub struct Attempt {
    pub plan: Vec<String>,
    pub trace: ExecutionTrace,
    pub success: bool,
    pub partial: f64,
    pub feedback: String,
}

impl Attempt {
    fn key(&self) -> (bool, bool, f64) {
        (self.success, self.trace.is_completed(), self.partial)
    }
}

/// Executes `plans[k]` for attempt `k` (the last plan is resubmitted when
/// the list runs out), stopping at the first success. Failures are injected
/// with probability `fail_prob` from a generator seeded with `seed` on
/// stream `stream`.
pub fn run_attempts(t: &Task, plans: &[Vec<String>], goal: &GoalSpec, stream: u64, opts: &Options) -> Result<Vec<Attempt>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    let mut out: Vec<Attempt> = Vec::new();
    for k in 0..=opts.retries {
        let plan = plans[k.min(plans.len() - 1)].clone();
        let trace = if opts.fail_prob > 0.0 {
            let p = opts.fail_prob;
            let mut inject = |_: usize, _: &eai_core::world::GroundAction| rng.gen_bool(p);
            execute_with(&t.initial, &plan, &t.domain, &mut inject)
        } else {
            execute_with(&t.initial, &plan, &t.domain, &mut NoFailures)
        };
        let goal_check = check_final(goal, trace.final_state(), &trace.applied, opts.option_cap)
            .map_err(|e| anyhow!("task `{}`: {e}", t.id))?;
        let success = trace.is_completed() && goal_check.satisfied;
        let unsat = goal_check.unsatisfied();
        let feedback = feedback_message(&trace, &plan, Some(&unsat), k);
        out.push(Attempt {
            plan,
            trace,
            success,
            partial: goal_check.score,
            feedback,
        });
        if success {
            break;
        }
    }
    Ok(out)
}

/// Attempt with the best (success, executable, partial) key; the earliest
/// wins ties.
pub fn best_attempt(attempts: &[Attempt]) -> &Attempt {
    let mut best = &attempts[0];
    for a in &attempts[1..] {
        if a.key() > best.key() {
            best = a;
        }
    }
    best
}

fn trace_columns(r: &mut Row, trace: &ExecutionTrace, success: bool, partial: f64) {
    r.flag(success, "Task SR");
    r.flag(trace.is_completed(), "Execution SR");
    r.metric("Partial Success", partial);
    if let Some(step) = trace.failed_step() {
        match step.category.column() {
            Some(col) => r.metric(col, 1.0),
            None => r.metric("Action Failure", 1.0),
        }
        r.note("failed_step", step.index);
        r.note("failed_action", &step.raw);
        r.note("category", step.category.to_string());
        if !step.detail.is_empty() {
            r.note("error", &step.detail);
        }
    }
}

fn action_row(t: &Task, p: Option<&PredictionRecord>, goal: &GoalSpec, index: usize, opts: &Options) -> Result<Row> {
    let mut r = base_row(t);
    execution_columns(&mut r);
    let Some(p) = p else {
        missing(&mut r);
        return Ok(r);
    };
    let plans = (|| -> Result<Vec<Vec<String>>> {
        let mut plans = vec![p.strings("actions").ok_or_else(|| anyhow!("no `actions`"))??];
        match p.payload.get("attempts") {
            None => {}
            Some(Value::Array(xs)) => {
                for x in xs {
                    let rec = PredictionRecord::new(&t.id, p.module).with("actions", x.clone());
                    plans.push(rec.strings("actions").expect("just set")?);
                }
            }
            Some(other) => bail!("`attempts` must be a list of plans, got {other}"),
        }
        Ok(plans)
    })();
    let plans = match plans {
        Ok(x) => x,
        Err(e) => {
            malformed(&mut r, &e);
            r.metric("Parsing", 1.0);
            return Ok(r);
        }
    };
    let attempts = run_attempts(t, &plans, goal, index as u64, opts)?;
    let best = best_attempt(&attempts);
    trace_columns(&mut r, &best.trace, best.success, best.partial);
    r.note("executed", best.trace.applied.iter().map(|a| a.to_string()).collect::<Vec<_>>());
    if opts.retries > 0 || opts.fail_prob > 0.0 {
        r.note("attempts", attempts.len());
        r.note("feedback", attempts.iter().map(|a| a.feedback.as_str()).collect::<Vec<_>>());
    }
    Ok(r)
}

fn subgoal_row(t: &Task, p: Option<&PredictionRecord>, goal: &GoalSpec, opts: &Options) -> Result<Row> {
    let mut r = base_row(t);
    execution_columns(&mut r);
    let Some(p) = p else {
        missing(&mut r);
        return Ok(r);
    };
    let segments = match p.strings("subgoals").ok_or_else(|| anyhow!("no `subgoals`")).and_then(|x| x) {
        Ok(x) => x,
        Err(e) => {
            malformed(&mut r, &e);
            r.metric("Parsing", 1.0);
            return Ok(r);
        }
    };
    let u = t.initial.universe();
    let vocab = t.domain.vocabulary();
    let parsed = if segments.len() == 1 {
        SubgoalPlan::parse(&segments[0], vocab, u)
    } else {
        SubgoalPlan::from_segments(&segments, vocab, u)
    };
    let plan = match parsed {
        Ok(pl) => pl,
        Err(SubgoalError::Grammar { category, detail }) => {
            r.metric(category.column(), 1.0);
            r.note("category", ErrorCategory::Grammar(category).to_string());
            r.note("error", detail);
            return Ok(r);
        }
        Err(e) => bail!("task `{}`: {e}", t.id),
    };
    let map = MapOptions {
        depth_cap: opts.depth_cap,
        ..MapOptions::default()
    };
    let task = SubgoalTask {
        initial: &t.initial,
        goal,
        domain: &t.domain,
    };
    let ev = evaluate_subgoal_plan(&plan, &task, &map, opts.option_cap).map_err(|e| anyhow!("task `{}`: {e}", t.id))?;
    r.flag(ev.success, "Task SR");
    r.flag(ev.executable, "Execution SR");
    r.metric("Partial Success", ev.partial);
    if let Some(col) = ev.category.column() {
        r.metric(col, 1.0);
        r.note("category", ev.category.to_string());
    }
    if let Some(i) = ev.failed_segment {
        r.note("failed_segment", i);
        let seg = &ev.mapping.segments[i];
        r.note("missing", &seg.missing);
    } else if let Some(step) = ev.trace.failed_step() {
        r.note("failed_step", step.index);
        r.note("failed_action", &step.raw);
    }
    r.note("formula_holds", ev.formula_holds);
    r.note("mapped_plan", ev.mapping.plan.iter().map(|a| a.to_string()).collect::<Vec<_>>());
    Ok(r)
}

/// Categories per task: from the task file, else by predicate IDF over
/// the suite.
pub fn task_categories(tasks: &[Task], opts: &Options) -> Vec<Vec<String>> {
    let programs: Vec<BTreeSet<String>> = tasks.iter().map(|t| program_predicates(&t.domain, &t.gt_actions)).collect();
    let derived = categorize(&programs, &CategoryTable::builtin(), opts.top_categories);
    tasks
        .iter()
        .zip(derived)
        .map(|(t, d)| t.record.categories.clone().unwrap_or(d))
        .collect()
}

/// The ground-truth option reached by the reference trajectory, as the
/// planning goal. Action goals are left out.
pub fn planning_problem(t: &Task, categories: &[String], opts: &Options) -> Result<PlanningProblem> {
    let fin = eai_core::executor::execute(&t.initial, &t.trajectory, &t.domain);
    let exp = expand_options(&t.goal, t.initial.universe(), opts.option_cap).map_err(|e| anyhow!("task `{}`: {e}", t.id))?;
    let option = exp
        .options
        .iter()
        .find(|o| o.literals.iter().all(|l| l.holds_in(fin.final_state())))
        .ok_or_else(|| anyhow!("task `{}`: reference trajectory reaches no goal option", t.id))?;
    Ok(PlanningProblem {
        name: t.id.clone(),
        initial: t.initial.clone(),
        goal: option.literals.iter().cloned().collect(),
        relevant: eai_core::tmodel::extract_relevant_operators(&t.gt_actions),
        categories: categories.to_vec(),
    })
}

fn operators(p: &PredictionRecord) -> Result<Vec<OperatorSchema>> {
    let text = match p.payload.get("operators") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Array(xs)) => xs
            .iter()
            .map(|x| x.as_str().map(String::from).ok_or_else(|| anyhow!("operator blocks must be strings")))
            .collect::<Result<Vec<_>>>()?
            .join("\n"),
        Some(other) => bail!("`operators` must be PDDL text, got {other}"),
        None => bail!("no `operators`"),
    };
    Ok(parse_action_blocks(&text)?)
}

fn transition_row(t: &Task, p: Option<&PredictionRecord>, categories: &[String], opts: &Options) -> Result<Row> {
    let mut r = base_row(t);
    let gt_ops = t.gt_operators();
    let problem = planning_problem(t, categories, opts)?;
    let pred_ops = match p.map(operators) {
        None => {
            missing(&mut r);
            Vec::new()
        }
        Some(Ok(ops)) => ops,
        Some(Err(e)) => {
            malformed(&mut r, &e);
            Vec::new()
        }
    };
    let (mut pre, mut eff) = (Prf::default(), Prf::default());
    let mut logic = Vec::new();
    let mut per_op = BTreeMap::new();
    for g in &gt_ops {
        match pred_ops.iter().find(|p| p.key() == g.key()) {
            Some(pop) => {
                let m = score_operator(pop, g);
                pre.add(m.precondition.counts);
                eff.add(m.effect.counts);
                logic.push((m.precondition.logic + m.effect.logic) / 2.0);
                per_op.insert(
                    g.key(),
                    json!({
                        "arity_mismatch": m.arity_mismatch,
                        "missing_preconditions": m.precondition.missing,
                        "extra_preconditions": m.precondition.extra,
                        "missing_effects": m.effect.missing,
                        "extra_effects": m.effect.extra,
                    }),
                );
            }
            None => {
                let (gp, ge) = eai_core::tmodel::alpha_rename(g);
                pre.add(Prf {
                    tp: 0,
                    fp: 0,
                    fn_: gp.conjuncts().len(),
                });
                eff.add(Prf {
                    tp: 0,
                    fp: 0,
                    fn_: ge.conjuncts().len(),
                });
                logic.push(0.0);
                per_op.insert(g.key(), json!({ "predicted": false }));
            }
        }
    }
    let mut overall = pre;
    overall.add(eff);
    prf_counts(&mut r, "Precondition", pre);
    prf_counts(&mut r, "Effect", eff);
    prf_counts(&mut r, "Logic", overall);
    prf_metrics(&mut r, "Logic", overall);
    r.metric(
        "Logic Match",
        if logic.is_empty() {
            1.0
        } else {
            logic.iter().sum::<f64>() / logic.len() as f64
        },
    );
    let d = compose(&t.domain, &pred_ops, &problem.relevant);
    let res = plan(&d, &problem, opts.node_budget).map_err(internal)?;
    let ok = res.status == PlanStatus::Found;
    r.flag(ok, "Planner SR");
    for c in categories {
        r.flag(ok, &format!("Planner SR[{c}]"));
    }
    r.note("operators", per_op);
    r.note("planner_status", res.status.name());
    r.note("categories", categories);
    if ok {
        r.note("plan", res.plan.iter().map(|a| a.to_string()).collect::<Vec<_>>());
    }
    Ok(r)
}

/// Per-action planning success with one predicted operator substituted at
/// a time, pooled over the suite.
pub fn sensitivity_suite(tasks: &[Task], preds: &[PredictionRecord], opts: &Options) -> Result<Report> {
    let by_id = check_predictions(tasks, preds, Module::TransitionModeling)?;
    let cats = task_categories(tasks, opts);
    let pool = opts.pool()?;
    let per_task: Vec<Vec<eai_core::tmodel::SensitivityRow>> = pool.install(|| {
        tasks
            .par_iter()
            .enumerate()
            .map(|(i, t)| -> Result<_> {
                let Some(p) = by_id.get(&t.id) else {
                    return Ok(Vec::new());
                };
                let ops = operators(p).map_err(|e| anyhow!("task `{}`: {e}", t.id))?;
                let problem = planning_problem(t, &cats[i], opts)?;
                sensitivity(&t.domain, &ops, std::slice::from_ref(&problem), opts.node_budget).map_err(internal)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut merged: BTreeMap<String, (Tally, BTreeMap<String, Tally>, Vec<String>)> = BTreeMap::new();
    for rows in per_task {
        for s in rows {
            let Some(o) = s.overall else { continue };
            let e = merged.entry(s.action.clone()).or_default();
            e.0.success += o.success;
            e.0.total += o.total;
            for (c, tl) in s.per_category {
                let x = e.1.entry(c).or_default();
                x.success += tl.success;
                x.total += tl.total;
            }
            e.2.extend(s.failures);
        }
    }
    let rows = merged
        .into_iter()
        .map(|(action, (overall, per_cat, failures))| {
            let mut r = Row::new(&action);
            r.metric("Planner SR", overall.rate().unwrap_or(0.0));
            for (c, tl) in per_cat {
                r.metric(format!("Planner SR[{c}]"), tl.rate().unwrap_or(0.0));
            }
            r.count("Problems", overall.total as u64);
            r.count("Solved", overall.success as u64);
            r.note("failures", failures);
            r
        })
        .collect();
    finish("sensitivity", opts, rows)
}

/// Downstream module scored against the goal predicted upstream, with the
/// same plan also scored against the ground-truth goal.
pub fn pipeline(
    tasks: &[Task],
    upstream: &[PredictionRecord],
    downstream: &[PredictionRecord],
    module: Module,
    opts: &Options,
) -> Result<Report> {
    if !matches!(module, Module::ActionSequencing | Module::SubgoalDecomposition) {
        bail!("pipeline downstream must be action_sequencing or subgoal_decomposition, got {module}");
    }
    let goals = check_predictions(tasks, upstream, Module::GoalInterpretation)?;
    let plans = check_predictions(tasks, downstream, module)?;
    let rows = map_tasks(tasks, opts, |i, t| {
        let u = t.initial.universe();
        let mut flags = Vec::new();
        let mut hallucinated = Vec::new();
        let goal = match goals.get(&t.id) {
            None => {
                flags.push("MissingUpstream".to_string());
                None
            }
            Some(g) => match list(g, "literals").and_then(|l| list(g, "actions").map(|a| (l, a))) {
                Ok((l, a)) => {
                    let pred = parse_predicted(&l, &a, t.domain.vocabulary(), u);
                    if !pred.hallucinated.is_empty() || !pred.unparsed.is_empty() {
                        flags.push("HallucinatedGoal".to_string());
                        hallucinated.extend(pred.hallucinated.iter().chain(&pred.unparsed).cloned());
                    }
                    Some(pred.to_spec())
                }
                Err(_) => {
                    flags.push("MalformedUpstream".to_string());
                    None
                }
            },
        };
        let p = plans.get(&t.id);
        let run = |g: &GoalSpec| match module {
            Module::ActionSequencing => action_row(t, p, g, i, opts),
            _ => subgoal_row(t, p, g, opts),
        };
        let vs_gt = run(&t.goal)?;
        let mut r = match &goal {
            Some(g) => run(g)?,
            None => {
                let mut r = base_row(t);
                execution_columns(&mut r);
                r
            }
        };
        r.flags.extend(flags);
        if !hallucinated.is_empty() {
            r.note("excluded_goal_items", hallucinated);
        }
        r.metric("GT Task SR", vs_gt.metrics["Task SR"]);
        r.metric("GT Partial Success", vs_gt.metrics["Partial Success"]);
        Ok(r)
    })?;
    finish(&format!("pipeline_{}", module.name()), opts, rows)
}

/// Reference annotations of `module` in prediction form.
pub fn ground_truth_predictions(tasks: &[Task], module: Module, opts: &Options) -> Result<Vec<PredictionRecord>> {
    let mut out = Vec::new();
    for t in tasks {
        let rec = PredictionRecord::new(&t.id, module);
        let rec = match module {
            Module::GoalInterpretation => {
                let problem = planning_problem(t, &[], opts)?;
                let lits: Vec<String> = problem.goal.iter().map(|l| l.to_string()).collect();
                let acts: Vec<String> = t.goal.actions.iter().map(|a| a.to_string()).collect();
                rec.with("literals", json!(lits)).with("actions", json!(acts))
            }
            Module::ActionSequencing => rec.with("actions", json!(t.trajectory)),
            Module::SubgoalDecomposition => match &t.record.subgoals {
                Some(s) => rec.with("subgoals", json!(s)),
                None => continue,
            },
            Module::TransitionModeling => {
                let text: Vec<String> = t.gt_operators().iter().map(|s| s.to_pddl()).collect();
                rec.with("operators", json!(text.join("\n")))
            }
        };
        out.push(rec);
    }
    Ok(out)
}
