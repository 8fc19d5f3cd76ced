//! Transition-model evaluation: logic-form matching of predicted operators,
//! planning success with an internal planner, per-action sensitivity and
//! task categorization.

mod logic;
mod planner;

use std::collections::{BTreeMap, BTreeSet};

pub use logic::{
    alpha_rename, match_expressions, max_matching, score_clauses, score_operator, score_operators, ClauseScore,
    MatchReport,
};
pub use planner::{plan, PlanResult, PlanStatus, PlanningProblem, DEFAULT_NODE_BUDGET};

use crate::domain::{Domain, DomainError, OperatorSchema};
use crate::world::{GroundAction, Vocabulary};

/// Distinct operator keys used by a ground-truth action sequence.
pub fn extract_relevant_operators(actions: &[GroundAction]) -> BTreeSet<String> {
    actions.iter().map(|a| a.name().to_ascii_uppercase()).collect()
}

/// `gt` restricted to `relevant` (all operators when empty), with the
/// predicted operators among them substituted.
pub fn compose(gt: &Domain, pred: &[OperatorSchema], relevant: &BTreeSet<String>) -> Domain {
    let mut d = if relevant.is_empty() {
        gt.clone()
    } else {
        gt.restricted_to(relevant)
    };
    for p in pred {
        if relevant.is_empty() || relevant.contains(&p.key()) {
            d = d.with_schema(p.clone());
        }
    }
    d
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub success: usize,
    pub total: usize,
}

impl Tally {
    pub fn push(&mut self, ok: bool) {
        self.success += usize::from(ok);
        self.total += 1;
    }

    pub fn rate(&self) -> Option<f64> {
        (self.total > 0).then(|| self.success as f64 / self.total as f64)
    }
}

#[derive(Debug, Clone)]
pub struct PlannerReport {
    pub results: Vec<(String, PlanStatus)>,
    /// Fraction of problems solved.
    pub overall: Tally,
    /// Non-empty categories only.
    pub per_category: BTreeMap<String, Tally>,
    /// Pooled over categories; a problem in two categories counts twice.
    pub category_pooled: Tally,
}

fn report(results: Vec<(String, PlanStatus)>, problems: &[PlanningProblem]) -> PlannerReport {
    let mut overall = Tally::default();
    let mut per_category: BTreeMap<String, Tally> = BTreeMap::new();
    let mut pooled = Tally::default();
    for ((_, st), p) in results.iter().zip(problems) {
        let ok = *st == PlanStatus::Found;
        overall.push(ok);
        for c in &p.categories {
            per_category.entry(c.clone()).or_default().push(ok);
            pooled.push(ok);
        }
    }
    PlannerReport {
        results,
        overall,
        per_category,
        category_pooled: pooled,
    }
}

/// Planning success of the ground-truth domain with `pred` substituted,
/// per problem restricted to its relevant operators.
pub fn planner_success(
    gt: &Domain,
    pred: &[OperatorSchema],
    problems: &[PlanningProblem],
    node_budget: usize,
) -> Result<PlannerReport, DomainError> {
    let mut results = Vec::new();
    for p in problems {
        let d = compose(gt, pred, &p.relevant);
        results.push((p.name.clone(), plan(&d, p, node_budget)?.status));
    }
    Ok(report(results, problems))
}

#[derive(Debug, Clone)]
pub struct SensitivityRow {
    pub action: String,
    /// `None` when no problem uses the action.
    pub overall: Option<Tally>,
    pub per_category: BTreeMap<String, Tally>,
    /// Problems that fail with this action substituted.
    pub failures: Vec<String>,
}

impl SensitivityRow {
    pub fn is_applicable(&self) -> bool {
        self.overall.is_some()
    }
}

/// For each predicted operator, planning success with only that operator
/// taken from the prediction and the rest from the ground truth.
pub fn sensitivity(
    gt: &Domain,
    pred: &[OperatorSchema],
    problems: &[PlanningProblem],
    node_budget: usize,
) -> Result<Vec<SensitivityRow>, DomainError> {
    let mut keys: Vec<&OperatorSchema> = pred.iter().collect();
    keys.sort_by_key(|p| p.key());
    keys.dedup_by_key(|p| p.key());
    let mut rows = Vec::new();
    for op in keys {
        let key = op.key();
        let mut row = SensitivityRow {
            action: key.clone(),
            overall: None,
            per_category: BTreeMap::new(),
            failures: Vec::new(),
        };
        for p in problems {
            let uses = if p.relevant.is_empty() {
                gt.schema(&key).is_some()
            } else {
                p.relevant.contains(&key)
            };
            if !uses {
                continue;
            }
            let d = compose(gt, std::slice::from_ref(op), &p.relevant);
            let ok = plan(&d, p, node_budget)?.status == PlanStatus::Found;
            row.overall.get_or_insert_with(Tally::default).push(ok);
            for c in &p.categories {
                row.per_category.entry(c.clone()).or_default().push(ok);
            }
            if !ok {
                row.failures.push(p.name.clone());
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Predicate to category lookup for task categorization.
#[derive(Debug, Clone, Default)]
pub struct CategoryTable {
    map: BTreeMap<String, String>,
}

const BUILTIN_CATEGORIES: &str = include_str!("../../data/predicate_categories.json");

impl CategoryTable {
    /// JSON object mapping category name to a list of predicates.
    pub fn from_json(text: &str) -> Result<CategoryTable, serde_json::Error> {
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(text)?;
        let mut map = BTreeMap::new();
        for (c, preds) in raw {
            for p in preds {
                map.insert(p.to_ascii_lowercase(), c.clone());
            }
        }
        Ok(CategoryTable { map })
    }

    pub fn builtin() -> CategoryTable {
        Self::from_json(BUILTIN_CATEGORIES).expect("built-in category table parses")
    }

    pub fn category(&self, predicate: &str) -> Option<&str> {
        self.map.get(&predicate.to_ascii_lowercase()).map(String::as_str)
    }

    pub fn categories(&self) -> BTreeSet<&str> {
        self.map.values().map(String::as_str).collect()
    }
}

/// Predicates in the definitions of the operators a program uses.
pub fn program_predicates(domain: &Domain, actions: &[GroundAction]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for key in extract_relevant_operators(actions) {
        if let Some(s) = domain.schema(&key) {
            for (p, _) in s.precondition.predicates().into_iter().chain(s.effect.predicates()) {
                if p != "=" {
                    out.insert(p.to_string());
                }
            }
        }
    }
    out
}

/// Top-`k` categories per program by summed inverse document frequency of
/// its predicates. Categories with no predicate in the program are never
/// assigned; ties go to the category name.
pub fn categorize(programs: &[BTreeSet<String>], table: &CategoryTable, k: usize) -> Vec<Vec<String>> {
    let n = programs.len() as f64;
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for p in programs {
        for t in p {
            *df.entry(t.as_str()).or_default() += 1;
        }
    }
    programs
        .iter()
        .map(|p| {
            let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
            for t in p {
                if let Some(c) = table.category(t) {
                    *scores.entry(c).or_default() += (n / df[t.as_str()] as f64).ln();
                }
            }
            let mut ranked: Vec<(&str, f64)> = scores.into_iter().collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
            ranked.into_iter().take(k).map(|(c, _)| c.to_string()).collect()
        })
        .collect()
}

fn pddl_name(s: &str) -> String {
    s.to_ascii_lowercase()
}

/// PDDL domain text for external planners. Object categories become types.
pub fn domain_to_pddl(d: &Domain, categories: &BTreeSet<String>) -> String {
    let mut types: BTreeSet<String> = categories.iter().map(|c| pddl_name(c)).collect();
    for s in d.schemas() {
        types.extend(s.params.iter().map(|p| pddl_name(&p.ty)));
    }
    types.remove("object");
    let mut out = format!("(define (domain {})\n", if d.name.is_empty() { "eai" } else { &d.name });
    out.push_str("  (:requirements :strips :typing :negative-preconditions :disjunctive-preconditions :existential-preconditions :universal-preconditions :conditional-effects)\n");
    if !types.is_empty() {
        out.push_str(&format!("  (:types {} - object)\n", types.into_iter().collect::<Vec<_>>().join(" ")));
    }
    out.push_str("  (:predicates");
    for (p, n) in d.vocabulary().predicates() {
        let args: Vec<String> = (0..n).map(|i| format!(" ?a{i} - object")).collect();
        out.push_str(&format!("\n    ({p}{})", args.concat()));
    }
    out.push_str(")\n");
    for s in d.schemas() {
        for line in s.to_pddl().lines() {
            out.push_str("  ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push(')');
    out.push('\n');
    out
}

/// PDDL problem text. Property tags that name unary predicates of `vocab`
/// are written as initial facts.
pub fn problem_to_pddl(p: &PlanningProblem, domain_name: &str, vocab: &Vocabulary) -> String {
    let u = p.initial.universe();
    let mut out = format!("(define (problem {})\n  (:domain {domain_name})\n  (:objects", pddl_name(&p.name));
    for o in u.objects() {
        out.push_str(&format!("\n    {o} - {}", pddl_name(o.category())));
    }
    out.push_str(")\n  (:init");
    let mut facts: BTreeSet<String> = p.initial.facts().iter().map(|f| f.to_pddl()).collect();
    for o in u.objects() {
        for tag in u.properties(o) {
            if vocab.predicate_arity(tag) == Some(1) {
                facts.insert(format!("({tag} {o})"));
            }
        }
    }
    for f in facts {
        out.push_str(&format!("\n    {f}"));
    }
    out.push_str(")\n  (:goal (and");
    for l in &p.goal {
        if l.positive {
            out.push_str(&format!("\n    {}", l.prop.to_pddl()));
        } else {
            out.push_str(&format!("\n    (not {})", l.prop.to_pddl()));
        }
    }
    out.push_str("))\n)\n");
    out
}

#[cfg(test)]
mod tests;
