use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use crate::domain::{grounded_delta, Domain, DomainError, Grounded};
use crate::world::{GroundAction, Literal, WorldState};

pub const DEFAULT_NODE_BUDGET: usize = 200_000;

/// Initial state and ground state goal for the internal planner.
#[derive(Debug, Clone)]
pub struct PlanningProblem {
    pub name: String,
    pub initial: WorldState,
    pub goal: Vec<Literal>,
    /// Operator keys the problem may use; empty means every operator.
    pub relevant: BTreeSet<String>,
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlanStatus {
    Found,
    /// Every reachable state was expanded without reaching the goal.
    Closed,
    /// The node budget ran out first.
    Budget,
}

impl PlanStatus {
    pub fn name(self) -> &'static str {
        match self {
            PlanStatus::Found => "found",
            PlanStatus::Closed => "closed",
            PlanStatus::Budget => "budget",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlanResult {
    pub status: PlanStatus,
    pub plan: Vec<GroundAction>,
    pub expanded: usize,
    pub generated: usize,
}

fn unmet(goal: &[Literal], s: &WorldState) -> usize {
    goal.iter().filter(|l| !l.holds_in(s)).count()
}

/// Forward uniform-cost search; ties on path length go to the state with
/// fewer unmet goal literals, then to the earlier generated one.
pub fn plan(domain: &Domain, problem: &PlanningProblem, node_budget: usize) -> Result<PlanResult, DomainError> {
    let s0 = &problem.initial;
    let u = s0.universe();
    let mut ops: Vec<Grounded> = Vec::new();
    for a in domain.ground_actions(u) {
        if !problem.relevant.is_empty() && !problem.relevant.contains(&a.name().to_ascii_uppercase()) {
            continue;
        }
        // static preconditions never change, so check them once
        if domain.affordable(s0, &a)? {
            ops.push(domain.ground_action(&a, u)?);
        }
    }
    let mut nodes: Vec<(WorldState, Option<(usize, usize)>)> = vec![(s0.clone(), None)];
    let mut seen: HashMap<WorldState, usize> = HashMap::from([(s0.clone(), 0)]);
    let mut heap = BinaryHeap::from([Reverse((0usize, unmet(&problem.goal, s0), 0usize))]);
    let mut expanded = 0;
    let mut status = PlanStatus::Closed;
    let mut found = None;
    while let Some(Reverse((g, h, id))) = heap.pop() {
        if h == 0 {
            found = Some(id);
            status = PlanStatus::Found;
            break;
        }
        expanded += 1;
        let state = nodes[id].0.clone();
        for (k, op) in ops.iter().enumerate() {
            if !op.precondition.holds(&state, &mut Vec::new()) {
                continue;
            }
            let (add, del) = grounded_delta(op, &state);
            let child = state.apply_delta(&add, &del).expect("grounded effects stay in the universe");
            if seen.contains_key(&child) {
                continue;
            }
            if nodes.len() >= node_budget {
                status = PlanStatus::Budget;
                break;
            }
            let cid = nodes.len();
            seen.insert(child.clone(), cid);
            heap.push(Reverse((g + 1, unmet(&problem.goal, &child), cid)));
            nodes.push((child, Some((id, k))));
        }
        if status == PlanStatus::Budget {
            break;
        }
    }
    let mut plan = Vec::new();
    if let Some(mut id) = found {
        while let Some((parent, k)) = nodes[id].1 {
            plan.push(ops[k].action.clone());
            id = parent;
        }
        plan.reverse();
    }
    Ok(PlanResult {
        status,
        plan,
        expanded,
        generated: nodes.len(),
    })
}
