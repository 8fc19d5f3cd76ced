use std::collections::{BTreeSet, HashSet, VecDeque};

use super::*;
use crate::domain::{builtin, load_domain, parse_action_blocks, parse_cond};
use crate::domain::Cond;
use crate::sexpr::parse_all;
use crate::testutil::{act, fridge, state, triad_state, FRIDGE_PLAN, TRIAD_GT, TRIAD_PRED};
use crate::world::{Literal, WorldState};

fn cond(text: &str) -> Cond {
    parse_cond(&parse_all(text).unwrap()[0]).unwrap()
}

fn op(text: &str) -> OperatorSchema {
    parse_action_blocks(text).unwrap().remove(0)
}

fn keys(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn relevant_operators_are_a_set() {
    let plan: Vec<GroundAction> = FRIDGE_PLAN.iter().map(|a| act(a)).collect();
    assert_eq!(
        extract_relevant_operators(&plan),
        keys(&["CLEAN", "OPEN", "RIGHT_GRASP", "RIGHT_PLACE_NEXTTO", "SOAK", "TOGGLE_OFF", "TOGGLE_ON"])
    );
    assert!(extract_relevant_operators(&[]).is_empty());
    assert_eq!(
        extract_relevant_operators(&[act("OPEN(box.1)"), act("OPEN(box.2)")]),
        keys(&["OPEN"])
    );
}

#[test]
fn logic_matching_examples() {
    let a = cond("(open ?x)");
    assert_eq!(match_expressions(&a, &a), 1.0);
    assert_eq!(match_expressions(&cond("(and (open ?x) (closed ?y))"), &cond("(and (closed ?y) (open ?x))")), 1.0);
    let abc = cond("(and (a ?x) (b ?x) (c ?x))");
    let ab = cond("(and (a ?x) (b ?x))");
    assert_eq!(match_expressions(&abc, &ab), 1.0);
    let s = score_clauses(&abc, &ab);
    assert_eq!(s.counts, crate::goals::Prf { tp: 2, fp: 1, fn_: 0 });
    assert_eq!(s.counts.f1(), 0.8);
    assert_eq!(match_expressions(&cond("(or (a ?x) (b ?x))"), &ab), 0.0);
    assert_eq!(match_expressions(&cond("(not (and (a ?x)))"), &cond("(not (and (a ?x) (b ?x)))")), 1.0);
    // a partially matching nested clause is not a match
    assert_eq!(
        match_expressions(&cond("(and (or (a ?x) (b ?x)) (c ?x))"), &cond("(and (or (a ?x) (d ?x)) (c ?x))")),
        0.5
    );
    assert_eq!(
        match_expressions(&cond("(when (a ?x) (b ?x))"), &cond("(when (a ?x) (and (b ?x) (c ?x)))")),
        0.0
    );
    assert_eq!(
        match_expressions(&cond("(forall (?y - box) (a ?y))"), &cond("(exists (?y - box) (a ?y))")),
        0.0
    );
}

#[test]
fn maximum_matching_beats_greedy() {
    // greedy row-by-row would pair (0,0) and leave row 1 unmatched
    let adj = vec![vec![true, true], vec![true, false]];
    assert_eq!(max_matching(&adj), [(0, 1), (1, 0)]);
    assert!(max_matching(&[]).is_empty());
}

#[test]
fn self_scores_are_perfect() {
    for name in crate::domain::BUILTIN_NAMES {
        let d = builtin(name).unwrap();
        for s in d.schemas() {
            let r = score_operator(s, s);
            assert_eq!(r.overall().f1(), 1.0, "{}", s.name);
            assert_eq!(r.precondition.logic, 1.0);
        }
    }
}

#[test]
fn variables_compare_by_position() {
    let gt = op("(:action PUT :parameters (?o - object ?t - object) :precondition (and (holding ?o) (forall (?c - box) (open ?c))) :effect (ontop ?o ?t))");
    let pred = op("(:action put :parameters (?item - object ?dest - object) :precondition (and (forall (?k - box) (open ?k)) (holding ?item)) :effect (and (ontop ?item ?dest)))");
    let r = score_operator(&pred, &gt);
    assert!(!r.arity_mismatch);
    assert_eq!(r.overall().f1(), 1.0);
    let swapped = op("(:action PUT :parameters (?t - object ?o - object) :precondition (holding ?o) :effect (ontop ?o ?t))");
    assert!(score_operator(&swapped, &gt).effect.counts.tp == 0);
    let other = op("(:action PUT :parameters (?o - object) :effect (ontop ?o ?o))");
    assert!(score_operator(&other, &gt).arity_mismatch);
}

#[test]
fn missing_and_additional_predicates() {
    let vh = builtin("virtualhome-core").unwrap();
    let lie = vh.schema("LIE").unwrap();
    let pred = op(&lie.to_pddl().replace("lieable", "sittable"));
    let r = score_operator(&pred, lie);
    assert_eq!(r.precondition.missing, ["(lieable ?p0)"]);
    assert_eq!(r.precondition.extra, ["(sittable ?p0)"]);
    assert_eq!(r.precondition.counts.tp, 1);

    let gt = op("(:action CLEAN_STAINED_BRUSH :parameters (?brush - object ?o - object) :precondition (and (soaked ?brush) (stained ?o)) :effect (not (stained ?o)))");
    let pred = op("(:action CLEAN_STAINED_BRUSH :parameters (?scrub_brush - object ?o - object) :precondition (and (soaked ?scrub_brush) (stained ?o)) :effect (and (not (stained ?o)) (not (stained ?scrub_brush))))");
    let r = score_operator(&pred, &gt);
    assert_eq!(r.effect.counts, crate::goals::Prf { tp: 1, fp: 1, fn_: 0 });
    assert_eq!(r.effect.extra, ["(not (stained ?p0))"]);
}

fn triad_problem() -> PlanningProblem {
    PlanningProblem {
        name: "turn_on_tv".into(),
        initial: triad_state(),
        goal: vec!["on(tv.1)".parse().unwrap()],
        relevant: keys(&["PLUG_IN", "SWITCH_ON", "WALK_TOWARDS"]),
        categories: vec!["object_states".into()],
    }
}

fn replays(d: &Domain, p: &PlanningProblem, plan: &[GroundAction]) -> bool {
    let mut s = p.initial.clone();
    for a in plan {
        match d.apply(&s, a) {
            Ok(n) => s = n,
            Err(_) => return false,
        }
    }
    p.goal.iter().all(|l| l.holds_in(&s))
}

#[test]
fn planner_triad() {
    let gt = load_domain(TRIAD_GT).unwrap();
    let pred = parse_action_blocks(TRIAD_PRED).unwrap();
    let p = triad_problem();

    let r = plan(&gt, &p, DEFAULT_NODE_BUDGET).unwrap();
    assert_eq!(r.status, PlanStatus::Found);
    assert_eq!(r.plan, [act("PLUG_IN(character.1, tv.1)"), act("SWITCH_ON(character.1, tv.1)")]);
    assert!(replays(&gt, &p, &r.plan));

    let all_pred = compose(&gt, &pred, &p.relevant);
    let r = plan(&all_pred, &p, DEFAULT_NODE_BUDGET).unwrap();
    assert_eq!(r.status, PlanStatus::Found);
    assert!(replays(&all_pred, &p, &r.plan));

    let plug = pred.iter().find(|o| o.key() == "PLUG_IN").unwrap().clone();
    let mixed = compose(&gt, &[plug], &p.relevant);
    let r = plan(&mixed, &p, DEFAULT_NODE_BUDGET).unwrap();
    assert_eq!(r.status, PlanStatus::Closed);
    assert!(r.plan.is_empty());
}

#[test]
fn budget_is_distinguished_from_closed() {
    let d = builtin("behavior-symbolic").unwrap();
    let p = PlanningProblem {
        name: "fridge".into(),
        initial: fridge(),
        goal: vec!["not stained(fridge.97)".parse().unwrap()],
        relevant: BTreeSet::new(),
        categories: vec![],
    };
    assert_eq!(plan(&d, &p, 3).unwrap().status, PlanStatus::Budget);
    let r = plan(&d, &p, DEFAULT_NODE_BUDGET).unwrap();
    assert_eq!(r.status, PlanStatus::Found);
    assert!(replays(&d, &p, &r.plan));
    assert_eq!(r.plan.len(), bfs_shortest(&d, &p.initial, &p.goal, 8).unwrap());
}

/// Plain breadth-first search over `Domain::apply`.
fn bfs_shortest(d: &Domain, s0: &WorldState, goal: &[Literal], max: usize) -> Option<usize> {
    let all = d.ground_actions(s0.universe());
    let mut seen = HashSet::from([s0.clone()]);
    let mut q = VecDeque::from([(s0.clone(), 0)]);
    while let Some((s, n)) = q.pop_front() {
        if goal.iter().all(|l| l.holds_in(&s)) {
            return Some(n);
        }
        if n == max {
            continue;
        }
        for a in &all {
            if let Ok(c) = d.apply(&s, a) {
                if seen.insert(c.clone()) {
                    q.push_back((c, n + 1));
                }
            }
        }
    }
    None
}

#[test]
fn planner_matches_exhaustive_search_on_small_rooms() {
    let d = builtin("behavior-symbolic").unwrap();
    let s = state(
        &[
            ("apple.1", &["small", "cookable"]),
            ("box.1", &["openable", "medium"]),
            ("table.1", &["large"]),
            ("stove.1", &["toggleable", "large"]),
        ],
        &["closed(box.1)", "inside(apple.1, box.1)", "toggled_off(stove.1)"],
    );
    let goals: [&[&str]; 3] = [
        &["ontop(apple.1, table.1)"],
        &["open(box.1)", "toggled_on(stove.1)"],
        &["ontop(apple.1, table.1)", "closed(box.1)"],
    ];
    for g in goals {
        let goal: Vec<Literal> = g.iter().map(|l| l.parse().unwrap()).collect();
        let p = PlanningProblem {
            name: "room".into(),
            initial: s.clone(),
            goal: goal.clone(),
            relevant: BTreeSet::new(),
            categories: vec![],
        };
        let r = plan(&d, &p, DEFAULT_NODE_BUDGET).unwrap();
        match bfs_shortest(&d, &s, &goal, 8) {
            Some(n) => {
                assert_eq!(r.status, PlanStatus::Found, "{g:?}");
                assert_eq!(r.plan.len(), n);
                assert!(replays(&d, &p, &r.plan));
            }
            None => assert_ne!(r.status, PlanStatus::Found, "{g:?}"),
        }
    }
}

#[test]
fn unreachable_goal_closes_the_space() {
    let d = builtin("behavior-symbolic").unwrap();
    let s = state(&[("apple.1", &["small"]), ("box.1", &["openable", "medium"])], &["closed(box.1)"]);
    let goal: Vec<Literal> = vec!["inside(box.1, apple.1)".parse().unwrap()];
    let p = PlanningProblem {
        name: "room".into(),
        initial: s.clone(),
        goal: goal.clone(),
        relevant: BTreeSet::new(),
        categories: vec![],
    };
    let r = plan(&d, &p, DEFAULT_NODE_BUDGET).unwrap();
    assert_eq!(r.status, PlanStatus::Closed);
    assert_eq!(bfs_shortest(&d, &s, &goal, 20), None);
}

fn four_problems() -> Vec<PlanningProblem> {
    let mut out = Vec::new();
    for (i, (tags, cat)) in [
        (&["has_switch"][..], "object_states"),
        (&["has_plug"][..], "object_states"),
        (&["has_switch"][..], "object_affordance"),
        (&[][..], "object_affordance"),
    ]
    .into_iter()
    .enumerate()
    {
        let s = state(
            &[("character.1", &[]), ("tv.1", tags)],
            &["off(tv.1)", "plugged_out(tv.1)", "next_to(character.1, tv.1)"],
        );
        out.push(PlanningProblem {
            name: format!("p{i}"),
            initial: s,
            goal: vec!["on(tv.1)".parse().unwrap()],
            relevant: keys(&["PLUG_IN", "SWITCH_ON"]),
            categories: vec![cat.into()],
        });
    }
    out
}

#[test]
fn planner_success_rates() {
    let gt = load_domain(TRIAD_GT).unwrap();
    let problems = four_problems();
    let r = planner_success(&gt, &[], &problems, DEFAULT_NODE_BUDGET).unwrap();
    // has_plug without has_switch cannot be switched on; no tags at all fails too
    assert_eq!(r.overall.rate(), Some(0.5));
    assert_eq!(r.per_category["object_states"].rate(), Some(0.5));
    assert_eq!(r.per_category.len(), 2);
    assert!(!r.per_category.contains_key("spatial_relations"));
    let solvable: Vec<PlanningProblem> = problems.into_iter().filter(|p| p.name == "p0" || p.name == "p2").collect();
    assert_eq!(planner_success(&gt, &[], &solvable, DEFAULT_NODE_BUDGET).unwrap().overall.rate(), Some(1.0));
}

#[test]
fn sensitivity_baseline_and_defect() {
    let gt = load_domain(TRIAD_GT).unwrap();
    let problems = vec![triad_problem()];
    let base = planner_success(&gt, &[], &problems, DEFAULT_NODE_BUDGET).unwrap();
    let gt_ops: Vec<OperatorSchema> = gt.schemas().to_vec();
    let rows = sensitivity(&gt, &gt_ops, &problems, DEFAULT_NODE_BUDGET).unwrap();
    for r in &rows {
        assert_eq!(r.overall, Some(base.overall), "{}", r.action);
    }
    let pred = parse_action_blocks(TRIAD_PRED).unwrap();
    let rows = sensitivity(&gt, &pred, &problems, DEFAULT_NODE_BUDGET).unwrap();
    let plug = rows.iter().find(|r| r.action == "PLUG_IN").unwrap();
    assert_eq!(plug.overall, Some(Tally { success: 0, total: 1 }));
    assert_eq!(plug.failures, ["turn_on_tv"]);
    let switch = rows.iter().find(|r| r.action == "SWITCH_ON").unwrap();
    assert_eq!(switch.overall.unwrap().success, 1);

    let narrow = PlanningProblem {
        relevant: keys(&["PLUG_IN", "SWITCH_ON"]),
        ..triad_problem()
    };
    let rows = sensitivity(&gt, &pred, &[narrow], DEFAULT_NODE_BUDGET).unwrap();
    assert!(!rows.iter().find(|r| r.action == "WALK_TOWARDS").unwrap().is_applicable());
}

#[test]
fn idf_categorization() {
    let table = CategoryTable::from_json(r#"{"states": ["open", "on"], "spatial": ["inside", "ontop"], "affordance": ["openable"]}"#).unwrap();
    let progs: Vec<BTreeSet<String>> = vec![
        keys(&["open", "openable", "inside"]),
        keys(&["open", "on"]),
        keys(&["open", "ontop", "inside"]),
        keys(&["openable"]),
    ];
    let cats = categorize(&progs, &table, 2);
    // idf: open ln(4/3), openable ln 2, inside ln 2, on ln 4, ontop ln 4
    assert_eq!(cats[0], ["affordance", "spatial"]);
    assert_eq!(cats[1], ["states"]);
    assert_eq!(cats[2], ["spatial", "states"]);
    assert_eq!(cats[3], ["affordance"]);
    assert_eq!(CategoryTable::builtin().category("facing"), Some("object_orientation"));
}

#[test]
fn pddl_export() {
    let gt = load_domain(TRIAD_GT).unwrap();
    let p = triad_problem();
    let text = problem_to_pddl(&p, "triad", gt.vocabulary());
    assert!(text.contains("(:domain triad)"));
    assert!(text.contains("tv.1 - tv"));
    assert!(text.contains("(has_switch tv.1)"));
    assert!(text.contains("(next_to character.1 tv.1)"));
    assert!(text.contains("(:goal (and\n    (on tv.1)))"));
    let cats: BTreeSet<String> = keys(&["character", "tv"]);
    let dom = domain_to_pddl(&gt, &cats);
    assert!(dom.contains("(:types character tv - object)"));
    assert!(dom.contains("(:action plug_in"));
    // the exported actions parse back
    let body = &dom[dom.find("  (:action").unwrap()..dom.rfind(')').unwrap()];
    assert_eq!(parse_action_blocks(body).unwrap().len(), 3);
}
