//! Reference evaluator for trajectory formulas and a random case generator.
//!
//! The oracle substitutes objects for variables instead of keeping an
//! environment and tries every segmentation of a step range explicitly.

use std::collections::BTreeSet;
use std::sync::Arc;

use eai_core::ltl::{Atom, AtomKind, Formula, Term, Trajectory};
use eai_core::world::{GroundAction, ObjectRef, Proposition, Universe, Vocabulary, WorldState};
use rand::Rng;

pub struct Case {
    pub formula: Formula,
    pub trajectory: Trajectory,
}

/// `p/1`, `q/1`, `r/2`, actions `GO/1` and `PUT/2`.
pub fn vocabulary() -> Vocabulary {
    let mut v = Vocabulary::new();
    v.declare_predicate("p", 1);
    v.declare_predicate("q", 1);
    v.declare_predicate("r", 2);
    v.declare_action("GO", 1);
    v.declare_action("PUT", 2);
    v
}

struct Gen<'a, R: Rng> {
    rng: &'a mut R,
    objects: Vec<ObjectRef>,
    vars: Vec<String>,
    fresh: usize,
    then_left: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn term(&mut self) -> Term {
        if !self.vars.is_empty() && self.rng.gen_bool(0.5) {
            Term::Name(self.vars[self.rng.gen_range(0..self.vars.len())].clone())
        } else {
            Term::Obj(self.objects[self.rng.gen_range(0..self.objects.len())].clone())
        }
    }

    fn atom(&mut self) -> Formula {
        let (name, n) = [("p", 1), ("q", 1), ("r", 2), ("GO", 1), ("PUT", 2)][self.rng.gen_range(0..5)];
        let args = (0..n).map(|_| self.term()).collect();
        Formula::Atom(Atom {
            name: name.to_string(),
            args,
            kind: AtomKind::Unresolved,
        })
    }

    fn formula(&mut self, depth: usize, temporal: bool) -> Formula {
        if depth == 0 {
            return self.atom();
        }
        let then_ok = temporal && self.then_left >= 2;
        let pick = self.rng.gen_range(0..if then_ok { 11 } else { 9 });
        match pick {
            0 | 1 => self.atom(),
            2 => Formula::not(self.formula(depth - 1, false)),
            3 | 4 => {
                let n = self.rng.gen_range(2..=3);
                let fs = (0..n).map(|_| self.formula(depth - 1, temporal)).collect();
                if pick == 3 {
                    Formula::And(fs)
                } else {
                    Formula::Or(fs)
                }
            }
            5 => Formula::Implies(
                Box::new(self.formula(depth - 1, false)),
                Box::new(self.formula(depth - 1, temporal)),
            ),
            6..=8 => {
                let v = format!("x{}", self.fresh);
                self.fresh += 1;
                self.vars.push(v.clone());
                let body = Box::new(self.formula(depth - 1, temporal));
                self.vars.pop();
                match pick {
                    6 => Formula::Forall(v, body),
                    7 => Formula::Exists(v, body),
                    _ => Formula::ForN(v, self.rng.gen_range(0..=2), body),
                }
            }
            _ => {
                let n = self.rng.gen_range(2..=self.then_left.min(4));
                self.then_left -= n;
                Formula::Then((0..n).map(|_| self.formula(depth - 1, temporal)).collect())
            }
        }
    }
}

/// A formula of depth at most 3 with at most 4 `then` children in total,
/// and a trajectory of at most 6 actions over at most 4 objects.
pub fn random_case<R: Rng>(rng: &mut R) -> Case {
    let m = rng.gen_range(1..=4);
    let objects: Vec<ObjectRef> = (1..=m).map(|i| ObjectRef::new("o", i).unwrap()).collect();
    let mut b = Universe::builder();
    for o in &objects {
        b = b.object(o.clone(), &[]);
    }
    let u = Arc::new(b.build());
    let len = rng.gen_range(0..=6);
    let mut states = Vec::new();
    for _ in 0..=len {
        let mut facts = BTreeSet::new();
        for a in &objects {
            for p in ["p", "q"] {
                if rng.gen_bool(0.4) {
                    facts.insert(Proposition::new(p, vec![a.clone()]));
                }
            }
            for c in &objects {
                if rng.gen_bool(0.2) {
                    facts.insert(Proposition::new("r", vec![a.clone(), c.clone()]));
                }
            }
        }
        states.push(WorldState::new(u.clone(), facts).unwrap());
    }
    let actions = (0..len)
        .map(|_| {
            let pick = |rng: &mut R| objects[rng.gen_range(0..objects.len())].clone();
            if rng.gen_bool(0.5) {
                GroundAction::new("GO", vec![pick(rng)])
            } else {
                GroundAction::new("PUT", vec![pick(rng), pick(rng)])
            }
        })
        .collect();
    let depth = rng.gen_range(0..=3);
    let mut g = Gen {
        rng,
        objects,
        vars: Vec::new(),
        fresh: 0,
        then_left: 4,
    };
    Case {
        formula: g.formula(depth, true),
        trajectory: Trajectory::new(states, actions).unwrap(),
    }
}

fn subst(f: &Formula, v: &str, o: &ObjectRef) -> Formula {
    let rec = |g: &Formula| subst(g, v, o);
    match f {
        Formula::Atom(a) => Formula::Atom(Atom {
            name: a.name.clone(),
            args: a
                .args
                .iter()
                .map(|t| match t {
                    Term::Name(n) if n == v => Term::Obj(o.clone()),
                    t => t.clone(),
                })
                .collect(),
            kind: a.kind,
        }),
        Formula::Not(g) => Formula::not(rec(g)),
        Formula::And(fs) => Formula::And(fs.iter().map(rec).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(rec).collect()),
        Formula::Then(fs) => Formula::Then(fs.iter().map(rec).collect()),
        Formula::Implies(a, b) => Formula::Implies(Box::new(rec(a)), Box::new(rec(b))),
        Formula::Forall(w, _) | Formula::Exists(w, _) | Formula::ForN(w, _, _) if w == v => f.clone(),
        Formula::Forall(w, g) => Formula::Forall(w.clone(), Box::new(rec(g))),
        Formula::Exists(w, g) => Formula::Exists(w.clone(), Box::new(rec(g))),
        Formula::ForN(w, n, g) => Formula::ForN(w.clone(), *n, Box::new(rec(g))),
    }
}

fn args(a: &Atom) -> Vec<ObjectRef> {
    a.args
        .iter()
        .map(|t| match t {
            Term::Obj(o) => o.clone(),
            Term::Name(n) => panic!("unbound {n}"),
        })
        .collect()
}

fn objects(t: &Trajectory) -> Vec<ObjectRef> {
    t.universe().objects().cloned().collect()
}

/// Truth of a ground formula without `then` at step `k`.
fn point(f: &Formula, t: &Trajectory, k: usize) -> bool {
    match f {
        Formula::Atom(a) if a.name.starts_with(|c: char| c.is_ascii_uppercase()) => {
            k > 0 && t.actions()[k - 1] == GroundAction::new(&a.name, args(a))
        }
        Formula::Atom(a) => t.states()[k].holds(&Proposition::new(&a.name, args(a))),
        Formula::Not(g) => !point(g, t, k),
        Formula::And(fs) => fs.iter().all(|g| point(g, t, k)),
        Formula::Or(fs) => fs.iter().any(|g| point(g, t, k)),
        Formula::Implies(a, b) => !point(a, t, k) || point(b, t, k),
        Formula::Forall(v, g) => objects(t).iter().all(|o| point(&subst(g, v, o), t, k)),
        Formula::Exists(v, g) => objects(t).iter().any(|o| point(&subst(g, v, o), t, k)),
        Formula::ForN(v, n, g) => objects(t).iter().filter(|o| point(&subst(g, v, o), t, k)).count() == *n,
        Formula::Then(_) => panic!("then at a single step"),
    }
}

/// Every split of `lo..=hi` into `n` consecutive non-empty ranges.
pub fn segmentations(lo: usize, hi: usize, n: usize) -> Vec<Vec<(usize, usize)>> {
    if n == 0 || hi + 1 < lo + n {
        return Vec::new();
    }
    if n == 1 {
        return vec![vec![(lo, hi)]];
    }
    let mut out = Vec::new();
    for end in lo..=hi {
        for mut rest in segmentations(end + 1, hi, n - 1) {
            rest.insert(0, (lo, end));
            out.push(rest);
        }
    }
    out
}

fn on(f: &Formula, t: &Trajectory, lo: usize, hi: usize) -> bool {
    if !f.contains_then() {
        return (lo..=hi).any(|k| point(f, t, k));
    }
    match f {
        Formula::Then(fs) => segmentations(lo, hi, fs.len())
            .iter()
            .any(|seg| fs.iter().zip(seg).all(|(g, &(a, b))| on(g, t, a, b))),
        Formula::And(fs) => fs.iter().all(|g| on(g, t, lo, hi)),
        Formula::Or(fs) => fs.iter().any(|g| on(g, t, lo, hi)),
        Formula::Implies(a, b) => (lo..=hi).any(|k| !point(a, t, k)) || on(b, t, lo, hi),
        Formula::Forall(v, g) => objects(t).iter().all(|o| on(&subst(g, v, o), t, lo, hi)),
        Formula::Exists(v, g) => objects(t).iter().any(|o| on(&subst(g, v, o), t, lo, hi)),
        Formula::ForN(v, n, g) => objects(t).iter().filter(|o| on(&subst(g, v, o), t, lo, hi)).count() == *n,
        Formula::Atom(_) | Formula::Not(_) => unreachable!("no then below an atom or negation"),
    }
}

/// Truth of `f` over the whole trajectory. Object arguments must already be
/// objects of the trajectory's universe.
pub fn oracle(f: &Formula, t: &Trajectory) -> bool {
    on(f, t, 0, t.last_step())
}
