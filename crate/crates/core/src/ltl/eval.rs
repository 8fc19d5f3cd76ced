use std::collections::HashMap;

use super::ast::{Atom, AtomKind, Formula, Term};
use super::{resolve, LtlError, Trajectory};
use crate::world::{GroundAction, ObjectRef, Proposition, Vocabulary, WorldState};

/// Truth of `f` on the whole trajectory.
///
/// A subformula without `then` holds on a step range if it holds at some
/// step in the range. `then` splits a range into consecutive non-empty
/// segments. `and`/`or`/quantifiers over temporal children combine the
/// children's range verdicts.
pub fn evaluate(f: &Formula, t: &Trajectory, vocab: &Vocabulary) -> Result<bool, LtlError> {
    let resolved = resolve(f, vocab, t.universe())?;
    let mut ev = Evaluator {
        t,
        objects: t.universe().objects().cloned().collect(),
        memo: HashMap::new(),
        temporal: HashMap::new(),
    };
    let mut env = Vec::new();
    Ok(ev.range(&resolved, &mut env, 0, t.last_step()))
}

/// Truth of a resolved, `then`-free formula at one step: `state` reached by
/// `incoming` (none for the initial state).
pub fn holds_at(f: &Formula, state: &WorldState, incoming: Option<&GroundAction>) -> bool {
    fn go(f: &Formula, s: &WorldState, a: Option<&GroundAction>, env: &mut Vec<(String, ObjectRef)>) -> bool {
        let ground = |at: &Atom, env: &Vec<(String, ObjectRef)>| -> Vec<ObjectRef> {
            at.args
                .iter()
                .map(|t| match t {
                    Term::Obj(o) => o.clone(),
                    Term::Name(n) => env
                        .iter()
                        .rev()
                        .find(|(v, _)| v == n)
                        .map(|(_, o)| o.clone())
                        .expect("bound variable"),
                })
                .collect()
        };
        let each = |v: &str, g: &Formula, env: &mut Vec<(String, ObjectRef)>| -> Vec<bool> {
            let objs: Vec<ObjectRef> = s.universe().objects().cloned().collect();
            objs.into_iter()
                .map(|o| {
                    env.push((v.to_string(), o));
                    let r = go(g, s, a, env);
                    env.pop();
                    r
                })
                .collect()
        };
        match f {
            Formula::Atom(at) => {
                let args = ground(at, env);
                match at.kind {
                    AtomKind::Action => a.is_some_and(|x| x.name() == at.name && x.args() == args.as_slice()),
                    _ => s.holds(&Proposition::new(&at.name, args)),
                }
            }
            Formula::Not(g) => !go(g, s, a, env),
            Formula::And(fs) => fs.iter().all(|g| go(g, s, a, env)),
            Formula::Or(fs) => fs.iter().any(|g| go(g, s, a, env)),
            Formula::Implies(x, y) => !go(x, s, a, env) || go(y, s, a, env),
            Formula::Forall(v, g) => each(v, g, env).into_iter().all(|b| b),
            Formula::Exists(v, g) => each(v, g, env).into_iter().any(|b| b),
            Formula::ForN(v, n, g) => each(v, g, env).into_iter().filter(|&b| b).count() == *n,
            Formula::Then(_) => panic!("point evaluation of a temporal formula"),
        }
    }
    go(f, state, incoming, &mut Vec::new())
}

type Env = Vec<(String, usize)>;

#[derive(PartialEq, Eq, Hash)]
struct Key {
    node: usize,
    part: usize,
    env: Vec<usize>,
    lo: usize,
    hi: usize,
}

struct Evaluator<'a> {
    t: &'a Trajectory,
    objects: Vec<ObjectRef>,
    memo: HashMap<Key, bool>,
    temporal: HashMap<usize, bool>,
}

fn node_id(f: &Formula) -> usize {
    f as *const Formula as usize
}

impl<'a> Evaluator<'a> {
    fn has_then(&mut self, f: &Formula) -> bool {
        *self
            .temporal
            .entry(node_id(f))
            .or_insert_with(|| f.contains_then())
    }

    fn key(&self, f: &Formula, part: usize, env: &Env, lo: usize, hi: usize) -> Key {
        Key {
            node: node_id(f),
            part,
            env: env.iter().map(|(_, o)| *o).collect(),
            lo,
            hi,
        }
    }

    fn lookup(&self, env: &Env, name: &str) -> Option<ObjectRef> {
        env.iter()
            .rev()
            .find(|(v, _)| v == name)
            .map(|(_, o)| self.objects[*o].clone())
    }

    fn ground_args(&self, a: &Atom, env: &Env) -> Vec<ObjectRef> {
        a.args
            .iter()
            .map(|t| match t {
                Term::Obj(o) => o.clone(),
                // resolution guarantees every name is bound
                Term::Name(n) => self.lookup(env, n).expect("bound variable"),
            })
            .collect()
    }

    fn point(&mut self, f: &Formula, env: &mut Env, k: usize) -> bool {
        match f {
            Formula::Atom(a) => {
                let args = self.ground_args(a, env);
                match a.kind {
                    AtomKind::Action => match self.t.incoming(k) {
                        Some(act) => act.name() == a.name && act.args() == args.as_slice(),
                        None => false,
                    },
                    _ => self.t.states()[k].holds(&Proposition::new(&a.name, args)),
                }
            }
            Formula::Not(g) => !self.point(g, env, k),
            Formula::And(fs) => fs.iter().all(|g| self.point(g, env, k)),
            Formula::Or(fs) => fs.iter().any(|g| self.point(g, env, k)),
            Formula::Implies(a, b) => !self.point(a, env, k) || self.point(b, env, k),
            Formula::Forall(v, g) => (0..self.objects.len()).all(|o| self.point_with(v, o, g, env, k)),
            Formula::Exists(v, g) => (0..self.objects.len()).any(|o| self.point_with(v, o, g, env, k)),
            Formula::ForN(v, n, g) => {
                (0..self.objects.len())
                    .filter(|&o| self.point_with(v, o, g, env, k))
                    .count()
                    == *n
            }
            Formula::Then(_) => unreachable!("point evaluation of a temporal formula"),
        }
    }

    fn point_with(&mut self, v: &str, o: usize, g: &Formula, env: &mut Env, k: usize) -> bool {
        env.push((v.to_string(), o));
        let r = self.point(g, env, k);
        env.pop();
        r
    }

    fn range_with(&mut self, v: &str, o: usize, g: &Formula, env: &mut Env, lo: usize, hi: usize) -> bool {
        env.push((v.to_string(), o));
        let r = self.range(g, env, lo, hi);
        env.pop();
        r
    }

    fn range(&mut self, f: &Formula, env: &mut Env, lo: usize, hi: usize) -> bool {
        let key = self.key(f, 0, env, lo, hi);
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        let r = if !self.has_then(f) {
            (lo..=hi).any(|k| self.point(f, env, k))
        } else {
            match f {
                Formula::Then(fs) => self.segments(f, fs, 0, env, lo, hi),
                Formula::And(fs) => fs.iter().all(|g| self.range(g, env, lo, hi)),
                Formula::Or(fs) => fs.iter().any(|g| self.range(g, env, lo, hi)),
                // antecedent is temporal-free by validation
                Formula::Implies(a, b) => {
                    (lo..=hi).any(|k| !self.point(a, env, k)) || self.range(b, env, lo, hi)
                }
                Formula::Forall(v, g) => {
                    (0..self.objects.len()).all(|o| self.range_with(v, o, g, env, lo, hi))
                }
                Formula::Exists(v, g) => {
                    (0..self.objects.len()).any(|o| self.range_with(v, o, g, env, lo, hi))
                }
                Formula::ForN(v, n, g) => {
                    (0..self.objects.len())
                        .filter(|&o| self.range_with(v, o, g, env, lo, hi))
                        .count()
                        == *n
                }
                Formula::Atom(_) | Formula::Not(_) => unreachable!("rejected by validation"),
            }
        };
        self.memo.insert(key, r);
        r
    }

    /// Children `fs[i..]` of the `then` node `node` on `lo..=hi`.
    fn segments(
        &mut self,
        node: &Formula,
        fs: &[Formula],
        i: usize,
        env: &mut Env,
        lo: usize,
        hi: usize,
    ) -> bool {
        let rest = fs.len() - i;
        if hi + 1 < lo + rest {
            return false;
        }
        if rest == 1 {
            return self.range(&fs[i], env, lo, hi);
        }
        let key = self.key(node, i + 1, env, lo, hi);
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        let mut r = false;
        for end in lo..=hi + 1 - rest {
            if self.range(&fs[i], env, lo, end) && self.segments(node, fs, i + 1, env, end + 1, hi) {
                r = true;
                break;
            }
        }
        self.memo.insert(key, r);
        r
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;
    use std::sync::Arc;

    use super::*;
    use crate::ltl::parse;
    use crate::world::{GroundAction, Universe, WorldState};

    fn obj(s: &str) -> ObjectRef {
        s.parse().unwrap()
    }

    /// Trajectory over objects a.1 and b.1 where `a(a.1)` holds at the steps
    /// in `a_at` and `b(b.1)` at the steps in `b_at`.
    fn traj(len: usize, a_at: &[usize], b_at: &[usize]) -> Trajectory {
        let u = Arc::new(
            Universe::builder()
                .object(obj("a.1"), &[])
                .object(obj("b.1"), &[])
                .build(),
        );
        let mut states = Vec::new();
        for k in 0..=len {
            let mut facts = BTreeSet::new();
            if a_at.contains(&k) {
                facts.insert(Proposition::new("a", vec![obj("a.1")]));
            }
            if b_at.contains(&k) {
                facts.insert(Proposition::new("b", vec![obj("b.1")]));
            }
            states.push(WorldState::new(u.clone(), facts).unwrap());
        }
        let actions = (0..len)
            .map(|i| GroundAction::new(if i % 2 == 0 { "GO" } else { "STAY" }, vec![obj("a.1")]))
            .collect();
        Trajectory::new(states, actions).unwrap()
    }

    fn eval(text: &str, t: &Trajectory) -> bool {
        let mut v = Vocabulary::new();
        v.declare_predicate("a", 1);
        v.declare_predicate("b", 1);
        v.declare_action("GO", 1);
        v.declare_action("STAY", 1);
        evaluate(&parse(text).unwrap(), t, &v).unwrap()
    }

    #[test]
    fn eventually_at_step_zero() {
        assert!(eval("a(a.1)", &traj(0, &[0], &[])));
    }

    #[test]
    fn then_ordering() {
        assert!(!eval("a(a.1) then b(b.1)", &traj(4, &[2], &[1])));
        assert!(eval("a(a.1) then b(b.1)", &traj(4, &[1], &[3])));
        // same step cannot serve both segments
        assert!(!eval("a(a.1) then b(b.1)", &traj(4, &[2], &[2])));
    }

    #[test]
    fn actions_never_hold_at_step_zero() {
        let t = traj(2, &[], &[]);
        assert!(eval("GO(a.1)", &t));
        assert!(eval("GO(a.1) then STAY(a.1)", &t));
        assert!(!eval("STAY(a.1) then GO(a.1)", &t));
        assert!(!eval("GO(a.1)", &traj(0, &[], &[])));
    }

    #[test]
    fn quantifiers_over_universe() {
        let t = traj(1, &[0], &[1]);
        assert!(eval("exists x. (a(x))", &t));
        assert!(!eval("forall x. (a(x))", &t));
        assert!(eval("forn(1) x. (a(x))", &t));
        assert!(!eval("forn(2) x. (a(x) or b(x))", &t));
        assert!(eval("forn(0) x. (a(x) and b(x))", &t));
        assert!(eval("exists x. (a(x) then b(b.1))", &t));
    }

    #[test]
    fn flattening_agrees_with_nesting() {
        let t = traj(3, &[1], &[2, 3]);
        for text in ["a(a.1) then b(b.1) then b(b.1)", "(a(a.1) then b(b.1)) then b(b.1)"] {
            assert!(eval(text, &t), "{text}");
        }
    }
}
