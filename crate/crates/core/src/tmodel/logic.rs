use std::collections::BTreeMap;

use crate::domain::{Arg, Cond, LitPattern, OperatorSchema, TypedVar};
use crate::goals::Prf;

type Names = Vec<(String, String)>;

fn rename_arg(a: &Arg, names: &Names) -> Arg {
    match a {
        Arg::Var(v) => names
            .iter()
            .rev()
            .find(|(from, _)| from == v)
            .map(|(_, to)| Arg::Var(to.clone()))
            .unwrap_or_else(|| a.clone()),
        _ => a.clone(),
    }
}

fn rename(c: &Cond, names: &mut Names) -> Cond {
    let bind = |vs: &[TypedVar], body: &Cond, names: &mut Names| {
        let n = names.len();
        let vs: Vec<TypedVar> = vs
            .iter()
            .map(|v| {
                let to = format!("q{}", names.len());
                names.push((v.name.clone(), to.clone()));
                TypedVar {
                    name: to,
                    ty: v.ty.clone(),
                }
            })
            .collect();
        let body = rename(body, names);
        names.truncate(n);
        (vs, Box::new(body))
    };
    match c {
        Cond::Lit(l) => Cond::Lit(LitPattern {
            predicate: l.predicate.clone(),
            args: l.args.iter().map(|a| rename_arg(a, names)).collect(),
            positive: l.positive,
        }),
        Cond::And(xs) => Cond::And(xs.iter().map(|x| rename(x, names)).collect()),
        Cond::Or(xs) => Cond::Or(xs.iter().map(|x| rename(x, names)).collect()),
        Cond::Not(x) => Cond::Not(Box::new(rename(x, names))),
        Cond::Imply(a, b) => Cond::Imply(Box::new(rename(a, names)), Box::new(rename(b, names))),
        Cond::When(a, b) => Cond::When(Box::new(rename(a, names)), Box::new(rename(b, names))),
        Cond::Forall(vs, x) => {
            let (vs, x) = bind(vs, x, names);
            Cond::Forall(vs, x)
        }
        Cond::Exists(vs, x) => {
            let (vs, x) = bind(vs, x, names);
            Cond::Exists(vs, x)
        }
    }
}

/// Precondition and effect with parameters renamed by position (`p0`,
/// `p1`, ...), implicit variables by order (`e0`, ...) and quantified
/// variables by binding depth.
pub fn alpha_rename(s: &OperatorSchema) -> (Cond, Cond) {
    let mut names: Names = s
        .params
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.clone(), format!("p{i}")))
        .chain(s.implicit.iter().enumerate().map(|(i, v)| (v.name.clone(), format!("e{i}"))))
        .collect();
    (rename(&s.precondition, &mut names), rename(&s.effect, &mut names))
}

/// Maximum matching on a 0/1 bipartite graph (Kuhn's augmenting paths).
/// Returns the matched pairs `(row, col)`, sorted by row.
pub fn max_matching(adj: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let cols = adj.first().map_or(0, Vec::len);
    let mut owner: Vec<Option<usize>> = vec![None; cols];
    fn augment(r: usize, adj: &[Vec<bool>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for c in 0..seen.len() {
            if adj[r][c] && !seen[c] {
                seen[c] = true;
                if owner[c].is_none_or(|o| augment(o, adj, seen, owner)) {
                    owner[c] = Some(r);
                    return true;
                }
            }
        }
        false
    }
    for r in 0..adj.len() {
        let mut seen = vec![false; cols];
        augment(r, adj, &mut seen, &mut owner);
    }
    let mut pairs: Vec<(usize, usize)> = owner
        .iter()
        .enumerate()
        .filter_map(|(c, o)| o.map(|r| (r, c)))
        .collect();
    pairs.sort();
    pairs
}

fn children(c: &Cond) -> Vec<&Cond> {
    match c {
        Cond::And(_) => c.conjuncts(),
        Cond::Or(xs) => xs.iter().collect(),
        _ => vec![c],
    }
}

fn same_vars(a: &[TypedVar], b: &[TypedVar]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.ty.eq_ignore_ascii_case(&y.ty))
}

fn exact(p: &Cond, g: &Cond) -> bool {
    match_expressions(p, g) == 1.0
}

/// Recursive structural similarity in `[0, 1]`. And/Or children are paired
/// by maximum matching over exact child matches and the count is divided
/// by the smaller child count.
pub fn match_expressions(p: &Cond, g: &Cond) -> f64 {
    match (p, g) {
        (Cond::Lit(a), Cond::Lit(b)) => f64::from(u8::from(a == b)),
        (Cond::Not(a), Cond::Not(b)) => match_expressions(a, b),
        (Cond::When(a1, b1), Cond::When(a2, b2)) | (Cond::Imply(a1, b1), Cond::Imply(a2, b2)) => {
            f64::from(u8::from(exact(a1, a2) && exact(b1, b2)))
        }
        (Cond::Forall(v1, x1), Cond::Forall(v2, x2)) | (Cond::Exists(v1, x1), Cond::Exists(v2, x2)) => {
            if same_vars(v1, v2) {
                match_expressions(x1, x2)
            } else {
                0.0
            }
        }
        (Cond::And(_), Cond::And(_)) | (Cond::Or(_), Cond::Or(_)) => {
            let (a, b) = (children(p), children(g));
            let lo = a.len().min(b.len());
            if a.is_empty() && b.is_empty() {
                return 1.0;
            }
            if lo == 0 {
                return 0.0;
            }
            let adj: Vec<Vec<bool>> = a.iter().map(|x| b.iter().map(|y| exact(x, y)).collect()).collect();
            max_matching(&adj).len() as f64 / lo as f64
        }
        _ => 0.0,
    }
}

/// Clause-level comparison of one precondition or effect.
#[derive(Debug, Clone, PartialEq)]
pub struct ClauseScore {
    pub counts: Prf,
    /// [`match_expressions`] on the whole expressions.
    pub logic: f64,
    pub matched: Vec<(String, String)>,
    /// Predicted clauses without a partner (additional predicates).
    pub extra: Vec<String>,
    /// Ground-truth clauses without a partner (missing predicates).
    pub missing: Vec<String>,
}

impl ClauseScore {
    fn zero(pred: &Cond, gt: &Cond) -> ClauseScore {
        let p = pred.conjuncts();
        let g = gt.conjuncts();
        ClauseScore {
            counts: Prf {
                tp: 0,
                fp: p.len(),
                fn_: g.len(),
            },
            logic: 0.0,
            matched: Vec::new(),
            extra: p.iter().map(|c| c.to_string()).collect(),
            missing: g.iter().map(|c| c.to_string()).collect(),
        }
    }
}

/// Bipartite clause matching of two (renamed) expressions.
pub fn score_clauses(pred: &Cond, gt: &Cond) -> ClauseScore {
    let p = pred.conjuncts();
    let g = gt.conjuncts();
    let adj: Vec<Vec<bool>> = p.iter().map(|x| g.iter().map(|y| exact(x, y)).collect()).collect();
    let pairs = max_matching(&adj);
    let used_p: Vec<usize> = pairs.iter().map(|&(i, _)| i).collect();
    let used_g: Vec<usize> = pairs.iter().map(|&(_, j)| j).collect();
    ClauseScore {
        counts: Prf {
            tp: pairs.len(),
            fp: p.len() - pairs.len(),
            fn_: g.len() - pairs.len(),
        },
        logic: match_expressions(
            &Cond::And(p.iter().map(|c| (*c).clone()).collect()),
            &Cond::And(g.iter().map(|c| (*c).clone()).collect()),
        ),
        matched: pairs.iter().map(|&(i, j)| (p[i].to_string(), g[j].to_string())).collect(),
        extra: (0..p.len()).filter(|i| !used_p.contains(i)).map(|i| p[i].to_string()).collect(),
        missing: (0..g.len()).filter(|j| !used_g.contains(j)).map(|j| g[j].to_string()).collect(),
    }
}

/// Comparison of a predicted operator with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub action: String,
    /// Names or parameter counts differ; all scores are zero.
    pub arity_mismatch: bool,
    pub precondition: ClauseScore,
    pub effect: ClauseScore,
}

impl MatchReport {
    pub fn overall(&self) -> Prf {
        let mut p = self.precondition.counts;
        p.add(self.effect.counts);
        p
    }
}

pub fn score_operator(pred: &OperatorSchema, gt: &OperatorSchema) -> MatchReport {
    let (pp, pe) = alpha_rename(pred);
    let (gp, ge) = alpha_rename(gt);
    if pred.key() != gt.key() || pred.params.len() != gt.params.len() {
        return MatchReport {
            action: gt.key(),
            arity_mismatch: true,
            precondition: ClauseScore::zero(&pp, &gp),
            effect: ClauseScore::zero(&pe, &ge),
        };
    }
    MatchReport {
        action: gt.key(),
        arity_mismatch: false,
        precondition: score_clauses(&pp, &gp),
        effect: score_clauses(&pe, &ge),
    }
}

/// Scores for every ground-truth operator that has a prediction, by key.
pub fn score_operators(pred: &[OperatorSchema], gt: &[OperatorSchema]) -> BTreeMap<String, MatchReport> {
    gt.iter()
        .filter_map(|g| {
            pred.iter()
                .find(|p| p.key() == g.key())
                .map(|p| (g.key(), score_operator(p, g)))
        })
        .collect()
}
