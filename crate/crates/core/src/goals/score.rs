use std::collections::BTreeMap;

use super::{expand_options, GoalCategory, GoalError, GoalOption, GoalSpec, PredictedGoal};
use crate::world::Universe;

/// Set-matching counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Prf {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Prf {
    fn ratio(num: usize, den: usize, empty: f64) -> f64 {
        if den == 0 {
            empty
        } else {
            num as f64 / den as f64
        }
    }

    fn is_vacuous(&self) -> bool {
        self.tp + self.fp + self.fn_ == 0
    }

    pub fn precision(&self) -> f64 {
        Self::ratio(self.tp, self.tp + self.fp, if self.is_vacuous() { 1.0 } else { 0.0 })
    }

    pub fn recall(&self) -> f64 {
        Self::ratio(self.tp, self.tp + self.fn_, if self.is_vacuous() { 1.0 } else { 0.0 })
    }

    pub fn f1(&self) -> f64 {
        Self::ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_, 1.0)
    }

    pub fn add(&mut self, o: Prf) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct F1Report {
    /// Ground-truth option the prediction was scored against.
    pub option: Option<usize>,
    /// Categories present on either side.
    pub categories: BTreeMap<GoalCategory, Prf>,
    /// Micro average over `categories`.
    pub overall: Prf,
    /// Predicted items excluded from matching.
    pub hallucinated: Vec<String>,
}

fn score_option(pred: &PredictedGoal, o: Option<&GoalOption>, gt: &GoalSpec) -> BTreeMap<GoalCategory, Prf> {
    let mut out = BTreeMap::new();
    for c in [GoalCategory::State, GoalCategory::Relation] {
        let p: Vec<_> = pred.literals.iter().filter(|l| GoalCategory::of(l) == c).collect();
        let g: Vec<_> = o.map(|o| o.of_category(c).collect()).unwrap_or_default();
        let tp = p.iter().filter(|l| g.contains(l)).count();
        let prf = Prf {
            tp,
            fp: p.len() - tp,
            fn_: g.len() - tp,
        };
        if !prf.is_vacuous() {
            out.insert(c, prf);
        }
    }
    // the action list is one element on each side
    let has_pred = !pred.actions.is_empty();
    let has_gt = !gt.actions.is_empty();
    if has_pred || has_gt {
        let same = has_pred
            && has_gt
            && pred.actions.len() == gt.actions.len()
            && pred
                .actions
                .iter()
                .zip(&gt.actions)
                .all(|(p, g)| p.alternatives.iter().all(|pa| g.alternatives.iter().any(|ga| ga == pa || (ga.args.is_none() && ga.name == pa.name))));
        let prf = if same {
            Prf { tp: 1, fp: 0, fn_: 0 }
        } else {
            Prf {
                tp: 0,
                fp: usize::from(has_pred),
                fn_: usize::from(has_gt),
            }
        };
        out.insert(GoalCategory::Action, prf);
    }
    out
}

/// Goal-interpretation scores: the best set-F1 over ground-truth options.
pub fn interpret_f1(pred: &PredictedGoal, gt: &GoalSpec, u: &Universe, cap: usize) -> Result<F1Report, GoalError> {
    let exp = expand_options(gt, u, cap)?;
    let mut best: Option<(Option<usize>, BTreeMap<GoalCategory, Prf>, Prf)> = None;
    let candidates: Vec<Option<usize>> = if exp.options.is_empty() {
        vec![None]
    } else {
        (0..exp.options.len()).map(Some).collect()
    };
    for i in candidates {
        let cats = score_option(pred, i.map(|i| &exp.options[i]), gt);
        let mut overall = Prf::default();
        cats.values().for_each(|p| overall.add(*p));
        if best.as_ref().is_none_or(|(_, _, b)| overall.f1() > b.f1()) {
            best = Some((i, cats, overall));
        }
    }
    let (option, categories, overall) = best.expect("at least one candidate");
    Ok(F1Report {
        option,
        categories,
        overall,
        hallucinated: pred.hallucinated.clone(),
    })
}
