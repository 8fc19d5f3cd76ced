//! Task and prediction files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use eai_core::domain::{load_domain, parse_action_blocks, resolve_domain, Domain, OperatorSchema};
use eai_core::executor::execute;
use eai_core::goals::{from_bddl, from_ltl, from_vh_record_with_aliases, parse_bddl_problem, GoalSpec};
use eai_core::world::{GroundAction, ObjectRef, Universe, WorldState};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Objects with property tags and the initially true facts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub objects: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub init: Vec<String>,
}

/// One task as stored on disk. Fields not listed here are kept in `extra`
/// and echoed into the report.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TaskRecord {
    #[serde(default)]
    pub task_name: String,
    #[serde(default, alias = "natural_description", skip_serializing_if = "Option::is_none")]
    pub natural_language_description: Option<String>,
    /// Built-in domain name or a PDDL file relative to the task file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<Scene>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vh_goal: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_bddl_goal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tl_goal: Option<String>,
    #[serde(default)]
    pub action_trajectory: Vec<Value>,
    /// Reference subgoal decomposition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgoals: Option<String>,
    /// Operator definitions overriding the domain's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition_model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
    /// Numeric goal-record ids to scene objects.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub id_aliases: BTreeMap<String, String>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

/// A task resolved against its domain and scene.
#[derive(Debug, Clone)]
pub struct Task {
    pub id: String,
    pub record: TaskRecord,
    pub domain: Arc<Domain>,
    pub initial: WorldState,
    pub goal: GoalSpec,
    pub trajectory: Vec<String>,
    /// Ground actions the reference trajectory executes.
    pub gt_actions: Vec<GroundAction>,
}

impl Task {
    /// Operators the reference trajectory uses.
    pub fn gt_operators(&self) -> Vec<OperatorSchema> {
        let keys = eai_core::tmodel::extract_relevant_operators(&self.gt_actions);
        self.domain
            .schemas()
            .iter()
            .filter(|s| keys.contains(&s.key()))
            .cloned()
            .collect()
    }
}

/// Trajectory entries are raw action strings or `{"action", "object"}`
/// records.
pub fn trajectory_step(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Object(m) => {
            let action = m
                .get("action")
                .and_then(Value::as_str)
                .ok_or_else(|| anyhow!("trajectory record without `action`: {v}"))?;
            let args: Vec<String> = match m.get("object") {
                None | Some(Value::Null) => Vec::new(),
                Some(Value::String(s)) => s.split(',').map(|a| a.trim().to_string()).collect(),
                Some(Value::Array(xs)) => xs.iter().map(|x| x.as_str().unwrap_or_default().to_string()).collect(),
                Some(other) => bail!("unsupported `object` value {other}"),
            };
            Ok(format!("{action}({})", args.join(", ")))
        }
        other => bail!("unsupported trajectory entry {other}"),
    }
}

fn scene_state(scene: &Scene) -> Result<WorldState> {
    let mut b = Universe::builder();
    for (name, tags) in &scene.objects {
        let o = ObjectRef::parse_lenient(name).map_err(|e| anyhow!("object `{name}`: {e}"))?;
        b.add(o, tags.iter().cloned());
    }
    let u = Arc::new(b.build());
    let facts = scene
        .init
        .iter()
        .map(|f| f.parse().map_err(|e| anyhow!("fact `{f}`: {e}")))
        .collect::<Result<Vec<_>>>()?;
    WorldState::new(u, facts).map_err(|e| anyhow!("{e}"))
}

fn bddl_state(text: &str) -> Result<WorldState> {
    let p = parse_bddl_problem(text).map_err(|e| anyhow!("{e}"))?;
    let mut b = Universe::builder();
    for (o, _) in &p.objects {
        b.add(o.clone(), std::iter::empty());
    }
    let u = Arc::new(b.build());
    WorldState::new(u, p.init.iter().filter(|l| l.positive).map(|l| l.prop.clone())).map_err(|e| anyhow!("{e}"))
}

fn load_task_domain(spec: &str, base: &Path) -> Result<Arc<Domain>> {
    if let Some(d) = eai_core::domain::builtin(spec) {
        return Ok(d);
    }
    let path = base.join(spec);
    let text = std::fs::read_to_string(&path).with_context(|| format!("domain file {}", path.display()))?;
    Ok(Arc::new(load_domain(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?))
}

/// Domain named on the command line: a built-in name or a PDDL file.
pub fn load_cli_domain(spec: &str) -> Result<Arc<Domain>> {
    if let Some(d) = eai_core::domain::builtin(spec) {
        return Ok(d);
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("domain file {spec}"))?;
    resolve_domain(&text).map_err(|e| anyhow!("{spec}: {e}"))
}

/// Resolves one record. `default_domain` applies when the record names none.
pub fn resolve_task(id: &str, record: TaskRecord, default_domain: Option<&Arc<Domain>>, base: &Path) -> Result<Task> {
    let mut domain = match &record.domain {
        Some(spec) => load_task_domain(spec, base)?,
        None => default_domain.cloned().ok_or_else(|| anyhow!("no domain given"))?,
    };
    if let Some(tm) = &record.transition_model {
        let mut d = (*domain).clone();
        for s in parse_action_blocks(tm).map_err(|e| anyhow!("transition_model: {e}"))? {
            d = d.with_schema(s);
        }
        domain = Arc::new(d);
    }
    let initial = match (&record.scene, &record.raw_bddl_goal) {
        (Some(s), _) => scene_state(s)?,
        (None, Some(text)) => bddl_state(text)?,
        (None, None) => bail!("no scene and no BDDL problem"),
    };
    let u = initial.universe();
    let goal = if let Some(vh) = &record.vh_goal {
        let mut aliases = BTreeMap::new();
        for (k, v) in &record.id_aliases {
            let id: u32 = k.parse().with_context(|| format!("alias key `{k}`"))?;
            let o = ObjectRef::parse_lenient(v).map_err(|e| anyhow!("alias `{v}`: {e}"))?;
            aliases.insert(id, o);
        }
        from_vh_record_with_aliases(vh, u, &aliases).map_err(|e| anyhow!("vh_goal: {e}"))?
    } else if let Some(text) = &record.raw_bddl_goal {
        from_bddl(text).map_err(|e| anyhow!("raw_bddl_goal: {e}"))?
    } else if let Some(text) = &record.tl_goal {
        from_ltl(text, domain.vocabulary(), u).map_err(|e| anyhow!("tl_goal: {e}"))?
    } else {
        bail!("no goal")
    };
    let trajectory = record
        .action_trajectory
        .iter()
        .map(trajectory_step)
        .collect::<Result<Vec<_>>>()?;
    let trace = execute(&initial, &trajectory, &domain);
    if let Some(step) = trace.failed_step() {
        bail!("reference trajectory fails at step {} ({}): {}", step.index, step.raw, step.category);
    }
    Ok(Task {
        id: id.to_string(),
        gt_actions: trace.applied.clone(),
        record,
        domain,
        initial,
        goal,
        trajectory,
    })
}

/// Reads a task file: an object keyed by task id, or an array of records
/// with an `id` field. Tasks come back sorted by id.
pub fn load_tasks(path: &Path, default_domain: Option<&Arc<Domain>>) -> Result<Vec<Task>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("task file {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("task file {}", path.display()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let mut records: Vec<(String, Value)> = match v {
        Value::Object(m) => m.into_iter().collect(),
        Value::Array(xs) => xs
            .into_iter()
            .map(|mut x| {
                let id = x
                    .as_object_mut()
                    .and_then(|m| m.remove("id"))
                    .and_then(|i| i.as_str().map(String::from))
                    .ok_or_else(|| anyhow!("task record without string `id`"))?;
                Ok((id, x))
            })
            .collect::<Result<_>>()?,
        _ => bail!("task file must hold an object or an array"),
    };
    records.sort_by(|a, b| a.0.cmp(&b.0));
    let mut tasks = Vec::with_capacity(records.len());
    for (i, (id, raw)) in records.iter().enumerate() {
        if i > 0 && records[i - 1].0 == *id {
            bail!("duplicate task id `{id}`");
        }
        let record: TaskRecord = serde_json::from_value(raw.clone()).with_context(|| format!("task `{id}`"))?;
        tasks.push(resolve_task(id, record, default_domain, &base).with_context(|| format!("task `{id}`"))?);
    }
    Ok(tasks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Module {
    GoalInterpretation,
    ActionSequencing,
    SubgoalDecomposition,
    TransitionModeling,
}

impl Module {
    pub fn name(self) -> &'static str {
        match self {
            Module::GoalInterpretation => "goal_interpretation",
            Module::ActionSequencing => "action_sequencing",
            Module::SubgoalDecomposition => "subgoal_decomposition",
            Module::TransitionModeling => "transition_modeling",
        }
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A model output for one task. The payload keys depend on the module:
/// `literals`/`actions` for goal interpretation, `actions` (and optional
/// `attempts` for replanning) for action sequencing, `subgoals` for
/// subgoal decomposition and `operators` for transition modeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    #[serde(alias = "identifier")]
    pub id: String,
    pub module: Module,
    #[serde(flatten)]
    pub payload: BTreeMap<String, Value>,
}

impl PredictionRecord {
    pub fn new(id: &str, module: Module) -> Self {
        PredictionRecord {
            id: id.to_string(),
            module,
            payload: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.payload.insert(key.to_string(), value);
        self
    }

    /// A list of strings, or a single string for `subgoals`-like keys.
    pub fn strings(&self, key: &str) -> Option<Result<Vec<String>>> {
        self.payload.get(key).map(|v| match v {
            Value::Array(xs) => xs.iter().map(trajectory_step).collect(),
            Value::String(s) => Ok(vec![s.clone()]),
            other => Err(anyhow!("`{key}` must be a string list, got {other}")),
        })
    }

    pub fn text(&self, key: &str) -> Option<Result<String>> {
        self.payload.get(key).map(|v| match v {
            Value::String(s) => Ok(s.clone()),
            other => Err(anyhow!("`{key}` must be a string, got {other}")),
        })
    }
}

/// Reads a JSON array of prediction records.
pub fn load_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("prediction file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("prediction file {}", path.display()))
}

/// Predictions of `module` by task id; other modules are ignored.
pub fn index_predictions(preds: &[PredictionRecord], module: Module) -> Result<BTreeMap<String, PredictionRecord>> {
    let mut out = BTreeMap::new();
    for p in preds.iter().filter(|p| p.module == module) {
        if out.insert(p.id.clone(), p.clone()).is_some() {
            bail!("two {module} predictions for task `{}`", p.id);
        }
    }
    Ok(out)
}
