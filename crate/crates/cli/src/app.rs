use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use eai_core::domain::Domain;
use eai_core::tmodel::{domain_to_pddl, problem_to_pddl};

use crate::data::{load_cli_domain, load_predictions, load_tasks, Module, Task};
use crate::report::Report;
use crate::suite::{eval_suite, pipeline, planning_problem, sensitivity_suite, task_categories, Internal, Options};

#[derive(Debug, Parser)]
#[command(name = "eai", version, about = "Evaluate embodied decision-making modules on symbolic tasks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one module in isolation.
    Eval {
        module: ModuleArg,
        #[command(flatten)]
        common: Common,
        /// Prediction file (JSON array).
        #[arg(long)]
        pred: PathBuf,
    },
    /// Score a downstream module on goals predicted upstream.
    Pipeline {
        #[command(flatten)]
        common: Common,
        /// Goal-interpretation predictions.
        #[arg(long)]
        upstream: PathBuf,
        /// Downstream predictions.
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, value_enum, default_value = "action-seq")]
        downstream: ModuleArg,
    },
    /// Planning success per predicted operator.
    Sensitivity {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pred: PathBuf,
    },
    /// Write PDDL domain and problem files for every task.
    ExportPddl {
        #[command(flatten)]
        common: Common,
    },
    /// Convert a JSON report.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModuleArg {
    GoalInterp,
    ActionSeq,
    Subgoal,
    Transition,
}

impl From<ModuleArg> for Module {
    fn from(m: ModuleArg) -> Module {
        match m {
            ModuleArg::GoalInterp => Module::GoalInterpretation,
            ModuleArg::ActionSeq => Module::ActionSequencing,
            ModuleArg::Subgoal => Module::SubgoalDecomposition,
            ModuleArg::Transition => Module::TransitionModeling,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Default domain for tasks that name none: a built-in name or a PDDL file.
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long)]
    pub tasks: PathBuf,
    /// Output directory; reports go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, default_value_t = eai_core::subgoal::DEFAULT_DEPTH_CAP)]
    pub depth_cap: usize,
    #[arg(long, default_value_t = eai_core::goals::DEFAULT_OPTION_CAP)]
    pub option_cap: usize,
    #[arg(long, default_value_t = eai_core::tmodel::DEFAULT_NODE_BUDGET)]
    pub node_budget: usize,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    /// Probability that a valid action step fails.
    #[arg(long, default_value_t = 0.0)]
    pub fail_prob: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Replanning attempts after a failed run.
    #[arg(long, default_value_t = 0)]
    pub retries: usize,
}

impl Common {
    pub fn options(&self) -> Result<Options> {
        if !(0.0..=1.0).contains(&self.fail_prob) {
            anyhow::bail!("--fail-prob must lie in [0, 1]");
        }
        Ok(Options {
            depth_cap: self.depth_cap,
            option_cap: self.option_cap,
            node_budget: self.node_budget,
            parallel: self.parallel,
            fail_prob: self.fail_prob,
            seed: self.seed,
            retries: self.retries,
            ..Options::default()
        })
    }

    pub fn load(&self) -> Result<Vec<Task>> {
        let d: Option<Arc<Domain>> = self.domain.as_deref().map(load_cli_domain).transpose()?;
        load_tasks(&self.tasks, d.as_ref())
    }
}

fn emit(rep: &Report, out: Option<&Path>, format: Format) -> Result<()> {
    let (text, ext) = match format {
        Format::Json => (rep.to_json(), "json"),
        Format::Csv => (rep.to_csv()?, "csv"),
    };
    match out {
        None => print!("{text}"),
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(format!("{}.{ext}", rep.module));
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

fn export(tasks: &[Task], common: &Common, opts: &Options) -> Result<()> {
    let dir = common.out.as_deref().unwrap_or(Path::new("."));
    let cats = task_categories(tasks, opts);
    for (t, c) in tasks.iter().zip(&cats) {
        let problem = planning_problem(t, c, opts)?;
        let types: BTreeSet<String> = t.initial.universe().categories().into_iter().map(String::from).collect();
        let d = t.domain.restricted_to(&problem.relevant);
        let name = if d.name.is_empty() { "eai" } else { d.name.as_str() };
        let sub = dir.join(&t.id);
        std::fs::create_dir_all(&sub).with_context(|| format!("creating {}", sub.display()))?;
        std::fs::write(sub.join("domain.pddl"), domain_to_pddl(&d, &types))?;
        std::fs::write(sub.join("problem.pddl"), problem_to_pddl(&problem, name, d.vocabulary()))?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Eval { module, common, pred } => {
            let opts = common.options()?;
            let tasks = common.load()?;
            let preds = load_predictions(&pred)?;
            let rep = eval_suite(&tasks, &preds, module.into(), &opts)?;
            emit(&rep, common.out.as_deref(), common.format)
        }
        Command::Pipeline {
            common,
            upstream,
            pred,
            downstream,
        } => {
            let opts = common.options()?;
            let tasks = common.load()?;
            let up = load_predictions(&upstream)?;
            let down = load_predictions(&pred)?;
            let rep = pipeline(&tasks, &up, &down, downstream.into(), &opts)?;
            emit(&rep, common.out.as_deref(), common.format)
        }
        Command::Sensitivity { common, pred } => {
            let opts = common.options()?;
            let tasks = common.load()?;
            let preds = load_predictions(&pred)?;
            let rep = sensitivity_suite(&tasks, &preds, &opts)?;
            emit(&rep, common.out.as_deref(), common.format)
        }
        Command::ExportPddl { common } => {
            let opts = common.options()?;
            let tasks = common.load()?;
            export(&tasks, &common, &opts)
        }
        Command::Report { input, out, format } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let rep = Report::from_json(&text).with_context(|| format!("parsing {}", input.display()))?;
            if !rep.is_consistent_rounded() {
                anyhow::bail!("{}: aggregates do not match the rows", input.display());
            }
            emit(&rep, out.as_deref(), format)
        }
    }
}

/// Process exit code for a run result.
pub fn exit_code(r: &Result<()>) -> i32 {
    match r {
        Ok(()) => 0,
        Err(e) if e.downcast_ref::<Internal>().is_some() => 2,
        Err(_) => 1,
    }
}
