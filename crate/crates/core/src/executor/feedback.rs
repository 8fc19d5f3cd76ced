use std::fmt::Display;

use super::{ErrorCategory, ExecutionTrace, GrammarError, RuntimeError};

/// Goal literals left unsatisfied, rendered, by goal kind.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnsatisfiedGoals {
    pub node: Vec<String>,
    pub edge: Vec<String>,
    pub action: Vec<String>,
}

impl UnsatisfiedGoals {
    pub fn is_empty(&self) -> bool {
        self.node.is_empty() && self.edge.is_empty() && self.action.is_empty()
    }
}

/// `[a, b, c]`
pub fn render_list<T: Display>(items: &[T]) -> String {
    format!(
        "[{}]",
        items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
    )
}

fn explanation(category: ErrorCategory, action: &str) -> String {
    match category {
        ErrorCategory::Runtime(RuntimeError::MissingStep) => format!(
            "MISSING STEP. Missing step means that action {action} needs some other necessary action before its execution."
        ),
        ErrorCategory::Runtime(RuntimeError::WrongOrder) => format!(
            "WRONG ORDER. Wrong order means that action {action} should be executed at an earlier step, when its precondition still held."
        ),
        ErrorCategory::Runtime(RuntimeError::Affordance) => format!(
            "AFFORDANCE ERROR. Affordance error means that the objects in action {action} do not have the properties the action requires."
        ),
        ErrorCategory::Runtime(RuntimeError::AdditionalStep) => format!(
            "ADDITIONAL STEP. Additional step means that the effect of action {action} is already satisfied before its execution."
        ),
        ErrorCategory::Grammar(GrammarError::Parsing) => format!(
            "PARSING ERROR. Parsing error means that action {action} does not follow the required action format."
        ),
        ErrorCategory::Grammar(GrammarError::Hallucination(k)) => format!(
            "HALLUCINATION ERROR. Hallucination error means that action {action} uses an {k} name that does not exist in the environment."
        ),
        ErrorCategory::Grammar(GrammarError::ArgNumber) => format!(
            "ACTION-ARG NUM ERROR. Action-arg num error means that action {action} has the wrong number of arguments."
        ),
        ErrorCategory::None => format!(
            "ACTION FAILURE. Action failure means that action {action} did not take effect and may be attempted again."
        ),
    }
}

/// Replanning feedback for one attempt. Empty when the attempt executed
/// and satisfied every goal.
pub fn feedback_message<S: AsRef<str>>(
    trace: &ExecutionTrace,
    plan: &[S],
    unsatisfied: Option<&UnsatisfiedGoals>,
    retry: usize,
) -> String {
    let actions: Vec<&str> = plan.iter().map(|s| s.as_ref()).collect();
    let actions = render_list(&actions);
    let header = format!("At the {retry} retry, LLM predict the action sequence to be {actions}. ");
    if let Some(step) = trace.failed_step() {
        return format!(
            "{header}Action {} is not executable in the action sequence {actions}. It encounters an error: {}",
            step.raw,
            explanation(step.category, &step.raw)
        );
    }
    match unsatisfied {
        Some(g) if !g.is_empty() => format!(
            "{header}Action sequence {actions} does not satisfy all the goals. Please check the action sequence and try again. Specifically, the following goals are not satisfied: Node goals not satisfied: {} Edge goals not satisfied: {} Action goals not satisfied: {}",
            render_list(&g.node),
            render_list(&g.edge),
            render_list(&g.action)
        ),
        _ => String::new(),
    }
}
