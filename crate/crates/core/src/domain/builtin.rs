use std::sync::{Arc, OnceLock};

use super::{load_domain, Domain};

const BEHAVIOR_SYMBOLIC: &str = include_str!("../../data/behavior_symbolic.pddl");
const VIRTUALHOME_CORE: &str = include_str!("../../data/virtualhome_core.pddl");

pub const BUILTIN_NAMES: [&str; 2] = ["behavior-symbolic", "virtualhome-core"];

/// Built-in domain by name.
pub fn builtin(name: &str) -> Option<Arc<Domain>> {
    static BEHAVIOR: OnceLock<Arc<Domain>> = OnceLock::new();
    static VIRTUALHOME: OnceLock<Arc<Domain>> = OnceLock::new();
    let (cell, text) = match name.trim().to_ascii_lowercase().as_str() {
        "behavior-symbolic" | "behavior" => (&BEHAVIOR, BEHAVIOR_SYMBOLIC),
        "virtualhome-core" | "virtualhome" => (&VIRTUALHOME, VIRTUALHOME_CORE),
        _ => return None,
    };
    Some(Arc::clone(cell.get_or_init(|| {
        Arc::new(load_domain(text).expect("built-in domain parses"))
    })))
}

/// Source text of a built-in domain.
pub fn builtin_source(name: &str) -> Option<&'static str> {
    match name.trim().to_ascii_lowercase().as_str() {
        "behavior-symbolic" | "behavior" => Some(BEHAVIOR_SYMBOLIC),
        "virtualhome-core" | "virtualhome" => Some(VIRTUALHOME_CORE),
        _ => None,
    }
}
