use eai_core::executor::{ErrorCategory, GrammarError, RuntimeError};
use eai_core::ltl::HallucinationKind;
use eai_core::world::WorldState;

use crate::fixtures::{fridge, room};

/// A plan for the built-in symbolic domain with its expected verdict.
pub struct TaxonomyCase {
    pub name: &'static str,
    pub initial: WorldState,
    pub plan: Vec<&'static str>,
    pub stop: usize,
    pub expected: ErrorCategory,
}

fn case(name: &'static str, initial: WorldState, plan: &[&'static str], expected: ErrorCategory) -> TaxonomyCase {
    TaxonomyCase {
        name,
        initial,
        stop: plan.len() - 1,
        plan: plan.to_vec(),
        expected,
    }
}

pub fn cases() -> Vec<TaxonomyCase> {
    use ErrorCategory::{Grammar, Runtime};
    use RuntimeError::*;
    vec![
        case("unbalanced parenthesis", room(), &["OPEN(box.3"], Grammar(GrammarError::Parsing)),
        case(
            "unknown action",
            room(),
            &["OPEN(box.3)", "POUR(book.1)"],
            Grammar(GrammarError::Hallucination(HallucinationKind::Action)),
        ),
        case(
            "unknown object",
            room(),
            &["OPEN(cabinet.9)"],
            Grammar(GrammarError::Hallucination(HallucinationKind::Object)),
        ),
        case("extra argument", room(), &["OPEN(box.3, book.1)"], Grammar(GrammarError::ArgNumber)),
        case("open a shelf", room(), &["OPEN(shelf.12)"], Runtime(Affordance)),
        case("slice a book", room(), &["SLICE(book.1)"], Runtime(Affordance)),
        case("light already on", room(), &["TOGGLE_ON(light.3)"], Runtime(AdditionalStep)),
        case("open twice", room(), &["OPEN(box.3)", "OPEN(box.3)"], Runtime(AdditionalStep)),
        case("close a closed box", room(), &["CLOSE(box.3)"], Runtime(AdditionalStep)),
        case("release before grasp", room(), &["RIGHT_RELEASE(book.1)"], Runtime(MissingStep)),
        case("clean with a dry rag", fridge(), &["OPEN(fridge.97)", "CLEAN(fridge.97)"], Runtime(MissingStep)),
        case(
            "release after placing",
            room(),
            &["RIGHT_GRASP(book.1)", "RIGHT_PLACE_ONTOP(table.2)", "RIGHT_RELEASE(book.1)"],
            Runtime(WrongOrder),
        ),
        case(
            "soak after the sink is off",
            fridge(),
            &[
                "TOGGLE_ON(sink.82)",
                "TOGGLE_OFF(sink.82)",
                "RIGHT_GRASP(rag.0)",
                "RIGHT_PLACE_NEXTTO(sink.82)",
                "SOAK(rag.0)",
            ],
            Runtime(WrongOrder),
        ),
        case(
            "fridge plan",
            fridge(),
            &[
                "RIGHT_GRASP(rag.0)",
                "RIGHT_PLACE_NEXTTO(sink.82)",
                "TOGGLE_ON(sink.82)",
                "SOAK(rag.0)",
                "TOGGLE_OFF(sink.82)",
                "OPEN(fridge.97)",
                "CLEAN(fridge.97)",
            ],
            ErrorCategory::None,
        ),
    ]
}
