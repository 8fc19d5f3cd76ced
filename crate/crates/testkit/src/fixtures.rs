use std::sync::Arc;

use eai_core::world::{GroundAction, ObjectRef, Universe, WorldState};

pub fn obj(s: &str) -> ObjectRef {
    s.parse().unwrap()
}

pub fn act(s: &str) -> GroundAction {
    let (name, rest) = s.split_once('(').unwrap_or((s, ")"));
    let args = rest
        .trim_end_matches(')')
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(obj)
        .collect();
    GroundAction::new(name, args)
}

/// Objects as `(name, tags)`, facts as proposition text.
pub fn state(objects: &[(&str, &[&str])], facts: &[&str]) -> WorldState {
    let mut b = Universe::builder();
    for (o, tags) in objects {
        b = b.object(obj(o), tags);
    }
    WorldState::new(Arc::new(b.build()), facts.iter().map(|p| p.parse().unwrap())).unwrap()
}

pub fn fridge() -> WorldState {
    state(
        &[
            ("rag.0", &["soakable", "cleaning_tool", "small"]),
            ("sink.82", &["toggleable", "large"]),
            ("fridge.97", &["openable", "large"]),
            ("countertop.84", &["large"]),
        ],
        &["closed(fridge.97)", "stained(fridge.97)", "toggled_off(sink.82)", "ontop(rag.0, countertop.84)"],
    )
}

pub const FRIDGE_PLAN: [&str; 7] = [
    "RIGHT_GRASP(rag.0)",
    "RIGHT_PLACE_NEXTTO(sink.82)",
    "TOGGLE_ON(sink.82)",
    "SOAK(rag.0)",
    "TOGGLE_OFF(sink.82)",
    "OPEN(fridge.97)",
    "CLEAN(fridge.97)",
];

pub const FRIDGE_SUBGOALS: &str = "next_to(rag.0, sink.82) then toggled_on(sink.82) then soaked(rag.0) then toggled_off(sink.82) then open(fridge.97) then not stained(fridge.97)";

/// Room with a non-openable shelf, a light that is on, a book on a table
/// and a closed box.
pub fn room() -> WorldState {
    state(
        &[
            ("shelf.12", &["large"]),
            ("light.3", &["toggleable", "large"]),
            ("book.1", &["small"]),
            ("table.2", &["large"]),
            ("box.3", &["openable", "medium"]),
        ],
        &["toggled_on(light.3)", "ontop(book.1, table.2)", "closed(box.3)"],
    )
}

pub const TRIAD_GT: &str = "
(:action plug_in
  :parameters (?char - character ?obj - object)
  :precondition (or (and (next_to ?char ?obj) (has_plug ?obj)
                (plugged_out ?obj)) (and (next_to ?char ?obj)
                (has_switch ?obj) (plugged_out ?obj)))
  :effect (and (plugged_in ?obj) (not (plugged_out ?obj)))
)
(:action walk_towards
  :parameters (?char - character ?obj - object)
  :precondition (and (not (sitting ?char)) (not (lying ?char))
              (next_to ?char ?obj) (forall (?far_obj - object)
              (when (not (obj_next_to ?far_obj ?obj))
              (not (next_to ?char ?far_obj)))) (forall (?close_obj - object)
              (when (obj_next_to ?close_obj ?obj)
              (next_to ?char ?close_obj))))
  :effect (and (next_to ?char ?obj))
)
(:action switch_on
  :parameters (?char - character ?obj - object)
  :precondition (and (has_switch ?obj) (off ?obj)
              (plugged_in ?obj) (next_to ?char ?obj))
  :effect (and (on ?obj) (not (off ?obj)))
)";

pub const TRIAD_PRED: &str = "
(:action plug_in
  :parameters (?char - character ?obj - object)
  :precondition (and (has_plug ?obj) (plugged_out ?obj)
              (next_to ?char ?obj))
  :effect (and (plugged_in ?obj) (not (plugged_out ?obj)))
)
(:action walk_towards
  :parameters (?char - character ?obj - object)
  :precondition (and (inside ?char ?room) (inside ?obj ?room))
  :effect (next_to ?char ?obj)
)
(:action switch_on
  :parameters (?char - character ?obj - object)
  :precondition (and (has_switch ?obj) (off ?obj)
              (next_to ?char ?obj))
  :effect (and (on ?obj) (not (off ?obj)))
)";

/// Character next to a switch-only television that is off and unplugged.
pub fn triad_state() -> WorldState {
    state(
        &[("character.1", &[]), ("tv.1", &["has_switch"])],
        &["off(tv.1)", "plugged_out(tv.1)", "next_to(character.1, tv.1)"],
    )
}
