//! Composition semantics, state-space exploration, minimization and LTS
//! interchange.

mod action;
pub mod aut;
mod composition;
mod explore;
mod lts;
mod minimize;
mod value;

pub use action::{Action, INTERNAL_GATE};
pub use aut::{export_aut, export_aut_string, import_aut, import_aut_str, AutError};
pub use composition::{
    decode_state, encode_state, Component, Composition, CompositionError, GlobalState, LocalState,
    Move, Process,
};
pub use explore::{explore, ExplorationLimits, ExploreError, LimitKind};
pub use lts::{detect_deadlocks, Lts, LtsBuilder, LtsError};
pub use minimize::{bisimulation_partition, minimize};
pub use value::{is_identifier, Symbol, Value};

/// Builds a gate set from string literals.
pub fn gate_set(gates: &[&str]) -> std::collections::BTreeSet<Symbol> {
    gates.iter().map(Symbol::new).collect()
}
