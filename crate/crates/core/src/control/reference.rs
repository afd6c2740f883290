//! The reference street map: nine crossroads, 22 one-way streets.
//!
//! ```text
//!   0 ==Coronation== 1 ==Victoria== 2
//!   ||               ||             ||
//!   Corporation     Rosamund       Canal
//!   ||               ||             ||
//!   3 ===Market===== 4 ==Oxford==== 5
//!   ||               ||
//!   Deansgate       Quay
//!   ||               ||
//!   6 ==Portland==== 7 ==Albert==== 8
//! ```
//!
//! Every street exists in both directions; the reverse direction carries the
//! `_bis` suffix. Edges are declared grouped by source crossroad.

use super::map::{Edge, GraphMap, ObstacleOp};
use super::ControlScenario;
use crate::kernel::Symbol;

const EDGES: [(u64, &str, u64); 22] = [
    (0, "Coronation_Street", 1),
    (0, "Corporation_Street", 3),
    (1, "Coronation_Street_bis", 0),
    (1, "Victoria_Street", 2),
    (1, "Rosamund_Street", 4),
    (2, "Victoria_Street_bis", 1),
    (2, "Canal_Street", 5),
    (3, "Corporation_Street_bis", 0),
    (3, "Market_Street", 4),
    (3, "Deansgate", 6),
    (4, "Rosamund_Street_bis", 1),
    (4, "Market_Street_bis", 3),
    (4, "Oxford_Road", 5),
    (4, "Quay_Street", 7),
    (5, "Canal_Street_bis", 2),
    (5, "Oxford_Road_bis", 4),
    (6, "Deansgate_bis", 3),
    (6, "Portland_Street", 7),
    (7, "Quay_Street_bis", 4),
    (7, "Portland_Street_bis", 6),
    (7, "Albert_Street", 8),
    (8, "Albert_Street_bis", 7),
];

/// The reference map with the car on Coronation_Street heading for
/// Albert_Street.
pub fn reference_map() -> GraphMap {
    GraphMap::new(
        0..=8,
        EDGES.iter().map(|&(s, n, d)| Edge::new(s, n, d)).collect(),
        "Coronation_Street",
        "Albert_Street",
    )
    .expect("reference map is well formed")
}

/// Reference map with two obstacles performing one random move each.
pub fn reference_scenario() -> ControlScenario {
    ControlScenario {
        map: reference_map(),
        obstacles: vec![
            (Symbol::new("Market_Street"), vec![ObstacleOp::Random]),
            (Symbol::new("Victoria_Street"), vec![ObstacleOp::Random]),
        ],
    }
}
