//! The crossroad: four buildings around an X-shaped junction, another car
//! driving north ahead of the ego car and a pedestrian crossing between them.
//!
//! ```text
//!   ####...###
//!   ####...###
//!   ####...###
//!   ####...###
//!   ..........
//!   ..........
//!   ..........
//!   ####..####
//!   ####t..###
//!   ####..C###
//! ```

use super::grid::{CarSpec, Direction, GridScenario, ObstacleRec, Position};
use crate::kernel::Symbol;

pub fn buildings() -> Vec<ObstacleRec> {
    vec![
        ObstacleRec::building("Scenery", 0, 0, 4, 4),
        ObstacleRec::building("Scenery", 7, 0, 3, 4),
        ObstacleRec::building("Scenery", 0, 7, 4, 3),
        ObstacleRec::building("Scenery", 7, 7, 3, 3),
    ]
}

pub fn crossroad_scenario() -> GridScenario {
    use Direction::*;
    let other_car = ObstacleRec {
        kind: Symbol::new("Other_Car"),
        anchor: Position::new(6, 7),
        extent: (1, 1),
        speed: 1,
        direction: Up,
        transparent: false,
        cyclic: false,
        moves: vec![Up, Up, Up, Random, Random, Up, Up],
    };
    let pedestrian = ObstacleRec {
        kind: Symbol::new("Pedestrian"),
        anchor: Position::new(4, 8),
        extent: (1, 1),
        speed: 1,
        direction: Right,
        transparent: true,
        cyclic: false,
        moves: vec![Right, Random, Random, Random, Random, Random, Random, Random, Random, Random],
    };
    GridScenario {
        width: 10,
        height: 10,
        statics: buildings(),
        mobiles: vec![other_car, pedestrian],
        car: CarSpec { position: Position::new(6, 9), speed: 1, moves: vec![None, None, Up, Up, Up, Up, Up, Up], cyclic: false },
        dist_min: 4,
    }
}
