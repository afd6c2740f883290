//! Control-focused model: the car as radar, GPS, decision and action
//! components driving on a directed street graph among scripted obstacles.

mod map;
mod processes;
pub mod reference;

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::kernel::{Component, Composition, Symbol};

pub use map::{
    apply_control, compute_itinerary, consistent_move, expand_random, successors, Control, Edge,
    GraphMap, Itinerary, ItineraryStatus, ObstacleOp, RadarGrid,
};
pub use processes::{MapPhase, MapState};

/// Gate names of the control model.
pub mod gates {
    pub const UPDATE_GRID: &str = "UPDATE_GRID";
    pub const CURRENT_GRID: &str = "CURRENT_GRID";
    pub const REQUEST_POSITION: &str = "REQUEST_POSITION";
    pub const CURRENT_POSITION: &str = "CURRENT_POSITION";
    pub const UPDATE_POSITION: &str = "UPDATE_POSITION";
    pub const REQUEST_PATH: &str = "REQUEST_PATH";
    pub const CURRENT_PATH: &str = "CURRENT_PATH";
    pub const ARRIVAL: &str = "ARRIVAL";
    pub const CAR_MOVE: &str = "CAR_MOVE";
    pub const COLLISION: &str = "COLLISION";
    pub const OBSTACLE_MOVE: &str = "OBSTACLE_MOVE";
    pub const END_OBSTACLE: &str = "END_OBSTACLE";
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ControlError {
    #[error("unknown street `{0}`")]
    UnknownStreet(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(u64),
    #[error("street `{0}` is declared twice")]
    DuplicateStreet(String),
    #[error("obstacles {0} and {1} start on the same street")]
    SharedStart(usize, usize),
    #[error("obstacle {0} starts on the car's street")]
    StartsOnCar(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlScenario {
    pub map: GraphMap,
    /// Initial street and scripted moves of each obstacle.
    pub obstacles: Vec<(Symbol, Vec<ObstacleOp>)>,
}

impl ControlScenario {
    pub fn validate(&self) -> Result<(), ControlError> {
        let mut seen: Vec<&Symbol> = Vec::new();
        for (i, (street, _)) in self.obstacles.iter().enumerate() {
            self.map.edge(street)?;
            if street == self.map.car_position() {
                return Err(ControlError::StartsOnCar(i));
            }
            if let Some(j) = seen.iter().position(|s| *s == street) {
                return Err(ControlError::SharedStart(j, i));
            }
            seen.push(street);
        }
        Ok(())
    }
}

/// Terminal gates of the control model.
pub fn terminal_gates() -> BTreeSet<Symbol> {
    crate::kernel::gate_set(&[gates::ARRIVAL, gates::COLLISION, gates::END_OBSTACLE])
}

/// Wires the car components, one obstacle per scenario entry and the map
/// manager into a composition.
pub fn build_control_composition(scn: &ControlScenario) -> Result<Composition, ControlError> {
    scn.validate()?;
    let map = Arc::new(scn.map.clone());
    let mut components: Vec<Box<dyn Component>> = vec![
        Box::new(processes::PerceptionRadar::new()),
        Box::new(processes::PerceptionGps::new(map.car_position().clone())),
        Box::new(processes::Decision::new(map.clone())),
        Box::new(processes::ActionController::new(map.clone())),
    ];
    for (i, (start, moves)) in scn.obstacles.iter().enumerate() {
        components.push(Box::new(processes::Obstacle::new(
            i as u64,
            map.clone(),
            start.clone(),
            moves.clone(),
        )));
    }
    components.push(Box::new(processes::MapManagement::new(
        map,
        scn.obstacles.iter().map(|(s, _)| s.clone()).collect(),
    )));
    Ok(Composition::new(components).expect("control components are well formed"))
}
