//! Perception-focused model: a cell map with buildings and moving
//! obstacles, a scripted car with a LiDAR grid, and a tick scheduler.

mod grid;
mod lidar;
mod processes;
pub mod reference;

use std::sync::Arc;

use thiserror::Error;

use crate::kernel::{Component, Composition};

pub use grid::{
    collision_at, initiate_map, move_allowed, step_position, valid_move, Actors, CarSpec, CellValue, Direction,
    GridMap, GridScenario, ObstacleRec, Position,
};
pub use lidar::{compute_perception, supercover, PerceptionCell, PerceptionGrid};
pub use processes::{MapManagerState, MapPhase};

pub mod gates {
    pub const GRID_UPDATE: &str = "GRID_UPDATE";
    pub const OBSTACLE_POSITION: &str = "OBSTACLE_POSITION";
    pub const CAR_POSITION: &str = "CAR_POSITION";
    pub const GRID_CAR: &str = "GRID_CAR";
    pub const LIDAR_MAP: &str = "LIDAR_MAP";
    pub const COLLISION: &str = "COLLISION";
    pub const ARRIVAL: &str = "ARRIVAL";
    pub const END_OBSTACLE: &str = "END_OBSTACLE";
    pub const TICK: &str = "TICK";
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PerceptionError {
    #[error("the map needs at least one cell")]
    EmptyMap,
    #[error("`{0}` does not fit on the map")]
    OutOfBounds(String),
    #[error("`{0}` and `{1}` overlap")]
    Overlap(String, String),
    #[error("mobile obstacle kind `{0}` is used twice")]
    DuplicateKind(String),
    #[error("static obstacle `{0}` has a speed or moves")]
    StaticMoves(String),
    #[error("`{0}` is not a valid obstacle kind")]
    BadKind(String),
}

/// Wires one OBSTACLE per mobile obstacle, MAP_MANAGER, MOVE_CAR,
/// LIDAR_MANAGER, SCHEDULER and RESTRAND. With `expose_grid` the LiDAR grid
/// is carried by LIDAR_MAP labels.
pub fn build_grid_composition(scn: &GridScenario, expose_grid: bool) -> Result<Composition, PerceptionError> {
    scn.validate()?;
    let scn = Arc::new(scn.clone());
    let mut components: Vec<Box<dyn Component>> = (0..scn.mobiles.len())
        .map(|i| Box::new(processes::Obstacle::new(i, scn.clone())) as Box<dyn Component>)
        .collect();
    components.push(Box::new(processes::MapManager::new(scn.clone())));
    components.push(Box::new(processes::MoveCar::new(scn.clone())));
    components.push(Box::new(processes::LidarManager::new(scn.clone(), expose_grid)));
    components.push(Box::new(processes::Scheduler::new(&scn)));
    components.push(Box::new(processes::Restrand::new(scn)));
    Ok(Composition::new(components).expect("grid components are well formed"))
}
