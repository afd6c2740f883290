//! Obstacles, map manager, car, LiDAR, scheduler and random-move restriction.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::gates::*;
use super::grid::{collision_at, move_allowed, step_position, valid_move, Actors, Direction, GridMap, GridScenario, Position};
use super::lidar::{compute_perception, PerceptionGrid};
use crate::kernel::{gate_set, Action, Move, Process, Symbol, Value};

fn kind_value(k: &Symbol) -> Value {
    Value::Sym(k.clone())
}

/// Concrete directions a scripted direction stands for.
fn resolve(dir: Direction) -> Vec<Direction> {
    match dir {
        Direction::Random => Direction::CONCRETE.to_vec(),
        d => vec![d],
    }
}

/// Index of the next scripted move after `next`, or `None` when the list is
/// exhausted.
fn advance(next: usize, len: usize, cyclic: bool) -> Option<usize> {
    if next + 1 < len {
        Some(next + 1)
    } else if cyclic {
        Some(0)
    } else {
        None
    }
}

pub struct Obstacle {
    index: usize,
    name: String,
    gates: BTreeSet<Symbol>,
    scn: Arc<GridScenario>,
}

#[derive(Clone, Serialize, Deserialize)]
pub enum ObstaclePhase {
    Idle,
    /// Candidate (resolved direction, destination) pairs for the current
    /// turn, with the direction they were requested as.
    Turn(Direction, Vec<(Direction, Position)>),
    Ending,
}

#[derive(Serialize, Deserialize)]
pub struct ObstacleState {
    position: Position,
    /// Next scripted move; `None` once the list is exhausted.
    next: Option<usize>,
    ended: bool,
    phase: ObstaclePhase,
}

impl Obstacle {
    pub fn new(index: usize, scn: Arc<GridScenario>) -> Self {
        Obstacle {
            index,
            name: format!("OBSTACLE_{}", scn.mobiles[index].kind),
            gates: gate_set(&[GRID_UPDATE, OBSTACLE_POSITION]),
            scn,
        }
    }

    fn kind(&self) -> &Symbol {
        &self.scn.mobiles[self.index].kind
    }

    fn stay(position: Position) -> ObstaclePhase {
        ObstaclePhase::Turn(Direction::None, vec![(Direction::None, position)])
    }

    fn candidates(&self, actors: &Actors, position: Position, requested: Direction) -> ObstaclePhase {
        let rec = &self.scn.mobiles[self.index];
        let valid: Vec<(Direction, Position)> = resolve(requested)
            .into_iter()
            .filter_map(|d| valid_move(&self.scn, actors, self.index, d).map(|to| (d, to)))
            .filter(|&(d, _)| {
                requested != Direction::Random || move_allowed(actors.car, &rec.at(position), d, self.scn.dist_min)
            })
            .collect();
        if valid.is_empty() {
            // blocked, or no random choice approaches the car: stay put
            Obstacle::stay(position)
        } else {
            ObstaclePhase::Turn(requested, valid)
        }
    }
}

impl Process for Obstacle {
    type State = ObstacleState;

    fn name(&self) -> &str {
        &self.name
    }

    fn sync_gates(&self) -> &BTreeSet<Symbol> {
        &self.gates
    }

    fn initial(&self) -> ObstacleState {
        let rec = &self.scn.mobiles[self.index];
        let next = (!rec.moves.is_empty()).then_some(0);
        ObstacleState { position: rec.anchor, next, ended: false, phase: ObstaclePhase::Idle }
    }

    fn moves(&self, s: &ObstacleState) -> Vec<Move<ObstacleState>> {
        let rec = &self.scn.mobiles[self.index];
        let kind = kind_value(self.kind());
        // every obstacle takes part in the turns of the others
        let mut moves = vec![Move::listen(GRID_UPDATE), Move::listen(OBSTACLE_POSITION)];
        match &s.phase {
            ObstaclePhase::Idle => {}
            ObstaclePhase::Ending => {
                let next = ObstacleState { ended: true, phase: Obstacle::stay(s.position), ..*s };
                moves.push(Move::emit(END_OBSTACLE, vec![kind], next));
            }
            ObstaclePhase::Turn(requested, candidates) => {
                let next = s.next.and_then(|i| advance(i, rec.moves.len(), rec.cyclic));
                moves.extend(candidates.iter().map(|&(dir, to)| {
                        let offers = vec![
                            kind.clone(),
                            s.position.to_value(),
                            to.to_value(),
                            dir.to_value(),
                            requested.to_value(),
                        ];
                        let state = ObstacleState { position: to, next, ended: s.ended, phase: ObstaclePhase::Idle };
                    Move::emit(OBSTACLE_POSITION, offers, state)
                }));
            }
        }
        moves
    }

    fn accept(&self, s: &ObstacleState, action: &Action) -> Option<ObstacleState> {
        let mine = action.offers.first()?.as_sym() == Some(self.kind());
        if !mine {
            return Some(ObstacleState { phase: s.phase.clone(), ..*s });
        }
        let [_, snapshot] = action.offers.as_slice() else { return None };
        if !action.gate_is(GRID_UPDATE) || !matches!(s.phase, ObstaclePhase::Idle) {
            return None;
        }
        let actors = Actors::from_value(snapshot)?;
        let rec = &self.scn.mobiles[self.index];
        let phase = match s.next {
            None if !rec.cyclic && !s.ended => ObstaclePhase::Ending,
            None => Obstacle::stay(s.position),
            Some(i) => self.candidates(&actors, s.position, rec.moves[i]),
        };
        Some(ObstacleState { phase, ..*s })
    }
}

pub struct MapManager {
    gates: BTreeSet<Symbol>,
    scn: Arc<GridScenario>,
}

#[derive(Clone, Serialize, Deserialize)]
pub enum MapPhase {
    /// Hand the map to obstacle `j`.
    Update(usize),
    /// Wait for obstacle `j` to move.
    Await(usize),
    ShareCar,
    AwaitCar,
    Collide(Symbol),
    Tick,
    Halted,
}

#[derive(Clone, Serialize, Deserialize)]
pub struct MapManagerState {
    pub actors: Actors,
    pub phase: MapPhase,
}

impl MapManager {
    pub fn new(scn: Arc<GridScenario>) -> Self {
        MapManager {
            gates: gate_set(&[GRID_UPDATE, OBSTACLE_POSITION, GRID_CAR, CAR_POSITION, COLLISION, ARRIVAL, TICK]),
            scn,
        }
    }

    fn first_turn(&self) -> MapPhase {
        if self.scn.mobiles.is_empty() {
            MapPhase::ShareCar
        } else {
            MapPhase::Update(0)
        }
    }
}

impl Process for MapManager {
    type State = MapManagerState;

    fn name(&self) -> &str {
        "MAP_MANAGER"
    }

    fn sync_gates(&self) -> &BTreeSet<Symbol> {
        &self.gates
    }

    fn initial(&self) -> MapManagerState {
        MapManagerState { actors: Actors::initial(&self.scn), phase: self.first_turn() }
    }

    fn moves(&self, s: &MapManagerState) -> Vec<Move<MapManagerState>> {
        let with_phase = |phase| MapManagerState { actors: s.actors.clone(), phase };
        match &s.phase {
            MapPhase::Update(j) => {
                let offers = vec![kind_value(&self.scn.mobiles[*j].kind), s.actors.to_value()];
                vec![Move::emit(GRID_UPDATE, offers, with_phase(MapPhase::Await(*j)))]
            }
            MapPhase::ShareCar => {
                let offers = vec![s.actors.car.to_value(), s.actors.to_value()];
                vec![Move::emit(GRID_CAR, offers, with_phase(MapPhase::AwaitCar))]
            }
            MapPhase::Collide(kind) => vec![Move::emit(COLLISION, vec![kind_value(kind)], with_phase(MapPhase::Halted))],
            MapPhase::Await(_) => vec![Move::listen(OBSTACLE_POSITION)],
            MapPhase::AwaitCar => vec![Move::listen(CAR_POSITION), Move::listen(ARRIVAL)],
            MapPhase::Tick => vec![Move::listen(TICK)],
            MapPhase::Halted => vec![],
        }
    }

    fn accept(&self, s: &MapManagerState, action: &Action) -> Option<MapManagerState> {
        match &s.phase {
            MapPhase::Await(j) if action.gate_is(OBSTACLE_POSITION) => {
                let [kind, _, to, _, _] = action.offers.as_slice() else { return None };
                if kind.as_sym() != Some(&self.scn.mobiles[*j].kind) {
                    return None;
                }
                let mut actors = s.actors.clone();
                actors.mobiles[*j] = Position::from_value(to)?;
                let phase = if j + 1 < self.scn.mobiles.len() { MapPhase::Update(j + 1) } else { MapPhase::ShareCar };
                Some(MapManagerState { actors, phase })
            }
            MapPhase::AwaitCar if action.gate_is(ARRIVAL) => Some(MapManagerState { actors: s.actors.clone(), phase: MapPhase::Halted }),
            MapPhase::AwaitCar if action.gate_is(CAR_POSITION) => {
                let [_, to] = action.offers.as_slice() else { return None };
                let mut actors = s.actors.clone();
                actors.car = Position::from_value(to)?;
                let phase = match collision_at(&self.scn, &actors) {
                    Some(kind) => MapPhase::Collide(kind),
                    None => MapPhase::Tick,
                };
                Some(MapManagerState { actors, phase })
            }
            MapPhase::Tick if action.gate_is(TICK) => Some(MapManagerState { actors: s.actors.clone(), phase: self.first_turn() }),
            _ => None,
        }
    }
}

pub struct MoveCar {
    gates: BTreeSet<Symbol>,
    scn: Arc<GridScenario>,
}

#[derive(Serialize, Deserialize)]
pub struct CarState {
    position: Position,
    next: Option<usize>,
    ready: bool,
    stopped: bool,
}

impl MoveCar {
    pub fn new(scn: Arc<GridScenario>) -> Self {
        MoveCar { gates: gate_set(&[LIDAR_MAP, CAR_POSITION, ARRIVAL]), scn }
    }
}

impl Process for MoveCar {
    type State = CarState;

    fn name(&self) -> &str {
        "MOVE_CAR"
    }

    fn sync_gates(&self) -> &BTreeSet<Symbol> {
        &self.gates
    }

    fn initial(&self) -> CarState {
        let car = &self.scn.car;
        let next = (!car.moves.is_empty()).then_some(0);
        CarState { position: car.position, next, ready: false, stopped: false }
    }

    fn moves(&self, s: &CarState) -> Vec<Move<CarState>> {
        if s.stopped {
            return vec![];
        }
        if !s.ready {
            return vec![Move::listen(LIDAR_MAP)];
        }
        let car = &self.scn.car;
        let Some(i) = s.next else {
            if car.cyclic {
                let stay = CarState { ready: false, ..*s };
                return vec![Move::emit(CAR_POSITION, vec![s.position.to_value(), s.position.to_value()], stay)];
            }
            return vec![Move::emit(ARRIVAL, vec![], CarState { stopped: true, ..*s })];
        };
        let next = advance(i, car.moves.len(), car.cyclic);
        let mut targets: Vec<Position> = resolve(car.moves[i])
            .into_iter()
            .filter_map(|d| step_position(s.position, d, car.speed, self.scn.width, self.scn.height))
            .collect();
        if targets.is_empty() {
            targets.push(s.position);
        }
        targets.sort();
        targets.dedup();
        targets
            .into_iter()
            .map(|to| {
                let state = CarState { position: to, next, ready: false, stopped: false };
                Move::emit(CAR_POSITION, vec![s.position.to_value(), to.to_value()], state)
            })
            .collect()
    }

    fn accept(&self, s: &CarState, action: &Action) -> Option<CarState> {
        (action.gate_is(LIDAR_MAP) && !s.ready && !s.stopped).then_some(CarState { ready: true, ..*s })
    }
}

pub struct LidarManager {
    gates: BTreeSet<Symbol>,
    scn: Arc<GridScenario>,
    expose_grid: bool,
}

#[derive(Serialize, Deserialize)]
pub struct LidarState {
    /// Last grid sent and the car position it was computed at.
    last: Option<(PerceptionGrid, Position)>,
    pending: bool,
}

impl LidarManager {
    pub fn new(scn: Arc<GridScenario>, expose_grid: bool) -> Self {
        LidarManager { gates: gate_set(&[GRID_CAR, LIDAR_MAP]), scn, expose_grid }
    }
}

impl Process for LidarManager {
    type State = LidarState;

    fn name(&self) -> &str {
        "LIDAR_MANAGER"
    }

    fn sync_gates(&self) -> &BTreeSet<Symbol> {
        &self.gates
    }

    fn initial(&self) -> LidarState {
        LidarState { last: None, pending: false }
    }

    fn moves(&self, s: &LidarState) -> Vec<Move<LidarState>> {
        if !s.pending {
            return vec![Move::listen(GRID_CAR)];
        }
        let offers = match (&s.last, self.expose_grid) {
            (Some((grid, _)), true) => vec![grid.to_value()],
            _ => vec![],
        };
        vec![Move::emit(LIDAR_MAP, offers, LidarState { last: s.last.clone(), pending: false })]
    }

    fn accept(&self, s: &LidarState, action: &Action) -> Option<LidarState> {
        if s.pending || !action.gate_is(GRID_CAR) {
            return None;
        }
        if !self.expose_grid {
            // the grid would not influence behaviour; keep no state
            return Some(LidarState { last: None, pending: true });
        }
        let [car, snapshot] = action.offers.as_slice() else { return None };
        let car = Position::from_value(car)?;
        let map = GridMap::with_actors(&self.scn, &Actors::from_value(snapshot)?);
        let prev = s.last.as_ref().map(|(g, at)| (g, *at));
        let grid = compute_perception(&map, prev, car);
        Some(LidarState { last: Some((grid, car)), pending: true })
    }
}

pub struct Scheduler {
    gates: BTreeSet<Symbol>,
    kinds: Vec<Symbol>,
}

#[derive(Serialize, Deserialize)]
pub enum SchedulerState {
    /// Expecting the move of obstacle `j`, or of the car once `j` reaches
    /// the obstacle count.
    Turn(usize),
    Tick,
    Stopped,
}

impl Scheduler {
    pub fn new(scn: &GridScenario) -> Self {
        Scheduler {
            gates: gate_set(&[OBSTACLE_POSITION, CAR_POSITION, TICK, ARRIVAL, COLLISION]),
            kinds: scn.mobiles.iter().map(|o| o.kind.clone()).collect(),
        }
    }
}

impl Process for Scheduler {
    type State = SchedulerState;

    fn name(&self) -> &str {
        "SCHEDULER"
    }

    fn sync_gates(&self) -> &BTreeSet<Symbol> {
        &self.gates
    }

    fn initial(&self) -> SchedulerState {
        SchedulerState::Turn(0)
    }

    fn moves(&self, s: &SchedulerState) -> Vec<Move<SchedulerState>> {
        match s {
            SchedulerState::Turn(j) if *j < self.kinds.len() => vec![Move::listen(OBSTACLE_POSITION)],
            SchedulerState::Turn(_) => vec![Move::listen(CAR_POSITION), Move::listen(ARRIVAL)],
            SchedulerState::Tick => vec![Move::emit(TICK, vec![], SchedulerState::Turn(0)), Move::listen(COLLISION)],
            SchedulerState::Stopped => vec![],
        }
    }

    fn accept(&self, s: &SchedulerState, action: &Action) -> Option<SchedulerState> {
        match s {
            SchedulerState::Turn(j) if action.gate_is(OBSTACLE_POSITION) => {
                let kind = action.offers.first()?.as_sym()?;
                (self.kinds.get(*j) == Some(kind)).then_some(SchedulerState::Turn(j + 1))
            }
            SchedulerState::Turn(j) if *j == self.kinds.len() => {
                if action.gate_is(CAR_POSITION) {
                    Some(SchedulerState::Tick)
                } else {
                    action.gate_is(ARRIVAL).then_some(SchedulerState::Stopped)
                }
            }
            SchedulerState::Tick => action.gate_is(COLLISION).then_some(SchedulerState::Stopped),
            _ => None,
        }
    }
}

/// Restricts random obstacle moves far from the car.
pub struct Restrand {
    gates: BTreeSet<Symbol>,
    scn: Arc<GridScenario>,
}

impl Restrand {
    pub fn new(scn: Arc<GridScenario>) -> Self {
        Restrand { gates: gate_set(&[OBSTACLE_POSITION, CAR_POSITION]), scn }
    }
}

impl Process for Restrand {
    /// Current car position.
    type State = Position;

    fn name(&self) -> &str {
        "RESTRAND"
    }

    fn sync_gates(&self) -> &BTreeSet<Symbol> {
        &self.gates
    }

    fn initial(&self) -> Position {
        self.scn.car.position
    }

    fn moves(&self, _: &Position) -> Vec<Move<Position>> {
        vec![Move::listen(OBSTACLE_POSITION), Move::listen(CAR_POSITION)]
    }

    fn accept(&self, car: &Position, action: &Action) -> Option<Position> {
        if action.gate_is(CAR_POSITION) {
            let [_, to] = action.offers.as_slice() else { return None };
            return Position::from_value(to);
        }
        let [kind, prev, _, dir, requested] = action.offers.as_slice() else { return None };
        if Direction::from_value(requested)? != Direction::Random {
            return Some(*car);
        }
        let rec = &self.scn.mobiles[self.scn.mobile_index(kind.as_sym()?)?];
        let prev = rec.at(Position::from_value(prev)?);
        move_allowed(*car, &prev, Direction::from_value(dir)?, self.scn.dist_min).then_some(*car)
    }
}
