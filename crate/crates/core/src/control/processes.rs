//! Car components, obstacles and the map manager of the control model.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::map::{
    apply_control, compute_itinerary, expand_random, successors, Control, GraphMap, ObstacleOp,
    RadarGrid,
};
use super::gates::*;
use crate::kernel::{gate_set, Action, Move, Process, Symbol, Value};

fn street_value(s: &Symbol) -> Value {
    Value::Sym(s.clone())
}

fn offer<'a>(action: &'a Action, gate: &str, arity: usize) -> Option<&'a [Value]> {
    (action.gate_is(gate) && action.offers.len() == arity).then_some(action.offers.as_slice())
}

/// Keeps the last obstacle grid and forwards it to ACTION only when it changes.
pub struct PerceptionRadar {
    gates: BTreeSet<Symbol>,
}

#[derive(Serialize, Deserialize)]
pub struct RadarState {
    last: RadarGrid,
    pending: bool,
}

impl PerceptionRadar {
    pub fn new() -> Self {
        PerceptionRadar { gates: gate_set(&[UPDATE_GRID, CURRENT_GRID]) }
    }
}

impl Process for PerceptionRadar {
    type State = RadarState;

    fn name(&self) -> &str {
        "PERCEPTION_RADAR"
    }

    fn sync_gates(&self) -> &BTreeSet<Symbol> {
        &self.gates
    }

    fn initial(&self) -> RadarState {
        RadarState { last: RadarGrid::default(), pending: false }
    }

    fn moves(&self, s: &RadarState) -> Vec<Move<RadarState>> {
        if s.pending {
            let next = RadarState { last: s.last.clone(), pending: false };
            vec![Move::emit(CURRENT_GRID, vec![s.last.to_value()], next)]
        } else {
            vec![Move::listen(UPDATE_GRID)]
        }
    }

    fn accept(&self, s: &RadarState, action: &Action) -> Option<RadarState> {
        let [grid] = offer(action, UPDATE_GRID, 1)? else { return None };
        let grid = RadarGrid::from_value(grid)?;
        let pending = grid != s.last;
        Some(RadarState { last: grid, pending })
    }
}

/// Holds the car position and answers position requests.
pub struct PerceptionGps {
    gates: BTreeSet<Symbol>,
    start: Symbol,
}

#[derive(Serialize, Deserialize)]
pub struct GpsState {
    position: Symbol,
    answering: bool,
}

impl PerceptionGps {
    pub fn new(start: Symbol) -> Self {
        PerceptionGps {
            gates: gate_set(&[UPDATE_POSITION, REQUEST_POSITION, CURRENT_POSITION]),
            start,
        }
    }
}

impl Process for PerceptionGps {
    type State = GpsState;

    fn name(&self) -> &str {
        "PERCEPTION_GPS"
    }

    fn sync_gates(&self) -> &BTreeSet<Symbol> {
        &self.gates
    }

    fn initial(&self) -> GpsState {
        GpsState { position: self.start.clone(), answering: false }
    }

    fn moves(&self, s: &GpsState) -> Vec<Move<GpsState>> {
        if s.answering {
            let next = GpsState { position: s.position.clone(), answering: false };
            vec![Move::emit(CURRENT_POSITION, vec![street_value(&s.position)], next)]
        } else {
            vec![Move::listen(UPDATE_POSITION), Move::listen(REQUEST_POSITION)]
        }
    }

    fn accept(&self, s: &GpsState, action: &Action) -> Option<GpsState> {
        if s.answering {
            return None;
        }
        if offer(action, REQUEST_POSITION, 0).is_some() {
            return Some(GpsState { position: s.position.clone(), answering: true });
        }
        let [street] = offer(action, UPDATE_POSITION, 1)? else { return None };
        Some(GpsState { position: street.as_sym()?.clone(), answering: false })
    }
}

/// Computes itineraries on request, or signals arrival.
pub struct Decision {
    gates: BTreeSet<Symbol>,
    map: Arc<GraphMap>,
}

#[derive(Serialize, Deserialize)]
pub enum DecisionState {
    Idle,
    Requested(RadarGrid),
    AwaitPosition(RadarGrid),
    Deciding(RadarGrid, Symbol),
    Stopped,
}

impl Decision {
    pub fn new(map: Arc<GraphMap>) -> Self {
        Decision {
            gates: gate_set(&[REQUEST_PATH, CURRENT_PATH, REQUEST_POSITION, CURRENT_POSITION, ARRIVAL]),
            map,
        }
    }
}

impl Process for Decision {
    type State = DecisionState;

    fn name(&self) -> &str {
        "DECISION"
    }

    fn sync_gates(&self) -> &BTreeSet<Symbol> {
        &self.gates
    }

    fn initial(&self) -> DecisionState {
        DecisionState::Idle
    }

    fn moves(&self, s: &DecisionState) -> Vec<Move<DecisionState>> {
        match s {
            DecisionState::Idle => vec![Move::listen(REQUEST_PATH)],
            DecisionState::Requested(g) => {
                vec![Move::emit(REQUEST_POSITION, vec![], DecisionState::AwaitPosition(g.clone()))]
            }
            DecisionState::AwaitPosition(_) => vec![Move::listen(CURRENT_POSITION)],
            DecisionState::Deciding(grid, position) => {
                if position == self.map.destination() {
                    return vec![Move::emit(ARRIVAL, vec![], DecisionState::Stopped)];
                }
                let itinerary = compute_itinerary(&self.map, position, self.map.destination(), grid)
                    .expect("positions come from the map");
                let path = Value::List(itinerary.controls.iter().map(Control::to_value).collect());
                vec![Move::emit(CURRENT_PATH, vec![path], DecisionState::Idle)]
            }
            DecisionState::Stopped => vec![],
        }
    }

    fn accept(&self, s: &DecisionState, action: &Action) -> Option<DecisionState> {
        match s {
            DecisionState::Idle => {
                let [grid] = offer(action, REQUEST_PATH, 1)? else { return None };
                Some(DecisionState::Requested(RadarGrid::from_value(grid)?))
            }
            DecisionState::AwaitPosition(grid) => {
                let [street] = offer(action, CURRENT_POSITION, 1)? else { return None };
                Some(DecisionState::Deciding(grid.clone(), street.as_sym()?.clone()))
            }
            _ => None,
        }
    }
}

/// Follows itineraries one control at a time.
pub struct ActionController {
    gates: BTreeSet<Symbol>,
    map: Arc<GraphMap>,
}

#[derive(Clone, Serialize, Deserialize)]
pub enum ActionPhase {
    NeedPath,
    AwaitPath,
    Ready(Vec<Control>),
    AwaitUpdate,
    Stopped,
}

#[derive(Clone, Serialize, Deserialize)]
pub struct ActionState {
    position: Symbol,
    grid: RadarGrid,
    phase: ActionPhase,
}

impl ActionController {
    pub fn new(map: Arc<GraphMap>) -> Self {
        ActionController {
            gates: gate_set(&[
                REQUEST_PATH,
                CURRENT_PATH,
                CURRENT_GRID,
                CAR_MOVE,
                COLLISION,
                UPDATE_POSITION,
                ARRIVAL,
            ]),
            map,
        }
    }
}

impl Process for ActionController {
    type State = ActionState;

    fn name(&self) -> &str {
        "ACTION"
    }

    fn sync_gates(&self) -> &BTreeSet<Symbol> {
        &self.gates
    }

    fn initial(&self) -> ActionState {
        ActionState {
            position: self.map.car_position().clone(),
            grid: RadarGrid::default(),
            phase: ActionPhase::NeedPath,
        }
    }

    fn moves(&self, s: &ActionState) -> Vec<Move<ActionState>> {
        if matches!(s.phase, ActionPhase::Stopped) {
            return vec![];
        }
        let mut moves = vec![
            Move::listen(CURRENT_GRID),
            Move::listen(UPDATE_POSITION),
            Move::listen(COLLISION),
            Move::listen(ARRIVAL),
        ];
        let with_phase = |phase| ActionState { phase, ..s.clone() };
        match &s.phase {
            ActionPhase::NeedPath => moves.push(Move::emit(
                REQUEST_PATH,
                vec![s.grid.to_value()],
                with_phase(ActionPhase::AwaitPath),
            )),
            ActionPhase::AwaitPath => moves.push(Move::listen(CURRENT_PATH)),
            ActionPhase::Ready(path) => {
                if let Some(first) = path.first() {
                    // the grid may have changed since the path was computed
                    let control = match apply_control(&self.map, &s.position, first) {
                        Some(street) if s.grid.contains(&street) => Control::Brakes,
                        _ => first.clone(),
                    };
                    moves.push(Move::emit(
                        CAR_MOVE,
                        vec![control.to_value()],
                        with_phase(ActionPhase::AwaitUpdate),
                    ));
                }
                // an empty itinerary waits for the next grid change
            }
            ActionPhase::AwaitUpdate | ActionPhase::Stopped => {}
        }
        moves
    }

    fn accept(&self, s: &ActionState, action: &Action) -> Option<ActionState> {
        if matches!(s.phase, ActionPhase::Stopped) {
            return None;
        }
        if action.gate_is(COLLISION) || action.gate_is(ARRIVAL) {
            return Some(ActionState { phase: ActionPhase::Stopped, ..s.clone() });
        }
        if let Some([grid]) = offer(action, CURRENT_GRID, 1) {
            let grid = RadarGrid::from_value(grid)?;
            let phase = match &s.phase {
                ActionPhase::Ready(p) if p.is_empty() => ActionPhase::NeedPath,
                other => other.clone(),
            };
            return Some(ActionState { position: s.position.clone(), grid, phase });
        }
        if let Some([street]) = offer(action, UPDATE_POSITION, 1) {
            let phase = match &s.phase {
                ActionPhase::AwaitUpdate => ActionPhase::NeedPath,
                other => other.clone(),
            };
            return Some(ActionState { position: street.as_sym()?.clone(), grid: s.grid.clone(), phase });
        }
        if let (ActionPhase::AwaitPath, Some([path])) = (&s.phase, offer(action, CURRENT_PATH, 1)) {
            let controls = path
                .as_list()?
                .iter()
                .map(Control::from_value)
                .collect::<Option<Vec<_>>>()?;
            return Some(ActionState { phase: ActionPhase::Ready(controls), ..s.clone() });
        }
        None
    }
}

/// One obstacle executing its scripted moves.
pub struct Obstacle {
    name: String,
    id: u64,
    gates: BTreeSet<Symbol>,
    map: Arc<GraphMap>,
    start: Symbol,
    moves: Vec<ObstacleOp>,
}

#[derive(Serialize, Deserialize)]
pub struct ObstacleState {
    position: Option<Symbol>,
    next: usize,
    done: bool,
}

impl Obstacle {
    pub fn new(id: u64, map: Arc<GraphMap>, start: Symbol, moves: Vec<ObstacleOp>) -> Self {
        Obstacle {
            name: format!("OBSTACLE_{id}"),
            id,
            gates: gate_set(&[OBSTACLE_MOVE, END_OBSTACLE]),
            map,
            start,
            moves,
        }
    }

    /// Concrete (operation, target) pairs for a scripted move from `position`.
    fn alternatives(&self, position: &Symbol, op: &ObstacleOp) -> Vec<(ObstacleOp, Option<Symbol>)> {
        let succ = successors(&self.map, position).expect("obstacles stay on the map");
        let resolve = |op: ObstacleOp| match op {
            ObstacleOp::TurnedN(n) => match succ.get(n as usize) {
                Some((street, _)) => (ObstacleOp::TurnedN(n), Some(street.clone())),
                None => (ObstacleOp::Leave, None),
            },
            _ => (ObstacleOp::Leave, None),
        };
        match op {
            ObstacleOp::Random => expand_random(&self.map, position)
                .expect("obstacles stay on the map")
                .into_iter()
                .map(resolve)
                .collect(),
            other => vec![resolve(other.clone())],
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
        ObstacleState { position: Some(self.start.clone()), next: 0, done: false }
    }

    fn moves(&self, s: &ObstacleState) -> Vec<Move<ObstacleState>> {
        let mut moves = vec![Move::listen(OBSTACLE_MOVE), Move::listen(END_OBSTACLE)];
        if s.done {
            return moves;
        }
        let id = Value::Nat(self.id);
        match (&s.position, self.moves.get(s.next)) {
            (Some(position), Some(op)) => {
                for (op, target) in self.alternatives(position, op) {
                    let target_value = target.as_ref().map_or(Value::sym("none"), street_value);
                    let next = ObstacleState { position: target, next: s.next + 1, done: false };
                    moves.push(Move::emit(OBSTACLE_MOVE, vec![id.clone(), op.to_value(), target_value], next));
                }
            }
            _ => {
                let next = ObstacleState { position: s.position.clone(), next: s.next, done: true };
                moves.push(Move::emit(END_OBSTACLE, vec![id], next));
            }
        }
        moves
    }

    fn accept(&self, s: &ObstacleState, action: &Action) -> Option<ObstacleState> {
        // observe the other obstacles without changing state
        let other = action.offers.first().and_then(Value::as_nat)? != self.id;
        let relevant = action.gate_is(OBSTACLE_MOVE) || action.gate_is(END_OBSTACLE);
        (other && relevant).then(|| ObstacleState {
            position: s.position.clone(),
            next: s.next,
            done: s.done,
        })
    }
}

/// Ground truth: car and obstacle streets.
pub struct MapManagement {
    gates: BTreeSet<Symbol>,
    map: Arc<GraphMap>,
    obstacle_starts: Vec<Symbol>,
}

#[derive(Clone, Serialize, Deserialize)]
pub enum MapPhase {
    SharePosition,
    ShareGrid,
    Ready,
    AfterCarMove,
    Collide(u64),
    Halted,
}

#[derive(Clone, Serialize, Deserialize)]
pub struct MapState {
    pub car: Symbol,
    pub obstacles: Vec<Option<Symbol>>,
    pub ended: Vec<bool>,
    pub phase: MapPhase,
}

impl MapState {
    pub fn radar_grid(&self) -> RadarGrid {
        RadarGrid::new(self.obstacles.iter().flatten().cloned())
    }

    fn is_free(&self, street: &Symbol) -> bool {
        *street != self.car && !self.obstacles.iter().flatten().any(|o| o == street)
    }
}

impl MapManagement {
    pub fn new(map: Arc<GraphMap>, obstacle_starts: Vec<Symbol>) -> Self {
        MapManagement {
            gates: gate_set(&[
                UPDATE_POSITION,
                UPDATE_GRID,
                CAR_MOVE,
                OBSTACLE_MOVE,
                END_OBSTACLE,
                COLLISION,
                ARRIVAL,
            ]),
            map,
            obstacle_starts,
        }
    }

    fn obstacle_move(&self, s: &MapState, action: &Action) -> Option<MapState> {
        let [id, op, target] = offer(action, OBSTACLE_MOVE, 3)? else { return None };
        let j = usize::try_from(id.as_nat()?).ok()?;
        let from = s.obstacles.get(j)?.as_ref()?;
        if s.ended[j] {
            return None;
        }
        let new_position = match ObstacleOp::from_value(op)? {
            ObstacleOp::Leave if *target == Value::sym("none") => None,
            ObstacleOp::TurnedN(n) => {
                let street = target.as_sym()?;
                let (expected, _) = successors(&self.map, from).ok()?.get(n as usize)?.clone();
                if expected != *street || !s.is_free(street) {
                    return None;
                }
                Some(street.clone())
            }
            _ => return None,
        };
        let mut next = s.clone();
        next.obstacles[j] = new_position;
        next.phase = MapPhase::ShareGrid;
        Some(next)
    }
}

impl Process for MapManagement {
    type State = MapState;

    fn name(&self) -> &str {
        "MAP_MANAGEMENT"
    }

    fn sync_gates(&self) -> &BTreeSet<Symbol> {
        &self.gates
    }

    fn initial(&self) -> MapState {
        MapState {
            car: self.map.car_position().clone(),
            obstacles: self.obstacle_starts.iter().cloned().map(Some).collect(),
            ended: vec![false; self.obstacle_starts.len()],
            phase: MapPhase::SharePosition,
        }
    }

    fn moves(&self, s: &MapState) -> Vec<Move<MapState>> {
        let with_phase = |phase| MapState { phase, ..s.clone() };
        match &s.phase {
            MapPhase::SharePosition => vec![Move::emit(
                UPDATE_POSITION,
                vec![street_value(&s.car)],
                with_phase(MapPhase::ShareGrid),
            )],
            MapPhase::ShareGrid => vec![Move::emit(
                UPDATE_GRID,
                vec![s.radar_grid().to_value()],
                with_phase(MapPhase::Ready),
            )],
            MapPhase::Ready => vec![
                Move::listen(CAR_MOVE),
                Move::listen(OBSTACLE_MOVE),
                Move::listen(END_OBSTACLE),
                Move::listen(ARRIVAL),
            ],
            MapPhase::AfterCarMove => vec![Move::emit(
                UPDATE_POSITION,
                vec![street_value(&s.car)],
                with_phase(MapPhase::Ready),
            )],
            MapPhase::Collide(j) => {
                vec![Move::emit(COLLISION, vec![Value::Nat(*j)], with_phase(MapPhase::Halted))]
            }
            MapPhase::Halted => vec![],
        }
    }

    fn accept(&self, s: &MapState, action: &Action) -> Option<MapState> {
        if !matches!(s.phase, MapPhase::Ready) {
            return None;
        }
        if action.gate_is(ARRIVAL) {
            return Some(MapState { phase: MapPhase::Halted, ..s.clone() });
        }
        if let Some([control]) = offer(action, CAR_MOVE, 1) {
            let control = Control::from_value(control)?;
            let car = apply_control(&self.map, &s.car, &control)?;
            let hit = s.obstacles.iter().position(|o| o.as_ref() == Some(&car));
            let phase = match hit {
                Some(j) => MapPhase::Collide(j as u64),
                None => MapPhase::AfterCarMove,
            };
            return Some(MapState { car, phase, ..s.clone() });
        }
        if let Some([id]) = offer(action, END_OBSTACLE, 1) {
            let j = usize::try_from(id.as_nat()?).ok()?;
            let mut next = s.clone();
            *next.ended.get_mut(j)? = true;
            return Some(next);
        }
        self.obstacle_move(s, action)
    }
}
