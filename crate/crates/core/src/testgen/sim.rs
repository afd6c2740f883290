//! Simulator scenarios: per-tick actor moves read off a grid-model trace,
//! and their replay against the grid model.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{Action, Symbol};
use crate::perception::gates::*;
use crate::perception::{build_grid_composition, Actors, Direction, GridMap, GridScenario, PerceptionError, Position};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorMove {
    pub from: Position,
    pub to: Position,
    pub dir: Direction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarMove {
    pub from: Position,
    pub to: Position,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimTick {
    #[serde(default)]
    pub obstacles: BTreeMap<String, ActorMove>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub car: Option<CarMove>,
}

impl SimTick {
    fn is_empty(&self) -> bool {
        self.obstacles.is_empty() && self.car.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Terminal {
    Arrival,
    Collision,
    End,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimScenario {
    pub ticks: Vec<SimTick>,
    pub terminal: Terminal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collision: Option<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("step {0}: `{1}` has malformed offers")]
    Offers(usize, String),
    #[error("step {0}: `{1}` repeats a move already made this tick")]
    Repeated(usize, String),
    #[error("step {0}: `{1}` follows a terminal action")]
    AfterTerminal(usize, String),
    #[error("step {0}: gate of `{1}` does not belong to the grid model")]
    UnknownGate(usize, String),
}

fn is_glue(a: &Action) -> bool {
    [GRID_UPDATE, GRID_CAR, LIDAR_MAP, END_OBSTACLE].iter().any(|g| a.gate_is(g))
}

fn obstacle_move(a: &Action) -> Option<(String, ActorMove)> {
    let [kind, from, to, dir, _] = a.offers.as_slice() else { return None };
    Some((
        kind.as_sym()?.to_string(),
        ActorMove { from: Position::from_value(from)?, to: Position::from_value(to)?, dir: Direction::from_value(dir)? },
    ))
}

fn car_move(a: &Action) -> Option<CarMove> {
    let [from, to] = a.offers.as_slice() else { return None };
    Some(CarMove { from: Position::from_value(from)?, to: Position::from_value(to)? })
}

/// Groups the moves of a grid-model trace by tick. A trailing tick without
/// TICK is kept.
pub fn trace_to_scenario(trace: &[Action]) -> Result<SimScenario, TraceError> {
    let mut ticks = vec![];
    let mut tick = SimTick::default();
    let mut terminal = Terminal::End;
    let mut collision = None;
    for (i, a) in trace.iter().enumerate() {
        let label = || a.to_string();
        if terminal != Terminal::End {
            return Err(TraceError::AfterTerminal(i, label()));
        }
        if is_glue(a) {
            continue;
        }
        match a.gate.as_str() {
            OBSTACLE_POSITION => {
                let (kind, mv) = obstacle_move(a).ok_or_else(|| TraceError::Offers(i, label()))?;
                if tick.car.is_some() || tick.obstacles.insert(kind, mv).is_some() {
                    return Err(TraceError::Repeated(i, label()));
                }
            }
            CAR_POSITION => {
                let mv = car_move(a).ok_or_else(|| TraceError::Offers(i, label()))?;
                if tick.car.replace(mv).is_some() {
                    return Err(TraceError::Repeated(i, label()));
                }
            }
            TICK => ticks.push(std::mem::take(&mut tick)),
            ARRIVAL => terminal = Terminal::Arrival,
            COLLISION => {
                let kind = a.offers.first().and_then(|v| v.as_sym()).ok_or_else(|| TraceError::Offers(i, label()))?;
                terminal = Terminal::Collision;
                collision = Some(kind.to_string());
            }
            _ => return Err(TraceError::UnknownGate(i, label())),
        }
    }
    if !tick.is_empty() {
        ticks.push(tick);
    }
    Ok(SimScenario { ticks, terminal, collision })
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Model(#[from] PerceptionError),
    #[error("step {step}: expected {expected}, model offers [{}]", enabled.join(", "))]
    Divergence { step: usize, expected: String, enabled: Vec<String> },
}

/// Drives the grid model of `scn` through the moves of `sim` and returns the
/// trace taken. With terminal END the replay stops as soon as every
/// dictated move has been made.
pub fn replay(scn: &GridScenario, sim: &SimScenario) -> Result<Vec<Action>, ReplayError> {
    let comp = build_grid_composition(scn, false)?;
    let mut state = comp.initial_state();
    let mut trace = vec![];
    let mut t = 0;
    let mut done: BTreeSet<String> = BTreeSet::new();
    let mut car_done = false;
    loop {
        let current = sim.ticks.get(t);
        let consumed = current.is_none_or(|k| done.len() == k.obstacles.len() && (car_done || k.car.is_none()));
        let last = t + 1 >= sim.ticks.len();
        if sim.terminal == Terminal::End && consumed && last {
            return Ok(trace);
        }
        let enabled = comp.enabled_actions(&state);
        let diverge = |expected: String| ReplayError::Divergence {
            step: trace.len(),
            expected,
            enabled: enabled.iter().map(|(a, _)| a.to_string()).collect(),
        };
        let pick = enabled.iter().position(|(a, _)| {
            if is_glue(a) {
                return true;
            }
            let Some(k) = current else { return false };
            match a.gate.as_str() {
                OBSTACLE_POSITION => obstacle_move(a).is_some_and(|(kind, mv)| {
                    !done.contains(&kind) && k.obstacles.get(&kind) == Some(&mv)
                }),
                CAR_POSITION => !car_done && car_move(a).is_some() && car_move(a) == k.car,
                TICK => consumed,
                _ => false,
            }
        });
        let terminal = enabled.iter().position(|(a, _)| match sim.terminal {
            Terminal::Arrival => a.gate_is(ARRIVAL),
            Terminal::Collision => {
                a.gate_is(COLLISION)
                    && sim.collision.as_deref().is_none_or(|c| a.offers.first().and_then(|v| v.as_sym()) == Some(&Symbol::new(c)))
            }
            Terminal::End => false,
        });
        let index = match (pick, terminal) {
            (Some(i), _) => i,
            (None, Some(i)) if consumed && last => i,
            _ => {
                let expected = match current {
                    Some(k) if !consumed => describe_pending(k, &done, car_done),
                    _ => format!("{:?}", sim.terminal),
                };
                return Err(diverge(expected));
            }
        };
        let (action, next) = enabled[index].clone();
        if action.gate_is(OBSTACLE_POSITION) {
            done.insert(action.offers[0].to_string());
        } else if action.gate_is(CAR_POSITION) {
            car_done = true;
        } else if action.gate_is(TICK) {
            t += 1;
            done.clear();
            car_done = false;
        }
        let terminal = action.gate_is(ARRIVAL) || action.gate_is(COLLISION);
        trace.push(action);
        state = next;
        if terminal {
            return Ok(trace);
        }
    }
}

fn describe_pending(k: &SimTick, done: &BTreeSet<String>, car_done: bool) -> String {
    if let Some((kind, mv)) = k.obstacles.iter().find(|(kind, _)| !done.contains(*kind)) {
        return format!("{kind} {} -> {} ({})", mv.from, mv.to, mv.dir.name());
    }
    match k.car {
        Some(c) if !car_done => format!("car {} -> {}", c.from, c.to),
        _ => "TICK".to_string(),
    }
}

/// ASCII frames of `sim` on `scn`: the initial map, then the map after each
/// tick. Moves of unknown obstacles are an error.
pub fn render_frames(scn: &GridScenario, sim: &SimScenario) -> Result<Vec<String>, String> {
    let mut actors = Actors::initial(scn);
    let mut frames = vec![GridMap::with_actors(scn, &actors).render()];
    for (t, tick) in sim.ticks.iter().enumerate() {
        for (kind, mv) in &tick.obstacles {
            let j = scn.mobile_index(&Symbol::new(kind)).ok_or_else(|| format!("tick {t}: unknown obstacle `{kind}`"))?;
            actors.mobiles[j] = mv.to;
        }
        if let Some(c) = tick.car {
            actors.car = c.to;
        }
        let fits = |p: Position, (w, h): (u32, u32)| p.x + w <= scn.width && p.y + h <= scn.height;
        if !fits(actors.car, (1, 1)) || actors.mobiles.iter().zip(&scn.mobiles).any(|(&p, o)| !fits(p, o.extent)) {
            return Err(format!("tick {t}: position off the map"));
        }
        frames.push(GridMap::with_actors(scn, &actors).render());
    }
    Ok(frames)
}
