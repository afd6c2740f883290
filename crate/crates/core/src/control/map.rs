//! Directed street graph and the functions the car and obstacles use on it.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ControlError;
use crate::kernel::{Symbol, Value};

/// A street: a directed edge between two crossroads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub src: u64,
    pub street: Symbol,
    pub dst: u64,
}

impl Edge {
    pub fn new(src: u64, street: &str, dst: u64) -> Self {
        Edge { src, street: Symbol::new(street), dst }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphMap {
    vertices: BTreeSet<u64>,
    edges: Vec<Edge>,
    by_street: HashMap<Symbol, usize>,
    car_position: Symbol,
    destination: Symbol,
}

impl GraphMap {
    pub fn new(
        vertices: impl IntoIterator<Item = u64>,
        edges: Vec<Edge>,
        car_position: &str,
        destination: &str,
    ) -> Result<Self, ControlError> {
        let vertices: BTreeSet<u64> = vertices.into_iter().collect();
        let mut by_street = HashMap::new();
        for (i, e) in edges.iter().enumerate() {
            for v in [e.src, e.dst] {
                if !vertices.contains(&v) {
                    return Err(ControlError::UnknownVertex(v));
                }
            }
            if by_street.insert(e.street.clone(), i).is_some() {
                return Err(ControlError::DuplicateStreet(e.street.to_string()));
            }
        }
        let map = GraphMap {
            vertices,
            edges,
            by_street,
            car_position: Symbol::new(car_position),
            destination: Symbol::new(destination),
        };
        map.edge(&map.car_position)?;
        map.edge(&map.destination)?;
        Ok(map)
    }

    pub fn vertices(&self) -> &BTreeSet<u64> {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn car_position(&self) -> &Symbol {
        &self.car_position
    }

    pub fn destination(&self) -> &Symbol {
        &self.destination
    }

    pub fn has_street(&self, street: &Symbol) -> bool {
        self.by_street.contains_key(street)
    }

    pub fn edge(&self, street: &Symbol) -> Result<&Edge, ControlError> {
        self.by_street
            .get(street)
            .map(|&i| &self.edges[i])
            .ok_or_else(|| ControlError::UnknownStreet(street.to_string()))
    }

    /// Same graph with a different car position and destination.
    pub fn with_route(&self, car_position: &str, destination: &str) -> Result<Self, ControlError> {
        GraphMap::new(self.vertices.iter().copied(), self.edges.clone(), car_position, destination)
    }
}

/// A driving command for the car.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Control {
    TurnedN(u64),
    Brakes,
}

impl Control {
    pub fn to_value(&self) -> Value {
        match self {
            Control::TurnedN(n) => Value::record("turned_n", vec![Value::Nat(*n)]),
            Control::Brakes => Value::sym("brakes"),
        }
    }

    pub fn from_value(v: &Value) -> Option<Control> {
        match v {
            Value::Record(name, fields) if name.as_str() == "turned_n" => match fields.as_slice() {
                [Value::Nat(n)] => Some(Control::TurnedN(*n)),
                _ => None,
            },
            Value::Sym(s) if s.as_str() == "brakes" => Some(Control::Brakes),
            _ => None,
        }
    }
}

impl fmt::Display for Control {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_value())
    }
}

/// An obstacle move, as scripted in a scenario.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ObstacleOp {
    Random,
    TurnedN(u64),
    Leave,
}

impl ObstacleOp {
    pub fn to_value(&self) -> Value {
        match self {
            ObstacleOp::Random => Value::sym("random"),
            ObstacleOp::TurnedN(n) => Value::record("turned_n", vec![Value::Nat(*n)]),
            ObstacleOp::Leave => Value::sym("leave"),
        }
    }

    pub fn from_value(v: &Value) -> Option<ObstacleOp> {
        match v {
            Value::Sym(s) if s.as_str() == "random" => Some(ObstacleOp::Random),
            Value::Sym(s) if s.as_str() == "leave" => Some(ObstacleOp::Leave),
            Value::Record(name, fields) if name.as_str() == "turned_n" => match fields.as_slice() {
                [Value::Nat(n)] => Some(ObstacleOp::TurnedN(*n)),
                _ => None,
            },
            _ => None,
        }
    }
}

/// Streets occupied by obstacles, as seen by the radar.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RadarGrid {
    pub occupied_streets: BTreeSet<Symbol>,
}

impl RadarGrid {
    pub fn new(streets: impl IntoIterator<Item = Symbol>) -> Self {
        RadarGrid { occupied_streets: streets.into_iter().collect() }
    }

    pub fn contains(&self, street: &Symbol) -> bool {
        self.occupied_streets.contains(street)
    }

    pub fn to_value(&self) -> Value {
        let streets = self.occupied_streets.iter().cloned().map(Value::Sym).collect();
        Value::record("Radar", vec![Value::List(streets)])
    }

    pub fn from_value(v: &Value) -> Option<RadarGrid> {
        match v {
            Value::Record(name, fields) if name.as_str() == "Radar" => match fields.as_slice() {
                [Value::List(items)] => items
                    .iter()
                    .map(|i| i.as_sym().cloned())
                    .collect::<Option<BTreeSet<_>>>()
                    .map(|occupied_streets| RadarGrid { occupied_streets }),
                _ => None,
            },
            _ => None,
        }
    }
}

/// Outgoing streets of the head crossroad of `street`, in declaration order.
pub fn successors(map: &GraphMap, street: &Symbol) -> Result<Vec<(Symbol, u64)>, ControlError> {
    let head = map.edge(street)?.dst;
    Ok(map
        .edges()
        .iter()
        .filter(|e| e.src == head)
        .map(|e| (e.street.clone(), e.dst))
        .collect())
}

/// The street reached from `current` by `control`, if the control applies.
pub fn apply_control(map: &GraphMap, current: &Symbol, control: &Control) -> Option<Symbol> {
    match control {
        Control::Brakes => map.has_street(current).then(|| current.clone()),
        Control::TurnedN(n) => {
            let succ = successors(map, current).ok()?;
            let i = usize::try_from(*n).ok()?;
            succ.get(i).map(|(s, _)| s.clone())
        }
    }
}

pub fn consistent_move(current: &Symbol, control: &Control, next: &Symbol, map: &GraphMap) -> bool {
    apply_control(map, current, control).as_ref() == Some(next)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ItineraryStatus {
    Arrived,
    Path,
    NoPath,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Itinerary {
    pub controls: Vec<Control>,
    pub status: ItineraryStatus,
}

/// Fewest-turns route from `from` to `to` avoiding blocked streets.
///
/// Among shortest routes the one with the smallest successor index at the
/// first point of divergence wins: breadth-first search expanding successors
/// in index order discovers every street through that route first.
pub fn compute_itinerary(
    map: &GraphMap,
    from: &Symbol,
    to: &Symbol,
    blocked: &RadarGrid,
) -> Result<Itinerary, ControlError> {
    map.edge(from)?;
    map.edge(to)?;
    if from == to {
        return Ok(Itinerary { controls: vec![], status: ItineraryStatus::Arrived });
    }
    let mut parent: HashMap<Symbol, (Symbol, u64)> = HashMap::new();
    let mut queue = VecDeque::from([from.clone()]);
    while let Some(s) = queue.pop_front() {
        for (i, (next, _)) in successors(map, &s)?.into_iter().enumerate() {
            if next == *from || parent.contains_key(&next) || blocked.contains(&next) {
                continue;
            }
            parent.insert(next.clone(), (s.clone(), i as u64));
            if next == *to {
                let mut controls = Vec::new();
                let mut at = next;
                while at != *from {
                    let (prev, idx) = parent[&at].clone();
                    controls.push(Control::TurnedN(idx));
                    at = prev;
                }
                controls.reverse();
                return Ok(Itinerary { controls, status: ItineraryStatus::Path });
            }
            queue.push_back(next);
        }
    }
    Ok(Itinerary { controls: vec![], status: ItineraryStatus::NoPath })
}

/// Concrete alternatives for a `random` obstacle move: leave, or take any
/// outgoing street of the head crossroad.
pub fn expand_random(map: &GraphMap, position: &Symbol) -> Result<BTreeSet<ObstacleOp>, ControlError> {
    let degree = successors(map, position)?.len() as u64;
    let mut ops: BTreeSet<ObstacleOp> = (0..degree).map(ObstacleOp::TurnedN).collect();
    ops.insert(ObstacleOp::Leave);
    Ok(ops)
}
