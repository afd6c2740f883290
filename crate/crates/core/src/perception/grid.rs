//! Ground truth: scenario data, the cell map, and movement rules.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::PerceptionError;
use crate::kernel::{Symbol, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Position {
    pub x: u32,
    pub y: u32,
}

impl Position {
    pub const fn new(x: u32, y: u32) -> Self {
        Position { x, y }
    }

    pub fn to_value(self) -> Value {
        Value::Pos(self.x, self.y)
    }

    pub fn from_value(v: &Value) -> Option<Position> {
        v.as_pos().map(|(x, y)| Position::new(x, y))
    }

    pub fn manhattan(self, other: Position) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
    None,
    Random,
}

impl Direction {
    /// Candidates a `random` move resolves to.
    pub const CONCRETE: [Direction; 5] =
        [Direction::Up, Direction::Down, Direction::Left, Direction::Right, Direction::None];

    pub fn name(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Left => "left",
            Direction::Right => "right",
            Direction::None => "none",
            Direction::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Option<Direction> {
        Some(match s {
            "up" => Direction::Up,
            "down" => Direction::Down,
            "left" => Direction::Left,
            "right" => Direction::Right,
            "none" => Direction::None,
            "random" => Direction::Random,
            _ => return None,
        })
    }

    pub fn to_value(self) -> Value {
        Value::sym(self.name())
    }

    pub fn from_value(v: &Value) -> Option<Direction> {
        Direction::parse(v.as_sym()?.as_str())
    }

    fn delta(self) -> (i64, i64) {
        match self {
            Direction::Up => (0, -1),
            Direction::Down => (0, 1),
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
            Direction::None | Direction::Random => (0, 0),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstacleRec {
    pub kind: Symbol,
    pub anchor: Position,
    /// Width and height in cells.
    pub extent: (u32, u32),
    pub speed: u32,
    pub direction: Direction,
    pub transparent: bool,
    pub cyclic: bool,
    pub moves: Vec<Direction>,
}

impl ObstacleRec {
    pub fn building(kind: &str, x: u32, y: u32, w: u32, h: u32) -> Self {
        ObstacleRec {
            kind: Symbol::new(kind),
            anchor: Position::new(x, y),
            extent: (w, h),
            speed: 0,
            direction: Direction::None,
            transparent: false,
            cyclic: false,
            moves: vec![],
        }
    }

    pub fn at(&self, anchor: Position) -> ObstacleRec {
        ObstacleRec { anchor, ..self.clone() }
    }

    /// Whether the rectangle anchored at `anchor` covers `p`.
    pub fn covers_at(&self, anchor: Position, p: Position) -> bool {
        (anchor.x..anchor.x + self.extent.0).contains(&p.x) && (anchor.y..anchor.y + self.extent.1).contains(&p.y)
    }

    pub fn cells_at(&self, anchor: Position) -> impl Iterator<Item = Position> + '_ {
        (anchor.y..anchor.y + self.extent.1)
            .flat_map(move |y| (anchor.x..anchor.x + self.extent.0).map(move |x| Position::new(x, y)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarSpec {
    pub position: Position,
    pub speed: u32,
    pub moves: Vec<Direction>,
    pub cyclic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridScenario {
    pub width: u32,
    pub height: u32,
    pub statics: Vec<ObstacleRec>,
    pub mobiles: Vec<ObstacleRec>,
    pub car: CarSpec,
    /// Manhattan radius within which random moves are unrestricted.
    pub dist_min: u32,
}

impl GridScenario {
    pub fn in_bounds(&self, p: Position) -> bool {
        p.x < self.width && p.y < self.height
    }

    fn rect_in_bounds(&self, o: &ObstacleRec, anchor: Position) -> bool {
        o.extent.0 > 0
            && o.extent.1 > 0
            && anchor.x.checked_add(o.extent.0).is_some_and(|r| r <= self.width)
            && anchor.y.checked_add(o.extent.1).is_some_and(|b| b <= self.height)
    }

    pub fn validate(&self) -> Result<(), PerceptionError> {
        if self.width == 0 || self.height == 0 {
            return Err(PerceptionError::EmptyMap);
        }
        if !self.in_bounds(self.car.position) {
            return Err(PerceptionError::OutOfBounds("car".into()));
        }
        for o in self.statics.iter().chain(&self.mobiles) {
            if !crate::kernel::is_identifier(o.kind.as_str()) {
                return Err(PerceptionError::BadKind(o.kind.to_string()));
            }
            if !self.rect_in_bounds(o, o.anchor) {
                return Err(PerceptionError::OutOfBounds(o.kind.to_string()));
            }
        }
        for o in &self.statics {
            if o.speed != 0 || !o.moves.is_empty() || o.cyclic {
                return Err(PerceptionError::StaticMoves(o.kind.to_string()));
            }
        }
        for (i, o) in self.mobiles.iter().enumerate() {
            if self.mobiles[..i].iter().any(|p| p.kind == o.kind) {
                return Err(PerceptionError::DuplicateKind(o.kind.to_string()));
            }
        }
        let all: Vec<&ObstacleRec> = self.statics.iter().chain(&self.mobiles).collect();
        for (i, a) in all.iter().enumerate() {
            if a.covers_at(a.anchor, self.car.position) {
                return Err(PerceptionError::Overlap("car".into(), a.kind.to_string()));
            }
            for b in &all[..i] {
                if a.cells_at(a.anchor).any(|c| b.covers_at(b.anchor, c)) {
                    return Err(PerceptionError::Overlap(b.kind.to_string(), a.kind.to_string()));
                }
            }
        }
        Ok(())
    }

    pub fn mobile_index(&self, kind: &Symbol) -> Option<usize> {
        self.mobiles.iter().position(|o| o.kind == *kind)
    }
}

/// Positions of the moving actors at one instant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Actors {
    pub car: Position,
    pub mobiles: Vec<Position>,
}

impl Actors {
    pub fn initial(scn: &GridScenario) -> Self {
        Actors { car: scn.car.position, mobiles: scn.mobiles.iter().map(|o| o.anchor).collect() }
    }

    pub fn to_value(&self) -> Value {
        crate::kernel::Value::record(
            "Snapshot",
            vec![self.car.to_value(), Value::List(self.mobiles.iter().map(|p| p.to_value()).collect())],
        )
    }

    pub fn from_value(v: &Value) -> Option<Actors> {
        let Value::Record(name, fields) = v else { return None };
        let [car, Value::List(mobiles)] = fields.as_slice() else { return None };
        if name.as_str() != "Snapshot" {
            return None;
        }
        Some(Actors {
            car: Position::from_value(car)?,
            mobiles: mobiles.iter().map(Position::from_value).collect::<Option<_>>()?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellValue {
    Free,
    CarPos,
    /// Index into statics followed by mobiles.
    Occupied(usize),
}

/// The ground-truth array, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridMap {
    pub width: u32,
    pub height: u32,
    cells: Vec<CellValue>,
    transparent: Vec<bool>,
}

impl GridMap {
    pub fn empty(width: u32, height: u32) -> Self {
        GridMap { width, height, cells: vec![CellValue::Free; (width * height) as usize], transparent: vec![] }
    }

    /// Map with every obstacle and the car placed at `actors`.
    pub fn with_actors(scn: &GridScenario, actors: &Actors) -> Self {
        let mut m = GridMap::empty(scn.width, scn.height);
        let placed = scn.statics.iter().map(|o| (o, o.anchor)).chain(scn.mobiles.iter().zip(actors.mobiles.iter().copied()));
        for (o, anchor) in placed {
            m.add_obstacle(o, anchor);
        }
        if scn.in_bounds(actors.car) && m.get(actors.car) == Some(CellValue::Free) {
            m.set(actors.car, CellValue::CarPos);
        }
        m
    }

    pub fn add_obstacle(&mut self, o: &ObstacleRec, anchor: Position) {
        let id = self.transparent.len();
        self.transparent.push(o.transparent);
        for c in o.cells_at(anchor) {
            if c.x < self.width && c.y < self.height {
                self.set(c, CellValue::Occupied(id));
            }
        }
    }

    pub fn in_bounds(&self, p: Position) -> bool {
        p.x < self.width && p.y < self.height
    }

    pub fn get(&self, p: Position) -> Option<CellValue> {
        self.in_bounds(p).then(|| self.cells[(p.y * self.width + p.x) as usize])
    }

    fn set(&mut self, p: Position, v: CellValue) {
        self.cells[(p.y * self.width + p.x) as usize] = v;
    }

    pub fn is_opaque(&self, p: Position) -> bool {
        matches!(self.get(p), Some(CellValue::Occupied(id)) if !self.transparent[id])
    }

    pub fn is_transparent_obstacle(&self, p: Position) -> bool {
        matches!(self.get(p), Some(CellValue::Occupied(id)) if self.transparent[id])
    }

    /// One character per cell: `.` free, `C` car, `#` opaque, `t` transparent.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for y in 0..self.height {
            for x in 0..self.width {
                let p = Position::new(x, y);
                out.push(match self.get(p).expect("in bounds") {
                    CellValue::Free => '.',
                    CellValue::CarPos => 'C',
                    CellValue::Occupied(_) if self.is_transparent_obstacle(p) => 't',
                    CellValue::Occupied(_) => '#',
                });
            }
            out.push('\n');
        }
        out
    }
}

/// The map at the start of a scenario.
pub fn initiate_map(scn: &GridScenario) -> Result<GridMap, PerceptionError> {
    scn.validate()?;
    Ok(GridMap::with_actors(scn, &Actors::initial(scn)))
}

/// Position after moving `speed` cells in `dir`; `None` when leaving the map.
pub fn step_position(p: Position, dir: Direction, speed: u32, width: u32, height: u32) -> Option<Position> {
    let (dx, dy) = dir.delta();
    let x = i64::from(p.x) + dx * i64::from(speed);
    let y = i64::from(p.y) + dy * i64::from(speed);
    let inside = (0..i64::from(width)).contains(&x) && (0..i64::from(height)).contains(&y);
    inside.then(|| Position::new(x as u32, y as u32))
}

/// Whether obstacle `mobile` of `scn` may move in `dir` given the actors'
/// current positions: the destination rectangle stays on the map and every
/// cell it does not already cover is free.
pub fn valid_move(scn: &GridScenario, actors: &Actors, mobile: usize, dir: Direction) -> Option<Position> {
    let o = &scn.mobiles[mobile];
    let from = actors.mobiles[mobile];
    let to = step_position(from, dir, o.speed, scn.width, scn.height)?;
    if !scn.rect_in_bounds(o, to) {
        return None;
    }
    let blocked = |c: Position| {
        c == actors.car
            || scn.statics.iter().any(|s| s.covers_at(s.anchor, c))
            || scn
                .mobiles
                .iter()
                .zip(&actors.mobiles)
                .enumerate()
                .any(|(j, (m, &at))| j != mobile && m.covers_at(at, c))
    };
    let free = o.cells_at(to).filter(|&c| !o.covers_at(from, c)).all(|c| !blocked(c));
    free.then_some(to)
}

/// Restriction on random moves: anything goes within `dist_min` of the car,
/// otherwise the move must bring the obstacle strictly closer.
pub fn move_allowed(car: Position, obst_prev: &ObstacleRec, dir: Direction, dist_min: u32) -> bool {
    let before = car.manhattan(obst_prev.anchor);
    if before <= dist_min {
        return true;
    }
    let (dx, dy) = dir.delta();
    let speed = i64::from(obst_prev.speed);
    let x = i64::from(obst_prev.anchor.x) + dx * speed;
    let y = i64::from(obst_prev.anchor.y) + dy * speed;
    let after = (i64::from(car.x) - x).abs() + (i64::from(car.y) - y).abs();
    after < i64::from(before)
}

/// First obstacle (mobiles, then statics) covering the car.
pub fn collision_at(scn: &GridScenario, actors: &Actors) -> Option<Symbol> {
    let mobile = scn.mobiles.iter().zip(&actors.mobiles).find(|(o, &at)| o.covers_at(at, actors.car));
    if let Some((o, _)) = mobile {
        return Some(o.kind.clone());
    }
    scn.statics.iter().find(|o| o.covers_at(o.anchor, actors.car)).map(|o| o.kind.clone())
}
