//! Scenario files: JSON documents describing either a street-graph
//! (control) or a cell-grid (perception) configuration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{ControlError, ControlScenario, Edge, GraphMap, ObstacleOp};
use crate::kernel::{is_identifier, Symbol};
use crate::perception::{CarSpec, Direction, GridScenario, ObstacleRec, PerceptionError, Position};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("`{0}` is not a valid name")]
    Name(String),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Grid(#[from] PerceptionError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scenario {
    Graph(ControlScenario),
    Grid(GridScenario),
}

#[derive(Deserialize, Serialize)]
#[serde(tag = "model", rename_all = "lowercase")]
enum ScenarioFile {
    Graph(GraphFile),
    Grid(GridFile),
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: Vec<u64>,
    edges: Vec<(u64, String, u64)>,
    car: GraphCar,
    #[serde(default)]
    obstacles: Vec<GraphObstacle>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GraphCar {
    position: String,
    destination: String,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GraphObstacle {
    position: String,
    moves: Vec<OpFile>,
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum OpFile {
    Named(NamedOp),
    Turn { turn: u64 },
}

#[derive(Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
enum NamedOp {
    Random,
    Leave,
}

fn default_size() -> u32 {
    10
}

fn default_speed() -> u32 {
    1
}

fn default_extent() -> u32 {
    1
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    #[serde(default = "default_size")]
    width: u32,
    #[serde(default = "default_size")]
    height: u32,
    #[serde(default, rename = "static")]
    statics: Vec<StaticFile>,
    #[serde(default)]
    mobile: Vec<MobileFile>,
    car: CarFile,
    dist_min: u32,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct StaticFile {
    kind: String,
    x: u32,
    y: u32,
    #[serde(default = "default_extent")]
    w: u32,
    #[serde(default = "default_extent")]
    h: u32,
    #[serde(default)]
    transparent: bool,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct MobileFile {
    kind: String,
    x: u32,
    y: u32,
    #[serde(default = "default_extent")]
    w: u32,
    #[serde(default = "default_extent")]
    h: u32,
    #[serde(default = "default_speed")]
    speed: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    direction: Option<Direction>,
    #[serde(default)]
    transparent: bool,
    #[serde(default)]
    cyclic: bool,
    moves: Vec<Direction>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct CarFile {
    x: u32,
    y: u32,
    #[serde(default = "default_speed")]
    speed: u32,
    #[serde(default)]
    cyclic: bool,
    moves: Vec<Direction>,
}

fn name(s: &str) -> Result<Symbol, ScenarioError> {
    if is_identifier(s) {
        Ok(Symbol::new(s))
    } else {
        Err(ScenarioError::Name(s.to_string()))
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        match serde_json::from_str(text)? {
            ScenarioFile::Graph(g) => Ok(Scenario::Graph(graph_scenario(g)?)),
            ScenarioFile::Grid(g) => Ok(Scenario::Grid(grid_scenario(g)?)),
        }
    }

    pub fn to_json(&self) -> String {
        let file = match self {
            Scenario::Graph(s) => ScenarioFile::Graph(graph_file(s)),
            Scenario::Grid(s) => ScenarioFile::Grid(grid_file(s)),
        };
        serde_json::to_string_pretty(&file).expect("scenario serializes")
    }
}

fn graph_scenario(g: GraphFile) -> Result<ControlScenario, ScenarioError> {
    let mut edges = vec![];
    for (src, street, dst) in g.edges {
        name(&street)?;
        edges.push(Edge::new(src, &street, dst));
    }
    let map = GraphMap::new(g.vertices, edges, &g.car.position, &g.car.destination)?;
    let mut obstacles = vec![];
    for o in g.obstacles {
        let start = name(&o.position)?;
        let moves = o
            .moves
            .into_iter()
            .map(|m| match m {
                OpFile::Named(NamedOp::Random) => ObstacleOp::Random,
                OpFile::Named(NamedOp::Leave) => ObstacleOp::Leave,
                OpFile::Turn { turn } => ObstacleOp::TurnedN(turn),
            })
            .collect();
        obstacles.push((start, moves));
    }
    let scn = ControlScenario { map, obstacles };
    scn.validate()?;
    Ok(scn)
}

fn graph_file(s: &ControlScenario) -> GraphFile {
    GraphFile {
        vertices: s.map.vertices().iter().copied().collect(),
        edges: s.map.edges().iter().map(|e| (e.src, e.street.to_string(), e.dst)).collect(),
        car: GraphCar { position: s.map.car_position().to_string(), destination: s.map.destination().to_string() },
        obstacles: s
            .obstacles
            .iter()
            .map(|(start, moves)| GraphObstacle {
                position: start.to_string(),
                moves: moves
                    .iter()
                    .map(|m| match m {
                        ObstacleOp::Random => OpFile::Named(NamedOp::Random),
                        ObstacleOp::Leave => OpFile::Named(NamedOp::Leave),
                        ObstacleOp::TurnedN(n) => OpFile::Turn { turn: *n },
                    })
                    .collect(),
            })
            .collect(),
    }
}

fn grid_scenario(g: GridFile) -> Result<GridScenario, ScenarioError> {
    let mut statics = vec![];
    for s in g.statics {
        let mut rec = ObstacleRec::building(name(&s.kind)?.as_str(), s.x, s.y, s.w, s.h);
        rec.transparent = s.transparent;
        statics.push(rec);
    }
    let mut mobiles = vec![];
    for m in g.mobile {
        let direction = m.direction.or(m.moves.first().copied()).unwrap_or(Direction::None);
        mobiles.push(ObstacleRec {
            kind: name(&m.kind)?,
            anchor: Position::new(m.x, m.y),
            extent: (m.w, m.h),
            speed: m.speed,
            direction,
            transparent: m.transparent,
            cyclic: m.cyclic,
            moves: m.moves,
        });
    }
    let scn = GridScenario {
        width: g.width,
        height: g.height,
        statics,
        mobiles,
        car: CarSpec { position: Position::new(g.car.x, g.car.y), speed: g.car.speed, moves: g.car.moves, cyclic: g.car.cyclic },
        dist_min: g.dist_min,
    };
    scn.validate()?;
    Ok(scn)
}

fn grid_file(s: &GridScenario) -> GridFile {
    GridFile {
        width: s.width,
        height: s.height,
        statics: s
            .statics
            .iter()
            .map(|o| StaticFile {
                kind: o.kind.to_string(),
                x: o.anchor.x,
                y: o.anchor.y,
                w: o.extent.0,
                h: o.extent.1,
                transparent: o.transparent,
            })
            .collect(),
        mobile: s
            .mobiles
            .iter()
            .map(|o| MobileFile {
                kind: o.kind.to_string(),
                x: o.anchor.x,
                y: o.anchor.y,
                w: o.extent.0,
                h: o.extent.1,
                speed: o.speed,
                direction: (o.moves.first() != Some(&o.direction)).then_some(o.direction),
                transparent: o.transparent,
                cyclic: o.cyclic,
                moves: o.moves.clone(),
            })
            .collect(),
        car: CarFile {
            x: s.car.position.x,
            y: s.car.position.y,
            speed: s.car.speed,
            cyclic: s.car.cyclic,
            moves: s.car.moves.clone(),
        },
        dist_min: s.dist_min,
    }
}
