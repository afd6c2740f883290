//! Oracles and generators shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::path::PathBuf;

use avmodel::kernel::{decode_state, Action, Component, Composition, Lts, Move, Process, Symbol, Value};
use avmodel::perception::{Actors, GridScenario, PerceptionCell, PerceptionGrid, Position};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

// ---------------------------------------------------------------------------
// random table-driven compositions

#[derive(Clone, Debug)]
pub enum TableMove {
    Emit(String, u64, usize),
    Listen(String),
}

#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub gates: BTreeSet<Symbol>,
    pub moves: Vec<Vec<TableMove>>,
    pub accepts: HashMap<(usize, String, u64), usize>,
}

impl Process for Table {
    type State = usize;

    fn name(&self) -> &str {
        &self.name
    }

    fn sync_gates(&self) -> &BTreeSet<Symbol> {
        &self.gates
    }

    fn initial(&self) -> usize {
        0
    }

    fn moves(&self, s: &usize) -> Vec<Move<usize>> {
        self.moves[*s]
            .iter()
            .map(|m| match m {
                TableMove::Emit(g, v, n) => Move::emit(g, vec![Value::Nat(*v)], *n),
                TableMove::Listen(g) => Move::listen(g),
            })
            .collect()
    }

    fn accept(&self, s: &usize, a: &Action) -> Option<usize> {
        let v = a.offers.first()?.as_nat()?;
        self.accepts.get(&(*s, a.gate.to_string(), v)).copied()
    }
}

const GATES: [&str; 3] = ["a", "b", "c"];

/// At most three components with at most four local states over at most
/// three gates (plus the internal gate, which never synchronizes).
pub fn random_tables<R: Rng>(rng: &mut R) -> Vec<Table> {
    let num_gates = rng.gen_range(1..=3);
    let gates: Vec<&str> = GATES[..num_gates].to_vec();
    let mut all = gates.clone();
    all.push("i");
    (0..rng.gen_range(1..=3))
        .map(|c| {
            let n = rng.gen_range(1..=4);
            let sync: BTreeSet<Symbol> = gates.iter().filter(|_| rng.gen_bool(0.6)).map(Symbol::new).collect();
            let moves = (0..n)
                .map(|_| {
                    (0..rng.gen_range(0..=3))
                        .map(|_| {
                            let g = all.choose(rng).unwrap().to_string();
                            if g != "i" && rng.gen_bool(0.3) {
                                TableMove::Listen(g)
                            } else {
                                TableMove::Emit(g, rng.gen_range(0..2), rng.gen_range(0..n))
                            }
                        })
                        .collect()
                })
                .collect();
            let mut accepts = HashMap::new();
            for s in 0..n {
                for g in &gates {
                    for v in 0..2 {
                        if rng.gen_bool(0.6) {
                            accepts.insert((s, g.to_string(), v), rng.gen_range(0..n));
                        }
                    }
                }
            }
            Table { name: format!("P{c}"), gates: sync, moves, accepts }
        })
        .collect()
}

pub fn compose(tables: &[Table]) -> Composition {
    Composition::new(tables.iter().cloned().map(|t| Box::new(t) as Box<dyn Component>).collect()).unwrap()
}

#[derive(Clone)]
enum Choice {
    Idle,
    Emit(Action, usize),
    Listen(Symbol),
}

/// Enumerates every combination of per-component choices and keeps the
/// combinations that form a legal step.
pub fn oracle_steps(tables: &[Table], state: &[usize]) -> BTreeSet<(Action, Vec<usize>)> {
    let choices: Vec<Vec<Choice>> = tables
        .iter()
        .zip(state)
        .map(|(t, &s)| {
            let mut cs = vec![Choice::Idle];
            for m in &t.moves[s] {
                cs.push(match m {
                    TableMove::Emit(g, v, n) => Choice::Emit(Action::new(g.as_str(), vec![Value::Nat(*v)]), *n),
                    TableMove::Listen(g) => Choice::Listen(Symbol::new(g)),
                });
            }
            cs
        })
        .collect();
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; tables.len()];
    loop {
        let picked: Vec<&Choice> = idx.iter().zip(&choices).map(|(&k, cs)| &cs[k]).collect();
        if let Some(step) = legal(tables, state, &picked) {
            out.insert(step);
        }
        let mut i = 0;
        loop {
            if i == idx.len() {
                return out;
            }
            idx[i] += 1;
            if idx[i] < choices[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

fn legal(tables: &[Table], state: &[usize], picked: &[&Choice]) -> Option<(Action, Vec<usize>)> {
    let emitted: BTreeSet<&Action> = picked
        .iter()
        .filter_map(|c| match c {
            Choice::Emit(a, _) => Some(a),
            _ => None,
        })
        .collect();
    if emitted.len() != 1 {
        return None;
    }
    let action = (*emitted.iter().next().unwrap()).clone();
    let active: BTreeSet<usize> = (0..picked.len()).filter(|&i| !matches!(picked[i], Choice::Idle)).collect();
    let syncs: BTreeSet<usize> = (0..tables.len()).filter(|&i| tables[i].gates.contains(&action.gate)).collect();
    if syncs.is_empty() {
        if active.len() != 1 {
            return None;
        }
    } else if active != syncs {
        return None;
    }
    let mut next = state.to_vec();
    for &i in &active {
        next[i] = match picked[i] {
            Choice::Emit(_, n) => *n,
            Choice::Listen(g) if *g == action.gate => Process::accept(&tables[i], &state[i], &action)?,
            _ => return None,
        };
    }
    Some((action, next))
}

/// Compares the kernel against the oracle on every reachable state; returns
/// the number of states compared.
pub fn compare_with_oracle(tables: &[Table]) -> Result<usize, String> {
    let comp = compose(tables);
    let init = vec![0usize; tables.len()];
    let mut seen = HashSet::from([init.clone()]);
    let mut queue = VecDeque::from([init]);
    while let Some(s) = queue.pop_front() {
        let global = s.iter().map(|&x| avmodel::kernel::encode_state(&x)).collect();
        let kernel: BTreeSet<(Action, Vec<usize>)> = comp
            .enabled_actions(&global)
            .into_iter()
            .map(|(a, g)| (a, g.iter().map(|b| decode_state::<usize>(b)).collect()))
            .collect();
        let expected = oracle_steps(tables, &s);
        if kernel != expected {
            return Err(format!("state {s:?}: kernel {kernel:?}, oracle {expected:?}, tables {tables:?}"));
        }
        for (_, t) in expected {
            if seen.insert(t.clone()) {
                queue.push_back(t);
            }
        }
    }
    Ok(seen.len())
}

// ---------------------------------------------------------------------------
// random LTSs and bisimulation oracles

pub fn random_lts<R: Rng>(rng: &mut R, max_states: usize) -> Lts {
    let n = rng.gen_range(1..=max_states);
    let labels = ["a", "b", "c"];
    let mut ts = vec![];
    if rng.gen_bool(0.5) {
        for s in 0..n {
            for _ in 0..rng.gen_range(0..=3) {
                ts.push((s, Action::bare(*labels.choose(rng).unwrap()), rng.gen_range(0..n)));
            }
        }
    } else {
        // copies of a small quotient, so that large classes exist
        let k = rng.gen_range(1..=n.min(12));
        let class: Vec<usize> = (0..n).map(|s| if s < k { s } else { rng.gen_range(0..k) }).collect();
        let members: Vec<Vec<usize>> = (0..k).map(|c| (0..n).filter(|&s| class[s] == c).collect()).collect();
        let quotient: Vec<Vec<(usize, usize)>> = (0..k)
            .map(|_| (0..rng.gen_range(0..=3)).map(|_| (rng.gen_range(0..labels.len()), rng.gen_range(0..k))).collect())
            .collect();
        for s in 0..n {
            for &(l, d) in &quotient[class[s]] {
                ts.push((s, Action::bare(labels[l]), *members[d].choose(rng).unwrap()));
            }
        }
    }
    Lts::from_transitions(n, 0, ts).unwrap()
}

/// Largest strong bisimulation on `lts`, computed as a greatest fixpoint
/// over the full relation.
pub fn naive_bisimulation(lts: &Lts) -> Vec<Vec<bool>> {
    let n = lts.num_states();
    let out: Vec<Vec<(usize, usize)>> = (0..n).map(|s| lts.outgoing(s).iter().map(|&(_, l, t)| (l, t)).collect()).collect();
    let mut rel = vec![vec![true; n]; n];
    let simulated = |rel: &Vec<Vec<bool>>, s: usize, t: usize| {
        out[s].iter().all(|&(l, s2)| out[t].iter().any(|&(m, t2)| m == l && rel[s2][t2]))
    };
    loop {
        let mut changed = false;
        for s in 0..n {
            for t in 0..n {
                if rel[s][t] && !(simulated(&rel, s, t) && simulated(&rel, t, s)) {
                    rel[s][t] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return rel;
        }
    }
}

/// Checks that pairing each state of `lts` with `block[state]` of `min` is a
/// winning position for the defender in the bisimulation game: every
/// attacker move on either side can be answered inside the relation.
pub fn game_check(lts: &Lts, min: &Lts, block: &[usize]) -> Result<(), String> {
    if block[lts.initial()] != min.initial() {
        return Err("initial states are not related".into());
    }
    for s in 0..lts.num_states() {
        let b = block[s];
        for &(_, l, t) in lts.outgoing(s) {
            let a = lts.label(l);
            if !min.outgoing(b).iter().any(|&(_, m, u)| min.label(m) == a && u == block[t]) {
                return Err(format!("left move {s} -{a}-> {t} unanswered from block {b}"));
            }
        }
        for &(_, m, u) in min.outgoing(b) {
            let a = min.label(m);
            if !lts.outgoing(s).iter().any(|&(_, l, t)| lts.label(l) == a && block[t] == u) {
                return Err(format!("right move {b} -{a}-> {u} unanswered from state {s}"));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// round structure of the grid model

/// Checks that every path reads (OBSTACLE_POSITION^N CAR_POSITION TICK)*
/// followed by ARRIVAL (instead of CAR_POSITION) or COLLISION (after it),
/// with obstacles in declaration order, and that sinks follow a terminal.
pub fn check_rounds(lts: &Lts, kinds: &[Symbol]) -> Result<(), String> {
    #[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
    enum R {
        Obs(usize),
        Car,
        Tick,
        Done,
    }
    let n = kinds.len();
    let start = if n == 0 { R::Car } else { R::Obs(0) };
    let mut seen = HashSet::from([(lts.initial(), start)]);
    let mut queue = VecDeque::from([(lts.initial(), start)]);
    while let Some((s, r)) = queue.pop_front() {
        if lts.outgoing(s).is_empty() && r != R::Done {
            return Err(format!("state {s} is a sink in round position {r:?}"));
        }
        for &(_, l, t) in lts.outgoing(s) {
            let a = lts.label(l);
            let next = match (r, a.gate.as_str()) {
                (_, "GRID_UPDATE" | "GRID_CAR" | "LIDAR_MAP" | "END_OBSTACLE") if r != R::Done => r,
                (R::Obs(j), "OBSTACLE_POSITION") if a.offers.first().and_then(Value::as_sym) == Some(&kinds[j]) => {
                    if j + 1 == n {
                        R::Car
                    } else {
                        R::Obs(j + 1)
                    }
                }
                (R::Car, "CAR_POSITION") => R::Tick,
                (R::Car, "ARRIVAL") | (R::Tick, "COLLISION") => R::Done,
                (R::Tick, "TICK") => start,
                _ => return Err(format!("{a} out of place at {r:?}")),
            };
            if seen.insert((t, next)) {
                queue.push_back((t, next));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// perception oracle

/// Whether the closed unit square centred on `cell` meets the segment
/// between the centres `p` and `q`. Works in doubled integer coordinates.
pub fn square_meets_segment(p: (i64, i64), q: (i64, i64), cell: (i64, i64)) -> bool {
    let (px, py, qx, qy) = (2 * p.0, 2 * p.1, 2 * q.0, 2 * q.1);
    let (lo_x, hi_x, lo_y, hi_y) = (2 * cell.0 - 1, 2 * cell.0 + 1, 2 * cell.1 - 1, 2 * cell.1 + 1);
    if px.max(qx) < lo_x || px.min(qx) > hi_x || py.max(qy) < lo_y || py.min(qy) > hi_y {
        return false;
    }
    let side = |x: i64, y: i64| ((qx - px) * (y - py) - (qy - py) * (x - px)).signum();
    let sides: BTreeSet<i64> = [(lo_x, lo_y), (lo_x, hi_y), (hi_x, lo_y), (hi_x, hi_y)].iter().map(|&(x, y)| side(x, y)).collect();
    !(sides.len() == 1 && !sides.contains(&0))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Truth {
    Free,
    Opaque,
    Transparent,
}

/// Ground truth read straight from the obstacle rectangles.
pub fn truth(scn: &GridScenario, actors: &Actors, x: i64, y: i64) -> Truth {
    let p = Position::new(x as u32, y as u32);
    let placed = scn.statics.iter().map(|o| (o, o.anchor)).chain(scn.mobiles.iter().zip(actors.mobiles.iter().copied()));
    let mut result = Truth::Free;
    for (o, at) in placed {
        if o.covers_at(at, p) {
            if !o.transparent {
                return Truth::Opaque;
            }
            result = Truth::Transparent;
        }
    }
    result
}

/// Expected perception grid: ray casting against the ground truth, then a
/// cell-by-cell diff against the previous grid in world coordinates.
pub fn oracle_perception(
    scn: &GridScenario,
    actors: &Actors,
    prev: Option<(&PerceptionGrid, Position)>,
) -> [[PerceptionCell; 5]; 5] {
    let car = (i64::from(actors.car.x), i64::from(actors.car.y));
    let (w, h) = (i64::from(scn.width), i64::from(scn.height));
    let mut previous: BTreeMap<(i64, i64), PerceptionCell> = BTreeMap::new();
    if let Some((g, at)) = prev {
        for (r, row) in g.cells.iter().enumerate() {
            for (c, &cell) in row.iter().enumerate() {
                previous.insert((i64::from(at.x) + c as i64 - 2, i64::from(at.y) + r as i64 - 2), cell);
            }
        }
    }
    let mut out = [[PerceptionCell::U; 5]; 5];
    for r in 0..5 {
        for c in 0..5 {
            let (x, y) = (car.0 + c as i64 - 2, car.1 + r as i64 - 2);
            out[r][c] = if x < 0 || y < 0 || x >= w || y >= h {
                PerceptionCell::U
            } else if (x, y) == car {
                PerceptionCell::C
            } else {
                let blocked = (0..w).any(|bx| {
                    (0..h).any(|by| {
                        (bx, by) != car
                            && (bx, by) != (x, y)
                            && truth(scn, actors, bx, by) == Truth::Opaque
                            && square_meets_segment(car, (x, y), (bx, by))
                    })
                });
                let was_free = previous.get(&(x, y)) == Some(&PerceptionCell::F);
                match (blocked, truth(scn, actors, x, y), was_free) {
                    (true, _, _) => PerceptionCell::U,
                    (_, Truth::Opaque, true) => PerceptionCell::M,
                    (_, Truth::Opaque, false) => PerceptionCell::O,
                    (_, Truth::Transparent, true) => PerceptionCell::N,
                    (_, Truth::Transparent, false) => PerceptionCell::T,
                    (_, Truth::Free, _) => PerceptionCell::F,
                }
            };
        }
    }
    out
}
