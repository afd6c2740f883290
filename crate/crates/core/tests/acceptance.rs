//! End-to-end acceptance run: one line per criterion, non-zero exit on any
//! failure.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use avmodel::control::{apply_control, build_control_composition, Control, ControlScenario};
use avmodel::kernel::{
    bisimulation_partition, explore, export_aut_string, import_aut_str, minimize, Action, Composition,
    ExplorationLimits, GlobalState, Lts, Symbol,
};
use avmodel::perception::{
    build_grid_composition, compute_perception, Actors, CarSpec, GridMap, GridScenario, ObstacleRec,
    PerceptionCell, Position,
};
use avmodel::properties::{
    check_consistent_updates, check_consistent_updates_with, check_inevitable_termination, TerminationSpec,
};
use avmodel::scenario::Scenario;
use avmodel::testgen::{extract_test, product_with_purpose, replay, trace_to_scenario, TestPurpose};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.1?}, limit {limit:?}"))?;
    Ok(took)
}

fn load(name: &str) -> Scenario {
    Scenario::from_json(&fs::read_to_string(common::scenarios_dir().join(name)).unwrap()).unwrap()
}

fn graph(name: &str) -> ControlScenario {
    match load(name) {
        Scenario::Graph(s) => s,
        Scenario::Grid(_) => panic!("{name} is not a graph scenario"),
    }
}

fn grid(path: &Path) -> GridScenario {
    match Scenario::from_json(&fs::read_to_string(path).unwrap()).unwrap() {
        Scenario::Grid(s) => s,
        Scenario::Graph(_) => panic!("{} is not a grid scenario", path.display()),
    }
}

fn full(comp: &Composition) -> Lts {
    explore(comp, &ExplorationLimits::default()).unwrap()
}

fn kernel_oracle() -> Outcome {
    let start = Instant::now();
    let mut states = 0;
    for seed in 0..200 {
        let tables = common::random_tables(&mut ChaCha8Rng::seed_from_u64(seed));
        states += common::compare_with_oracle(&tables).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    let took = within(start, Duration::from_secs(10))?;
    Ok(format!("200 compositions, {states} states compared in {took:.1?}"))
}

fn minimization_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..100 {
        let lts = common::random_lts(&mut rng, 200);
        let block = bisimulation_partition(&lts);
        let rel = common::naive_bisimulation(&lts);
        for s in 0..lts.num_states() {
            for t in 0..lts.num_states() {
                ensure((block[s] == block[t]) == rel[s][t], || format!("sample {k}: states {s}, {t} disagree"))?;
            }
        }
        let min = minimize(&lts);
        ensure(minimize(&min).edge_set() == min.edge_set(), || format!("sample {k}: not idempotent"))?;
    }
    for k in 0..20 {
        let lts = common::random_lts(&mut rng, 500);
        let min = minimize(&lts);
        common::game_check(&lts, &min, &bisimulation_partition(&lts)).map_err(|e| format!("game sample {k}: {e}"))?;
    }
    let took = within(start, Duration::from_secs(30))?;
    Ok(format!("100 fixpoint comparisons, 20 games in {took:.1?}"))
}

fn control_reference() -> Outcome {
    let start = Instant::now();
    let scn = graph("control_reference.json");
    let lts = full(&build_control_composition(&scn).unwrap());
    let n = lts.num_states();
    ensure((1_000..=1_000_000).contains(&n), || format!("{n} states"))?;
    let p1 = check_consistent_updates(&lts, &scn.map).map_err(|e| e.to_string())?;
    ensure(p1.is_pass(), || format!("property 1: {}", p1.kind()))?;
    let p2 = check_inevitable_termination(&lts, &TerminationSpec::standard(scn.obstacles.len()));
    ensure(p2.is_pass(), || format!("property 2: {}", p2.kind()))?;
    let min = minimize(&lts);
    ensure(min.num_states() < n, || format!("minimize kept {} of {n} states", min.num_states()))?;
    let took = within(start, Duration::from_secs(60))?;
    Ok(format!("{n} states, {} transitions, minimized {} states; P1 pass, P2 pass in {took:.1?}", lts.num_transitions(), min.num_states()))
}

fn perception_crossroad() -> Outcome {
    let start = Instant::now();
    let scn = grid(&common::scenarios_dir().join("crossroad.json"));
    let lts = full(&build_grid_composition(&scn, false).unwrap());
    let n = lts.num_states();
    ensure((1_000..=1_000_000).contains(&n), || format!("{n} states"))?;
    let kinds: Vec<Symbol> = scn.mobiles.iter().map(|o| o.kind.clone()).collect();
    common::check_rounds(&lts, &kinds)?;
    let min = minimize(&lts);
    ensure(min.num_states() <= n, || "minimize grew the LTS".into())?;
    let took = within(start, Duration::from_secs(60))?;
    Ok(format!("{n} states, {} transitions, minimized {} states; rounds hold in {took:.1?}", lts.num_transitions(), min.num_states()))
}

struct GridCase {
    name: &'static str,
    scn: GridScenario,
    /// Actor positions of the first and, optionally, a second tick.
    ticks: Vec<Actors>,
    /// Cells (dx, dy, letter) the final grid must show.
    expect: Vec<(i64, i64, PerceptionCell)>,
}

fn wall(x: u32, y: u32) -> ObstacleRec {
    ObstacleRec::building("Wall", x, y, 1, 1)
}

fn walker(kind: &str, x: u32, y: u32, transparent: bool) -> ObstacleRec {
    let mut o = ObstacleRec::building(kind, x, y, 1, 1);
    o.transparent = transparent;
    o.speed = 1;
    o
}

fn grid_case(statics: Vec<ObstacleRec>, mobiles: Vec<ObstacleRec>, car: (u32, u32)) -> GridScenario {
    GridScenario {
        width: 10,
        height: 10,
        statics,
        mobiles,
        car: CarSpec { position: Position::new(car.0, car.1), speed: 1, moves: vec![], cyclic: false },
        dist_min: 3,
    }
}

fn actors(car: (u32, u32), mobiles: &[(u32, u32)]) -> Actors {
    Actors { car: Position::new(car.0, car.1), mobiles: mobiles.iter().map(|&(x, y)| Position::new(x, y)).collect() }
}

fn grid_cases() -> Vec<GridCase> {
    use PerceptionCell::*;
    let ped = || walker("Pedestrian", 0, 0, true);
    let car2 = || walker("Other_Car", 0, 0, false);
    vec![
        GridCase { name: "open centre", scn: grid_case(vec![], vec![], (5, 5)), ticks: vec![actors((5, 5), &[])], expect: vec![(0, 0, C), (2, 2, F), (-2, -2, F)] },
        GridCase { name: "top-left corner", scn: grid_case(vec![], vec![], (0, 0)), ticks: vec![actors((0, 0), &[])], expect: vec![(-1, 0, U), (0, -1, U), (1, 1, F)] },
        GridCase { name: "bottom edge", scn: grid_case(vec![], vec![], (4, 9)), ticks: vec![actors((4, 9), &[])], expect: vec![(0, 1, U), (2, 2, U), (0, -2, F)] },
        GridCase { name: "right edge", scn: grid_case(vec![], vec![], (9, 3)), ticks: vec![actors((9, 3), &[])], expect: vec![(1, 0, U), (-2, 0, F)] },
        GridCase { name: "wall hides the cell behind", scn: grid_case(vec![wall(5, 4)], vec![], (5, 5)), ticks: vec![actors((5, 5), &[])], expect: vec![(0, -1, O), (0, -2, U)] },
        GridCase { name: "diagonal shadow", scn: grid_case(vec![wall(6, 6)], vec![], (5, 5)), ticks: vec![actors((5, 5), &[])], expect: vec![(1, 1, O), (2, 2, U), (2, 1, U), (2, 0, F)] },
        GridCase { name: "corner-touching ray", scn: grid_case(vec![wall(6, 5)], vec![], (5, 5)), ticks: vec![actors((5, 5), &[])], expect: vec![(1, 0, O), (2, 0, U), (2, 1, U)] },
        GridCase { name: "transparent does not occlude", scn: grid_case(vec![], vec![ped()], (5, 5)), ticks: vec![actors((5, 5), &[(5, 4)])], expect: vec![(0, -1, T), (0, -2, F)] },
        GridCase { name: "building block", scn: grid_case(vec![ObstacleRec::building("Scenery", 0, 0, 4, 4)], vec![], (4, 4)), ticks: vec![actors((4, 4), &[])], expect: vec![(-1, -1, O), (-2, -2, U), (0, -1, F)] },
        GridCase { name: "opaque arrival marked M", scn: grid_case(vec![], vec![car2()], (5, 5)), ticks: vec![actors((5, 5), &[(9, 9)]), actors((5, 5), &[(6, 4)])], expect: vec![(1, -1, M), (2, -2, U)] },
        GridCase { name: "transparent arrival marked N", scn: grid_case(vec![], vec![ped()], (5, 5)), ticks: vec![actors((5, 5), &[(0, 0)]), actors((5, 5), &[(4, 5)])], expect: vec![(-1, 0, N), (-2, 0, F)] },
        GridCase { name: "already seen stays O", scn: grid_case(vec![], vec![car2()], (5, 5)), ticks: vec![actors((5, 5), &[(6, 5)]), actors((5, 5), &[(6, 5)])], expect: vec![(1, 0, O)] },
        GridCase { name: "window shift keeps world cells", scn: grid_case(vec![], vec![car2()], (5, 5)), ticks: vec![actors((5, 6), &[(0, 0)]), actors((5, 5), &[(5, 4)])], expect: vec![(0, -1, M)] },
        GridCase { name: "newly visible is not M", scn: grid_case(vec![], vec![car2()], (5, 5)), ticks: vec![actors((5, 8), &[(0, 0)]), actors((5, 5), &[(5, 3)])], expect: vec![(0, -2, O)] },
        GridCase { name: "hidden before is not M", scn: grid_case(vec![wall(5, 4)], vec![car2()], (5, 5)), ticks: vec![actors((5, 5), &[(0, 0)]), actors((5, 5), &[(6, 3)])], expect: vec![(1, -2, U), (0, -1, O)] },
    ]
}

fn perception_grid_suite() -> Outcome {
    let cases = grid_cases();
    for case in &cases {
        let mut prev = None;
        let mut last = None;
        for a in &case.ticks {
            let got = compute_perception(&GridMap::with_actors(&case.scn, a), prev.as_ref().map(|(g, p)| (g, *p)), a.car);
            let expected = common::oracle_perception(&case.scn, a, prev.as_ref().map(|(g, p)| (g, *p)));
            ensure(got.cells == expected, || format!("{}: got {got:?}, oracle {expected:?}", case.name))?;
            prev = Some((got.clone(), a.car));
            last = Some(got);
        }
        let g = last.unwrap();
        for &(dx, dy, cell) in &case.expect {
            ensure(g.at(dx, dy) == cell, || format!("{}: ({dx},{dy}) is {:?}, want {cell:?}", case.name, g.at(dx, dy)))?;
        }
    }
    let seen: BTreeSet<char> = cases.iter().flat_map(|c| c.expect.iter().map(|e| e.2.letter())).collect();
    ensure(seen.is_superset(&"CUOTFMN".chars().collect()), || format!("cell kinds covered: {seen:?}"))?;
    Ok(format!("{} cases agree with the ray-cast oracle", cases.len()))
}

#[derive(Deserialize)]
struct ManifestEntry {
    name: String,
    scenario: String,
    purpose: String,
    outcome: String,
    terminal: Option<String>,
    collision: Option<String>,
}

fn run_config(dir: &Path, e: &ManifestEntry) -> Result<(), String> {
    let scn = grid(&dir.join(&e.scenario));
    let tp = TestPurpose::from_json(&fs::read_to_string(dir.join(&e.purpose)).unwrap()).map_err(|x| x.to_string())?;
    let lts = full(&build_grid_composition(&scn, false).unwrap());
    match (extract_test(&product_with_purpose(&lts, &tp)), e.outcome.as_str()) {
        (None, "inconclusive") => Ok(()),
        (Some(test), "witness") => {
            let sim = trace_to_scenario(&test.witness).map_err(|x| x.to_string())?;
            let terminal = serde_json::to_value(sim.terminal).unwrap();
            ensure(terminal.as_str() == e.terminal.as_deref(), || format!("terminal {terminal}"))?;
            ensure(sim.collision == e.collision, || format!("collision {:?}", sim.collision))?;
            let replayed = replay(&scn, &sim).map_err(|x| x.to_string())?;
            ensure(trace_to_scenario(&replayed) == Ok(sim), || "replay diverges from the witness".into())
        }
        (got, want) => Err(format!("expected {want}, got {}", if got.is_some() { "witness" } else { "inconclusive" })),
    }
}

fn test_generation() -> Outcome {
    let start = Instant::now();
    let cross = grid(&common::scenarios_dir().join("crossroad.json"));
    let lts = full(&build_grid_composition(&cross, false).unwrap());
    let tp = TestPurpose::from_json(r#"[{"gate": "COLLISION", "offers": ["Pedestrian"]}]"#).unwrap();
    let test = extract_test(&product_with_purpose(&lts, &tp)).ok_or("collision purpose inconclusive")?;
    let last = test.witness.last().map(Action::to_string);
    ensure(last.as_deref() == Some("COLLISION !Pedestrian"), || format!("witness ends with {last:?}"))?;
    let sim = trace_to_scenario(&test.witness).map_err(|e| e.to_string())?;
    let replayed = replay(&cross, &sim).map_err(|e| e.to_string())?;
    let last = replayed.last().map(Action::to_string);
    ensure(last.as_deref() == Some("COLLISION !Pedestrian"), || format!("replay ends with {last:?}"))?;
    let never = TestPurpose::from_json(r#"[{"gate": "NO_SUCH_GATE"}]"#).unwrap();
    ensure(extract_test(&product_with_purpose(&lts, &never)).is_none(), || "unreachable gate was reached".into())?;

    let dir = common::scenarios_dir().join("configs");
    let manifest: Vec<ManifestEntry> = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    ensure(manifest.len() == 10, || format!("{} configurations", manifest.len()))?;
    let configs = Instant::now();
    for e in &manifest {
        run_config(&dir, e).map_err(|m| format!("{}: {m}", e.name))?;
    }
    let took = within(configs, Duration::from_secs(120))?;
    Ok(format!(
        "witness of {} actions ends in COLLISION !Pedestrian and replays; 10 configurations in {took:.1?} ({:.1?} total)",
        test.witness.len(),
        start.elapsed()
    ))
}

fn aut_round_trip() -> Outcome {
    let mut checked = 0;
    let mut all = vec![];
    let control = full(&build_control_composition(&graph("control_reference.json")).unwrap());
    let cross = grid(&common::scenarios_dir().join("crossroad.json"));
    all.push(minimize(&control));
    all.push(control);
    all.push(full(&build_grid_composition(&cross, false).unwrap()));
    all.push(full(&build_grid_composition(&cross, true).unwrap()));
    for entry in fs::read_dir(common::scenarios_dir().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        if path.to_string_lossy().ends_with(".scenario.json") {
            all.push(full(&build_grid_composition(&grid(&path), true).unwrap()));
        }
    }
    for lts in &all {
        let text = export_aut_string(lts);
        let back = import_aut_str(&text).map_err(|e| e.to_string())?;
        ensure(back.num_states() == lts.num_states() && back.num_transitions() == lts.num_transitions(), || "sizes differ".into())?;
        ensure(back.edge_set() == lts.edge_set(), || "labels differ".into())?;
        checked += 1;
    }
    let golden = common::scenarios_dir().join("golden");
    let runs: [(&str, &str, bool); 2] = [("tiny_graph.json", "tiny_graph.aut", false), ("tiny_grid.json", "tiny_grid.exposed.aut", true)];
    for (scn, aut, expose) in runs {
        let expected = fs::read(golden.join(aut)).unwrap();
        for _ in 0..2 {
            let comp = match Scenario::from_json(&fs::read_to_string(golden.join(scn)).unwrap()).unwrap() {
                Scenario::Graph(s) => build_control_composition(&s).unwrap(),
                Scenario::Grid(s) => build_grid_composition(&s, expose).unwrap(),
            };
            ensure(export_aut_string(&full(&comp)).into_bytes() == expected, || format!("{aut} differs"))?;
        }
    }
    Ok(format!("{checked} LTSs round-trip; 2 golden files byte-identical"))
}

/// All composition states reachable by following `trace` from the start.
fn replay_in_composition(comp: &Composition, trace: &[Action]) -> bool {
    let mut current: BTreeSet<GlobalState> = BTreeSet::from([comp.initial_state()]);
    for a in trace {
        current = current
            .iter()
            .flat_map(|s| comp.enabled_actions(s))
            .filter(|(b, _)| b == a)
            .map(|(_, t)| t)
            .collect();
        if current.is_empty() {
            return false;
        }
    }
    true
}

fn mutation_detected() -> Outcome {
    let scn = graph("control_reference.json");
    let comp = build_control_composition(&scn).unwrap();
    let lts = full(&comp);
    let map = scn.map.clone();
    let corrupted = move |cur: &Symbol, c: &Control, next: &Symbol| {
        let c = match c {
            Control::TurnedN(0) => Control::TurnedN(1),
            Control::TurnedN(1) => Control::TurnedN(0),
            other => other.clone(),
        };
        apply_control(&map, cur, &c).as_ref() == Some(next)
    };
    let verdict = check_consistent_updates_with(&lts, corrupted).map_err(|e| e.to_string())?;
    ensure(verdict.kind() == "fail", || format!("verdict {}", verdict.kind()))?;
    let trace = verdict.trace();
    ensure(lts.accepts_trace(&trace), || "counterexample is not a trace of the LTS".into())?;
    ensure(replay_in_composition(&comp, &trace), || "counterexample does not replay in the model".into())?;
    let last = trace.last().map(Action::to_string).unwrap_or_default();
    ensure(last.starts_with("UPDATE_POSITION"), || format!("ends with {last}"))?;
    Ok(format!("fail with a {}-step counterexample ending in `{last}`", trace.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("kernel oracle", kernel_oracle),
        ("minimization oracle", minimization_oracle),
        ("control reference", control_reference),
        ("perception crossroad", perception_crossroad),
        ("perception grid suite", perception_grid_suite),
        ("test generation", test_generation),
        ("aut round trip", aut_round_trip),
        ("property 1 mutation", mutation_detected),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
