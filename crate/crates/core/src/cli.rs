//! Command-line front end.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::control::{self, build_control_composition};
use crate::kernel::{
    explore, export_aut, import_aut_str, minimize, Composition, ExplorationLimits, ExploreError, Lts, Symbol,
};
use crate::perception::{build_grid_composition, gates as grid_gates};
use crate::properties::{check_consistent_updates, check_deadlock_freedom, check_inevitable_termination, TerminationSpec};
use crate::scenario::Scenario;
use crate::testgen::{extract_test, product_with_purpose, render_frames, trace_to_scenario, SimScenario, TestPurpose};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_LIMIT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "avmodel", version, about = "Explore, minimize, check and mine autonomous-vehicle models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PropertyName {
    ConsistentMoves,
    InevitableTermination,
    Deadlock,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate the LTS of a scenario and write it as AUT.
    Explore {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5_000_000)]
        max_states: usize,
        /// Zero means unlimited.
        #[arg(long, default_value_t = 0)]
        max_depth: usize,
        /// Keep LiDAR grids in the labels (grid scenarios only).
        #[arg(long)]
        expose_grid: bool,
    },
    /// Reduce an AUT file modulo strong bisimulation.
    Minimize { input: PathBuf, output: PathBuf },
    /// Check a property on an AUT file and print the verdict as JSON.
    Check {
        #[arg(long)]
        lts: PathBuf,
        #[arg(long, value_enum)]
        property: PropertyName,
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Extract a witness for a test purpose and write it as a simulator scenario.
    Testgen {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        purpose: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5_000_000)]
        max_states: usize,
    },
    /// Print one map frame per tick of a simulator scenario.
    Render {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        sim: PathBuf,
    },
}

/// A failed command: exit status and message for standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn input<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> Failure {
    move |e| Failure { code: EXIT_INPUT, message: format!("{context}: {e}") }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(input(path.display()))
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    Scenario::from_json(&read(path)?).map_err(input(path.display()))
}

fn write_aut(lts: &Lts, path: &Path) -> Result<(), Failure> {
    let mut file = io::BufWriter::new(fs::File::create(path).map_err(input(path.display()))?);
    export_aut(lts, &mut file).map_err(input(path.display()))?;
    file.flush().map_err(input(path.display()))
}

fn composition(scn: &Scenario, expose_grid: bool) -> Result<Composition, Failure> {
    match scn {
        Scenario::Graph(s) => build_control_composition(s).map_err(input("scenario")),
        Scenario::Grid(s) => build_grid_composition(s, expose_grid).map_err(input("scenario")),
    }
}

/// Runs one command, writing results to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<u8, Failure> {
    let io_err = |e: io::Error| Failure { code: EXIT_INPUT, message: e.to_string() };
    match cli.command {
        Command::Explore { scenario, out: path, max_states, max_depth, expose_grid } => {
            let comp = composition(&load_scenario(&scenario)?, expose_grid)?;
            let start = Instant::now();
            let (lts, code) = match explore(&comp, &ExplorationLimits { max_states, max_depth }) {
                Ok(lts) => (lts, EXIT_OK),
                Err(ExploreError::LimitExceeded { kind, count, partial }) => {
                    eprintln!("{kind} limit exceeded after {count} states; partial LTS written");
                    (*partial, EXIT_LIMIT)
                }
            };
            write_aut(&lts, &path)?;
            writeln!(out, "states={} transitions={}", lts.num_states(), lts.num_transitions()).map_err(io_err)?;
            eprintln!("time={:.3}s", start.elapsed().as_secs_f64());
            Ok(code)
        }
        Command::Minimize { input: src, output } => {
            let lts = import_aut_str(&read(&src)?).map_err(input(src.display()))?;
            let min = minimize(&lts);
            write_aut(&min, &output)?;
            writeln!(out, "before states={} transitions={}", lts.num_states(), lts.num_transitions()).map_err(io_err)?;
            writeln!(out, "after states={} transitions={}", min.num_states(), min.num_transitions()).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Check { lts: path, property, scenario } => {
            let lts = import_aut_str(&read(&path)?).map_err(input(path.display()))?;
            let scn = scenario.as_deref().map(load_scenario).transpose()?;
            let (name, verdict) = match property {
                PropertyName::ConsistentMoves => {
                    let Some(Scenario::Graph(s)) = &scn else {
                        return Err(Failure {
                            code: EXIT_INPUT,
                            message: "consistent-moves needs --scenario with a graph scenario".into(),
                        });
                    };
                    ("consistent-moves", check_consistent_updates(&lts, &s.map).map_err(input(path.display()))?)
                }
                PropertyName::InevitableTermination => {
                    ("inevitable-termination", check_inevitable_termination(&lts, &termination_spec(&lts, scn.as_ref())))
                }
                PropertyName::Deadlock => ("deadlock", check_deadlock_freedom(&lts, &control::terminal_gates())),
            };
            let report = serde_json::to_string(&verdict.report(name)).expect("report serializes");
            writeln!(out, "{report}").map_err(io_err)?;
            Ok(if verdict.is_pass() { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Testgen { scenario, purpose, out: path, max_states } => {
            let Scenario::Grid(scn) = load_scenario(&scenario)? else {
                return Err(Failure { code: EXIT_INPUT, message: "testgen needs a grid scenario".into() });
            };
            let tp = TestPurpose::from_json(&read(&purpose)?).map_err(input(purpose.display()))?;
            let comp = build_grid_composition(&scn, false).map_err(input("scenario"))?;
            let lts = explore(&comp, &ExplorationLimits { max_states, max_depth: 0 })
                .map_err(|e| Failure { code: EXIT_LIMIT, message: e.to_string() })?;
            for gate in tp.unknown_gates(&lts) {
                eprintln!("warning: gate {gate} labels no transition; its pattern can never match");
            }
            let Some(test) = extract_test(&product_with_purpose(&lts, &tp)) else {
                writeln!(out, "inconclusive").map_err(io_err)?;
                return Ok(EXIT_NEGATIVE);
            };
            let sim = trace_to_scenario(&test.witness).map_err(|e| Failure { code: EXIT_INPUT, message: e.to_string() })?;
            let text = serde_json::to_string_pretty(&sim).expect("scenario serializes");
            fs::write(&path, text + "\n").map_err(input(path.display()))?;
            let terminal = serde_json::to_value(sim.terminal).expect("terminal serializes");
            writeln!(
                out,
                "witness={} ticks={} terminal={}",
                test.witness.len(),
                sim.ticks.len(),
                terminal.as_str().unwrap_or_default()
            )
            .map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Render { scenario, sim } => {
            let Scenario::Grid(scn) = load_scenario(&scenario)? else {
                return Err(Failure { code: EXIT_INPUT, message: "render needs a grid scenario".into() });
            };
            let sim: SimScenario = serde_json::from_str(&read(&sim)?).map_err(input(sim.display()))?;
            let frames = render_frames(&scn, &sim).map_err(|m| Failure { code: EXIT_INPUT, message: m })?;
            for (t, frame) in frames.iter().enumerate() {
                writeln!(out, "tick {t}").map_err(io_err)?;
                write!(out, "{frame}").map_err(io_err)?;
            }
            Ok(EXIT_OK)
        }
    }
}

/// Obstacle count for the termination check: taken from the scenario when
/// given, else from the END_OBSTACLE labels present in the LTS.
fn termination_spec(lts: &Lts, scn: Option<&Scenario>) -> TerminationSpec {
    match scn {
        Some(Scenario::Graph(s)) => TerminationSpec::standard(s.obstacles.len()),
        Some(Scenario::Grid(s)) if s.mobiles.iter().any(|o| o.cyclic) => TerminationSpec::standard(0),
        Some(Scenario::Grid(s)) => TerminationSpec::standard(s.mobiles.len()),
        None => {
            let ended: BTreeSet<String> = lts
                .labels()
                .iter()
                .filter(|a| a.gate == Symbol::new(grid_gates::END_OBSTACLE))
                .map(|a| a.to_string())
                .collect();
            TerminationSpec::standard(ended.len())
        }
    }
}
