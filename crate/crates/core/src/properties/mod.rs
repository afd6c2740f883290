//! Checks over explored LTSs: consistent position updates, inevitable
//! termination and deadlock freedom, each with a shortest counterexample.

mod search;

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::control::{consistent_move, gates, Control, GraphMap};
use crate::kernel::{Action, Lts, Symbol, Value};

use search::{tarjan_nontrivial, Product};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail { counterexample: Vec<Action> },
    FailLasso { prefix: Vec<Action>, cycle: Vec<Action> },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail { .. } => "fail",
            Verdict::FailLasso { .. } => "fail_lasso",
        }
    }

    /// The finite part of the counterexample: the whole trace for `fail`,
    /// the prefix followed by one turn of the cycle for `fail_lasso`.
    pub fn trace(&self) -> Vec<Action> {
        match self {
            Verdict::Pass => vec![],
            Verdict::Fail { counterexample } => counterexample.clone(),
            Verdict::FailLasso { prefix, cycle } => prefix.iter().chain(cycle).cloned().collect(),
        }
    }

    pub fn report(&self, property: &str) -> Report {
        let labels = |t: &[Action]| t.iter().map(Action::to_string).collect::<Vec<_>>();
        let (counterexample, cycle) = match self {
            Verdict::Pass => (vec![], None),
            Verdict::Fail { counterexample } => (labels(counterexample), None),
            Verdict::FailLasso { prefix, cycle } => (labels(prefix), Some(labels(cycle))),
        };
        Report { property: property.to_string(), verdict: self.kind(), counterexample, cycle }
    }
}

/// JSON form of a verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub property: String,
    pub verdict: &'static str,
    pub counterexample: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Vec<String>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PropertyError {
    #[error("label `{0}` does not follow the expected schema")]
    LabelSchema(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Monitor {
    Idle,
    Updated(Symbol),
    Moved(Symbol, Control),
}

enum Observed {
    Update(Symbol),
    Move(Control),
    Other,
}

fn observe(action: &Action) -> Result<Observed, PropertyError> {
    let bad = || PropertyError::LabelSchema(action.to_string());
    if action.gate_is(gates::UPDATE_POSITION) {
        match action.offers.as_slice() {
            [Value::Sym(s)] => Ok(Observed::Update(s.clone())),
            _ => Err(bad()),
        }
    } else if action.gate_is(gates::CAR_MOVE) {
        match action.offers.as_slice() {
            [v] => Control::from_value(v).map(Observed::Move).ok_or_else(bad),
            _ => Err(bad()),
        }
    } else {
        Ok(Observed::Other)
    }
}

/// Every UPDATE_POSITION following a CAR_MOVE must agree with the map.
pub fn check_consistent_updates(lts: &Lts, map: &GraphMap) -> Result<Verdict, PropertyError> {
    check_consistent_updates_with(lts, |cur, c, next| consistent_move(cur, c, next, map))
}

/// Same as [`check_consistent_updates`] with an explicit move table.
pub fn check_consistent_updates_with<F>(lts: &Lts, consistent: F) -> Result<Verdict, PropertyError>
where
    F: Fn(&Symbol, &Control, &Symbol) -> bool,
{
    let observed = lts.labels().iter().map(observe).collect::<Result<Vec<_>, _>>()?;
    let mut product = Product::new(lts.initial(), Monitor::Idle);
    let mut queue = VecDeque::from([0]);
    while let Some(node) = queue.pop_front() {
        let (s, m) = product.node(node).clone();
        for &(_, l, t) in lts.outgoing(s) {
            let next = match (&observed[l], &m) {
                (Observed::Update(new), Monitor::Moved(cur, c)) => {
                    if !consistent(cur, c, new) {
                        let mut trace = product.trace(lts, node);
                        trace.push(lts.label(l).clone());
                        return Ok(Verdict::Fail { counterexample: trace });
                    }
                    Monitor::Updated(new.clone())
                }
                (Observed::Update(new), _) => Monitor::Updated(new.clone()),
                (Observed::Move(c), Monitor::Updated(cur)) => Monitor::Moved(cur.clone(), c.clone()),
                (Observed::Move(_), _) => Monitor::Idle,
                (Observed::Other, _) => m.clone(),
            };
            if let Some(id) = product.insert((t, next), node, l) {
                queue.push_back(id);
            }
        }
    }
    Ok(Verdict::Pass)
}

/// What counts as termination for [`check_inevitable_termination`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TerminationSpec {
    /// Gates terminating on their first occurrence.
    pub terminal_gates: BTreeSet<Symbol>,
    /// A gate terminating only after `count` occurrences along the path.
    pub counted: Option<(Symbol, usize)>,
}

impl TerminationSpec {
    /// ARRIVAL, COLLISION, or END_OBSTACLE from each of `obstacles` obstacles.
    pub fn standard(obstacles: usize) -> Self {
        TerminationSpec {
            terminal_gates: crate::kernel::gate_set(&[gates::ARRIVAL, gates::COLLISION]),
            counted: (obstacles > 0).then(|| (Symbol::new(gates::END_OBSTACLE), obstacles)),
        }
    }

    pub fn gates(gates: &[&str]) -> Self {
        TerminationSpec { terminal_gates: crate::kernel::gate_set(gates), counted: None }
    }
}

/// No infinite path and no deadlock avoids termination.
pub fn check_inevitable_termination(lts: &Lts, spec: &TerminationSpec) -> Verdict {
    let terminal: Vec<bool> = lts.labels().iter().map(|a| spec.terminal_gates.contains(&a.gate)).collect();
    let counted: Vec<bool> = lts
        .labels()
        .iter()
        .map(|a| spec.counted.as_ref().is_some_and(|(g, _)| *g == a.gate))
        .collect();
    let limit = spec.counted.as_ref().map_or(usize::MAX, |(_, n)| *n);

    let mut product = Product::new(lts.initial(), 0usize);
    let mut edges: Vec<Vec<(usize, usize)>> = vec![];
    let mut queue = VecDeque::from([0]);
    let mut sink: Option<usize> = None;
    while let Some(node) = queue.pop_front() {
        let (s, k) = *product.node(node);
        let out = lts.outgoing(s);
        if out.is_empty() && sink.is_none() {
            sink = Some(node);
        }
        let mut succ = vec![];
        for &(_, l, t) in out {
            if terminal[l] {
                continue;
            }
            let k = if counted[l] { k + 1 } else { k };
            if k >= limit {
                continue;
            }
            let id = match product.insert((t, k), node, l) {
                Some(id) => {
                    queue.push_back(id);
                    id
                }
                None => product.index(&(t, k)),
            };
            succ.push((l, id));
        }
        if edges.len() <= node {
            edges.resize(node + 1, vec![]);
        }
        edges[node] = succ;
    }
    edges.resize(product.len(), vec![]);

    // node ids follow breadth-first discovery, so the smallest id is the
    // closest cycle entry
    let closest = tarjan_nontrivial(&edges).into_iter().min_by_key(|c| c.iter().min().copied());
    if let Some(component) = closest {
        let entry = *component.iter().min().expect("components are non-empty");
        let cycle = search::cycle_through(&edges, entry, &component)
            .into_iter()
            .map(|l| lts.label(l).clone())
            .collect();
        return Verdict::FailLasso { prefix: product.trace(lts, entry), cycle };
    }
    match sink {
        Some(node) => Verdict::Fail { counterexample: product.trace(lts, node) },
        None => Verdict::Pass,
    }
}

/// Every sink is entered only through allowed gates, and the initial state
/// is not a sink.
pub fn check_deadlock_freedom(lts: &Lts, allowed: &BTreeSet<Symbol>) -> Verdict {
    let mut parent: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut queue = VecDeque::from([lts.initial()]);
    let mut seen = vec![false; lts.num_states()];
    seen[lts.initial()] = true;
    if lts.outgoing(lts.initial()).is_empty() {
        return Verdict::Fail { counterexample: vec![] };
    }
    while let Some(s) = queue.pop_front() {
        for &(_, l, t) in lts.outgoing(s) {
            if lts.outgoing(t).is_empty() && !allowed.contains(&lts.label(l).gate) {
                let mut trace = vec![lts.label(l).clone()];
                let mut at = s;
                while let Some(&(p, pl)) = parent.get(&at) {
                    trace.push(lts.label(pl).clone());
                    at = p;
                }
                trace.reverse();
                return Verdict::Fail { counterexample: trace };
            }
            if !seen[t] {
                seen[t] = true;
                parent.insert(t, (s, l));
                queue.push_back(t);
            }
        }
    }
    Verdict::Pass
}
