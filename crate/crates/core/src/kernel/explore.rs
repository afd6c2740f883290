//! Breadth-first generation of the LTS of a composition.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use super::composition::{Composition, GlobalState};
use super::lts::{Lts, LtsBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExplorationLimits {
    pub max_states: usize,
    /// Zero means unlimited.
    pub max_depth: usize,
}

impl Default for ExplorationLimits {
    fn default() -> Self {
        ExplorationLimits { max_states: 5_000_000, max_depth: 0 }
    }
}

impl ExplorationLimits {
    pub fn states(max_states: usize) -> Self {
        ExplorationLimits { max_states: max_states.max(1), max_depth: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitKind {
    States,
    Depth,
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitKind::States => f.write_str("state"),
            LimitKind::Depth => f.write_str("depth"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("{kind} limit exceeded after {count} states")]
    LimitExceeded { kind: LimitKind, count: usize, partial: Box<Lts> },
}

/// Explores the reachable state space of `comp` breadth-first.
///
/// States are numbered in discovery order, so the result is identical for
/// identical compositions. On a limit, the states found so far and the
/// transitions among them are returned inside the error.
pub fn explore(comp: &Composition, limits: &ExplorationLimits) -> Result<Lts, ExploreError> {
    let max_states = limits.max_states.max(1);
    let mut index: HashMap<GlobalState, usize> = HashMap::new();
    let mut states: Vec<GlobalState> = Vec::new();
    let mut depth: Vec<usize> = Vec::new();
    let mut builder = LtsBuilder::new();
    let mut queue = VecDeque::new();

    let init = comp.initial_state();
    index.insert(init.clone(), 0);
    states.push(init);
    depth.push(0);
    queue.push_back(0usize);

    let mut truncated = None;
    'bfs: while let Some(s) = queue.pop_front() {
        let enabled = comp.enabled_actions(&states[s]);
        if limits.max_depth > 0 && depth[s] >= limits.max_depth {
            if !enabled.is_empty() {
                truncated.get_or_insert(LimitKind::Depth);
            }
            continue;
        }
        for (action, next) in enabled {
            let t = match index.entry(next) {
                Entry::Occupied(e) => *e.get(),
                Entry::Vacant(e) => {
                    if states.len() >= max_states {
                        truncated = Some(LimitKind::States);
                        break 'bfs;
                    }
                    let t = states.len();
                    states.push(e.key().clone());
                    e.insert(t);
                    depth.push(depth[s] + 1);
                    queue.push_back(t);
                    t
                }
            };
            builder.add(s, &action, t);
        }
    }

    let count = states.len();
    let lts = builder
        .build(count, 0, Some(states))
        .expect("explored endpoints are always in range");
    match truncated {
        None => Ok(lts),
        Some(kind) => Err(ExploreError::LimitExceeded { kind, count, partial: Box::new(lts) }),
    }
}
