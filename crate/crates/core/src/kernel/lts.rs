use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::action::Action;
use super::composition::GlobalState;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LtsError {
    #[error("initial state {initial} out of range for {num_states} states")]
    InitialOutOfRange { initial: usize, num_states: usize },
    #[error("transition ({src}, {dst}) out of range for {num_states} states")]
    EndpointOutOfRange { src: usize, dst: usize, num_states: usize },
    #[error("at least one state is required")]
    Empty,
}

/// An explicit labelled transition system.
///
/// Labels are interned; transitions are kept sorted by (source, label id,
/// target) without duplicates, so the outgoing transitions of a state form a
/// contiguous slice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    num_states: usize,
    initial: usize,
    labels: Vec<Action>,
    transitions: Vec<(usize, usize, usize)>,
    offsets: Vec<usize>,
    payload: Option<Vec<GlobalState>>,
}

/// Interns labels while transitions are being collected.
#[derive(Default)]
pub struct LtsBuilder {
    labels: Vec<Action>,
    index: HashMap<Action, usize>,
    transitions: Vec<(usize, usize, usize)>,
}

impl LtsBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn label_id(&mut self, action: &Action) -> usize {
        if let Some(&id) = self.index.get(action) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(action.clone());
        self.index.insert(action.clone(), id);
        id
    }

    pub fn add(&mut self, src: usize, action: &Action, dst: usize) {
        let id = self.label_id(action);
        self.transitions.push((src, id, dst));
    }

    pub fn add_by_id(&mut self, src: usize, label: usize, dst: usize) {
        self.transitions.push((src, label, dst));
    }

    pub fn build(
        self,
        num_states: usize,
        initial: usize,
        payload: Option<Vec<GlobalState>>,
    ) -> Result<Lts, LtsError> {
        Lts::assemble(num_states, initial, self.labels, self.transitions, payload)
    }
}

impl Lts {
    pub fn from_transitions<I>(num_states: usize, initial: usize, transitions: I) -> Result<Lts, LtsError>
    where
        I: IntoIterator<Item = (usize, Action, usize)>,
    {
        let mut b = LtsBuilder::new();
        for (s, a, t) in transitions {
            b.add(s, &a, t);
        }
        b.build(num_states, initial, None)
    }

    pub(crate) fn assemble(
        num_states: usize,
        initial: usize,
        labels: Vec<Action>,
        mut transitions: Vec<(usize, usize, usize)>,
        payload: Option<Vec<GlobalState>>,
    ) -> Result<Lts, LtsError> {
        if num_states == 0 {
            return Err(LtsError::Empty);
        }
        if initial >= num_states {
            return Err(LtsError::InitialOutOfRange { initial, num_states });
        }
        if let Some(&(src, _, dst)) =
            transitions.iter().find(|(s, _, t)| *s >= num_states || *t >= num_states)
        {
            return Err(LtsError::EndpointOutOfRange { src, dst, num_states });
        }
        transitions.sort_unstable();
        transitions.dedup();
        let mut offsets = vec![0; num_states + 1];
        for &(s, _, _) in &transitions {
            offsets[s + 1] += 1;
        }
        for i in 0..num_states {
            offsets[i + 1] += offsets[i];
        }
        Ok(Lts { num_states, initial, labels, transitions, offsets, payload })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn labels(&self) -> &[Action] {
        &self.labels
    }

    pub fn label(&self, id: usize) -> &Action {
        &self.labels[id]
    }

    /// Raw transitions `(source, label id, target)`.
    pub fn raw_transitions(&self) -> &[(usize, usize, usize)] {
        &self.transitions
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, &Action, usize)> + '_ {
        self.transitions.iter().map(|&(s, l, t)| (s, &self.labels[l], t))
    }

    /// Outgoing transitions of `state` as `(source, label id, target)`.
    pub fn outgoing(&self, state: usize) -> &[(usize, usize, usize)] {
        &self.transitions[self.offsets[state]..self.offsets[state + 1]]
    }

    /// Encoded global states by index, when the LTS came from exploration.
    pub fn payload(&self) -> Option<&[GlobalState]> {
        self.payload.as_deref()
    }

    pub fn without_payload(mut self) -> Lts {
        self.payload = None;
        self
    }

    /// Multiset of (source, label text, target), used to compare LTSs that
    /// may intern labels differently.
    pub fn edge_set(&self) -> BTreeSet<(usize, String, usize)> {
        self.transitions().map(|(s, a, t)| (s, a.to_string(), t)).collect()
    }

    /// True if `trace` is a path from the initial state.
    pub fn accepts_trace(&self, trace: &[Action]) -> bool {
        let mut current: BTreeSet<usize> = BTreeSet::from([self.initial]);
        for a in trace {
            let next: BTreeSet<usize> = current
                .iter()
                .flat_map(|&s| self.outgoing(s))
                .filter(|&&(_, l, _)| self.labels[l] == *a)
                .map(|&(_, _, t)| t)
                .collect();
            if next.is_empty() {
                return false;
            }
            current = next;
        }
        true
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(s) = stack.pop() {
            for &(_, _, t) in self.outgoing(s) {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }
}

/// States without outgoing transitions, in ascending order.
pub fn detect_deadlocks(lts: &Lts) -> Vec<usize> {
    (0..lts.num_states()).filter(|&s| lts.outgoing(s).is_empty()).collect()
}
