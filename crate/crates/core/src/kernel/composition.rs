//! Parallel composition with multiway rendezvous on gates.
//!
//! A gate synchronizes exactly the components that list it in their sync set.
//! An action on such a gate fires only when every one of those components is
//! ready for it with identical offers; it then advances all of them at once.
//! Actions on gates no component synchronizes on (including the internal gate)
//! interleave and advance only the component that performs them.
//!
//! Components either emit a concrete action or listen on a gate. A listener
//! takes part in a rendezvous when its `accept` admits the concrete action some
//! emitter offers; this is how value reception (`?x where ...`) is expressed.
//! At least one participant must emit, so values always originate from a
//! component and the kernel only ever compares concrete values.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use super::action::{Action, INTERNAL_GATE};
use super::value::Symbol;

/// Canonical byte encoding of one component's local state.
pub type LocalState = Box<[u8]>;

/// One local state per component, in composition order.
pub type GlobalState = Vec<LocalState>;

/// What a component is ready to do in a given local state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move<S> {
    /// Perform `action` and continue in the given state.
    Emit(Action, S),
    /// Take part in any rendezvous on this gate that `accept` admits.
    Listen(Symbol),
}

impl<S> Move<S> {
    pub fn emit(gate: &str, offers: Vec<super::Value>, next: S) -> Self {
        Move::Emit(Action::new(gate, offers), next)
    }

    pub fn listen(gate: &str) -> Self {
        Move::Listen(Symbol::new(gate))
    }
}

/// A component with an explicit typed local state.
///
/// Implementations must be pure: the same state always yields the same moves.
pub trait Process: Send + Sync {
    type State: Serialize + DeserializeOwned;

    fn name(&self) -> &str;
    fn sync_gates(&self) -> &BTreeSet<Symbol>;
    fn initial(&self) -> Self::State;
    fn moves(&self, state: &Self::State) -> Vec<Move<Self::State>>;

    fn accept(&self, _state: &Self::State, _action: &Action) -> Option<Self::State> {
        None
    }
}

/// Type-erased component operating on encoded local states.
pub trait Component: Send + Sync {
    fn name(&self) -> &str;
    fn sync_gates(&self) -> &BTreeSet<Symbol>;
    fn initial(&self) -> LocalState;
    fn moves(&self, state: &[u8]) -> Vec<Move<LocalState>>;
    fn accept(&self, state: &[u8], action: &Action) -> Option<LocalState>;
}

pub fn encode_state<S: Serialize>(state: &S) -> LocalState {
    bincode::serialize(state)
        .expect("local state is always encodable")
        .into_boxed_slice()
}

pub fn decode_state<S: DeserializeOwned>(bytes: &[u8]) -> S {
    bincode::deserialize(bytes).expect("local state was produced by encode_state")
}

impl<P: Process> Component for P {
    fn name(&self) -> &str {
        Process::name(self)
    }

    fn sync_gates(&self) -> &BTreeSet<Symbol> {
        Process::sync_gates(self)
    }

    fn initial(&self) -> LocalState {
        encode_state(&Process::initial(self))
    }

    fn moves(&self, state: &[u8]) -> Vec<Move<LocalState>> {
        let state: P::State = decode_state(state);
        Process::moves(self, &state)
            .into_iter()
            .map(|m| match m {
                Move::Emit(a, next) => Move::Emit(a, encode_state(&next)),
                Move::Listen(g) => Move::Listen(g),
            })
            .collect()
    }

    fn accept(&self, state: &[u8], action: &Action) -> Option<LocalState> {
        let state: P::State = decode_state(state);
        Process::accept(self, &state, action).map(|s| encode_state(&s))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompositionError {
    #[error("component `{0}` lists the internal gate in its sync set")]
    InternalGateSynchronized(String),
    #[error("duplicate component name `{0}`")]
    DuplicateName(String),
}

/// An ordered list of components; immutable once built.
pub struct Composition {
    components: Vec<Box<dyn Component>>,
    members: HashMap<Symbol, Vec<usize>>,
}

impl fmt::Debug for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.components.iter().map(|c| c.name())).finish()
    }
}

impl Composition {
    pub fn new(components: Vec<Box<dyn Component>>) -> Result<Self, CompositionError> {
        let mut members: HashMap<Symbol, Vec<usize>> = HashMap::new();
        let mut names = BTreeSet::new();
        for (i, c) in components.iter().enumerate() {
            if !names.insert(c.name().to_owned()) {
                return Err(CompositionError::DuplicateName(c.name().to_owned()));
            }
            for g in c.sync_gates() {
                if g.as_str() == INTERNAL_GATE {
                    return Err(CompositionError::InternalGateSynchronized(c.name().to_owned()));
                }
                members.entry(g.clone()).or_default().push(i);
            }
        }
        Ok(Composition { components, members })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = &dyn Component> {
        self.components.iter().map(|c| c.as_ref())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name() == name)
    }

    /// Components whose sync set contains `gate`, in composition order.
    pub fn synchronizers(&self, gate: &Symbol) -> &[usize] {
        self.members.get(gate).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn initial_state(&self) -> GlobalState {
        self.components.iter().map(|c| c.initial()).collect()
    }

    /// All actions enabled in `state` with their successor states, sorted and
    /// without duplicates. An empty result means `state` is a deadlock.
    pub fn enabled_actions(&self, state: &GlobalState) -> Vec<(Action, GlobalState)> {
        assert_eq!(state.len(), self.components.len(), "one local state per component");
        let moves: Vec<Vec<Move<LocalState>>> = self
            .components
            .iter()
            .zip(state)
            .map(|(c, s)| c.moves(s))
            .collect();

        let mut result = Vec::new();
        // synchronized candidates: action -> per-component emitted successors
        let mut candidates: BTreeMap<&Action, Vec<(usize, &LocalState)>> = BTreeMap::new();
        for (i, ms) in moves.iter().enumerate() {
            for m in ms {
                let Move::Emit(a, next) = m else { continue };
                let syncs = self.synchronizers(&a.gate);
                if syncs.is_empty() {
                    let mut succ = state.clone();
                    succ[i] = next.clone();
                    result.push((a.clone(), succ));
                } else if syncs.contains(&i) {
                    candidates.entry(a).or_default().push((i, next));
                }
                // an emission on a gate synchronized by others but not by the
                // emitter itself can never take part in a rendezvous
            }
        }

        for (action, emitted) in candidates {
            let syncs = self.synchronizers(&action.gate);
            // each alternative records whether the participant emits
            let mut options: Vec<Vec<(LocalState, bool)>> = Vec::with_capacity(syncs.len());
            for &m in syncs {
                let mut opts: Vec<(LocalState, bool)> = emitted
                    .iter()
                    .filter(|(c, _)| *c == m)
                    .map(|(_, n)| ((*n).clone(), true))
                    .collect();
                let listens = moves[m]
                    .iter()
                    .any(|mv| matches!(mv, Move::Listen(g) if *g == action.gate));
                if listens {
                    if let Some(n) = self.components[m].accept(&state[m], action) {
                        opts.push((n, false));
                    }
                }
                if opts.is_empty() {
                    options.clear();
                    break;
                }
                options.push(opts);
            }
            if options.is_empty() {
                continue;
            }
            // cartesian product over the participants' alternatives, keeping
            // only combinations in which someone emits
            let mut partial = vec![(state.clone(), false)];
            for (&m, opts) in syncs.iter().zip(&options) {
                let mut next = Vec::with_capacity(partial.len() * opts.len());
                for (p, emits) in &partial {
                    for (o, e) in opts {
                        let mut q = p.clone();
                        q[m] = o.clone();
                        next.push((q, *emits || *e));
                    }
                }
                partial = next;
            }
            let partial = partial.into_iter().filter(|(_, emits)| *emits).map(|(s, _)| s);
            result.extend(partial.into_iter().map(|s| (action.clone(), s)));
        }

        result.sort();
        result.dedup();
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{gate_set, Value};

    /// Tiny scripted process: state n offers `script[n]` and moves to n + 1.
    struct Script {
        name: String,
        gates: BTreeSet<Symbol>,
        script: Vec<Action>,
    }

    impl Script {
        fn new(name: &str, gates: &[&str], script: Vec<Action>) -> Self {
            Script {
                name: name.into(),
                gates: gates.iter().map(|g| Symbol::new(g)).collect(),
                script,
            }
        }
    }

    impl Process for Script {
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
            self.script
                .get(*s)
                .map(|a| vec![Move::Emit(a.clone(), s + 1)])
                .unwrap_or_default()
        }
    }

    fn g(n: u64) -> Action {
        Action::new("g", vec![Value::Nat(n)])
    }

    fn comp(procs: Vec<Script>) -> Composition {
        Composition::new(procs.into_iter().map(|p| Box::new(p) as Box<dyn Component>).collect())
            .unwrap()
    }

    #[test]
    fn matching_offers_synchronize() {
        let c = comp(vec![
            Script::new("P", &["g"], vec![g(1)]),
            Script::new("Q", &["g"], vec![g(1)]),
        ]);
        let en = c.enabled_actions(&c.initial_state());
        assert_eq!(en.len(), 1);
        assert_eq!(en[0].0, g(1));
        assert_eq!(en[0].1, vec![encode_state(&1usize), encode_state(&1usize)]);
    }

    #[test]
    fn mismatched_offers_block() {
        let c = comp(vec![
            Script::new("P", &["g"], vec![g(1)]),
            Script::new("Q", &["g"], vec![g(2)]),
        ]);
        assert!(c.enabled_actions(&c.initial_state()).is_empty());
    }

    #[test]
    fn three_way_tick() {
        let tick = Action::bare("TICK");
        let c = comp(vec![
            Script::new("A", &["TICK"], vec![tick.clone()]),
            Script::new("B", &["TICK"], vec![tick.clone()]),
            Script::new("C", &["TICK"], vec![tick.clone()]),
        ]);
        let en = c.enabled_actions(&c.initial_state());
        assert_eq!(en.len(), 1);
        assert_eq!(en[0].0, tick);
        assert!(en[0].1.iter().all(|s| **s == *encode_state(&1usize)));
    }

    #[test]
    fn unsynchronized_gates_interleave() {
        let c = comp(vec![
            Script::new("P", &[], vec![Action::bare("a")]),
            Script::new("Q", &[], vec![Action::internal()]),
        ]);
        let en = c.enabled_actions(&c.initial_state());
        assert_eq!(en.len(), 2);
    }

    #[test]
    fn internal_gate_cannot_synchronize() {
        let err = Composition::new(vec![Box::new(Script::new("P", &["i"], vec![]))]).unwrap_err();
        assert_eq!(err, CompositionError::InternalGateSynchronized("P".into()));
    }

    struct EchoOnly {
        gates: BTreeSet<Symbol>,
    }

    impl Process for EchoOnly {
        type State = u8;

        fn name(&self) -> &str {
            "E"
        }

        fn sync_gates(&self) -> &BTreeSet<Symbol> {
            &self.gates
        }

        fn initial(&self) -> u8 {
            0
        }

        fn moves(&self, _: &u8) -> Vec<Move<u8>> {
            vec![Move::listen("g"), Move::emit("g", vec![Value::Nat(0)], 1)]
        }

        fn accept(&self, _: &u8, _: &Action) -> Option<u8> {
            Some(2)
        }
    }

    #[test]
    fn a_listener_needs_an_emitter() {
        let c = Composition::new(vec![Box::new(EchoOnly { gates: gate_set(&["g"]) })]).unwrap();
        let en = c.enabled_actions(&c.initial_state());
        assert_eq!(en, vec![(g(0), vec![encode_state(&1u8)])]);
    }
}
