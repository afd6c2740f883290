//! Purpose-guided witness extraction and conversion of witnesses into
//! simulator scenarios.

mod sim;

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{Action, Lts, LtsBuilder, Symbol, Value};

pub use sim::{render_frames, replay, trace_to_scenario, ActorMove, CarMove, ReplayError, SimScenario, SimTick, Terminal, TraceError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OfferPattern {
    Any,
    Exactly(Value),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionPattern {
    pub gate: Symbol,
    /// `None` matches any number of offers.
    pub offers: Option<Vec<OfferPattern>>,
}

impl ActionPattern {
    pub fn gate(gate: &str) -> Self {
        ActionPattern { gate: Symbol::new(gate), offers: None }
    }

    pub fn with_offers(gate: &str, offers: Vec<OfferPattern>) -> Self {
        ActionPattern { gate: Symbol::new(gate), offers: Some(offers) }
    }

    pub fn matches(&self, action: &Action) -> bool {
        if action.gate != self.gate {
            return false;
        }
        let Some(offers) = &self.offers else { return true };
        offers.len() == action.offers.len()
            && offers.iter().zip(&action.offers).all(|(p, v)| match p {
                OfferPattern::Any => true,
                OfferPattern::Exactly(w) => w == v,
            })
    }
}

/// Action patterns to observe in order; anything may happen in between.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TestPurpose {
    pub steps: Vec<ActionPattern>,
}

#[derive(Debug, Error)]
pub enum PurposeError {
    #[error("purpose file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("step {step}: offer `{text}` is not a value")]
    Offer { step: usize, text: String },
    #[error("step {step}: `{gate}` is not a gate name")]
    Gate { step: usize, gate: String },
}

#[derive(Deserialize, Serialize)]
struct PatternFile {
    gate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offers: Option<Vec<serde_json::Value>>,
}

impl TestPurpose {
    pub fn new(steps: Vec<ActionPattern>) -> Self {
        TestPurpose { steps }
    }

    /// Reads a JSON list of `{gate, offers}`; offers are canonical value
    /// text, JSON numbers or booleans, or `"*"`.
    pub fn from_json(text: &str) -> Result<Self, PurposeError> {
        let raw: Vec<PatternFile> = serde_json::from_str(text)?;
        let mut steps = vec![];
        for (step, p) in raw.into_iter().enumerate() {
            if !crate::kernel::is_identifier(&p.gate) {
                return Err(PurposeError::Gate { step, gate: p.gate });
            }
            let offers = match p.offers {
                None => None,
                Some(list) => Some(
                    list.into_iter()
                        .map(|o| offer_pattern(&o).ok_or_else(|| PurposeError::Offer { step, text: o.to_string() }))
                        .collect::<Result<Vec<_>, _>>()?,
                ),
            };
            steps.push(ActionPattern { gate: Symbol::new(&p.gate), offers });
        }
        Ok(TestPurpose { steps })
    }

    pub fn to_json(&self) -> String {
        let raw: Vec<PatternFile> = self
            .steps
            .iter()
            .map(|p| PatternFile {
                gate: p.gate.to_string(),
                offers: p.offers.as_ref().map(|os| {
                    os.iter()
                        .map(|o| match o {
                            OfferPattern::Any => serde_json::Value::from("*"),
                            OfferPattern::Exactly(v) => serde_json::Value::from(v.to_string()),
                        })
                        .collect()
                }),
            })
            .collect();
        serde_json::to_string_pretty(&raw).expect("purpose serializes")
    }

    /// Gates the purpose refers to that label no transition of `lts`.
    pub fn unknown_gates(&self, lts: &Lts) -> Vec<Symbol> {
        let known: BTreeSet<&Symbol> = lts.labels().iter().map(|a| &a.gate).collect();
        let unknown: BTreeSet<Symbol> = self.steps.iter().map(|p| &p.gate).filter(|g| !known.contains(g)).cloned().collect();
        unknown.into_iter().collect()
    }
}

fn offer_pattern(o: &serde_json::Value) -> Option<OfferPattern> {
    match o {
        serde_json::Value::String(s) if s == "*" => Some(OfferPattern::Any),
        serde_json::Value::String(s) => Value::parse(s).map(OfferPattern::Exactly),
        serde_json::Value::Number(n) => n.as_u64().map(|n| OfferPattern::Exactly(Value::Nat(n))),
        serde_json::Value::Bool(b) => Some(OfferPattern::Exactly(Value::Bool(*b))),
        _ => None,
    }
}

/// An LTS paired with a purpose: states are (model state, purpose progress).
#[derive(Clone, Debug)]
pub struct PurposeProduct {
    pub lts: Lts,
    pub accepting: Vec<bool>,
}

/// Builds the reachable product of `lts` with `tp`. A matching action
/// advances the purpose; every other action leaves it where it is.
/// Accepting states are not expanded further.
pub fn product_with_purpose(lts: &Lts, tp: &TestPurpose) -> PurposeProduct {
    let len = tp.steps.len();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut nodes = vec![(lts.initial(), 0)];
    index.insert((lts.initial(), 0), 0);
    let mut builder = LtsBuilder::new();
    let mut queue = VecDeque::from([0]);
    while let Some(id) = queue.pop_front() {
        let (s, k) = nodes[id];
        if k == len {
            continue;
        }
        for &(_, l, t) in lts.outgoing(s) {
            let a = lts.label(l);
            let k2 = if tp.steps[k].matches(a) { k + 1 } else { k };
            let target = *index.entry((t, k2)).or_insert_with(|| {
                nodes.push((t, k2));
                queue.push_back(nodes.len() - 1);
                nodes.len() - 1
            });
            builder.add(id, a, target);
        }
    }
    let accepting = nodes.iter().map(|&(_, k)| k == len).collect();
    let lts = builder.build(nodes.len(), 0, None).expect("product endpoints are in range");
    PurposeProduct { lts, accepting }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub witness: Vec<Action>,
}

/// Shortest trace to an accepting state, or `None` (inconclusive).
pub fn extract_test(product: &PurposeProduct) -> Option<TestCase> {
    let lts = &product.lts;
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; lts.num_states()];
    let mut seen = vec![false; lts.num_states()];
    let mut queue = VecDeque::from([lts.initial()]);
    seen[lts.initial()] = true;
    while let Some(s) = queue.pop_front() {
        if product.accepting[s] {
            let mut witness = vec![];
            let mut at = s;
            while let Some((p, l)) = parent[at] {
                witness.push(lts.label(l).clone());
                at = p;
            }
            witness.reverse();
            return Some(TestCase { witness });
        }
        for &(_, l, t) in lts.outgoing(s) {
            if !seen[t] {
                seen[t] = true;
                parent[t] = Some((s, l));
                queue.push_back(t);
            }
        }
    }
    None
}
