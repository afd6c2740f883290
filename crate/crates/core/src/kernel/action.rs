use std::fmt;

use super::value::{Symbol, Value};

/// Name of the internal (invisible) gate.
pub const INTERNAL_GATE: &str = "i";

/// A gate together with the values offered on it.
///
/// The canonical text form is `GATE !v1 !v2 ...`. Labels imported from files
/// that do not follow that form are kept verbatim as an offer-less gate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub gate: Symbol,
    pub offers: Vec<Value>,
}

impl Action {
    pub fn new(gate: impl Into<Symbol>, offers: Vec<Value>) -> Self {
        Action { gate: gate.into(), offers }
    }

    pub fn bare(gate: impl Into<Symbol>) -> Self {
        Action { gate: gate.into(), offers: Vec::new() }
    }

    pub fn internal() -> Self {
        Action::bare(INTERNAL_GATE)
    }

    pub fn is_internal(&self) -> bool {
        self.gate.as_str() == INTERNAL_GATE && self.offers.is_empty()
    }

    pub fn gate_is(&self, gate: &str) -> bool {
        self.gate.as_str() == gate
    }

    /// Parses a label. Text in canonical form yields a structured action;
    /// anything else becomes an opaque label whose gate is the whole text.
    pub fn parse_label(text: &str) -> Action {
        Self::parse_canonical(text).unwrap_or_else(|| Action::bare(text))
    }

    fn parse_canonical(text: &str) -> Option<Action> {
        let mut parts = text.split(" !");
        let gate = parts.next()?;
        if !super::value::is_identifier(gate) && gate != INTERNAL_GATE {
            return None;
        }
        let offers = parts.map(Value::parse).collect::<Option<Vec<_>>>()?;
        let action = Action::new(gate, offers);
        // reject anything that would not print back identically
        (action.to_string() == text).then_some(action)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.gate.as_str())?;
        for v in &self.offers {
            write!(f, " !{v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
