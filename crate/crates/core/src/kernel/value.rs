//! Data values exchanged on gates.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An identifier. Cheap to clone; ordered by its text.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(text: impl AsRef<str>) -> Self {
        Symbol(Arc::from(text.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol(Arc::from(s))
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(Symbol::from(s))
    }
}

/// A finite, totally ordered data value.
///
/// The derived ordering compares the variant first and then the contents,
/// which gives every label a canonical position in sorted output.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Value {
    Nat(u64),
    Bool(bool),
    Sym(Symbol),
    Pos(u32, u32),
    Record(Symbol, Vec<Value>),
    List(Vec<Value>),
}

impl Value {
    pub fn sym(s: impl AsRef<str>) -> Value {
        Value::Sym(Symbol::new(s))
    }

    pub fn record(name: impl AsRef<str>, fields: Vec<Value>) -> Value {
        Value::Record(Symbol::new(name), fields)
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self {
            Value::Nat(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_sym(&self) -> Option<&Symbol> {
        match self {
            Value::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_pos(&self) -> Option<(u32, u32)> {
        match self {
            Value::Pos(x, y) => Some((*x, *y)),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Value]> {
        match self {
            Value::List(items) => Some(items),
            _ => None,
        }
    }

    /// Parses the canonical text form produced by `Display`.
    pub fn parse(text: &str) -> Option<Value> {
        let mut p = Parser { src: text.as_bytes(), at: 0 };
        let v = p.value()?;
        if p.at == p.src.len() {
            Some(v)
        } else {
            None
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Sym(s) => f.write_str(s.as_str()),
            Value::Pos(x, y) => write!(f, "({x},{y})"),
            Value::Record(name, fields) => {
                write!(f, "{name}(")?;
                write_joined(f, fields)?;
                f.write_str(")")
            }
            Value::List(items) => {
                f.write_str("[")?;
                write_joined(f, items)?;
                f.write_str("]")
            }
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn write_joined(f: &mut fmt::Formatter<'_>, items: &[Value]) -> fmt::Result {
    for (i, v) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

/// Returns true if `s` is a well-formed identifier that prints and parses back
/// as a symbol.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && s != "true" && s != "false"
}

struct Parser<'a> {
    src: &'a [u8],
    at: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.at).copied()
    }

    fn eat(&mut self, c: u8) -> Option<()> {
        if self.peek() == Some(c) {
            self.at += 1;
            Some(())
        } else {
            None
        }
    }

    fn number(&mut self) -> Option<u64> {
        let start = self.at;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.at += 1;
        }
        let digits = std::str::from_utf8(&self.src[start..self.at]).ok()?;
        // canonical naturals carry no leading zeros
        if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
            return None;
        }
        digits.parse().ok()
    }

    fn ident(&mut self) -> Option<&str> {
        let start = self.at;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.at += 1;
        }
        let s = std::str::from_utf8(&self.src[start..self.at]).ok()?;
        if s.is_empty() || s.as_bytes()[0].is_ascii_digit() {
            None
        } else {
            Some(s)
        }
    }

    fn seq(&mut self, close: u8) -> Option<Vec<Value>> {
        let mut items = Vec::new();
        if self.eat(close).is_some() {
            return Some(items);
        }
        loop {
            items.push(self.value()?);
            if self.eat(close).is_some() {
                return Some(items);
            }
            self.eat(b',')?;
        }
    }

    fn value(&mut self) -> Option<Value> {
        match self.peek()? {
            b'0'..=b'9' => self.number().map(Value::Nat),
            b'(' => {
                self.at += 1;
                let x = self.number()?;
                self.eat(b',')?;
                let y = self.number()?;
                self.eat(b')')?;
                Some(Value::Pos(u32::try_from(x).ok()?, u32::try_from(y).ok()?))
            }
            b'[' => {
                self.at += 1;
                self.seq(b']').map(Value::List)
            }
            _ => {
                let name = self.ident()?.to_owned();
                if self.eat(b'(').is_some() {
                    let fields = self.seq(b')')?;
                    return Some(Value::Record(Symbol::from(name), fields));
                }
                Some(match name.as_str() {
                    "true" => Value::Bool(true),
                    "false" => Value::Bool(false),
                    _ => Value::Sym(Symbol::from(name)),
                })
            }
        }
    }
}
