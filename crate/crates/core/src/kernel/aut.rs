//! Aldebaran (`.aut`) text format.
//!
//! ```text
//! des (<initial>, <#transitions>, <#states>)
//! (<src>, "<label>", <dst>)
//! ```

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::action::Action;
use super::lts::{Lts, LtsBuilder, LtsError};

#[derive(Debug, Error)]
pub enum AutError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("header declares {declared} transitions but {found} were read")]
    CountMismatch { declared: usize, found: usize },
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error("label `{0}` contains a double quote")]
    QuotedLabel(String),
}

/// Writes `lts` with transitions in ascending (source, label text, target)
/// order.
pub fn export_aut<W: Write>(lts: &Lts, sink: &mut W) -> Result<(), AutError> {
    let texts: Vec<String> = lts.labels().iter().map(|a| a.to_string()).collect();
    if let Some(bad) = texts.iter().find(|t| t.contains('"')) {
        return Err(AutError::QuotedLabel(bad.clone()));
    }
    let mut rows: Vec<(usize, &str, usize)> = lts
        .raw_transitions()
        .iter()
        .map(|&(s, l, t)| (s, texts[l].as_str(), t))
        .collect();
    rows.sort_unstable();
    writeln!(sink, "des ({}, {}, {})", lts.initial(), rows.len(), lts.num_states())?;
    for (s, label, t) in rows {
        writeln!(sink, "({s}, \"{label}\", {t})")?;
    }
    Ok(())
}

pub fn export_aut_string(lts: &Lts) -> String {
    let mut out = Vec::new();
    export_aut(lts, &mut out).expect("writing to memory cannot fail");
    String::from_utf8(out).expect("AUT output is ASCII")
}

pub fn import_aut<R: BufRead>(source: R) -> Result<Lts, AutError> {
    let mut lines = source.lines();
    let header = match lines.next() {
        Some(l) => l?,
        None => return Err(parse_err(1, "missing header")),
    };
    let (initial, declared, num_states) = parse_header(&header).ok_or_else(|| {
        parse_err(1, "expected `des (<initial>, <#transitions>, <#states>)`")
    })?;

    let mut b = LtsBuilder::new();
    let mut found = 0;
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let (s, label, t) = parse_transition(&line)
            .ok_or_else(|| parse_err(lineno, "expected `(<src>, \"<label>\", <dst>)`"))?;
        if s >= num_states || t >= num_states {
            return Err(parse_err(lineno, "state index exceeds declared state count"));
        }
        b.add(s, &Action::parse_label(label), t);
        found += 1;
    }
    if found != declared {
        return Err(AutError::CountMismatch { declared, found });
    }
    Ok(b.build(num_states, initial, None)?)
}

pub fn import_aut_str(text: &str) -> Result<Lts, AutError> {
    import_aut(text.as_bytes())
}

fn parse_err(line: usize, message: &str) -> AutError {
    AutError::Parse { line, message: message.to_owned() }
}

fn parse_header(line: &str) -> Option<(usize, usize, usize)> {
    let rest = line.trim().strip_prefix("des")?.trim_start();
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    let mut nums = inner.split(',').map(|p| p.trim().parse::<usize>());
    let a = nums.next()?.ok()?;
    let b = nums.next()?.ok()?;
    let c = nums.next()?.ok()?;
    nums.next().is_none().then_some((a, b, c))
}

fn parse_transition(line: &str) -> Option<(usize, &str, usize)> {
    let inner = line.trim().strip_prefix('(')?.strip_suffix(')')?;
    let (src, rest) = inner.split_once(',')?;
    let (label, dst) = rest.rsplit_once(',')?;
    let label = label.trim();
    let label = match label.strip_prefix('"') {
        Some(l) => l.strip_suffix('"')?,
        None => label,
    };
    Some((src.trim().parse().ok()?, label, dst.trim().parse().ok()?))
}
