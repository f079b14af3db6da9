//! JSON box files:
//!
//! ```json
//! {"n": 2, "records": [{"x": "00", "a": "00", "p": "1/2"}, ...]}
//! ```
//!
//! Bitstrings list party 1 first. Omitted records have probability 0, and
//! the writer emits only nonzero entries in `(x, a)` order.

use std::collections::BTreeSet;
use std::path::Path;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::boxes::{bits_to_string, check_parties, parse_bits, BoxTable};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    n: usize,
    records: Vec<Record>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    x: String,
    a: String,
    p: String,
}

pub fn box_to_json(p: &BoxTable) -> String {
    let n = p.n();
    let mut records = Vec::new();
    for x in p.inputs() {
        for a in p.inputs() {
            let v = p.prob(x, a);
            if !v.is_zero() {
                records.push(Record { x: bits_to_string(x, n), a: bits_to_string(a, n), p: format_rational(v) });
            }
        }
    }
    serde_json::to_string_pretty(&Document { n, records }).expect("box documents always serialize")
}

/// Parses and validates a box document, including exact normalization.
pub fn box_from_json(text: &str) -> Result<BoxTable> {
    let doc: Document = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let n = doc.n;
    check_parties(n)?;
    let mut probs = vec![Rational::zero(); 1 << (2 * n)];
    let mut seen = BTreeSet::new();
    for r in &doc.records {
        let x = parse_bits(&r.x, n)?;
        let a = parse_bits(&r.a, n)?;
        if !seen.insert((x, a)) {
            return Err(Error::Format(format!("duplicate record for x={} a={}", r.x, r.a)));
        }
        probs[((x as usize) << n) | a as usize] = parse_rational(&r.p)?;
    }
    BoxTable::new(n, probs)
}

pub fn load_box(path: &Path) -> Result<BoxTable> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
    box_from_json(&text)
}

pub fn save_box(p: &BoxTable, path: &Path) -> Result<()> {
    std::fs::write(path, box_to_json(p) + "\n")
        .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}
