use thiserror::Error;

use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("party count {n} out of range (expected {min}..={max})")]
    PartyCount { n: usize, min: usize, max: usize },

    #[error("parameter {name} = {value} outside [0, 1]")]
    OutOfUnitInterval { name: &'static str, value: Rational },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("weights do not form a probability distribution: {0}")]
    BadWeights(String),

    #[error("negative probability {value} at x={x} a={a}")]
    NegativeProbability { x: String, a: String, value: Rational },

    #[error("conditional distribution for input x={x} sums to {sum}, not 1")]
    NotNormalized { x: String, sum: Rational },

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("variable x{index} out of range for {n} variables")]
    VariableIndex { index: usize, n: usize },

    #[error("truth table length {0} is not a power of two")]
    TruthTableLength(usize),

    #[error("causality violation: party {party} step {step} reads output of box {reads}")]
    Causality { party: usize, step: usize, reads: usize },

    #[error("invalid wiring: {0}")]
    Wiring(String),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("target {0} is a fixed point that is never reached exactly")]
    UnreachableExactly(Rational),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
}
