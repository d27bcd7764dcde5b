use thiserror::Error;

use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("value {value} does not fit in {width} bits")]
    Overflow { value: u64, width: usize },

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("order lacks the `{0}` capability")]
    MissingCapability(&'static str),

    #[error("order is not total")]
    NotTotal,

    #[error("walk from {from} did not reach {to} within {budget} steps")]
    BudgetExhausted { from: Word, to: Word, budget: u64 },

    #[error("walk from {from} fell off the order before reaching {to}")]
    WalkEnded { from: Word, to: Word },

    #[error("enumeration of words up to length {len} exceeds the cap of {cap}")]
    EnumerationTooLarge { len: usize, cap: usize },

    #[error("witness predicate is not normalized at input {0}")]
    NotNormalized(Word),

    #[error("function value {value} at {x} violates the bound {bound}")]
    ValueBound { x: Word, value: u64, bound: u64 },

    #[error("machine produces no positive output on {0}")]
    ZeroOutput(Word),

    #[error("word {z} is too long for an encoding of width {width}")]
    WidthOverflow { z: Word, width: usize },

    #[error("accepting paths on {0} do not form a cluster")]
    NotCluster(Word),

    #[error("invalid machine: {0}")]
    InvalidMachine(String),

    #[error("machine run on {x} violated the model: {msg}")]
    ModelViolation { x: Word, msg: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
