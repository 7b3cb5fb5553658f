use thiserror::Error;

use crate::semiring::Descriptor;

/// Errors raised while loading, validating or operating on weighted automata.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unknown semiring `{0}` (expected one of bool, nat, int, rational, nonneg_rational, tropical, maxtimes)")]
    UnknownSemiring(String),

    #[error("{location}: cannot read `{weight}` as a {semiring} weight: {reason}")]
    WeightParse {
        location: String,
        weight: String,
        semiring: Descriptor,
        reason: String,
    },

    #[error("{location}: weight `{weight}` lies outside the carrier of {semiring}")]
    WeightRange {
        location: String,
        weight: String,
        semiring: Descriptor,
    },

    #[error("{location}: zero weight on a transition (omit the edge instead)")]
    ZeroWeight { location: String },

    #[error("{location}: state `{state}` is not declared")]
    UnknownState { location: String, state: String },

    #[error("{location}: letter `{letter}` is not in the alphabet")]
    UnknownLetter { location: String, letter: String },

    #[error("{location}: duplicate edge {from} --{letter}--> {to}")]
    DuplicateEdge {
        location: String,
        from: String,
        letter: String,
        to: String,
    },

    #[error("{location}: `{name}` is declared twice")]
    Duplicate { location: String, name: String },

    #[error("semiring mismatch: expected {expected}, found {found}")]
    SemiringMismatch { expected: Descriptor, found: Descriptor },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("partition is not a weighted bisimulation: {0}")]
    NotABisimulation(String),

    #[error("no span solver for {semiring}: {reason}")]
    SolverUnavailable { semiring: Descriptor, reason: String },

    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
