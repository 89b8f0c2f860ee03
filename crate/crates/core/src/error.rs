//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised while parsing or validating datasets and fact exports.
#[derive(Debug, Error)]
pub enum DataError {
    /// The input stream was not valid JSON for the dataset schema.
    /// serde_json reports the offending line/column and field.
    #[error("malformed dataset: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("invalid identifier {0:?}: expected lowercase token [a-z][a-z0-9_]*")]
    InvalidIdentifier(String),
    #[error("invalid AU code {0}: must be >= 1")]
    InvalidAuCode(u64),
    #[error("invalid intensity {0:?}: expected one of a..e or null")]
    InvalidIntensity(String),
    #[error("sequence {sequence}: event {event}: onset < offset violated (onset {onset}, offset {offset})")]
    DegenerateEvent {
        sequence: String,
        event: String,
        onset: u64,
        offset: u64,
    },
    #[error("duplicate sequence id {0:?}")]
    DuplicateSequenceId(String),
    #[error("sequence {sequence}: duplicate event id {event:?}")]
    DuplicateEventId { sequence: String, event: String },
    #[error("sequence {0} has no events")]
    EmptySequence(String),
    #[error("sequence {sequence}: label {label:?} is not in the declared class set")]
    UnknownLabel { sequence: String, label: String },
    #[error("dataset declares {0} classes, need at least 2")]
    TooFewClasses(usize),
    #[error("interval is degenerate: onset {onset} >= offset {offset}")]
    DegenerateInterval { onset: u64, offset: u64 },
}

/// Structural errors in clauses and theories.
#[derive(Debug, Error)]
pub enum LogicError {
    #[error("clause head must take exactly one argument, got {0}")]
    HeadArity(usize),
    #[error("clause head argument must be a variable")]
    HeadNotVariable,
    #[error("body literal {index} ({predicate}) does not start with the head's sequence variable")]
    BodyNotChained { index: usize, predicate: String },
    #[error("body literal {index} ({predicate}) has no arguments")]
    EmptyLiteral { index: usize, predicate: String },
    #[error("theory clause {index} has head predicate {found:?}, expected {expected:?}")]
    MixedHeads {
        index: usize,
        found: String,
        expected: String,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Errors from the rule learner.
#[derive(Debug, Error)]
pub enum LearnError {
    #[error("seed sequence {0} has no facts to saturate")]
    EmptySeed(String),
    #[error("no consistent clause within limits for seed {seed} (max {max_literals} literals, noise {noise})")]
    NoConsistentClause {
        seed: String,
        max_literals: usize,
        noise: usize,
    },
    #[error("class {class:?}: need at least one positive and one negative example, got {positives}/{negatives}")]
    DegenerateSplit {
        class: String,
        positives: usize,
        negatives: usize,
    },
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// Contract violations in similarity computations.
#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("feature sets disagree on mode ({0} vs {1})")]
    ModeMismatch(String, String),
    #[error("feature sets disagree on origin ({0} vs {1})")]
    OriginMismatch(String, String),
    #[error("contrast pool is empty")]
    EmptyPool,
}

/// Errors from the synthetic dataset generator.
#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("config: {0}")]
    InvalidConfig(String),
    #[error(
        "horizon {horizon} too small to realize relation {relation} (needs at least {needed})"
    )]
    HorizonTooSmall {
        horizon: u64,
        relation: String,
        needed: u64,
    },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Unified error type for the CLI and FFI surfaces.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("target sequence {0:?} not found in dataset")]
    UnknownTarget(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 for validation problems, 2 for
    /// learner failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Learn(_) => 2,
            _ => 1,
        }
    }
}
