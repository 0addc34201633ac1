use std::path::PathBuf;

use thiserror::Error;

/// Error type shared by all modules of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Delimited {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: class column {name:?} not found in header")]
    MissingClassColumn { path: PathBuf, name: String },

    #[error("{path}: duplicate column {name:?} in header")]
    DuplicateColumn { path: PathBuf, name: String },

    #[error("{path}: row {row}, column {column:?}: invalid class value {value:?} (expected 0 or 1)")]
    InvalidClassValue {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },

    #[error("{path}: row {row}, column {column:?}: empty field")]
    EmptyField {
        path: PathBuf,
        row: usize,
        column: String,
    },

    #[error("{path}: row {row}, column {column:?}: invalid value {value:?}: {message}")]
    InvalidField {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
        message: String,
    },

    #[error("dataset has {m} rows; at least 2 are required")]
    TooFewRows { m: usize },

    #[error("unknown variable {0:?}")]
    UnknownVariable(String),

    #[error("variable index {index} out of range ({count} variables)")]
    VariableOutOfRange { index: usize, count: usize },

    #[error("probability mass sums to {total:.17}; expected 1 within {tolerance:e}")]
    NotNormalized { total: f64, tolerance: f64 },

    #[error("negative probability {value} for pattern {pattern:?}, class {class}")]
    NegativeProbability {
        pattern: Vec<u32>,
        class: u8,
        value: f64,
    },

    #[error("pattern {pattern:?} does not respect the variable arities {arities:?}")]
    ArityViolation { pattern: Vec<u32>, arities: Vec<usize> },

    #[error("duplicate distribution entry for pattern {pattern:?}, class {class}")]
    DuplicateEntry { pattern: Vec<u32>, class: u8 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{count} variables exceed the exhaustive-search guard of {guard}")]
    TooManyVariables { count: usize, guard: usize },

    #[error("replicate (m = {sample_size}, r = {replicate}) failed: {source}")]
    ReplicateFailed {
        sample_size: usize,
        replicate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("report shapes differ: {0}")]
    ShapeMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
