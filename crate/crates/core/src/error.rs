// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised across the estimation, theory and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0}")]
    Parse(String),

    #[error("line {line}: {message}")]
    ParseLine { line: u64, message: String },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("stratum {0}: fewer than 2 units")]
    DegenerateStratum(String),

    #[error("stratum {stratum}: zero variance in {variable}")]
    ZeroVariance { stratum: String, variable: &'static str },

    #[error("stratum {0}: mean_x is zero, cx undefined")]
    CxUndefined(String),

    #[error("duplicate stratum id {0}")]
    DuplicateStratum(String),

    #[error("unknown stratum {0}")]
    UnknownStratum(String),

    #[error("family {family} requires {field} for stratum {stratum}")]
    MissingField {
        family: String,
        field: &'static str,
        stratum: String,
    },

    #[error("singular transform: {0}")]
    SingularTransform(String),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("allocation infeasible: {0}")]
    Infeasible(String),

    #[error("combinatorial budget exceeded: {combinations} sample combinations (limit {limit}); use run_replications instead")]
    BudgetExceeded { combinations: u128, limit: u128 },

    #[error("replication {index}: {source}")]
    Replication { index: u64, source: Box<Error> },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// True for errors caused by malformed or incomplete input rather than
    /// by a numerical failure during computation.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Parse(_)
            | Error::ParseLine { .. }
            | Error::EmptyInput
            | Error::InvalidInput(_)
            | Error::DegenerateStratum(_)
            | Error::DuplicateStratum(_)
            | Error::UnknownStratum(_)
            | Error::Infeasible(_)
            | Error::MissingField { .. } => true,
            Error::Replication { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
