//! Crate error type.

use thiserror::Error;

/// Errors produced by construction, evaluation and experiment operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed its domain constraint. Carries the parameter name,
    /// the offending value and the constraint it violated.
    #[error("invalid parameter `{name}` = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// An erasure model does not cover an edge of the graph it was paired with.
    #[error("erasure model does not cover edge ({0}, {1})")]
    ModelMismatch(u32, u32),

    /// A cut, node index or source/destination spec is inconsistent with the graph.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// Exact enumeration was requested on an instance beyond the 2^24 budget.
    #[error("instance too large for exact mode: {free_nodes} free nodes exceed the {budget_bits}-bit enumeration budget")]
    BudgetExceeded { free_nodes: usize, budget_bits: u32 },

    /// Sweep-cut family has no admissible threshold.
    #[error("sweep-cut family is empty: no axis threshold separates the sources from the destinations")]
    EmptySweepFamily,

    /// A derived erasure probability left [0, 1) on an evaluation grid.
    #[error("grid point n = {n} rejected: derived erasure probability {gamma} lies outside [0, 1)")]
    RejectedGridPoint { n: u64, gamma: f64 },

    /// The appendix trace requires a constant erasure model.
    #[error("trace requires a constant erasure model")]
    NonConstantModel,

    /// Experiment configuration is invalid.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// I/O failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Malformed serialized data (JSON or CSV).
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, constraint: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            constraint,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
