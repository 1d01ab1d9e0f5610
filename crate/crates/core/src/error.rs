//! Crate-wide error and validation-violation types.

use thiserror::Error;

/// A single validation failure, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(Violation::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("gain mode {0:?} has no well-defined gradient")]
    NondifferentiableMode(&'static str),

    #[error("cannot project the zero vector onto the exterior of a ball")]
    ZeroVectorProjection,

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("infeasible deployment: {0}")]
    Infeasible(String),

    #[error("numerical failure at inner iteration {iteration}")]
    InnerNumerical {
        iteration: usize,
        iterate: Vec<[f64; 2]>,
    },

    #[error("numerical failure at outer iteration {iteration}: {message}")]
    Numerical { iteration: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
