use thiserror::Error;

/// Errors raised while building or validating inputs and models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("malformed model: {0}")]
    Malformed(String),
}

impl ModelError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        ModelError::Invalid(msg.into())
    }

    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        ModelError::Malformed(msg.into())
    }
}

/// Failures of the design and operation pipelines.
#[derive(Debug, Error)]
pub enum DesignError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("infeasible: demands cannot be routed under {scenario}")]
    Infeasible { scenario: String },
    #[error("infeasible: {0}")]
    InfeasibleModel(String),
    #[error("time limit reached without a feasible solution ({context})")]
    NoSolution { context: String },
    #[error("solver error: {0}")]
    Solver(String),
}
