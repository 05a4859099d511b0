use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes are incompatible or violate a type invariant.
    #[error("shape error: {0}")]
    Shape(String),

    /// A matrix precondition (Hermitian, positive definite, finite) does not hold.
    #[error("domain error: matrix is not {0}")]
    Domain(&'static str),

    /// An iterative decomposition did not converge.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("correlation is undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The search space is larger than the configured budget allows.
    #[error("search space of {count} selections exceeds the budget of {budget}; reduce N_c or K")]
    Capacity { count: String, budget: u64 },

    /// Malformed channel file.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: u64, message: String },

    /// Channel file parsed but its contents violate the schema.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("config error: {0}")]
    Config(String),

    /// An experiment postcondition failed.
    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
