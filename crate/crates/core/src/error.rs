use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameters that can never describe a valid object (e.g. alpha <= -1).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A call-site precondition was violated (index out of range, x outside [-1, 1], ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// No Riccati branch satisfies the admissibility conditions.
    #[error("no admissible Darboux transform: {0}")]
    NoAdmissibleBranch(String),

    /// More than one admissible branch survived the filter.
    #[error("ambiguous Darboux transform, admissible branches: {0}")]
    AmbiguousBranch(String),

    /// A quadrature or eigen iteration did not reach its tolerance.
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    /// Path enumeration would exceed the configured work guard.
    #[error("validation failure: enumeration guard exceeded: {0}")]
    GuardExceeded(String),

    /// Inputs that are well-formed but inconsistent (missing table rows, empty sets, ...).
    #[error("validation failure: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence(_) => 2,
            _ => 1,
        }
    }
}
