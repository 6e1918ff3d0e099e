use thiserror::Error;

use crate::smt_solver::SteinerTree;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The operation is undefined at this input (e.g. a norming functional at the origin).
    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("degenerate topology: {0}")]
    DegenerateTopology(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The optimizer hit its iteration cap. The best iterate is kept so callers
    /// can still inspect or use it.
    #[error("optimization did not converge (gradient residual {residual:e})")]
    NoConvergence {
        best: Box<SteinerTree>,
        residual: f64,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
