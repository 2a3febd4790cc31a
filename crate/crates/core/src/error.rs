/// Errors raised by instance generation, solvers, objectives and learners.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    /// A parameter or input violates an operation's preconditions.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// The feasible region is empty.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// An exhaustive enumeration was requested on a problem that is too large.
    #[error("enumeration guard: {0}")]
    Guard(String),
    /// The on-time objective was evaluated on a decision vector with zero total variance.
    #[error("degenerate variance: selected edges have zero total variance")]
    DegenerateVariance,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Parameter(msg()))
    }
}
