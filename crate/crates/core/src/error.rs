use thiserror::Error;

/// Error type shared by every subsystem of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller handed us something that violates a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A quantity that should be consistent within tolerance is not.
    #[error("numerical consistency failure: {0}")]
    NumericalConsistency(String),

    /// A state with (numerically) vanishing norm.
    #[error("degenerate state: {0}")]
    DegenerateState(String),

    /// A size limit (oracle cutoff, bond-dimension cap) was exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A tableau insertion that cannot belong to a stabilizer group.
    #[error("tableau inconsistency: {0}")]
    Inconsistency(String),

    /// A provably-impossible situation was observed; signals numerical breakdown.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// A tableau row no longer matches the state it claims to stabilize.
    #[error("stale row: {0}")]
    StaleRow(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
