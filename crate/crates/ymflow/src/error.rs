use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands belong to different groups, grids, degrees or boundary
    /// condition families.
    #[error("structural mismatch: {0}")]
    Structural(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Config text violated the schema. Every violation is listed.
    #[error("invalid config:\n{}", .0.join("\n"))]
    InvalidConfig(Vec<String>),

    /// The stepper could not complete a step (e.g. the energy backtracking
    /// budget was exhausted).
    #[error("step failure at t = {t}, dt = {dt}: {reason}")]
    StepFailure { t: f64, dt: f64, reason: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
