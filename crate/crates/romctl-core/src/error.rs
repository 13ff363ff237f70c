use alloc::string::String;

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors surfaced by the design and adaptation workflow.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Incompatible matrix/vector dimensions.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// Input violates a domain precondition (non-finite entries, negative
    /// tolerance, asymmetric weight, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A stability precondition does not hold (e.g. Lyapunov solve on a
    /// non-Hurwitz matrix).
    #[error("stability error: {0}")]
    Stability(String),
    /// Synthesis failed (Riccati divergence, unstabilizable model, margin
    /// failure that the retry ladder could not fix).
    #[error("synthesis error: {0}")]
    Synthesis(String),
    /// A conditioning cap was exceeded.
    #[error("conditioning error: {0}")]
    Conditioning(String),
    /// Degenerate input for which the result is undefined (all-zero snapshot
    /// matrix, zero output data, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    /// A simulation produced a non-finite state.
    #[error("divergence at step {step}: {what}")]
    Divergence { step: usize, what: String },
    /// An iterative solver did not reach its tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),
    /// The descriptor asks for something the pipeline does not support.
    #[error("unsupported system: {0}")]
    Unsupported(String),
    /// Every retry ladder and method alternative was exhausted.
    #[error("pipeline failure in {phase}: {what}")]
    Pipeline { phase: String, what: String },
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
