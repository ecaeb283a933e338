use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Atoms or probabilities do not form a valid distribution.
    #[error("invalid distribution: {0}")]
    InvalidDist(String),

    /// The instance has no meaningful answer (for example an index equation without a
    /// nonnegative root).
    #[error("degenerate instance: {0}")]
    Degenerate(String),

    /// A piecewise-linear function is not the clamp curve of any distribution.
    #[error("malformed curve: {0}")]
    MalformedCurve(String),

    /// A second-order dominance precondition fails at the given outside option.
    #[error("dominance fails at y = {y}")]
    NotDominated { y: f64 },

    /// Structural problems found while validating an MDP.
    #[error("invalid mdp: {}", .0.join("; "))]
    InvalidMdp(Vec<String>),

    /// An enumeration or state space grew past its cap.
    #[error("{what}: {count} exceeds cap {cap}")]
    CapExceeded { what: &'static str, count: u128, cap: u128 },

    /// Arguments outside the domain of an operation.
    #[error("{0}")]
    Domain(String),
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
