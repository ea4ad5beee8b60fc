use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Arguments outside the domain of an operation (mismatched parents,
    /// zero scale, non-injective maps, level mismatches, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A coordinate key breaks an invariant of the deformation space.
    #[error("invalid coordinate {key}: {reason}")]
    InvalidCoordinate { key: String, reason: String },

    #[error("pairing diverges: {0}")]
    Divergence(String),

    #[error("not computable: {0}")]
    NotComputable(String),

    #[error("not extendable: {0}")]
    NotExtendable(String),

    /// Regression could not be trusted; `partial` holds the `(λ, pairing)`
    /// samples that were computed.
    #[error("unreliable scaling-degree estimate: {message}")]
    UnreliableEstimate {
        message: String,
        partial: Vec<(f64, f64)>,
    },

    /// The difference of two extensions is not a finite sum of delta
    /// derivatives at the origin within tolerance.
    #[error("extension difference is not supported at the origin (relative residual {residual:e})")]
    LemmaViolation { residual: f64 },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
