use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("spin index {index} out of range for an environment of {size} spins")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("pattern has {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("time {t} precedes the base time {t0}")]
    TimeBeforeStart { t: f64, t0: f64 },

    #[error("system amplitudes are not normalized: |a_up|^2 + |a_down|^2 = {norm}")]
    NotNormalized { norm: f64 },

    #[error("environment of {size} spins exceeds the cap of {cap} for {what}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("both branch significances vanish at t = {t}; the outcome is undefined")]
    DegenerateOutcome { t: f64 },

    #[error("couplings are not uniform (h_0 = {first}, h_{index} = {other})")]
    NonUniformCouplings {
        first: f64,
        index: usize,
        other: f64,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("empty distribution")]
    EmptyDistribution,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("at t = {t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Strips any `AtTime` context and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. } => source.root(),
            other => other,
        }
    }
}
