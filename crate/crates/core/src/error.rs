use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("weights sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("alpha = {alpha} does not divide tau_max = {tau_max}")]
    InvalidPartition { tau_max: usize, alpha: usize },

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("KL({p}, {q}) is infinite")]
    DivergenceInfinite { p: f64, q: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn protocol(reason: impl Into<String>) -> Self {
        Error::ProtocolViolation(reason.into())
    }
}
