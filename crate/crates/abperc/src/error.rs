use thiserror::Error;

/// Crate-wide error type.
///
/// `InvalidArgument` covers malformed inputs, `Hypothesis` a lemma
/// precondition that the given configuration does not satisfy (the message
/// names the violated hypothesis), `Bracket` a bisection whose endpoints do
/// not straddle the target with confidence-interval separation, and
/// `InsufficientData` an aggregate that cannot be formed from what was
/// observed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error(
        "bracket does not straddle target {target}: \
         p({lo}) = {p_lo} [{lo_ci_low}, {lo_ci_high}], \
         p({hi}) = {p_hi} [{hi_ci_low}, {hi_ci_high}]"
    )]
    Bracket {
        target: f64,
        lo: f64,
        p_lo: f64,
        lo_ci_low: f64,
        lo_ci_high: f64,
        hi: f64,
        p_hi: f64,
        hi_ci_low: f64,
        hi_ci_high: f64,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Error {
        Error::InvalidArgument(msg.into())
    }

    pub fn hypothesis(msg: impl Into<String>) -> Error {
        Error::Hypothesis(msg.into())
    }
}
