use thiserror::Error;

/// Errors raised when an input falls outside an operation's domain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be finite and non-negative, got {value}")]
    NegativeOrNonFinite { name: &'static str, value: f64 },

    #[error("{name} must be strictly positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },

    #[error("no valuation attains cost {target} at epsilon {epsilon} for the {family} family")]
    NoInverse {
        family: &'static str,
        target: f64,
        epsilon: f64,
    },

    #[error("population is empty")]
    EmptyPopulation,

    #[error("population has {bits} bits but {values} values")]
    LengthMismatch { bits: usize, values: usize },

    #[error("index {index} out of range for population of size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("winner set covers all {n} agents; the noise scale n - |H| would be zero")]
    WinnerSetCoversPopulation { n: usize },

    #[error(
        "accuracy target unattainable: alpha' = alpha / (1/2 + ln 3) = {alpha_prime} \
         must be at least 1/n = {min}"
    )]
    AccuracyUnattainable { alpha_prime: f64, min: f64 },

    #[error("alpha must lie in (0, 1), got {0}")]
    AlphaOutOfRange(f64),

    #[error("winner count k = {k} must be at most n - 1 = {max}")]
    TooManyWinners { k: usize, max: usize },

    #[error("invalid population spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::NegativeOrNonFinite { name, value })
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NotPositive { name, value })
    }
}
