use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grazing-mode singular: varpi_{n} = 0 makes varpi^-1 undefined")]
    GrazingMode { n: usize },

    #[error("exceptional point at mode {n}: use jordan_block_system")]
    ExceptionalPoint { n: usize },

    #[error("mode {n} is not at an exceptional point (|w_n| = {w_abs:e})")]
    NotExceptional { n: usize, w_abs: f64 },

    #[error("singular interface matching: zero wavevector")]
    SingularMatching,

    #[error("internal resonance of truncated operator; refine N or perturb k")]
    InternalResonance,

    #[error("mode sum not converged after {modes} modes (tail estimate {tail_estimate:e})")]
    Truncation { modes: usize, tail_estimate: f64 },

    #[error("quadrature did not converge: {panels} panels, error estimate {error_estimate:e}")]
    Quadrature { panels: usize, error_estimate: f64 },

    #[error("matrix exponential overflow: norm {0:e} out of range")]
    Overflow(f64),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
