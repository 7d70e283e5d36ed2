use thiserror::Error;

pub type Result<T> = std::result::Result<T, AoiError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AoiError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// The MGF argument lies outside the admissible region `s < s0`.
    #[error("s = {s} is outside the admissible region s < s0 = {s0}")]
    Domain { s: f64, s0: f64 },

    /// A closed-form expression was evaluated too close to one of its poles.
    #[error("evaluation point too close to a pole: {0}")]
    Pole(String),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("ill-conditioned linear system: {detail} (relative pivot {pivot_ratio:.3e})")]
    Conditioning { detail: String, pivot_ratio: f64 },

    #[error("model violation: {0}")]
    ModelViolation(String),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Domain,
    Engine,
}

impl AoiError {
    pub fn class(&self) -> ErrorClass {
        match self {
            AoiError::InvalidParams(_) | AoiError::Validation(_) => ErrorClass::Usage,
            AoiError::Domain { .. } | AoiError::Pole(_) => ErrorClass::Domain,
            AoiError::Singular(_) | AoiError::Conditioning { .. } | AoiError::ModelViolation(_) => {
                ErrorClass::Engine
            }
        }
    }
}
