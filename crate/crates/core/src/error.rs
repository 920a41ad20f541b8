use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("degenerate input at index {index}")]
    DegenerateInput { index: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("stencil evaluation failed at coordinate {coordinate}, offset {offset:e}: {source}")]
    Stencil {
        coordinate: usize,
        offset: f64,
        source: Box<Error>,
    },

    #[error("chart error: |z0| = {modulus:e} below threshold")]
    Chart { modulus: f64 },

    #[error("consistency check `{check}` failed: residual {residual:e} exceeds {tolerance:e}")]
    InternalConsistency {
        check: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("unknown immersion `{0}`")]
    UnknownImmersion(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn consistency(check: &'static str, residual: f64, tolerance: f64) -> Result<()> {
    if residual <= tolerance {
        Ok(())
    } else {
        Err(Error::InternalConsistency {
            check,
            residual,
            tolerance,
        })
    }
}
