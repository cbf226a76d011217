use thiserror::Error;

/// Errors produced while building problems or running sensitivity methods.
#[derive(Debug, Error)]
pub enum Error {
    /// A pivot fell below the singularity threshold during factorization.
    /// `pivot_index` is the zero-based elimination column that failed.
    #[error("matrix is numerically singular: pivot {pivot_index} has magnitude {pivot_magnitude:e} (threshold {threshold:e})")]
    SingularMatrix {
        pivot_index: usize,
        pivot_magnitude: f64,
        threshold: f64,
    },

    /// A matrix or vector block does not have the shape required of it.
    #[error("shape mismatch in {field}: expected {expected}, found {found}")]
    ShapeMismatch {
        field: String,
        expected: String,
        found: String,
    },

    /// A block that must be symmetric is not, beyond tolerance.
    #[error("{field} is not symmetric: max relative asymmetry {max_rel:e} exceeds 1e-12")]
    Asymmetric { field: String, max_rel: f64 },

    /// A parameter or state index outside `0..len`.
    #[error("index {index} out of range for {what} of length {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    /// A value that must be finite is not.
    #[error("non-finite value in {field}")]
    NonFinite { field: String },

    /// An invalid configuration field, named explicitly.
    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    /// Singularity encountered at a specific (usually perturbed) parameter
    /// point during a re-solve.
    #[error("operator is singular at parameters {alpha:?}: {source}")]
    SingularAt {
        alpha: Vec<f64>,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
