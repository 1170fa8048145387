use thiserror::Error;

/// Errors raised by the laboratory. Numerical checks that merely *fail* are
/// reported through their report types; these are for malformed input and
/// broken preconditions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not skew-Hermitian (residual {residual:.3e})")]
    NotSkewHermitian { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("subalgebra `{name}`: {reason}")]
    InvalidSubalgebra { name: String, reason: String },

    #[error("element is not in subalgebra `{name}` (residual {residual:.3e})")]
    NotInSubalgebra { name: String, residual: f64 },

    #[error("point is off the manifold (constraint residual {residual:.3e})")]
    OffManifold { residual: f64 },

    #[error("moment pair is not in the image R (spectral residual {residual:.3e})")]
    NotInImage { residual: f64 },

    #[error("moment pair is not horizontal (max u-pairing {residual:.3e})")]
    NotHorizontal { residual: f64 },

    #[error("degenerate tangent space: {0}")]
    Degenerate(String),

    #[error("integral `{label}` is not real-valued (imaginary part {imag:.3e})")]
    NonRealIntegral { label: String, imag: f64 },

    #[error(
        "implicit solve did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("cannot evaluate expression `{expr}`: {reason}")]
    Expression { expr: String, reason: String },

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
