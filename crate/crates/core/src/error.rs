use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("polynomial parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("polynomial is not harmonic")]
    NotHarmonic,

    #[error("polynomial is not homogeneous of degree {0}")]
    NotHomogeneous(u32),

    #[error("no clean degree-{degree} leading part (residual {residual:.3e}, tolerance {tolerance:.1e})")]
    NoLeadingPart {
        degree: u32,
        residual: f64,
        tolerance: f64,
    },

    #[error("radius {radius:.3e} is not resolved by grid spacing {spacing:.3e}")]
    Unresolved { radius: f64, spacing: f64 },

    #[error("divergent integrand: {0}")]
    Divergent(String),

    #[error("field vanishes on all scanned radii")]
    ZeroField,

    #[error("domain has no boundary points near the origin")]
    DegenerateDomain,

    #[error("linear solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("mesh under-resolves the problem: {0}")]
    UnderResolved(String),

    #[error("internal verification failed: {0}")]
    Verification(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
