use thiserror::Error;

/// Errors raised by the geometric and numerical layers.
///
/// Variants split into two families: input validation (bad shapes, bad
/// files) and numerical failures (a divisor touching the curve, a
/// degenerate intersection, a quadrature that refused to settle). The CLI
/// maps the first family to exit code 1 and the second to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("section vanishes on the curve (min FS norm {min_norm:.3e} at component {component}, t = {t:.6})")]
    ZeroOnCurve { component: usize, t: f64, min_norm: f64 },

    #[error("section vanishes at the evaluation point (FS norm {norm:.3e})")]
    SingularPoint { norm: f64 },

    #[error("non-transversal intersection near chart point ({u0:.6}, {u1:.6}) in piece {piece}: {reason}")]
    NonTransversal {
        piece: usize,
        u0: f64,
        u1: f64,
        reason: String,
    },

    #[error("Newton seeding found signed count {found} but the boundary argument gives {expected} in piece {piece}")]
    SeedExhaustion { piece: usize, found: i64, expected: i64 },

    #[error("affine linking value {value} is not within {tol:e} of an integer")]
    NonIntegral { value: f64, tol: f64 },

    #[error("quadrature did not converge after {samples} samples (last change {last_change:.3e})")]
    NotConverged { samples: usize, last_change: f64 },

    #[error("cone apex rejected: |F| = {norm:.3e} at (s, t) = ({s:.4}, {t:.4}) on component {component}")]
    ApexRejected {
        component: usize,
        s: f64,
        t: f64,
        norm: f64,
    },

    #[error("chain boundary does not match the curve: {0}")]
    BoundaryMismatch(String),

    #[error("every random start vanished on the curve at degree {degree}")]
    AllStartsRejected { degree: u32 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroOnCurve { .. }
                | Error::SingularPoint { .. }
                | Error::NonTransversal { .. }
                | Error::SeedExhaustion { .. }
                | Error::NonIntegral { .. }
                | Error::NotConverged { .. }
                | Error::ApexRejected { .. }
                | Error::AllStartsRejected { .. }
        )
    }

    /// True when a divisor meets the curve, or passes so close between
    /// clearance samples that the winding quadrature cannot resolve it.
    pub fn is_graze(&self) -> bool {
        matches!(self, Error::ZeroOnCurve { .. } | Error::NotConverged { .. })
    }

    /// Stable machine-readable tag used in error records and the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::Invalid(_) => "Invalid",
            Error::Schema { .. } => "Schema",
            Error::ZeroOnCurve { .. } => "ZeroOnCurve",
            Error::SingularPoint { .. } => "SingularPoint",
            Error::NonTransversal { .. } => "NonTransversal",
            Error::SeedExhaustion { .. } => "SeedExhaustion",
            Error::NonIntegral { .. } => "NonIntegral",
            Error::NotConverged { .. } => "NotConverged",
            Error::ApexRejected { .. } => "ApexRejected",
            Error::BoundaryMismatch(_) => "BoundaryMismatch",
            Error::AllStartsRejected { .. } => "AllStartsRejected",
            Error::Io { .. } => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
