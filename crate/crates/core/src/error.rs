use thiserror::Error;

/// Errors raised by geometric queries and numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An integrand returned a non-finite value at a quadrature node.
    #[error("non-finite integrand value {value} at node {node:?}")]
    Evaluation { node: [f64; 3], value: f64 },

    /// The function has no sign change on the bracket.
    #[error("no sign change on bracket [{a}, {b}] (g(a) = {ga}, g(b) = {gb})")]
    Bracket { a: f64, b: f64, ga: f64, gb: f64 },

    /// All abscissae are equal, so no slope can be fitted.
    #[error("degenerate fit: all x values are equal")]
    DegenerateFit,

    /// A body description failed validation.
    #[error("invalid body at direction {direction:?}: {reason}")]
    InvalidBody { direction: [f64; 3], reason: String },

    /// A body description could not be read.
    #[error("malformed body spec field `{field}`: {reason}")]
    Spec { field: String, reason: String },

    /// A point is outside the open domain, on its boundary, or too close to
    /// the boundary for a well-conditioned chord.
    #[error("point {point:?} is {reason}")]
    Domain { point: [f64; 3], reason: String },

    /// A scalar argument is out of range.
    #[error("invalid argument: {0}")]
    Argument(String),
}

impl Error {
    pub(crate) fn domain(p: &nalgebra::Vector3<f64>, reason: impl Into<String>) -> Self {
        Error::Domain {
            point: [p.x, p.y, p.z],
            reason: reason.into(),
        }
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// True for failures of the numerical machinery (bracketing, quadrature,
    /// fitting) as opposed to invalid inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Evaluation { .. } | Error::Bracket { .. } | Error::DegenerateFit
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
