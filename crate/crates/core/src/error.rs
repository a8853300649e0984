use thiserror::Error;

/// Errors raised by the geometry, transport and solver routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Wedge product would exceed the top degree of the ambient space.
    #[error("wedge of degree {lhs} and degree {rhs} forms exceeds dimension 6")]
    DegreeOverflow { lhs: usize, rhs: usize },

    /// A form of a particular degree was required.
    #[error("expected a form of degree {expected}, got degree {found}")]
    DegreeMismatch { expected: usize, found: usize },

    /// Interior product of a scalar.
    #[error("interior product is undefined on 0-forms")]
    ContractionOfScalar,

    /// Coefficient vector length does not match the basis size.
    #[error("degree {degree} form needs {expected} coefficients, got {found}")]
    CoefficientCount {
        degree: usize,
        expected: usize,
        found: usize,
    },

    /// A finite-difference stencil would leave the domain box.
    #[error("point {point:?} is closer than {margin} to the boundary of its domain box")]
    OutsideDomain { point: [f64; 3], margin: f64 },

    /// The mixed Hessian of the cost is singular, so the symplectic form degenerates.
    #[error("degenerate structure at x = {x:?}, xbar = {xbar:?}: det(D_x D_xbar c) = {det:e}")]
    DegenerateStructure {
        x: [f64; 3],
        xbar: [f64; 3],
        det: f64,
    },

    /// Density evaluated to a non-positive value.
    #[error("density is not positive at {point:?} (value {value:e})")]
    NonPositiveDensity { point: [f64; 3], value: f64 },

    /// Newton iteration for the transport map did not converge.
    #[error("transport map recovery did not converge after {iterations} iterations (residual {residual:e})")]
    MapRecovery { iterations: usize, residual: f64 },

    /// Malformed density, cost or transport problem description.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Entropic iteration produced non-finite values.
    #[error(
        "entropic solver produced non-finite values at epsilon = {epsilon:e}; increase epsilon"
    )]
    Underflow { epsilon: f64 },

    /// Semigeostrophic verification requires the unit Coriolis normalization.
    #[error("coriolis parameter f = {f} is not supported here: the canonical-coordinate and conformal checks hold for f = 1 only, since scaling the cost by f^2 scales the Lychagin-Roubtsov metric by f^-4 while leaving the Kim-McCann-Warren metric unchanged")]
    CoriolisNormalization { f: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
