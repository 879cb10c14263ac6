use thiserror::Error;

/// Errors raised by the simulation library.
///
/// Variants fall into three classes that front-ends map to distinct exit
/// statuses: invalid input, a violated physical precondition, and a numerical
/// procedure that failed to converge or to resolve its answer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian: max |H_ij - conj(H_ji)| = {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no real secular frequency along the {axis} axis (a + q^2/2 = {radicand:e})")]
    NoSecularFrequency { axis: &'static str, radicand: f64 },

    #[error("isotropic trap has no intrinsic cycle (dnu = 0)")]
    IsotropicCycle,

    #[error("state has norm {norm:e} outside the charge blocks kept by n_max = {n_max}")]
    TruncationLeak { norm: f64, n_max: usize },

    #[error("state has residual norm {residual:e} outside the labeled eigenfamilies")]
    UnlabeledComponent { residual: f64 },

    #[error("physical precondition violated: {0}")]
    Precondition(String),

    #[error("bisection failed: {0}")]
    Bracket(String),

    #[error("eigenvector tracking ambiguous at phi = {phi}: max |overlap|^2 = {max_overlap:.3e}; use more loop samples")]
    AmbiguousTracking { phi: f64, max_overlap: f64 },

    #[error("spectral gap collapsed at phi = {phi}: gap = {gap:e}")]
    GapCollapse { phi: f64, gap: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),
}

/// Broad class of an [`Error`], used to pick a process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Physics,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::DimensionMismatch { .. }
            | Error::NotHermitian { .. }
            | Error::InvalidArgument(_) => ErrorClass::Input,
            Error::NoSecularFrequency { .. }
            | Error::IsotropicCycle
            | Error::TruncationLeak { .. }
            | Error::UnlabeledComponent { .. }
            | Error::Precondition(_)
            | Error::Bracket(_) => ErrorClass::Physics,
            Error::AmbiguousTracking { .. } | Error::GapCollapse { .. } | Error::NoConvergence(_) => {
                ErrorClass::Numerical
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
