use thiserror::Error;

use crate::expr::{EvalError, Num, ParseError};
use crate::operators::Resonance;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("dimension {0} is too small: n >= 2 is required")]
    DimensionTooSmall(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("tensor density has weight {0}, a weight-0 tensor is required")]
    NonzeroWeight(Num),
    #[error("{what} is not symmetric in indices ({i},{j})")]
    NotSymmetric { what: &'static str, i: usize, j: usize },
    #[error("trace of the projective class does not vanish (defect {defect:e})")]
    TraceNonzero { defect: f64 },
    #[error("weight {weight} is resonant: {resonance}")]
    ResonantWeight { weight: Num, resonance: Resonance },
    #[error("effective weight {effective} is resonant: {resonance}")]
    ShiftedResonance { effective: Num, resonance: Resonance },
    #[error("density coefficient is not positive at {point:?}")]
    NonpositiveDensity { point: Vec<f64> },
    #[error("Jacobian determinant is not positive at {point:?}")]
    NonpositiveJacobian { point: Vec<f64> },
    #[error("inverse map does not invert the forward map (defect {defect:e} at {point:?})")]
    InverseMismatch { defect: f64, point: Vec<f64> },
    #[error("variable x{var} does not belong to a chart with variables x{first}..x{last}")]
    VariableOutOfChart { var: usize, first: usize, last: usize },
    #[error("integrand support is not strictly inside the quadrature box")]
    SupportEscapesBox,
    #[error("invalid quadrature specification: {0}")]
    Quadrature(String),
    #[error("scenario: {0}")]
    Scenario(String),
}

impl Error {
    /// True for the precondition failures reported with exit code 3.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::ResonantWeight { .. }
                | Error::ShiftedResonance { .. }
                | Error::DimensionTooSmall(_)
                | Error::NonzeroWeight(_)
                | Error::NonpositiveDensity { .. }
                | Error::NonpositiveJacobian { .. }
        )
    }
}
