use thiserror::Error;

use crate::mat2c::Complex;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("coefficient {value} at theta={theta}, j={j} lies outside the open unit disk")]
    Admissibility { value: Complex, theta: f64, j: u8 },
    #[error("coefficient {0} too close to the unit circle: 1 - |f|^2 is not positive")]
    DegenerateCoefficient(Complex),
    #[error("non-finite matrix product after {steps} steps")]
    NumericalBlowup { steps: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
