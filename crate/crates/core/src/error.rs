//! Domain errors surfaced by the library. Each variant name is stable and is
//! used verbatim in CLI error reports.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("map does not respect relations: {0}")]
    IllFormedMap(String),
    #[error("no power of the section annihilates the module")]
    NotSupportedOnDivisor,
    #[error("section is not squarefree: {0}")]
    NotSquarefree(String),
    #[error("matrix is not invertible: {0}")]
    NotInvertible(String),
    #[error("pair is not in the required kernel level: {0}")]
    NotInKernel(String),
    #[error("leaf object is not supported on its divisor intersection: {0}")]
    SupportViolation(String),
    #[error("graded data violates t^r = x: {0}")]
    GradingViolation(String),
    #[error("index is divisible by the coefficient characteristic: {0}")]
    BadCharacteristic(String),
    #[error("group closure exceeded the element cap")]
    ClosureCap,
    #[error("group order is divisible by the field characteristic")]
    WildCharacteristic,
    #[error("group is not generated by its pseudo-reflections")]
    GeneratedByReflectionsViolation,
    #[error("class maps disagree: {0}")]
    MismatchedClass(String),
    #[error("divisor data is invalid: {0}")]
    InvalidDivisor(String),
    #[error("diagram or pair failed validation: {0}")]
    InvalidInput(String),
    #[error("internal exactness check failed (implementation bug): {0}")]
    InternalExactness(String),
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::IllFormedMap(_) => "IllFormedMap",
            Error::NotSupportedOnDivisor => "NotSupportedOnDivisor",
            Error::NotSquarefree(_) => "NotSquarefree",
            Error::NotInvertible(_) => "NotInvertible",
            Error::NotInKernel(_) => "NotInKernel",
            Error::SupportViolation(_) => "SupportViolation",
            Error::GradingViolation(_) => "GradingViolation",
            Error::BadCharacteristic(_) => "BadCharacteristic",
            Error::ClosureCap => "ClosureCap",
            Error::WildCharacteristic => "WildCharacteristic",
            Error::GeneratedByReflectionsViolation => "GeneratedByReflectionsViolation",
            Error::MismatchedClass(_) => "MismatchedClass",
            Error::InvalidDivisor(_) => "InvalidDivisor",
            Error::InvalidInput(_) => "InvalidInput",
            Error::InternalExactness(_) => "InternalExactness",
        }
    }
}
