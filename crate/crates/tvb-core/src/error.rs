//! Shared error type. All operations are total on valid data; every
//! precondition violation is reported through `TvbError` rather than a panic.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TvbError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("ambient dimension {0} exceeds the supported bound 4")]
    DimensionTooLarge(usize),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("division by zero rational function")]
    DivisionByZero,

    #[error("zero function has no divisor")]
    ZeroDivisor,

    #[error("polynomial has no rational splitting: {0}")]
    IrrationalLocus(String),

    #[error("level/place mismatch: {0}")]
    NormMismatch(String),

    #[error("non-integer norm values: {0}")]
    NonIntegerNorm(String),

    #[error("point outside the slice support: {0}")]
    OutsideSupport(String),

    #[error("weight outside the dual tail cone: {0}")]
    WeightOutsideDual(String),

    #[error("section space is unbounded: {0}")]
    Unbounded(String),

    #[error("cone is not smooth: {0}")]
    NotSmooth(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, TvbError>;
