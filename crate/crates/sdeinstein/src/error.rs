use thiserror::Error;

/// Everything that can go wrong in construction, verification or solving.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A rational function was divided by the identically zero function.
    #[error("division by the zero function")]
    DivisionByZeroFunction,

    /// A denominator vanishes at the evaluation point.
    #[error("pole at point {0}")]
    PoleAtPoint(String),

    /// The metric determinant vanishes identically.
    #[error("metric is singular")]
    SingularMetric,

    /// Ricci is not a constant multiple of the metric.
    #[error("metric is not Einstein: {0}")]
    NotEinstein(String),

    /// `sqrt|det g|` is not a rational function on this chart.
    #[error("volume density is not rational: det g = {0}")]
    NonRationalVolumeDensity(String),

    /// Curvature operator failed self-adjointness.
    #[error("curvature operator is not self-adjoint")]
    NotSelfAdjoint,

    /// Curvature operator has nonzero trace.
    #[error("curvature operator is not trace-free")]
    NotTraceFree,

    /// The self-dual Weyl endomorphism is not of type III at this point.
    #[error("not of Petrov type III: {0}")]
    NotTypeIII(String),

    /// No frame with the required normalisation exists (or the input is null).
    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),

    /// The normalising scalar of the canonical triple has no rational square root.
    #[error("normalisation of the canonical triple is irrational: {0}")]
    IrrationalNormalization(String),

    /// Solution data fails the defining two-plane system.
    #[error("solution data does not satisfy the two-plane system: {0}")]
    EqnResidualNonzero(String),

    /// Unknown normal-form label.
    #[error("unknown connection case {0:?}")]
    UnknownCase(String),

    /// The initial curve is characteristic somewhere.
    #[error("initial curve is tangent to a characteristic at s = {0}")]
    TangentInitialCurve(f64),

    /// Characteristics cross inside the requested domain.
    #[error("characteristics cross near transverse coordinate {0}")]
    CharacteristicCrossing(f64),

    /// The characteristic direction degenerates (blow-up) inside the domain.
    #[error("characteristic field degenerates near transverse coordinate {0}")]
    DegenerateCharacteristic(f64),

    /// The gauge factor z vanishes inside the domain.
    #[error("gauge factor vanishes near ({0}, {1})")]
    ZeroCrossing(f64, f64),

    /// Neither orientation makes the anti-self-dual Weyl tensor vanish.
    #[error("neither orientation makes W- vanish")]
    BothOrientationsFail,

    /// Malformed input data.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
