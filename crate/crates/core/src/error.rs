use thiserror::Error;

use crate::map::Point2;

/// Errors raised by the verification and refinement machinery.
///
/// Verification *failures* (a cone margin going negative, an inequality not
/// holding) are reported in the report types, not through this enum. This
/// enum covers invalid input and constructions that cannot proceed.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("finite-difference step must be positive, got {0}")]
    NonPositiveStep(f64),

    #[error("orientation mismatch: {0}")]
    OrientationMismatch(&'static str),

    #[error("invalid strip: {0}")]
    InvalidStrip(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("curve {0} has slope {1} above its Lipschitz bound {2}")]
    LipschitzViolation(&'static str, f64, f64),

    #[error("curve intersection did not converge after {iterations} iterations (last step {last_step:e})")]
    NonConvergence { iterations: usize, last_step: f64 },

    #[error("intersection point ({}, {}) lies outside the curves' parameter intervals", .0.x, .0.y)]
    OutsideInterval(Point2),

    #[error("nesting violated at strip {index}: {detail}")]
    NestingViolation { index: usize, detail: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("zero tangent vector")]
    ZeroVector,

    #[error("tangent vector ({xi}, {eta}) is not in the {sector} sector")]
    VectorOutsideSector {
        xi: f64,
        eta: f64,
        sector: &'static str,
    },

    #[error("point ({x}, {y}) is outside the {region}", x = .0.x, y = .0.y, region = .1)]
    PointOutsideRegion(Point2, &'static str),

    #[error("contraction hypotheses violated: {0}")]
    ContractionHypotheses(String),

    #[error("symbol {0} is outside the alphabet 1..={1}")]
    InvalidSymbol(u8, usize),

    #[error("inadmissible transition {from} -> {to} at time {n}")]
    Inadmissible { n: i64, from: u8, to: u8 },

    #[error("cannot shift: {0}")]
    EmptyWord(&'static str),

    #[error("refinement at time {n} is empty: {detail}")]
    EmptyRefinement { n: i64, detail: String },

    #[error("refinement at time {n} escaped the strips: {detail}")]
    RefinementEscape { n: i64, detail: String },

    #[error("empty point set")]
    EmptyPointSet,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
