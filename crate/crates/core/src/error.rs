use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("field has no sites")]
    EmptyField,

    #[error("field dimension must be at least 1")]
    ZeroDimension,

    #[error("site {index}: location/gradient length does not match field dimension {dim}")]
    DimensionMismatch { index: usize, dim: usize },

    #[error("site {index}: non-finite coordinate, value, or gradient entry")]
    NonFinite { index: usize },

    #[error("sites {first} and {second} coincide (distance {distance:.3e} below threshold {threshold:.3e})")]
    DuplicateSites {
        first: usize,
        second: usize,
        distance: f64,
        threshold: f64,
    },

    #[error("point length {got} does not match field dimension {dim}")]
    PointDimension { got: usize, dim: usize },

    #[error(
        "field is not convex-feasible: sites ({s1}, {s2}) violate the convex extension \
         inequality (defect {defect:.6e})"
    )]
    Infeasible { s1: usize, s2: usize, defect: f64 },

    #[error("modulus {given} is below the smallest admissible modulus {required}")]
    ModulusTooSmall { given: f64, required: f64 },

    #[error("modulus must be positive, got {0}")]
    NonPositiveModulus(f64),

    #[error("eps_fraction must lie strictly between 0 and 1, got {0}")]
    InvalidEpsFraction(f64),

    #[error("sup-convolution closed form requires eps < 1/M, got eps = {eps}, M = {modulus}")]
    EpsOutOfRange { eps: f64, modulus: f64 },

    #[error(
        "simplex solver stopped after {iterations} iterations with gap {gap:.3e} > tolerance {tolerance:.3e}"
    )]
    QpNoConvergence {
        iterations: usize,
        gap: f64,
        tolerance: f64,
        /// Best weights found; never silently used as an answer.
        best_weights: Vec<f64>,
        best_value: f64,
    },

    #[error("invalid simplex problem: {reason}")]
    InvalidQp { reason: String },

    #[error(
        "tilted field failed its convex feasibility check at sites ({s1}, {s2}) with defect \
         {defect:.6e}; this indicates an arithmetic bug"
    )]
    TiltCheckFailed { s1: usize, s2: usize, defect: f64 },

    #[error("invalid Hölder probe configuration: {reason}")]
    InvalidProbeConfig { reason: String },

    #[error("no lambda in (0, 1/2] with positive probe value (theta = {theta})")]
    NoPositiveLambda { theta: f64 },

    #[error("invalid box: {reason}")]
    InvalidBox { reason: String },

    #[error("grid oracle supports dimensions 1 and 2 only, got {0}")]
    OracleDimension(usize),
}
