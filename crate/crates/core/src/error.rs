use thiserror::Error;

/// Errors raised by the numerical kernels, the certificate synthesis, the
/// event predictor and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("{what} contains non-finite entries")]
    NonFinite { what: &'static str },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("matrix is not Hurwitz (largest eigenvalue real part {max_real})")]
    NotHurwitz { max_real: f64 },

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    Asymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eig})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("linear system is singular")]
    Singular,

    #[error("decay rate {lambda} outside (0, {lambda_max})")]
    DecayRateOutOfRange { lambda: f64, lambda_max: f64 },

    #[error("certificate inequality violated: largest eigenvalue {max_eig} exceeds slack {slack}")]
    CertificateInequality { max_eig: f64, slack: f64 },

    #[error("initial threshold {w0} is below V(x0) = {v0}")]
    ThresholdBelowPlf { w0: f64, v0: f64 },

    #[error("invalid parameter {name}: {constraint}, got {value}")]
    InvalidParameter {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },

    #[error("negative time step {dt}")]
    NegativeDuration { dt: f64 },

    #[error("event state must have a zero error block")]
    NonZeroErrorBlock,

    #[error("threshold must be positive, got {w}")]
    NonPositiveThreshold { w: f64 },

    #[error("minimizer did not move away from t_k = {t_k}; no bracket can be formed")]
    DegenerateMinimum { t_k: f64 },

    #[error("no threshold crossing found before t = {horizon}")]
    NoCrossing { horizon: f64 },

    #[error("invalid bracket [{t_min}, {t_max}]: Z(t_min) = {z_min}, Z(t_max) = {z_max}")]
    InvalidBracket {
        t_min: f64,
        t_max: f64,
        z_min: f64,
        z_max: f64,
    },

    #[error("V(t) = {v} exceeds W(t) = {w} at t = {t}")]
    CertificateViolation { t: f64, v: f64, w: f64 },

    #[error("predicted event {t_predicted} falls inside the sampling period starting at {t_k}")]
    EventWithinSamplingPeriod { t_k: f64, t_predicted: f64 },

    #[error("scan reached the horizon {horizon} without a {what}")]
    HorizonExhausted { what: &'static str, horizon: f64 },

    #[error("trace is empty")]
    EmptyTrace,

    #[error("scalar system invalid: {0}")]
    InvalidScalarSystem(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
