use thiserror::Error;

/// Errors raised by parameter validation and the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rate `{name}` must be positive, got {value}")]
    NonPositiveRate { name: &'static str, value: f64 },

    #[error("quantity `{name}` must be nonnegative, got {value}")]
    NegativeQuantity { name: &'static str, value: f64 },

    #[error("gain rate g = {g} is below the passive limit -gamma = {limit}")]
    GainBelowPassive { g: f64, limit: f64 },

    #[error("parameter `{name}` is not finite")]
    NonFinite { name: &'static str },

    #[error("step {step} exceeds the resolution limit {limit} (at least 20 steps per fastest oscillation)")]
    StepTooLarge { step: f64, limit: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("solution overflowed at t = {time}")]
    Overflow { time: f64 },

    #[error("propagator at t = {time} is ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { time: f64, condition: f64 },

    #[error("unknown noise mode `{0}`")]
    UnknownMode(String),

    #[error("unknown {kind} `{value}`")]
    UnknownVariant { kind: &'static str, value: String },

    #[error("inversion series does not match the integration grid: {0}")]
    GridMismatch(String),

    #[error("initial phonon amplitude must be nonzero")]
    ZeroAmplitude,

    #[error("scan values must be finite and sorted ascending")]
    UnsortedScan,

    #[error("no amplification threshold in the scanned range ({0})")]
    NoThresholdInRange(String),

    #[error("eigenmode normalization diverges at the exceptional point")]
    ExceptionalPoint,

    #[error("eigenmode coefficients vanish (decoupled cavities)")]
    DegenerateEigenmode,

    #[error("index {index} out of range for grid with {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("interval start {tau} lies after its end {t}")]
    ReversedInterval { t: usize, tau: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
