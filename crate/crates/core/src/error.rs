use std::path::PathBuf;

use thiserror::Error;

use crate::waveform::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join_violations(.0))]
    InvalidParams(Vec<Violation>),

    #[error("message index {m} outside the alphabet 0..{n}")]
    MessageOutOfRange { m: usize, n: usize },

    #[error("measurement {value} outside [0, {max}]")]
    MeasurementOutOfRange { value: f64, max: f64 },

    #[error("frame length {actual} does not match expected length {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("synthesis basis for N = {n} is singular")]
    SingularBasis { n: usize },

    #[error(
        "exponential postprocessing saturates at sample {index}: y/A_c = {exponent:.3} exceeds {limit} \
         (A_c = {a_c:.6}); lower the transmit amplitude or the noise power"
    )]
    Saturation {
        index: usize,
        exponent: f64,
        limit: f64,
        a_c: f64,
    },

    #[error("precompensation requires channel state information at the transmitter")]
    CsiUnavailable,

    #[error("fade gain {gain} is below the inversion floor {floor}")]
    GainBelowFloor { gain: f64, floor: f64 },

    #[error("need at least {min} trials, got {got}")]
    InsufficientTrials { got: usize, min: usize },

    #[error("no root in the bracket [{lo_db}, {hi_db}] dB")]
    NoRoot { lo_db: f64, hi_db: f64 },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("check failed: {0}")]
    CheckFailed(String),
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
