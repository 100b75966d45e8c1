use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The trace of `rho * obs` came out with a non-negligible imaginary
    /// part, which only happens for a corrupted (non-Hermitian) state.
    #[error("imaginary part of trace is {0:e}, expected below 1e-10")]
    ImaginaryTrace(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("cannot normalize the zero vector")]
    ZeroVector,

    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("non-physical state: {0}")]
    NonPhysical(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("`{name}` takes {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: String,
        got: usize,
    },

    #[error("time {t} ns is outside the schedule [0, {t_final}] ns")]
    OutOfRange { t: f64, t_final: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error(
        "training diverged at epoch {epoch}: rms {rms:e} exceeds 10x the initial {initial:e}"
    )]
    Divergence { epoch: usize, rms: f64, initial: f64 },

    #[error(
        "calibration inconclusive: mean absolute deviation angular = {angular:.4}, plain = {plain:.4} (limit 0.2)"
    )]
    CalibrationInconclusive { angular: f64, plain: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Domain errors (bad physics or a failed numerical procedure) as opposed
    /// to malformed input.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::NonPhysical(_)
                | Error::InvalidWeights(_)
                | Error::Divergence { .. }
                | Error::CalibrationInconclusive { .. }
                | Error::ImaginaryTrace(_)
        )
    }
}
