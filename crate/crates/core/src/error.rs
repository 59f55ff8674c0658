use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("subsystem label `{0}` appears more than once")]
    LabelCollision(String),

    #[error("parameter `{name}` = {value} is outside {range}")]
    OutOfRange {
        name: String,
        value: f64,
        range: String,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("outcome probability {probability:.3e} is below the post-selection threshold")]
    ZeroProbability { probability: f64 },

    #[error("Kraus completeness violated (residual {residual:.3e})")]
    CompletenessViolation { residual: f64 },

    #[error("unknown state family `{0}`")]
    UnknownFamily(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fit is underdetermined: {0}")]
    Underdetermined(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn out_of_range(name: &str, value: f64, range: &str) -> Self {
        Error::OutOfRange {
            name: name.to_string(),
            value,
            range: range.to_string(),
        }
    }

    /// True for errors caused by user input rather than numerics or I/O.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::UnknownLabel(_)
                | Error::LabelCollision(_)
                | Error::OutOfRange { .. }
                | Error::InvalidPartition(_)
                | Error::UnknownFamily(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
