use thiserror::Error;

/// Harness failures, partitioned by exit code: usage errors exit 1,
/// numeric failures (NaN, residual gate) exit 2, I/O failures exit 3.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Numeric(String),

    #[error("{0}")]
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Usage(_) => 1,
            HarnessError::Numeric(_) => 2,
            HarnessError::Io(_) => 3,
        }
    }

    pub fn io(context: impl std::fmt::Display, err: std::io::Error) -> Self {
        HarnessError::Io(format!("{context}: {err}"))
    }
}

impl From<rsgdm_core::Error> for HarnessError {
    fn from(err: rsgdm_core::Error) -> Self {
        use rsgdm_core::Error as E;
        match err {
            E::Io(e) => HarnessError::Io(e.to_string()),
            E::InvalidHyper { .. } | E::InvalidSpec(_) | E::BadFormat(_) => {
                HarnessError::Usage(err.to_string())
            }
            E::ShapeMismatch { .. }
            | E::NonFinite { .. }
            | E::StepOutOfRange { .. }
            | E::NotSpd
            | E::IndexOutOfRange { .. } => HarnessError::Numeric(err.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
