use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("label {label} out of range for {classes} classes")]
    InvalidLabel { label: usize, classes: usize },

    #[error("out of domain: {0}")]
    Domain(String),

    #[error("gradient is undefined for the {0} loss")]
    UnsupportedGradient(crate::loss::LossKind),

    #[error("{op} is not defined for the {model} noise model")]
    UnsupportedNoise { op: &'static str, model: String },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("training aborted at epoch {epoch}, batch {batch}: non-finite loss ({loss})")]
    TrainingAborted { epoch: usize, batch: usize, loss: f64 },
}

impl Error {
    pub(crate) fn parse(path: &std::path::Path, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.display().to_string(),
            line,
            msg: msg.into(),
        }
    }
}
