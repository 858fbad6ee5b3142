use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the pipeline can surface, grouped so the CLI can map them
/// onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("column `{0}` named in the schema is missing from the CSV header")]
    MissingColumn(String),

    #[error("row {row}: bad value for `{field}`: {reason}")]
    BadValue {
        row: usize,
        field: &'static str,
        reason: String,
    },

    #[error("dataset contains no valid observations")]
    EmptyDataset,

    #[error("clustering input is empty")]
    EmptyInput,

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("degenerate range [{lo}, {hi}]")]
    DegenerateRange { lo: f64, hi: f64 },

    #[error("day index {day} out of range for {n_days} days")]
    IndexOutOfRange { day: usize, n_days: usize },

    #[error("grain bank is empty")]
    EmptyBank,

    #[error("invalid configuration: {field}: {reason}")]
    ConfigInvalid { field: String, reason: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("wav: {0}")]
    Wav(#[from] hound::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Process exit code: 2 config, 3 I/O, 4 data validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigInvalid { .. } => 2,
            Error::Io { .. } | Error::Wav(_) => 3,
            Error::Csv(e) if e.is_io_error() => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 4,
        }
    }
}
