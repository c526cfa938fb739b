use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rigid transform: {0}")]
    InvalidTransform(String),

    #[error("invalid point set: {0}")]
    InvalidPointSet(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("no convergence after {iterations} iterations (last step {last_step:.3e} mm)")]
    NoConvergence { iterations: usize, last_step: f64 },

    #[error("insufficient correspondence: {common} common labels, at least 3 required")]
    InsufficientCorrespondence {
        common: usize,
        unmatched_source: Vec<String>,
        unmatched_target: Vec<String>,
    },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("phantom not static: marker {label} moved {displacement:.3} mm at frame {frame_id} (limit {limit:.3} mm)")]
    NonStaticPhantom {
        label: String,
        frame_id: i64,
        displacement: f64,
        limit: f64,
    },

    #[error("insufficient frames for {0}: at least 2 required")]
    InsufficientFrames(String),

    #[error("empty frame window for fiducial {0}")]
    EmptyWindow(String),

    #[error("insufficient measurements: {0} (at least 2 required)")]
    InsufficientMeasurements(usize),

    #[error("trials of different experiment kinds cannot be summarized together")]
    MixedExperimentKinds,

    #[error("degenerate variance: both standard errors are zero")]
    DegenerateVariance,

    #[error("events out of time order at index {0}")]
    UnorderedEvents(usize),

    #[error("parse error at line {line}, column {column}: {reason}")]
    Parse {
        line: usize,
        column: usize,
        reason: String,
    },

    #[error("frame ids not increasing: frame {frame_id} at line {line} follows frame {previous}")]
    NonMonotonicFrames {
        line: usize,
        frame_id: i64,
        previous: i64,
    },

    #[error("schema error at {path}: {reason}")]
    Schema { path: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            reason: reason.into(),
        }
    }

    pub(crate) fn schema(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// 1 validation failure, 2 parse error, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::NonMonotonicFrames { .. } => 2,
            Error::DegenerateInput(_)
            | Error::NoConvergence { .. }
            | Error::DegenerateConfiguration(_)
            | Error::DegenerateVariance => 3,
            _ => 1,
        }
    }
}
