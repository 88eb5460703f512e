use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("channel {0} has no readings")]
    EmptyChannel(u8),

    #[error("gap detected on channel {channel} between {before_ms} ms and {after_ms} ms")]
    GapDetected {
        channel: u8,
        before_ms: i64,
        after_ms: i64,
    },

    #[error("band [{f_lo_hz}, {f_hi_hz}] Hz contains no frequency bins")]
    EmptyBand { f_lo_hz: f64, f_hi_hz: f64 },

    #[error(
        "band upper edge {f_hi_hz} Hz exceeds the Nyquist frequency of a {sample_rate_hz} Hz series; \
         at least {min_rate_hz} Hz sampling is required"
    )]
    NyquistViolation {
        f_hi_hz: f64,
        sample_rate_hz: f64,
        min_rate_hz: f64,
    },

    #[error("window has {actual} samples, expected {expected}")]
    WindowLength { expected: usize, actual: usize },

    #[error("window index {index} out of range (series has {count} windows)")]
    WindowOutOfRange { index: usize, count: usize },

    #[error("could not generate a signal meeting the detection margin after {attempts} attempts")]
    MarginUnattainable { attempts: usize },

    #[error("record with all six channels missing cannot be written")]
    EmptyRecord,

    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` wrapper so `Error` stays `Clone + PartialEq`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind:?}: {message}")]
pub struct IoError {
    pub kind: std::io::ErrorKind,
    pub message: String,
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(IoError {
            kind: e.kind(),
            message: e.to_string(),
        })
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
