use thiserror::Error;

/// Errors produced by the heading pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Both terms of the tilt-compensated yaw ratio vanish.
    #[error("degenerate magnetic field: yaw is undefined for this reading")]
    DegenerateField,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// `row` is the 1-based data row (the header is not counted).
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("sample {index}: {source}")]
    AtSample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn at_sample(index: usize, source: Error) -> Self {
        Error::AtSample { index, source: Box::new(source) }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
