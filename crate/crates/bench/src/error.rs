use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error("model: {0}")]
    Model(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;

impl BenchError {
    /// Process exit code: 1 usage, 2 data (and I/O), 3 model failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) => 1,
            BenchError::Data(_) | BenchError::Io(_) => 2,
            BenchError::Model(_) => 3,
        }
    }
}

impl From<forecast_lab::Error> for BenchError {
    fn from(e: forecast_lab::Error) -> Self {
        BenchError::Model(e.to_string())
    }
}
