#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config: {0}")]
    Config(String),
    /// Parameters outside the theorem the experiment targets; the message names the condition.
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error(transparent)]
    Core(#[from] mvflow_core::Error),
    #[error("io: {0}")]
    Io(String),
    #[error("report format: {0}")]
    Format(String),
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
