use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("ingestion error: {message}")]
    Ingest { message: String, lines: Vec<usize> },

    #[error("transform error at index {index}: {message}")]
    Transform { message: String, index: usize },

    #[error("fetch error{}: {message}", status.map(|s| format!(" (HTTP {s})")).unwrap_or_default())]
    Fetch { status: Option<u16>, message: String },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] longmem::Error),
}

pub type DataResult<T> = Result<T, DataError>;
