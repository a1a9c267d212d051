use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("conversion error: {0}")]
    Conversion(String),
    #[error("delta error: {0}")]
    Delta(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Store(#[from] rg_store::StoreError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GraphError>;
