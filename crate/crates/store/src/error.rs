use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("fragment {0} is not registered with this store")]
    UnregisteredFragment(u32),
    #[error("dangling reference to location {0:#x}")]
    DanglingRef(u64),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("snapshot error: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, StoreError>;
