//! Executes physical plans chunk by chunk. Intermediate rows are late
//! materialized: one u64 slot per query-graph node, holding the packed
//! storage location of a graph tuple or the row index of a table tuple.
//! Values are read only where a predicate, hash key or projection needs
//! them.

mod chunk;
mod db;
mod eval;
mod ops;

use std::cell::RefCell;
use std::rc::Rc;

use rg_planner::{optimize, CostParams, PlanError, Planned};
use rg_sqldelta::{build_logical, parse, BindError, ParseError};
use rg_store::{StoreError, Table};

pub use chunk::{Chunk, DEFAULT_CHUNK_SIZE};
pub use db::Database;

#[derive(Debug, thiserror::Error)]
pub enum ExecError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Bind(#[from] BindError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("type error: {0}")]
    Type(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error(transparent)]
    Er(#[from] rg_er::ErError),
    #[error("storage: {0}")]
    Store(#[from] StoreError),
}

pub type Result<T> = std::result::Result<T, ExecError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExecOptions {
    pub chunk_size: usize,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions { chunk_size: DEFAULT_CHUNK_SIZE }
    }
}

/// Counters gathered while executing one plan.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExecStats {
    /// Hash tables built by exploration operators (cache misses).
    pub explore_builds: usize,
    /// Hash-exploration lookups answered from the cache.
    pub explore_hits: usize,
    pub hash_join_builds: usize,
    pub chunks: usize,
    pub max_chunk_rows: usize,
}

pub fn execute(p: &Planned, db: &Database, opts: &ExecOptions) -> Result<Table> {
    Ok(execute_with_stats(p, db, opts)?.0)
}

pub fn execute_with_stats(p: &Planned, db: &Database, opts: &ExecOptions) -> Result<(Table, ExecStats)> {
    if opts.chunk_size == 0 {
        return Err(ExecError::Type("chunk size must be positive".into()));
    }
    let stats = Rc::new(RefCell::new(ExecStats::default()));
    let t = ops::run(p, db, opts.chunk_size, &stats)?;
    let s = stats.borrow().clone();
    Ok((t, s))
}

/// Parse, bind and optimize a query against the database.
pub fn plan_sql(db: &Database, sql: &str, params: &CostParams) -> Result<Planned> {
    let q = build_logical(&parse(sql)?, db)?;
    Ok(optimize(&q, &db.planner_stats(), params)?)
}

/// Parse, optimize and execute.
pub fn run_sql(db: &Database, sql: &str, params: &CostParams, opts: &ExecOptions) -> Result<Table> {
    execute(&plan_sql(db, sql, params)?, db, opts)
}
