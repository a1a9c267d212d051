//! Extended relations whose cells hold plain values or logical references,
//! stored in one address space of fixed-size blocks and smaller segments.
//!
//! A fragment is the tuple subset a reference resolves to. Fragments below
//! the segment threshold live in a contiguous segment; larger ones are a
//! chain of blocks, so appending to them never copies existing rows.

mod arena;
mod config;
mod error;
mod regular;
mod schema;
pub mod snapshot;
mod store;
mod table;
mod value;

pub use config::{FragmentPolicy, StoreConfig};
pub use error::{Result, StoreError};
pub use regular::{validate_regular_form, RegularReport, Violation};
pub use schema::{Column, ColumnType, Schema};
pub use store::{AppendReport, ExtendedRelation, FragView, Fragment, FragmentId, Handle, RowLoc, Store};
pub use table::Table;
pub use value::{Cell, PlainValue, RefForm, RefMode, RefValue, RelId};
