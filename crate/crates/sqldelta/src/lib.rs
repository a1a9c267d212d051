//! SQL with graph pattern subqueries (`match`) and entity-resolution joins
//! (`map`): parsing, printing and translation into logical plans.

pub mod ast;
mod error;
mod lexer;
pub mod logical;
mod parser;

pub use ast::{CmpOp, Select};
pub use error::{BindError, ParseError};
pub use logical::{
    build_logical, BoolExpr, BoundMatcher, BoundQuery, Catalog, ColumnRef, DeltaSpec,
    ExplorativeCond, Leaf, LeafKind, LogicalPlan, MatcherKind, PatternEdgeInfo, PatternInfo,
    PatternVertexInfo, RefAttr, Scalar, END_VID,
};
pub use parser::parse;
