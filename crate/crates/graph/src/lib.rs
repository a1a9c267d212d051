//! Property graphs and their relational encoding: a vertex relation whose
//! `out_L`/`in_L` cells reference per-vertex edge fragments, edge relations
//! whose endpoint cells reference singleton vertex views, and one attribute
//! relation per label.

mod canonical;
mod delta;
mod error;
pub mod gen;
pub mod io;
mod labels;
mod model;
mod rg;
mod stats;

pub use canonical::canonical_dump;
pub use delta::DeltaReport;
pub use error::{GraphError, Result};
pub use labels::LabelDict;
pub use model::{Attrs, Edge, GraphDelta, PropertyGraph, Vertex};
pub use rg::{
    AttrRel, ConvertOptions, Ontology, RgGraphStore, DV_IN, DV_LABEL, DV_OUT, DV_VID, D_IN, D_OUT, D_V, E_END, E_EID, E_LABEL,
};
pub use stats::{DegreeStats, GraphStats, RelStats, TableStats};
