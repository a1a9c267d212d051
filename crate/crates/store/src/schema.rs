use crate::value::RelId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColumnType {
    Int,
    Float,
    Bool,
    /// Fixed-width handle into the owning relation's string heap.
    Str,
    /// Dictionary-encoded label.
    Label,
    /// Reference into the named relation.
    Ref(RelId),
}

impl ColumnType {
    pub fn width(self) -> usize {
        match self {
            ColumnType::Int | ColumnType::Float | ColumnType::Str => 8,
            ColumnType::Bool => 1,
            ColumnType::Label => 4,
            ColumnType::Ref(_) => 16,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            ColumnType::Int => 0,
            ColumnType::Float => 1,
            ColumnType::Bool => 2,
            ColumnType::Str => 3,
            ColumnType::Label => 4,
            ColumnType::Ref(_) => 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub ty: ColumnType,
}

impl Column {
    pub fn new(name: impl Into<String>, ty: ColumnType) -> Self {
        Column { name: name.into(), ty }
    }
}

/// Column list plus the fixed-width row layout derived from it: a validity
/// bitmap padded to 4 bytes, then the cells in declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    pub columns: Vec<Column>,
    offsets: Vec<usize>,
    validity_bytes: usize,
    row_width: usize,
}

impl Schema {
    pub fn new(columns: Vec<Column>) -> Self {
        let validity_bytes = columns.len().div_ceil(32).max(1) * 4;
        let mut offsets = Vec::with_capacity(columns.len());
        let mut at = validity_bytes;
        for c in &columns {
            offsets.push(at);
            at += c.ty.width();
        }
        Schema { columns, offsets, validity_bytes, row_width: at }
    }

    pub fn row_width(&self) -> usize {
        self.row_width
    }

    pub fn validity_bytes(&self) -> usize {
        self.validity_bytes
    }

    pub fn offset(&self, col: usize) -> usize {
        self.offsets[col]
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }
}
