use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

/// A value from the plain domain. Floats compare by total order so that
/// values can be sorted and hashed when results are compared as bags.
#[derive(Clone, Debug)]
pub enum PlainValue {
    Null,
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
}

impl PlainValue {
    fn rank(&self) -> u8 {
        match self {
            PlainValue::Null => 0,
            PlainValue::Bool(_) => 1,
            PlainValue::Int(_) => 2,
            PlainValue::Float(_) => 3,
            PlainValue::Str(_) => 4,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, PlainValue::Null)
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            PlainValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            PlainValue::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Comparison used by predicates: numbers compare across int/float,
    /// anything involving null is unknown.
    pub fn sql_cmp(&self, other: &PlainValue) -> Option<Ordering> {
        use PlainValue::*;
        match (self, other) {
            (Null, _) | (_, Null) => None,
            (Int(a), Int(b)) => Some(a.cmp(b)),
            (Int(a), Float(b)) => (*a as f64).partial_cmp(b),
            (Float(a), Int(b)) => a.partial_cmp(&(*b as f64)),
            (Float(a), Float(b)) => a.partial_cmp(b),
            (Str(a), Str(b)) => Some(a.cmp(b)),
            (Bool(a), Bool(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }

    /// Parse a textual cell: integers, floats, booleans, empty as null,
    /// everything else as a string.
    pub fn infer(text: &str) -> PlainValue {
        let t = text.trim();
        if t.is_empty() {
            return PlainValue::Null;
        }
        if let Ok(v) = t.parse::<i64>() {
            return PlainValue::Int(v);
        }
        if let Ok(v) = t.parse::<f64>() {
            if t.contains(['.', 'e', 'E']) {
                return PlainValue::Float(v);
            }
        }
        match t {
            "true" => PlainValue::Bool(true),
            "false" => PlainValue::Bool(false),
            _ => PlainValue::Str(text.to_string()),
        }
    }
}

impl PartialEq for PlainValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for PlainValue {}

impl PartialOrd for PlainValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PlainValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use PlainValue::*;
        match (self, other) {
            (Null, Null) => Ordering::Equal,
            (Bool(a), Bool(b)) => a.cmp(b),
            (Int(a), Int(b)) => a.cmp(b),
            (Float(a), Float(b)) => a.total_cmp(b),
            (Str(a), Str(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for PlainValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            PlainValue::Null => {}
            PlainValue::Int(v) => v.hash(state),
            PlainValue::Float(v) => v.to_bits().hash(state),
            PlainValue::Str(s) => s.hash(state),
            PlainValue::Bool(b) => b.hash(state),
        }
    }
}

impl fmt::Display for PlainValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlainValue::Null => Ok(()),
            PlainValue::Int(v) => write!(f, "{v}"),
            PlainValue::Float(v) => write!(f, "{v}"),
            PlainValue::Str(s) => f.write_str(s),
            PlainValue::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Index of a relation inside a [`crate::Store`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelId(pub u32);

impl RelId {
    /// Target recorded on references to the shared empty fragment.
    pub const ANY: RelId = RelId(u32::MAX);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RefForm {
    /// Byte address in the unified address space.
    Direct { location: u64 },
    /// Entry in the segment table plus a byte offset from its base.
    Indirect { segment_id: u64, offset: u64 },
}

/// A logical reference. It never equals a plain value; two references are
/// equal when they name the same referent through the same form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RefValue {
    pub form: RefForm,
    pub target: RelId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefMode {
    Direct,
    Indirect,
}

/// One stored cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Plain(PlainValue),
    Ref(RefValue),
}

impl Cell {
    pub fn as_ref_value(&self) -> Option<RefValue> {
        match self {
            Cell::Ref(r) => Some(*r),
            Cell::Plain(_) => None,
        }
    }

    pub fn as_plain(&self) -> Option<&PlainValue> {
        match self {
            Cell::Plain(v) => Some(v),
            Cell::Ref(_) => None,
        }
    }
}

impl From<PlainValue> for Cell {
    fn from(v: PlainValue) -> Self {
        Cell::Plain(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Plain(PlainValue::Int(v))
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Plain(PlainValue::Str(v.to_string()))
    }
}

impl From<RefValue> for Cell {
    fn from(r: RefValue) -> Self {
        Cell::Ref(r)
    }
}
