//! Entity resolution as a black box for the δ-join: a matcher takes two
//! materialized relations and returns the matched row pairs.

use std::collections::{BTreeSet, HashMap};

use rg_store::{PlainValue, Table};

pub mod fixture;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ErError {
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, ErError>;

/// A column of one input, by name or position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Col {
    Name(String),
    Index(usize),
}

impl From<&str> for Col {
    fn from(s: &str) -> Col {
        Col::Name(s.to_string())
    }
}

impl From<usize> for Col {
    fn from(i: usize) -> Col {
        Col::Index(i)
    }
}

impl Col {
    fn resolve(&self, t: &Table) -> Result<usize> {
        match self {
            Col::Name(n) => t.column_index(n).ok_or_else(|| ErError::Config(format!("no column `{n}`"))),
            Col::Index(i) if *i < t.columns.len() => Ok(*i),
            Col::Index(i) => Err(ErError::Config(format!("column {i} out of range"))),
        }
    }
}

/// Deterministic and pure: the same inputs give the same pairs, sorted.
pub trait ErMatcher {
    fn matches(&self, left: &Table, right: &Table) -> Result<Vec<(usize, usize)>>;
}

/// Pairs rows whose keys are equal (nulls never match).
#[derive(Clone, Debug)]
pub struct ExactIdMatcher {
    pub key_l: Col,
    pub key_r: Col,
}

pub fn exact_id_matcher(key_l: impl Into<Col>, key_r: impl Into<Col>) -> ExactIdMatcher {
    ExactIdMatcher { key_l: key_l.into(), key_r: key_r.into() }
}

impl ErMatcher for ExactIdMatcher {
    fn matches(&self, left: &Table, right: &Table) -> Result<Vec<(usize, usize)>> {
        let (kl, kr) = (self.key_l.resolve(left)?, self.key_r.resolve(right)?);
        let mut index: HashMap<&PlainValue, Vec<usize>> = HashMap::new();
        for (j, row) in right.rows.iter().enumerate() {
            if !row[kr].is_null() {
                index.entry(&row[kr]).or_default().push(j);
            }
        }
        let mut out = Vec::new();
        for (i, row) in left.rows.iter().enumerate() {
            if let Some(js) = index.get(&row[kl]) {
                out.extend(js.iter().map(|&j| (i, j)));
            }
        }
        Ok(out)
    }
}

/// Lowercase, drop punctuation, collapse whitespace.
pub fn normalize(s: &str) -> String {
    let kept: String = s.chars().filter(|c| !c.is_ascii_punctuation()).flat_map(char::to_lowercase).collect();
    kept.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn tokens(s: &str) -> BTreeSet<String> {
    normalize(s).split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect()
}

/// |a ∩ b| / |a ∪ b|; two empty sets score 0.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Pairs rows whose normalized token sets have Jaccard similarity at or
/// above the threshold.
#[derive(Clone, Debug)]
pub struct FuzzyStringMatcher {
    pub col_l: Col,
    pub col_r: Col,
    pub threshold: f64,
}

pub const DEFAULT_THRESHOLD: f64 = 0.8;

pub fn fuzzy_string_matcher(col_l: impl Into<Col>, col_r: impl Into<Col>, threshold: f64) -> FuzzyStringMatcher {
    FuzzyStringMatcher { col_l: col_l.into(), col_r: col_r.into(), threshold }
}

fn token_column(t: &Table, c: usize) -> Result<Vec<Option<BTreeSet<String>>>> {
    t.rows
        .iter()
        .map(|r| match &r[c] {
            PlainValue::Str(s) => Ok(Some(tokens(s))),
            PlainValue::Null => Ok(None),
            other => Err(ErError::Config(format!("fuzzy matching needs strings, got {other}"))),
        })
        .collect()
}

impl ErMatcher for FuzzyStringMatcher {
    fn matches(&self, left: &Table, right: &Table) -> Result<Vec<(usize, usize)>> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(ErError::Config(format!("threshold {} outside [0, 1]", self.threshold)));
        }
        let l = token_column(left, self.col_l.resolve(left)?)?;
        let r = token_column(right, self.col_r.resolve(right)?)?;
        let mut out = Vec::new();
        for (i, a) in l.iter().enumerate() {
            let Some(a) = a else { continue };
            for (j, b) in r.iter().enumerate() {
                if let Some(b) = b {
                    if jaccard(a, b) >= self.threshold {
                        out.push((i, j));
                    }
                }
            }
        }
        Ok(out)
    }
}
