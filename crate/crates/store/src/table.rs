use std::fmt::Write as _;

use crate::value::PlainValue;

/// A materialized relation of plain values: query results, δ-join inputs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<PlainValue>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows sorted, for bag comparison.
    pub fn sorted_rows(&self) -> Vec<Vec<PlainValue>> {
        let mut r = self.rows.clone();
        r.sort();
        r
    }

    /// Bag equality over rows; column names must match too.
    pub fn bag_eq(&self, other: &Table) -> bool {
        self.columns == other.columns && self.sorted_rows() == other.sorted_rows()
    }

    pub fn to_delimited(&self, sep: char) -> String {
        let mut out = String::new();
        let quote = |s: &str| -> String {
            if s.contains(sep) || s.contains('"') || s.contains('\n') {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        };
        let head: Vec<String> = self.columns.iter().map(|c| quote(c)).collect();
        out.push_str(&head.join(&sep.to_string()));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| quote(&v.to_string())).collect();
            out.push_str(&cells.join(&sep.to_string()));
            out.push('\n');
        }
        out
    }

    pub fn to_pretty(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for r in &cells {
            for (i, c) in r.iter().enumerate() {
                widths[i] = widths[i].max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, vals: &[String]| {
            for (i, v) in vals.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                let _ = write!(out, "{:<w$}", v, w = widths[i]);
            }
            out.push('\n');
        };
        line(&mut out, &self.columns);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&rule.join("-+-"));
        out.push('\n');
        for r in &cells {
            line(&mut out, r);
        }
        let _ = writeln!(out, "({} rows)", self.rows.len());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting() {
        let mut t = Table::new(vec!["a".into(), "b".into()]);
        t.rows.push(vec![PlainValue::Int(1), PlainValue::Str("x,y".into())]);
        assert_eq!(t.to_delimited(','), "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn bag_equality_ignores_order() {
        let mut a = Table::new(vec!["x".into()]);
        a.rows = vec![vec![PlainValue::Int(2)], vec![PlainValue::Int(1)], vec![PlainValue::Int(1)]];
        let mut b = a.clone();
        b.rows.reverse();
        assert!(a.bag_eq(&b));
        b.rows.pop();
        assert!(!a.bag_eq(&b));
    }
}
