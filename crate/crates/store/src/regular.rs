use std::collections::{BTreeMap, BTreeSet};

use crate::schema::ColumnType;
use crate::store::{FragmentId, Store};
use crate::value::{RefValue, RelId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Two references into one relation whose tuple sets overlap without
    /// being equal.
    Overlap { relation: RelId, a: RefValue, b: RefValue },
    /// A reference column whose references land in more than one relation
    /// (or in a relation other than the declared one).
    MixedTargets { relation: RelId, column: String, targets: Vec<RelId> },
    /// A stored reference that does not resolve.
    Unresolvable { relation: RelId, column: String, r: RefValue },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RegularReport {
    pub violations: Vec<Violation>,
}

impl RegularReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scan every reference column of the store and report regular-form
/// violations.
pub fn validate_regular_form(store: &Store) -> RegularReport {
    let mut report = RegularReport::default();
    // storage fragment -> distinct (start, len) ranges with one witness ref each
    let mut ranges: BTreeMap<FragmentId, BTreeMap<(u32, u32), RefValue>> = BTreeMap::new();
    for (rid, rel) in store.relations() {
        for (ci, col) in rel.schema.columns.iter().enumerate() {
            let ColumnType::Ref(declared) = col.ty else { continue };
            let mut targets = BTreeSet::new();
            for loc in store.scan(rid) {
                let Some(r) = store.read_ref(loc, ci) else { continue };
                let view = match store.resolve(&r) {
                    Ok(v) => v,
                    Err(_) => {
                        report.violations.push(Violation::Unresolvable { relation: rid, column: col.name.clone(), r });
                        continue;
                    }
                };
                if view.is_empty() {
                    continue;
                }
                targets.insert(store.owner(view.frag));
                ranges.entry(view.frag).or_default().entry((view.start, view.len)).or_insert(r);
            }
            if targets.len() > 1 || targets.iter().any(|t| *t != declared) {
                report.violations.push(Violation::MixedTargets {
                    relation: rid,
                    column: col.name.clone(),
                    targets: targets.into_iter().collect(),
                });
            }
        }
    }
    for (frag, set) in ranges {
        let list: Vec<((u32, u32), RefValue)> = set.into_iter().collect();
        for i in 0..list.len() {
            let ((s, l), a) = list[i];
            for &((s2, _), b) in &list[i + 1..] {
                if s2 >= s + l {
                    break;
                }
                report.violations.push(Violation::Overlap { relation: store.owner(frag), a, b });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::StoreConfig;
    use crate::schema::Column;
    use crate::value::{Cell, RefMode};

    fn base() -> (Store, RelId, RelId, crate::store::FragmentId) {
        let mut s = Store::new(StoreConfig::default()).unwrap();
        let v = s.create_relation("V", vec![Column::new("vid", ColumnType::Int)]).unwrap();
        let p = s
            .create_relation("P", vec![Column::new("p", ColumnType::Ref(v))])
            .unwrap();
        let rows: Vec<Vec<Cell>> = (0..4).map(|i| vec![Cell::from(i)]).collect();
        let f = s.insert_fragment(v, &rows).unwrap();
        (s, v, p, f)
    }

    #[test]
    fn disjoint_views_are_regular() {
        let (mut s, _, p, f) = base();
        let a = s.create_view(f, 0, 2).unwrap();
        let b = s.create_view(f, 2, 2).unwrap();
        let ra = s.make_ref(a, RefMode::Indirect).unwrap();
        let rb = s.make_ref(b, RefMode::Indirect).unwrap();
        s.insert_fragment(p, &[vec![Cell::Ref(ra)], vec![Cell::Ref(rb)], vec![Cell::Ref(ra)]]).unwrap();
        assert!(validate_regular_form(&s).ok());
    }

    #[test]
    fn overlapping_views_are_reported() {
        let (mut s, _, p, f) = base();
        let a = s.create_view(f, 0, 3).unwrap();
        let b = s.create_view(f, 2, 2).unwrap();
        let ra = s.make_ref(a, RefMode::Indirect).unwrap();
        let rb = s.make_ref(b, RefMode::Indirect).unwrap();
        s.insert_fragment(p, &[vec![Cell::Ref(ra)], vec![Cell::Ref(rb)]]).unwrap();
        let rep = validate_regular_form(&s);
        assert_eq!(rep.violations.len(), 1);
        assert!(matches!(rep.violations[0], Violation::Overlap { .. }));
    }

    #[test]
    fn mixed_column_is_reported_once() {
        let (mut s, v, p, f) = base();
        let w = s.create_relation("W", vec![Column::new("vid", ColumnType::Int)]).unwrap();
        let g = s.insert_fragment(w, &[vec![Cell::from(9)]]).unwrap();
        let ok = s.make_ref(f, RefMode::Indirect).unwrap();
        let mut forged = s.make_ref(g, RefMode::Indirect).unwrap();
        forged.target = v;
        s.insert_fragment(p, &[vec![Cell::Ref(ok)], vec![Cell::Ref(forged)]]).unwrap();
        let rep = validate_regular_form(&s);
        assert_eq!(rep.violations.len(), 1);
        assert!(matches!(rep.violations[0], Violation::MixedTargets { .. }));
    }
}
