use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rg_store::{ColumnType, PlainValue, RelId, Store, Table};

use crate::rg::{RgGraphStore, DV_LABEL, E_LABEL};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RelStats {
    pub card: usize,
    /// Tuples per label, for relations with a label column.
    pub labels: BTreeMap<String, usize>,
    /// Distinct non-null values per plain column.
    pub distinct: BTreeMap<String, usize>,
}

/// Out-degree of a reference column: how many tuples a cell resolves to.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DegreeStats {
    /// Cells resolving to a non-empty fragment.
    pub linked: usize,
    pub mean: f64,
    /// Mean over the rows carrying each label.
    pub by_label: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GraphStats {
    pub relations: BTreeMap<String, RelStats>,
    /// Keyed by `relation.column`.
    pub degrees: BTreeMap<String, DegreeStats>,
}

fn distinct_counts(store: &Store, rel: RelId) -> BTreeMap<String, usize> {
    let schema = store.schema(rel);
    let mut out = BTreeMap::new();
    for (c, col) in schema.columns.iter().enumerate() {
        if matches!(col.ty, ColumnType::Ref(_) | ColumnType::Label) {
            continue;
        }
        let set: HashSet<PlainValue> = store.scan(rel).map(|l| store.read_plain(l, c)).filter(|v| !v.is_null()).collect();
        out.insert(col.name.clone(), set.len());
    }
    out
}

impl GraphStats {
    pub fn collect(g: &RgGraphStore) -> GraphStats {
        let store = &g.store;
        let mut stats = GraphStats::default();
        for (rel, r) in store.relations() {
            let mut rs = RelStats { card: store.tuple_count(rel), distinct: distinct_counts(store, rel), ..Default::default() };
            let label_col = if rel == g.d_v { Some(DV_LABEL) } else if rel == g.d_out || rel == g.d_in { Some(E_LABEL) } else { None };
            if let Some(lc) = label_col {
                for loc in store.scan(rel) {
                    let l = store.read_u32(loc, lc).unwrap();
                    *rs.labels.entry(g.labels.name(l).to_string()).or_default() += 1;
                }
            }
            for (c, col) in r.schema.columns.iter().enumerate() {
                if !matches!(col.ty, ColumnType::Ref(_)) {
                    continue;
                }
                let mut total = 0usize;
                let mut linked = 0usize;
                let mut per: BTreeMap<String, (usize, usize)> = BTreeMap::new();
                for loc in store.scan(rel) {
                    let n = store.read_ref(loc, c).and_then(|r| store.resolve(&r).ok()).map_or(0, |v| v.len());
                    total += n;
                    linked += (n > 0) as usize;
                    if let Some(lc) = label_col {
                        let l = store.read_u32(loc, lc).unwrap();
                        let e = per.entry(g.labels.name(l).to_string()).or_default();
                        e.0 += n;
                        e.1 += 1;
                    }
                }
                let mean = if rs.card == 0 { 0.0 } else { total as f64 / rs.card as f64 };
                let by_label = per.into_iter().map(|(k, (n, rows))| (k, n as f64 / rows as f64)).collect();
                stats.degrees.insert(format!("{}.{}", r.name, col.name), DegreeStats { linked, mean, by_label });
            }
            stats.relations.insert(r.name.clone(), rs);
        }
        stats
    }

    pub fn card(&self, rel: &str) -> usize {
        self.relations.get(rel).map_or(0, |r| r.card)
    }

    pub fn label_count(&self, rel: &str, label: &str) -> usize {
        self.relations.get(rel).and_then(|r| r.labels.get(label).copied()).unwrap_or(0)
    }

    /// Mean degree of `rel.col`, restricted to rows labeled `label` when given.
    pub fn degree(&self, rel: &str, col: &str, label: Option<&str>) -> f64 {
        let Some(d) = self.degrees.get(&format!("{rel}.{col}")) else { return 0.0 };
        match label {
            Some(l) => d.by_label.get(l).copied().unwrap_or(0.0),
            None => d.mean,
        }
    }
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, r) in &self.relations {
            writeln!(f, "{name}: card={}", r.card)?;
            for (l, n) in &r.labels {
                writeln!(f, "  label {l}: {n}")?;
            }
            for (c, n) in &r.distinct {
                writeln!(f, "  distinct {c}: {n}")?;
            }
        }
        for (k, d) in &self.degrees {
            writeln!(f, "{k}: linked={} mean_degree={:.3}", d.linked, d.mean)?;
            for (l, m) in &d.by_label {
                writeln!(f, "  label {l}: {m:.3}")?;
            }
        }
        Ok(())
    }
}

/// Statistics of a plain table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TableStats {
    pub card: usize,
    pub distinct: BTreeMap<String, usize>,
}

impl TableStats {
    pub fn collect(t: &Table) -> TableStats {
        let mut distinct = BTreeMap::new();
        for (c, name) in t.columns.iter().enumerate() {
            let set: HashSet<&PlainValue> = t.rows.iter().map(|r| &r[c]).filter(|v| !v.is_null()).collect();
            distinct.insert(name.clone(), set.len());
        }
        TableStats { card: t.len(), distinct }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Attrs, Edge, PropertyGraph, Vertex};
    use rg_store::StoreConfig;

    #[test]
    fn degrees_and_histograms() {
        let vertices = (1..=3).map(|vid| Vertex { vid, label: if vid == 3 { "B" } else { "A" }.into(), attrs: Attrs::new() }).collect();
        let edges = vec![
            Edge { eid: 1, src: 1, dst: 2, label: "T".into(), attrs: Attrs::new() },
            Edge { eid: 2, src: 1, dst: 3, label: "T".into(), attrs: Attrs::new() },
            Edge { eid: 3, src: 2, dst: 3, label: "U".into(), attrs: Attrs::new() },
        ];
        let g = RgGraphStore::convert(&PropertyGraph { vertices, edges }, StoreConfig::default()).unwrap();
        let s = GraphStats::collect(&g);
        assert_eq!(s.card("D_V"), 3);
        assert_eq!(s.label_count("D_out", "T"), 2);
        assert!((s.degree("D_V", "out_L", None) - 1.0).abs() < 1e-12);
        assert!((s.degree("D_V", "out_L", Some("A")) - 1.5).abs() < 1e-12);
        assert!((s.degree("D_V", "in_L", Some("B")) - 2.0).abs() < 1e-12);
        assert_eq!(s.degrees["D_V.out_L"].linked, 2);
        assert!((s.degree("D_out", "dst_L", None) - 1.0).abs() < 1e-12);
    }
}
