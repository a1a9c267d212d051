use std::collections::BTreeMap;

use rg_store::{Cell, ColumnType, RowLoc};

use crate::rg::RgGraphStore;

/// Order-insensitive content of every relation: references are replaced by
/// the keys of the tuples they resolve to, labels by their names, and attr
/// rows keep only their non-null fields. Two stores holding the same graph
/// produce equal dumps regardless of physical layout.
pub fn canonical_dump(s: &RgGraphStore) -> BTreeMap<String, Vec<String>> {
    let store = &s.store;
    let mut out = BTreeMap::new();
    for (rel, r) in store.relations() {
        if store.tuple_count(rel) == 0 && rel != s.d_v && rel != s.d_out && rel != s.d_in {
            continue;
        }
        let mut rows: Vec<String> = store
            .scan(rel)
            .map(|loc| {
                let mut fields = Vec::new();
                for (c, col) in r.schema.columns.iter().enumerate() {
                    let text = match (col.ty, store.read_cell(loc, c)) {
                        (_, Cell::Plain(v)) if v.is_null() => continue,
                        (ColumnType::Label, Cell::Plain(v)) => s.labels.name(v.as_i64().unwrap() as u32).to_string(),
                        (ColumnType::Ref(_), Cell::Ref(rv)) => {
                            let view = store.resolve(&rv).expect("dangling reference");
                            let mut keys: Vec<i64> = view.iter().map(|l: RowLoc| store.read_i64(l, 0).unwrap()).collect();
                            keys.sort();
                            format!("{keys:?}")
                        }
                        (_, Cell::Plain(v)) => format!("{v:?}"),
                        (_, Cell::Ref(_)) => unreachable!(),
                    };
                    fields.push(format!("{}={}", col.name, text));
                }
                fields.join(" ")
            })
            .collect();
        rows.sort();
        out.insert(r.name.clone(), rows);
    }
    out
}
