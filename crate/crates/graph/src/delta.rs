use std::collections::{BTreeMap, HashMap, HashSet};

use rg_store::{Cell, ColumnType, FragmentId, PlainValue, RefMode, RowLoc};

use crate::error::{GraphError, Result};
use crate::model::{Attrs, Edge, GraphDelta};
use crate::rg::{to_cell, AttrRel, EdgeSlot, RgGraphStore, VertexSlot, DV_IN, DV_OUT, DV_VID, E_EID};

/// What an update did to physical storage.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeltaReport {
    pub moved_bytes: u64,
    pub new_fragments: usize,
    pub promotions: usize,
}

fn compatible(ty: ColumnType, v: &PlainValue) -> bool {
    matches!(
        (ty, v),
        (_, PlainValue::Null)
            | (ColumnType::Int, PlainValue::Int(_))
            | (ColumnType::Float, PlainValue::Float(_) | PlainValue::Int(_))
            | (ColumnType::Bool, PlainValue::Bool(_))
            | (ColumnType::Str, PlainValue::Str(_))
    )
}

impl RgGraphStore {
    fn check_attrs(&self, ar: Option<&AttrRel>, what: &str, attrs: &Attrs) -> Result<()> {
        let Some(ar) = ar else { return Ok(()) };
        let schema = self.store.schema(ar.rel);
        for (k, v) in attrs {
            let col = ar.col(k).ok_or_else(|| GraphError::Delta(format!("{what}: attribute `{k}` is not in the label's schema")))?;
            if !compatible(schema.columns[col].ty, v) {
                return Err(GraphError::Delta(format!("{what}: value {v} does not fit attribute `{k}`")));
            }
        }
        Ok(())
    }

    fn validate_delta(&self, d: &GraphDelta) -> Result<()> {
        if self.opts.ref_mode == RefMode::Direct {
            return Err(GraphError::Delta("stores converted with direct references are read-only".into()));
        }
        let del_e: HashSet<i64> = d.del_edges.iter().copied().collect();
        if del_e.len() != d.del_edges.len() {
            return Err(GraphError::Delta("edge deleted twice".into()));
        }
        for eid in &d.del_edges {
            if !self.edges.contains_key(eid) {
                return Err(GraphError::Delta(format!("no edge {eid} to delete")));
            }
        }
        let del_v: HashSet<i64> = d.del_vertices.iter().copied().collect();
        if del_v.len() != d.del_vertices.len() {
            return Err(GraphError::Delta("vertex deleted twice".into()));
        }
        for vid in &d.del_vertices {
            if !self.vertices.contains_key(vid) {
                return Err(GraphError::Delta(format!("no vertex {vid} to delete")));
            }
        }
        for (eid, e) in &self.edges {
            if !del_e.contains(eid) && (del_v.contains(&e.src) || del_v.contains(&e.dst)) {
                return Err(GraphError::Delta(format!("edge {eid} still uses a deleted vertex")));
            }
        }
        let mut added_v = HashMap::new();
        for v in &d.add_vertices {
            let live = self.vertices.contains_key(&v.vid) && !del_v.contains(&v.vid);
            if live || added_v.insert(v.vid, v).is_some() {
                return Err(GraphError::Delta(format!("vertex {} already exists", v.vid)));
            }
            let ar = self.labels.code(&v.label).and_then(|l| self.v_attrs.get(&l));
            self.check_attrs(ar, &format!("vertex {}", v.vid), &v.attrs)?;
        }
        let exists = |vid: i64| added_v.contains_key(&vid) || (self.vertices.contains_key(&vid) && !del_v.contains(&vid));
        let mut added_e = HashSet::new();
        for e in &d.add_edges {
            if !exists(e.src) || !exists(e.dst) {
                return Err(GraphError::Delta(format!("edge {} has a dangling endpoint", e.eid)));
            }
            let live = self.edges.contains_key(&e.eid) && !del_e.contains(&e.eid);
            if live || !added_e.insert(e.eid) {
                return Err(GraphError::Delta(format!("edge {} already exists", e.eid)));
            }
            let ar = self.labels.code(&e.label).and_then(|l| self.e_attrs.get(&l));
            self.check_attrs(ar, &format!("edge {}", e.eid), &e.attrs)?;
        }
        // attributes of brand-new labels must agree among themselves
        let mut fresh: HashMap<(bool, &str, &str), ColumnType> = HashMap::new();
        let vs = d.add_vertices.iter().map(|v| (true, v.label.as_str(), &v.attrs));
        let es = d.add_edges.iter().map(|e| (false, e.label.as_str(), &e.attrs));
        for (is_v, label, attrs) in vs.chain(es) {
            let known = self.labels.code(label).is_some_and(|l| if is_v { self.v_attrs.contains_key(&l) } else { self.e_attrs.contains_key(&l) });
            if known {
                continue;
            }
            for (k, v) in attrs {
                let ty = crate::rg::infer_type(std::iter::once(v));
                if v.is_null() {
                    continue;
                }
                if let Some(prev) = fresh.insert((is_v, label, k), ty) {
                    if prev != ty {
                        return Err(GraphError::Delta(format!("attribute `{k}` of new label `{label}` mixes value types")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Swap-remove `loc`; returns the key (column 0) of the row that took
    /// its place, if one did.
    fn remove_keyed(&mut self, loc: RowLoc) -> Result<Option<i64>> {
        Ok(match self.store.remove_row(loc)? {
            Some(_) => Some(self.store.read_i64(loc, 0).unwrap()),
            None => None,
        })
    }

    /// Apply a batch update in place. Validation happens up front, so a
    /// rejected delta leaves the store untouched.
    pub fn apply_delta(&mut self, d: &GraphDelta) -> Result<DeltaReport> {
        self.validate_delta(d)?;
        let before = self.store.bytes_moved();
        let mut report = DeltaReport::default();

        for eid in &d.del_edges {
            let slot = self.edges.remove(eid).unwrap();
            if let Some(moved) = self.remove_keyed(slot.out)? {
                self.edges.get_mut(&moved).unwrap().out = slot.out;
            }
            if let Some(moved) = self.remove_keyed(slot.inn)? {
                self.edges.get_mut(&moved).unwrap().inn = slot.inn;
            }
            if let Some(moved) = self.remove_keyed(slot.attr)? {
                self.edges.get_mut(&moved).unwrap().attr = slot.attr;
            }
        }

        for vid in &d.del_vertices {
            let slot = self.vertices.remove(vid).unwrap();
            self.store.drop_fragment(slot.out)?;
            self.store.drop_fragment(slot.inn)?;
            self.store.drop_fragment(slot.view)?;
            let loc = RowLoc { frag: self.dv_frag, row: slot.row };
            if self.store.remove_row(loc)?.is_some() {
                let moved = self.store.read_i64(loc, DV_VID).unwrap();
                let m = self.vertices.get_mut(&moved).unwrap();
                m.row = slot.row;
                self.store.move_view(m.view, slot.row)?;
            }
            if let Some(moved) = self.remove_keyed(slot.attr)? {
                self.vertices.get_mut(&moved).unwrap().attr = slot.attr;
            }
        }

        if !d.add_vertices.is_empty() {
            let empty = self.store.make_ref(FragmentId::EMPTY, RefMode::Indirect)?;
            let mut by_label: BTreeMap<u32, Vec<(i64, &Attrs)>> = BTreeMap::new();
            for v in &d.add_vertices {
                let label = self.labels.intern(&v.label);
                let row = vec![Cell::from(v.vid), Cell::from(label as i64), Cell::Ref(empty), Cell::Ref(empty)];
                let at = self.store.tuple_count(self.d_v) as u32;
                let r = self.store.append_to_fragment(self.dv_frag, &[row])?;
                report.promotions += r.promoted as usize;
                let view = self.store.create_view(self.dv_frag, at, 1)?;
                let attr = RowLoc { frag: FragmentId::EMPTY, row: 0 };
                self.vertices.insert(v.vid, VertexSlot { row: at, view, out: FragmentId::EMPTY, inn: FragmentId::EMPTY, label, attr });
                by_label.entry(label).or_default().push((v.vid, &v.attrs));
            }
            for (label, items) in by_label {
                for (vid, loc) in self.append_attrs(true, label, &items)? {
                    self.vertices.get_mut(&vid).unwrap().attr = loc;
                }
            }
        }

        if !d.add_edges.is_empty() {
            let mut sorted: Vec<&Edge> = d.add_edges.iter().collect();
            sorted.sort_by_key(|e| (e.src, e.eid));
            let mut by_label: BTreeMap<u32, Vec<(i64, &Attrs)>> = BTreeMap::new();
            for e in &sorted {
                let label = self.labels.intern(&e.label);
                let dummy = RowLoc { frag: FragmentId::EMPTY, row: 0 };
                self.edges.insert(e.eid, EdgeSlot { src: e.src, dst: e.dst, label, out: dummy, inn: dummy, attr: dummy });
                by_label.entry(label).or_default().push((e.eid, &e.attrs));
            }
            let mut outs: BTreeMap<i64, Vec<&Edge>> = BTreeMap::new();
            let mut ins: BTreeMap<i64, Vec<&Edge>> = BTreeMap::new();
            for e in &sorted {
                outs.entry(e.src).or_default().push(e);
                ins.entry(e.dst).or_default().push(e);
            }
            for (vid, list) in outs {
                self.add_incident(vid, true, &list, &mut report)?;
            }
            for (vid, list) in ins {
                self.add_incident(vid, false, &list, &mut report)?;
            }
            for (label, items) in by_label {
                for (eid, loc) in self.append_attrs(false, label, &items)? {
                    self.edges.get_mut(&eid).unwrap().attr = loc;
                }
            }
        }
        report.moved_bytes = self.store.bytes_moved() - before;
        Ok(report)
    }

    fn add_incident(&mut self, vid: i64, outgoing: bool, list: &[&Edge], report: &mut DeltaReport) -> Result<()> {
        let mut rows = Vec::with_capacity(list.len());
        for e in list {
            let other = if outgoing { e.dst } else { e.src };
            let view = self.vertices[&other].view;
            let r = self.store.make_ref(view, RefMode::Indirect)?;
            rows.push(vec![Cell::from(e.eid), Cell::from(self.edges[&e.eid].label as i64), Cell::Ref(r)]);
        }
        let slot = self.vertices[&vid];
        let frag = if outgoing { slot.out } else { slot.inn };
        let (frag, start) = if frag == FragmentId::EMPTY {
            let rel = if outgoing { self.d_out } else { self.d_in };
            let f = self.store.insert_fragment(rel, &rows)?;
            report.new_fragments += 1;
            let r = self.store.make_ref(f, RefMode::Indirect)?;
            let loc = RowLoc { frag: self.dv_frag, row: slot.row };
            self.store.write_cell(loc, if outgoing { DV_OUT } else { DV_IN }, Cell::Ref(r))?;
            let s = self.vertices.get_mut(&vid).unwrap();
            if outgoing {
                s.out = f;
            } else {
                s.inn = f;
            }
            (f, 0)
        } else {
            let start = self.store.view_of(frag)?.len() as u32;
            let r = self.store.append_to_fragment(frag, &rows)?;
            report.promotions += r.promoted as usize;
            (frag, start)
        };
        for (i, e) in list.iter().enumerate() {
            let loc = RowLoc { frag, row: start + i as u32 };
            debug_assert_eq!(self.store.read_i64(loc, E_EID), Some(e.eid));
            let s = self.edges.get_mut(&e.eid).unwrap();
            if outgoing {
                s.out = loc;
            } else {
                s.inn = loc;
            }
        }
        Ok(())
    }

    fn append_attrs(&mut self, vertex: bool, label: u32, items: &[(i64, &Attrs)]) -> Result<Vec<(i64, RowLoc)>> {
        let map = if vertex { &self.v_attrs } else { &self.e_attrs };
        let Some(ar) = map.get(&label).cloned() else {
            let (prefix, key) = if vertex { ("V_A", "vid") } else { ("E_A", "eid") };
            let (ar, locs) = self.build_attr_rel(prefix, key, label, items)?;
            if vertex {
                self.v_attrs.insert(label, ar);
            } else {
                self.e_attrs.insert(label, ar);
            }
            return Ok(locs);
        };
        let types: Vec<ColumnType> = self.store.schema(ar.rel).columns[1..].iter().map(|c| c.ty).collect();
        let rows: Vec<Vec<Cell>> = items
            .iter()
            .map(|(id, a)| {
                let mut row = vec![Cell::from(*id)];
                for (n, t) in ar.columns.iter().zip(&types) {
                    row.push(to_cell(a.get(n).unwrap_or(&PlainValue::Null), *t));
                }
                row
            })
            .collect();
        let start = self.store.view_of(ar.frag)?.len() as u32;
        self.store.append_to_fragment(ar.frag, &rows)?;
        Ok(items.iter().enumerate().map(|(i, (id, _))| (*id, RowLoc { frag: ar.frag, row: start + i as u32 })).collect())
    }
}
