use std::collections::{BTreeMap, HashMap, VecDeque};

use rg_store::{Cell, Column, ColumnType, FragmentId, PlainValue, RefMode, RelId, RowLoc, Store, StoreConfig};

use crate::error::{GraphError, Result};
use crate::labels::LabelDict;
use crate::model::{Attrs, Edge, PropertyGraph, Vertex};

pub const DV_VID: usize = 0;
pub const DV_LABEL: usize = 1;
pub const DV_OUT: usize = 2;
pub const DV_IN: usize = 3;
pub const E_EID: usize = 0;
pub const E_LABEL: usize = 1;
/// `dst_L` in D_out, `src_L` in D_in.
pub const E_END: usize = 2;

pub const D_V: &str = "D_V";
pub const D_OUT: &str = "D_out";
pub const D_IN: &str = "D_in";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvertOptions {
    pub ref_mode: RefMode,
    /// Carve each vertex's out- and in-fragments from one allocation.
    pub locality: bool,
}

impl Default for ConvertOptions {
    fn default() -> Self {
        ConvertOptions { ref_mode: RefMode::Indirect, locality: false }
    }
}

/// Per-label attribute relation: key column then the attribute columns.
#[derive(Clone, Debug)]
pub struct AttrRel {
    pub rel: RelId,
    pub frag: FragmentId,
    pub columns: Vec<String>,
}

impl AttrRel {
    /// Column index in the relation (0 is the key).
    pub fn col(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name).map(|i| i + 1)
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct VertexSlot {
    pub row: u32,
    pub view: FragmentId,
    pub out: FragmentId,
    pub inn: FragmentId,
    pub label: u32,
    pub attr: RowLoc,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct EdgeSlot {
    pub src: i64,
    pub dst: i64,
    pub label: u32,
    pub out: RowLoc,
    pub inn: RowLoc,
    pub attr: RowLoc,
}

/// A property graph encoded as D_V, D_out, D_in and per-label attribute
/// relations inside one store.
pub struct RgGraphStore {
    pub store: Store,
    pub d_v: RelId,
    pub d_out: RelId,
    pub d_in: RelId,
    pub labels: LabelDict,
    pub(crate) v_attrs: BTreeMap<u32, AttrRel>,
    pub(crate) e_attrs: BTreeMap<u32, AttrRel>,
    pub(crate) dv_frag: FragmentId,
    pub(crate) vertices: HashMap<i64, VertexSlot>,
    pub(crate) edges: HashMap<i64, EdgeSlot>,
    pub(crate) opts: ConvertOptions,
}

pub(crate) fn infer_type<'a>(values: impl Iterator<Item = &'a PlainValue>) -> ColumnType {
    let (mut int, mut float, mut boolean, mut other) = (false, false, false, false);
    for v in values {
        match v {
            PlainValue::Null => {}
            PlainValue::Int(_) => int = true,
            PlainValue::Float(_) => float = true,
            PlainValue::Bool(_) => boolean = true,
            PlainValue::Str(_) => other = true,
        }
    }
    match (int, float, boolean, other) {
        (_, _, _, true) => ColumnType::Str,
        (_, _, true, _) if int || float => ColumnType::Str,
        (_, _, true, _) => ColumnType::Bool,
        (_, true, _, _) => ColumnType::Float,
        (true, _, _, _) => ColumnType::Int,
        _ => ColumnType::Str,
    }
}

pub(crate) fn to_cell(v: &PlainValue, ty: ColumnType) -> Cell {
    match (v, ty) {
        (PlainValue::Null, _) => Cell::Plain(PlainValue::Null),
        (PlainValue::Str(_), _) => Cell::Plain(v.clone()),
        (_, ColumnType::Str) => Cell::Plain(PlainValue::Str(v.to_string())),
        _ => Cell::Plain(v.clone()),
    }
}

impl RgGraphStore {
    /// Convert a property graph into its relational encoding.
    pub fn convert(g: &PropertyGraph, cfg: StoreConfig) -> Result<RgGraphStore> {
        Self::convert_with(g, cfg, ConvertOptions::default())
    }

    pub fn convert_with(g: &PropertyGraph, cfg: StoreConfig, opts: ConvertOptions) -> Result<RgGraphStore> {
        g.validate()?;
        let mut store = Store::new(cfg)?;
        let (d_v, d_out, d_in) = (RelId(0), RelId(1), RelId(2));
        store.create_relation(
            D_V,
            vec![
                Column::new("vid", ColumnType::Int),
                Column::new("label", ColumnType::Label),
                Column::new("out_L", ColumnType::Ref(d_out)),
                Column::new("in_L", ColumnType::Ref(d_in)),
            ],
        )?;
        for (name, end) in [(D_OUT, "dst_L"), (D_IN, "src_L")] {
            store.create_relation(
                name,
                vec![
                    Column::new("eid", ColumnType::Int),
                    Column::new("label", ColumnType::Label),
                    Column::new(end, ColumnType::Ref(d_v)),
                ],
            )?;
        }
        let mut labels = LabelDict::default();
        for v in &g.vertices {
            labels.intern(&v.label);
        }
        for e in &g.edges {
            labels.intern(&e.label);
        }

        let empty = store.make_ref(FragmentId::EMPTY, opts.ref_mode)?;
        let dv_rows: Vec<Vec<Cell>> = g
            .vertices
            .iter()
            .map(|v| {
                vec![
                    Cell::from(v.vid),
                    Cell::from(labels.code(&v.label).unwrap() as i64),
                    Cell::Ref(empty),
                    Cell::Ref(empty),
                ]
            })
            .collect();
        let dv_frag = store.insert_fragment(d_v, &dv_rows)?;

        let mut vertices = HashMap::with_capacity(g.vertices.len());
        let mut view_refs = HashMap::with_capacity(g.vertices.len());
        for (i, v) in g.vertices.iter().enumerate() {
            let view = store.create_view(dv_frag, i as u32, 1)?;
            view_refs.insert(v.vid, store.make_ref(view, opts.ref_mode)?);
            vertices.insert(
                v.vid,
                VertexSlot {
                    row: i as u32,
                    view,
                    out: FragmentId::EMPTY,
                    inn: FragmentId::EMPTY,
                    label: labels.code(&v.label).unwrap(),
                    attr: RowLoc { frag: FragmentId::EMPTY, row: 0 },
                },
            );
        }

        let mut out_lists: HashMap<i64, Vec<&Edge>> = HashMap::new();
        let mut in_lists: HashMap<i64, Vec<&Edge>> = HashMap::new();
        for e in &g.edges {
            out_lists.entry(e.src).or_default().push(e);
            in_lists.entry(e.dst).or_default().push(e);
        }
        let mut edges: HashMap<i64, EdgeSlot> = g
            .edges
            .iter()
            .map(|e| {
                let dummy = RowLoc { frag: FragmentId::EMPTY, row: 0 };
                (
                    e.eid,
                    EdgeSlot { src: e.src, dst: e.dst, label: labels.code(&e.label).unwrap(), out: dummy, inn: dummy, attr: dummy },
                )
            })
            .collect();
        let edge_row = |e: &Edge, end: i64| -> Vec<Cell> {
            vec![Cell::from(e.eid), Cell::from(labels.code(&e.label).unwrap() as i64), Cell::Ref(view_refs[&end])]
        };
        for v in &g.vertices {
            let outs: Vec<Vec<Cell>> = out_lists.get(&v.vid).map_or(vec![], |l| l.iter().map(|e| edge_row(e, e.dst)).collect());
            let ins: Vec<Vec<Cell>> = in_lists.get(&v.vid).map_or(vec![], |l| l.iter().map(|e| edge_row(e, e.src)).collect());
            let (fo, fi) = if opts.locality && !outs.is_empty() && !ins.is_empty() {
                store.insert_fragment_pair((d_out, &outs), (d_in, &ins))?
            } else {
                let fo = if outs.is_empty() { FragmentId::EMPTY } else { store.insert_fragment(d_out, &outs)? };
                let fi = if ins.is_empty() { FragmentId::EMPTY } else { store.insert_fragment(d_in, &ins)? };
                (fo, fi)
            };
            let slot = vertices.get_mut(&v.vid).unwrap();
            slot.out = fo;
            slot.inn = fi;
            let loc = RowLoc { frag: dv_frag, row: slot.row };
            if fo != FragmentId::EMPTY {
                let r = store.make_ref(fo, opts.ref_mode)?;
                store.write_cell(loc, DV_OUT, Cell::Ref(r))?;
                for (i, e) in out_lists[&v.vid].iter().enumerate() {
                    edges.get_mut(&e.eid).unwrap().out = RowLoc { frag: fo, row: i as u32 };
                }
            }
            if fi != FragmentId::EMPTY {
                let r = store.make_ref(fi, opts.ref_mode)?;
                store.write_cell(loc, DV_IN, Cell::Ref(r))?;
                for (i, e) in in_lists[&v.vid].iter().enumerate() {
                    edges.get_mut(&e.eid).unwrap().inn = RowLoc { frag: fi, row: i as u32 };
                }
            }
        }

        let mut s = RgGraphStore {
            store,
            d_v,
            d_out,
            d_in,
            labels,
            v_attrs: BTreeMap::new(),
            e_attrs: BTreeMap::new(),
            dv_frag,
            vertices,
            edges,
            opts,
        };

        let mut by_vlabel: BTreeMap<u32, Vec<&Vertex>> = BTreeMap::new();
        for v in &g.vertices {
            by_vlabel.entry(s.labels.code(&v.label).unwrap()).or_default().push(v);
        }
        for (label, vs) in by_vlabel {
            let items: Vec<(i64, &Attrs)> = vs.iter().map(|v| (v.vid, &v.attrs)).collect();
            let (ar, locs) = s.build_attr_rel("V_A", "vid", label, &items)?;
            for (vid, loc) in locs {
                s.vertices.get_mut(&vid).unwrap().attr = loc;
            }
            s.v_attrs.insert(label, ar);
        }
        let mut by_elabel: BTreeMap<u32, Vec<&Edge>> = BTreeMap::new();
        for e in &g.edges {
            by_elabel.entry(s.labels.code(&e.label).unwrap()).or_default().push(e);
        }
        for (label, es) in by_elabel {
            let items: Vec<(i64, &Attrs)> = es.iter().map(|e| (e.eid, &e.attrs)).collect();
            let (ar, locs) = s.build_attr_rel("E_A", "eid", label, &items)?;
            for (eid, loc) in locs {
                s.edges.get_mut(&eid).unwrap().attr = loc;
            }
            s.e_attrs.insert(label, ar);
        }
        Ok(s)
    }

    pub(crate) fn build_attr_rel(
        &mut self,
        prefix: &str,
        key: &str,
        label: u32,
        items: &[(i64, &Attrs)],
    ) -> Result<(AttrRel, Vec<(i64, RowLoc)>)> {
        let mut names: Vec<String> = items.iter().flat_map(|(_, a)| a.keys().cloned()).collect();
        names.sort();
        names.dedup();
        let types: Vec<ColumnType> = names
            .iter()
            .map(|n| infer_type(items.iter().filter_map(|(_, a)| a.get(n))))
            .collect();
        let mut cols = vec![Column::new(key, ColumnType::Int)];
        cols.extend(names.iter().zip(&types).map(|(n, t)| Column::new(n.clone(), *t)));
        let rel_name = format!("{prefix}:{}", self.labels.name(label));
        let rel = self.store.create_relation(&rel_name, cols)?;
        let rows: Vec<Vec<Cell>> = items
            .iter()
            .map(|(id, a)| {
                let mut row = vec![Cell::from(*id)];
                for (n, t) in names.iter().zip(&types) {
                    row.push(to_cell(a.get(n).unwrap_or(&PlainValue::Null), *t));
                }
                row
            })
            .collect();
        let frag = self.store.insert_fragment(rel, &rows)?;
        let locs = items.iter().enumerate().map(|(i, (id, _))| (*id, RowLoc { frag, row: i as u32 })).collect();
        Ok((AttrRel { rel, frag, columns: names }, locs))
    }

    pub fn options(&self) -> ConvertOptions {
        self.opts
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// The single storage fragment holding D_V.
    pub fn dv_fragment(&self) -> FragmentId {
        self.dv_frag
    }

    pub fn vertex_loc(&self, vid: i64) -> Option<RowLoc> {
        self.vertices.get(&vid).map(|s| RowLoc { frag: self.dv_frag, row: s.row })
    }

    pub fn vertex_ids(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.vertices.keys().copied().collect();
        v.sort();
        v
    }

    pub fn edge_ids(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.edges.keys().copied().collect();
        v.sort();
        v
    }

    pub fn vertex_attr_rel(&self, label: u32) -> Option<&AttrRel> {
        self.v_attrs.get(&label)
    }

    pub fn edge_attr_rel(&self, label: u32) -> Option<&AttrRel> {
        self.e_attrs.get(&label)
    }

    /// Row of the vertex in its label's attribute relation.
    pub fn vertex_attr_loc(&self, vid: i64) -> Option<(u32, RowLoc)> {
        self.vertices.get(&vid).map(|s| (s.label, s.attr))
    }

    pub fn edge_attr_loc(&self, eid: i64) -> Option<(u32, RowLoc)> {
        self.edges.get(&eid).map(|s| (s.label, s.attr))
    }

    pub fn vertex_attr(&self, vid: i64, name: &str) -> PlainValue {
        let Some((label, loc)) = self.vertex_attr_loc(vid) else { return PlainValue::Null };
        match self.v_attrs.get(&label).and_then(|a| a.col(name)) {
            Some(c) => self.store.read_plain(loc, c),
            None => PlainValue::Null,
        }
    }

    pub fn edge_attr(&self, eid: i64, name: &str) -> PlainValue {
        let Some((label, loc)) = self.edge_attr_loc(eid) else { return PlainValue::Null };
        match self.e_attrs.get(&label).and_then(|a| a.col(name)) {
            Some(c) => self.store.read_plain(loc, c),
            None => PlainValue::Null,
        }
    }

    fn attrs_at(&self, ar: Option<&AttrRel>, loc: RowLoc) -> Attrs {
        let mut out = Attrs::new();
        if let Some(ar) = ar {
            for (i, n) in ar.columns.iter().enumerate() {
                let v = self.store.read_plain(loc, i + 1);
                if !v.is_null() {
                    out.insert(n.clone(), v);
                }
            }
        }
        out
    }

    pub fn vertex(&self, vid: i64) -> Option<Vertex> {
        let s = self.vertices.get(&vid)?;
        Some(Vertex {
            vid,
            label: self.labels.name(s.label).to_string(),
            attrs: self.attrs_at(self.v_attrs.get(&s.label), s.attr),
        })
    }

    /// Outgoing (or incoming) edges of a vertex as (eid, other endpoint),
    /// found by dereferencing the vertex's reference cells.
    pub fn neighbors(&self, vid: i64, outgoing: bool) -> Result<Vec<(i64, i64)>> {
        let loc = self.vertex_loc(vid).ok_or_else(|| GraphError::NotFound(format!("vertex {vid}")))?;
        let col = if outgoing { DV_OUT } else { DV_IN };
        let r = self.store.read_ref(loc, col).expect("vertex reference cells are never null");
        let view = self.store.resolve(&r)?;
        let mut out = Vec::with_capacity(view.len());
        for e in view.iter() {
            let eid = self.store.read_i64(e, E_EID).unwrap();
            let end = self.store.read_ref(e, E_END).unwrap();
            let v = self.store.resolve(&end)?;
            debug_assert_eq!(v.len(), 1);
            let other = self.store.read_i64(v.iter().next().unwrap(), DV_VID).unwrap();
            out.push((eid, other));
        }
        Ok(out)
    }

    pub fn edge(&self, eid: i64) -> Option<Edge> {
        let s = self.edges.get(&eid)?;
        Some(Edge {
            eid,
            src: s.src,
            dst: s.dst,
            label: self.labels.name(s.label).to_string(),
            attrs: self.attrs_at(self.e_attrs.get(&s.label), s.attr),
        })
    }

    /// Rebuild the subgraph around `roots` (all vertices when `None`):
    /// vertices within `depth` undirected hops (unbounded when `None`) and
    /// the edges incident to a vertex closer than `depth`.
    pub fn browse(&self, roots: Option<&[i64]>, depth: Option<usize>) -> Result<PropertyGraph> {
        let mut dist: HashMap<i64, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        let start: Vec<i64> = match roots {
            Some(r) => r.to_vec(),
            None => self.vertex_ids(),
        };
        for vid in start {
            if !self.vertices.contains_key(&vid) {
                return Err(GraphError::NotFound(format!("vertex {vid}")));
            }
            if dist.insert(vid, 0).is_none() {
                queue.push_back(vid);
            }
        }
        let mut edge_ids = Vec::new();
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            if depth.is_some_and(|lim| d >= lim) {
                continue;
            }
            for outgoing in [true, false] {
                for (eid, other) in self.neighbors(v, outgoing)? {
                    edge_ids.push(eid);
                    if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(other) {
                        slot.insert(d + 1);
                        queue.push_back(other);
                    }
                }
            }
        }
        edge_ids.sort();
        edge_ids.dedup();
        let mut vids: Vec<i64> = dist.into_keys().collect();
        vids.sort();
        Ok(PropertyGraph {
            vertices: vids.iter().map(|v| self.vertex(*v).unwrap()).collect(),
            edges: edge_ids.iter().map(|e| self.edge(*e).unwrap()).collect(),
        })
    }

    /// Vertex labels and edge labels with their attribute names.
    pub fn extract_ontology(&self) -> Ontology {
        let side = |m: &BTreeMap<u32, AttrRel>| {
            m.iter()
                .map(|(l, a)| (self.labels.name(*l).to_string(), a.columns.clone()))
                .collect::<BTreeMap<_, _>>()
        };
        Ontology { vertex_labels: side(&self.v_attrs), edge_labels: side(&self.e_attrs) }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ontology {
    pub vertex_labels: BTreeMap<String, Vec<String>>,
    pub edge_labels: BTreeMap<String, Vec<String>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rg_store::validate_regular_form;

    fn vx(vid: i64, label: &str) -> Vertex {
        Vertex { vid, label: label.into(), attrs: Attrs::new() }
    }

    fn ex(eid: i64, src: i64, dst: i64) -> Edge {
        Edge { eid, src, dst, label: "T".into(), attrs: Attrs::new() }
    }

    fn triangle() -> PropertyGraph {
        PropertyGraph { vertices: vec![vx(1, "A"), vx(2, "A"), vx(3, "A")], edges: vec![ex(10, 1, 2), ex(11, 2, 3), ex(12, 3, 1)] }
    }

    #[test]
    fn smallest_graph() {
        let g = PropertyGraph { vertices: vec![vx(1, "A"), vx(2, "A")], edges: vec![ex(7, 1, 2)] };
        let s = RgGraphStore::convert(&g, StoreConfig::default()).unwrap();
        assert_eq!(s.store.tuple_count(s.d_v), 2);
        assert_eq!(s.store.tuple_count(s.d_out), 1);
        assert_eq!(s.store.tuple_count(s.d_in), 1);
        let b = s.vertex_loc(2).unwrap();
        let r = s.store.read_ref(b, DV_OUT).unwrap();
        assert!(s.store.resolve(&r).unwrap().is_empty());
        assert!(validate_regular_form(&s.store).ok());
    }

    #[test]
    fn triangle_fragments() {
        let s = RgGraphStore::convert(&triangle(), StoreConfig::default()).unwrap();
        assert_eq!(s.store.relation(s.d_out).fragments().len(), 3);
        assert_eq!(s.store.relation(s.d_in).fragments().len(), 3);
        for v in 1..=3 {
            assert_eq!(s.neighbors(v, true).unwrap().len(), 1);
            assert_eq!(s.neighbors(v, false).unwrap().len(), 1);
        }
        assert!(validate_regular_form(&s.store).ok());
    }

    #[test]
    fn browse_locality() {
        let s = RgGraphStore::convert(&triangle(), StoreConfig::default()).unwrap();
        let sub = s.browse(Some(&[1]), Some(1)).unwrap();
        let vids: Vec<i64> = sub.vertices.iter().map(|v| v.vid).collect();
        let eids: Vec<i64> = sub.edges.iter().map(|e| e.eid).collect();
        assert_eq!(vids, vec![1, 2, 3]);
        assert_eq!(eids, vec![10, 12]);
        assert!(matches!(s.browse(Some(&[99]), Some(1)), Err(GraphError::NotFound(_))));
    }

    #[test]
    fn roundtrip_with_attrs() {
        let mut g = triangle();
        g.vertices[0].attrs.insert("name".into(), PlainValue::Str("ann".into()));
        g.vertices[1].attrs.insert("age".into(), PlainValue::Int(4));
        g.edges[2].attrs.insert("w".into(), PlainValue::Float(0.5));
        let s = RgGraphStore::convert(&g, StoreConfig::default()).unwrap();
        assert_eq!(s.browse(None, None).unwrap(), g.normalized());
        assert_eq!(s.vertex_attr(1, "name"), PlainValue::Str("ann".into()));
        assert_eq!(s.vertex_attr(3, "name"), PlainValue::Null);
    }

    #[test]
    fn ontology() {
        let g = PropertyGraph { vertices: vec![vx(1, "User"), vx(2, "Link")], edges: vec![] };
        let s = RgGraphStore::convert(&g, StoreConfig::default()).unwrap();
        assert_eq!(s.extract_ontology().vertex_labels.len(), 2);
        let e = RgGraphStore::convert(&PropertyGraph::default(), StoreConfig::default()).unwrap();
        assert_eq!(e.extract_ontology(), Ontology::default());
    }

    #[test]
    fn duplicate_ids_fail_conversion() {
        let g = PropertyGraph { vertices: vec![vx(1, "A"), vx(1, "A")], edges: vec![] };
        assert!(matches!(RgGraphStore::convert(&g, StoreConfig::default()), Err(GraphError::Conversion(_))));
    }

    #[test]
    fn locality_places_fragments_adjacently() {
        let opts = ConvertOptions { locality: true, ..Default::default() };
        let s = RgGraphStore::convert_with(&triangle(), StoreConfig::default(), opts).unwrap();
        for v in 1..=3 {
            let slot = s.vertices[&v];
            assert!(s.store.is_adjacent(slot.out, slot.inn));
        }
    }
}
