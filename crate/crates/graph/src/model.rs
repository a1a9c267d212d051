use std::collections::{BTreeMap, HashMap, HashSet};

use rg_store::PlainValue;

use crate::error::{GraphError, Result};

pub type Attrs = BTreeMap<String, PlainValue>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub vid: i64,
    pub label: String,
    pub attrs: Attrs,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub eid: i64,
    pub src: i64,
    pub dst: i64,
    pub label: String,
    pub attrs: Attrs,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropertyGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

impl PropertyGraph {
    pub fn validate(&self) -> Result<()> {
        let mut vids = HashSet::new();
        for v in &self.vertices {
            if !vids.insert(v.vid) {
                return Err(GraphError::Conversion(format!("duplicate vertex id {}", v.vid)));
            }
        }
        let mut eids = HashSet::new();
        for e in &self.edges {
            if !eids.insert(e.eid) {
                return Err(GraphError::Conversion(format!("duplicate edge id {}", e.eid)));
            }
            for end in [e.src, e.dst] {
                if !vids.contains(&end) {
                    return Err(GraphError::Conversion(format!("edge {} names unknown vertex {}", e.eid, end)));
                }
            }
        }
        Ok(())
    }

    /// Same graph with vertices and edges in id order.
    pub fn normalized(&self) -> PropertyGraph {
        let mut g = self.clone();
        g.vertices.sort_by_key(|v| v.vid);
        g.edges.sort_by_key(|e| e.eid);
        g
    }

    /// Apply a delta to the plain graph; the reference for update tests.
    pub fn apply(&self, d: &GraphDelta) -> Result<PropertyGraph> {
        let mut vertices: BTreeMap<i64, Vertex> = self.vertices.iter().map(|v| (v.vid, v.clone())).collect();
        let mut edges: BTreeMap<i64, Edge> = self.edges.iter().map(|e| (e.eid, e.clone())).collect();
        for eid in &d.del_edges {
            edges.remove(eid).ok_or_else(|| GraphError::Delta(format!("no edge {eid} to delete")))?;
        }
        for vid in &d.del_vertices {
            vertices.remove(vid).ok_or_else(|| GraphError::Delta(format!("no vertex {vid} to delete")))?;
        }
        for e in edges.values() {
            if !vertices.contains_key(&e.src) || !vertices.contains_key(&e.dst) {
                return Err(GraphError::Delta(format!("edge {} still uses a deleted vertex", e.eid)));
            }
        }
        for v in &d.add_vertices {
            if vertices.insert(v.vid, v.clone()).is_some() {
                return Err(GraphError::Delta(format!("vertex {} already exists", v.vid)));
            }
        }
        for e in &d.add_edges {
            if !vertices.contains_key(&e.src) || !vertices.contains_key(&e.dst) {
                return Err(GraphError::Delta(format!("edge {} has a dangling endpoint", e.eid)));
            }
            if edges.insert(e.eid, e.clone()).is_some() {
                return Err(GraphError::Delta(format!("edge {} already exists", e.eid)));
            }
        }
        Ok(PropertyGraph { vertices: vertices.into_values().collect(), edges: edges.into_values().collect() })
    }

    pub fn vertex_index(&self) -> HashMap<i64, usize> {
        self.vertices.iter().enumerate().map(|(i, v)| (v.vid, i)).collect()
    }
}

/// A batch update. An attribute change is a delete plus an insert of the
/// same id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphDelta {
    pub add_vertices: Vec<Vertex>,
    pub del_vertices: Vec<i64>,
    pub add_edges: Vec<Edge>,
    pub del_edges: Vec<i64>,
}

impl GraphDelta {
    pub fn is_empty(&self) -> bool {
        self.add_vertices.is_empty() && self.del_vertices.is_empty() && self.add_edges.is_empty() && self.del_edges.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(vid: i64) -> Vertex {
        Vertex { vid, label: "A".into(), attrs: Attrs::new() }
    }

    fn e(eid: i64, src: i64, dst: i64) -> Edge {
        Edge { eid, src, dst, label: "T".into(), attrs: Attrs::new() }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let g = PropertyGraph { vertices: vec![v(1), v(1)], edges: vec![] };
        assert!(g.validate().is_err());
        let g = PropertyGraph { vertices: vec![v(1)], edges: vec![e(1, 1, 2)] };
        assert!(g.validate().is_err());
    }

    #[test]
    fn strict_vertex_deletion() {
        let g = PropertyGraph { vertices: vec![v(1), v(2)], edges: vec![e(1, 1, 2)] };
        let d = GraphDelta { del_vertices: vec![2], ..Default::default() };
        assert!(g.apply(&d).is_err());
        let d = GraphDelta { del_vertices: vec![2], del_edges: vec![1], ..Default::default() };
        assert_eq!(g.apply(&d).unwrap().vertices.len(), 1);
    }
}
