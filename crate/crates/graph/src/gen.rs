//! Seeded synthetic graphs for tests and benchmarks.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rg_store::PlainValue;

use crate::model::{Attrs, Edge, GraphDelta, PropertyGraph, Vertex};

fn bare_vertices(n: usize, label: &str) -> Vec<Vertex> {
    (0..n as i64).map(|vid| Vertex { vid, label: label.to_string(), attrs: Attrs::new() }).collect()
}

fn edge(eid: usize, src: usize, dst: usize, label: &str) -> Edge {
    Edge { eid: eid as i64, src: src as i64, dst: dst as i64, label: label.to_string(), attrs: Attrs::new() }
}

/// `m` edges with endpoints drawn uniformly, no self-loops.
pub fn uniform(n: usize, m: usize, seed: u64) -> PropertyGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..m)
        .map(|i| {
            let s = rng.gen_range(0..n);
            let mut d = rng.gen_range(0..n - 1);
            if d >= s {
                d += 1;
            }
            edge(i, s, d, "E")
        })
        .collect();
    PropertyGraph { vertices: bare_vertices(n, "V"), edges }
}

/// Vertex 0 pointing at `leaves` other vertices.
pub fn star(leaves: usize) -> PropertyGraph {
    PropertyGraph { vertices: bare_vertices(leaves + 1, "V"), edges: (0..leaves).map(|i| edge(i, 0, i + 1, "E")).collect() }
}

/// Chung-Lu style skew: endpoint `i` is drawn with weight `(i+1)^(-1/(a-1))`.
pub fn power_law(n: usize, m: usize, exponent: f64, seed: u64) -> PropertyGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).powf(-1.0 / (exponent - 1.0))).collect();
    let dist = WeightedIndex::new(&w).expect("positive weights");
    let edges = (0..m)
        .map(|i| {
            let s = dist.sample(&mut rng);
            let mut d = dist.sample(&mut rng);
            while d == s {
                d = dist.sample(&mut rng);
            }
            edge(i, s, d, "E")
        })
        .collect();
    PropertyGraph { vertices: bare_vertices(n, "V"), edges }
}

/// Users with `Share` and `Follow` edges; each user has `name` and `age`.
pub fn social_toy(n: usize, m: usize, seed: u64) -> PropertyGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices = (0..n as i64)
        .map(|vid| {
            let mut attrs = Attrs::new();
            attrs.insert("name".into(), PlainValue::Str(format!("user{vid}")));
            attrs.insert("age".into(), PlainValue::Int(rng.gen_range(18..70)));
            Vertex { vid, label: "User".into(), attrs }
        })
        .collect();
    let edges = (0..m)
        .map(|i| {
            let label = if rng.gen_bool(0.5) { "Share" } else { "Follow" };
            edge(i, rng.gen_range(0..n), rng.gen_range(0..n), label)
        })
        .collect();
    PropertyGraph { vertices, edges }
}

pub fn label_name(i: usize) -> String {
    format!("L{i}")
}

fn vertex_attrs(rng: &mut ChaCha8Rng, label: usize) -> Attrs {
    let mut a = Attrs::new();
    a.insert("w".into(), PlainValue::Int(rng.gen_range(0..10)));
    if label.is_multiple_of(2) {
        a.insert("name".into(), PlainValue::Str(format!("n{}", rng.gen_range(0..50))));
    }
    a
}

fn edge_attrs(rng: &mut ChaCha8Rng) -> Attrs {
    let mut a = Attrs::new();
    a.insert("ts".into(), PlainValue::Int(rng.gen_range(0..100)));
    a
}

/// Labeled graph with attributes; self-loops and parallel edges allowed.
/// Vertices carry `w` (int), even-numbered vertex labels also `name` (str);
/// edges carry `ts` (int).
pub fn random_labeled(n: usize, m: usize, vertex_labels: usize, edge_labels: usize, seed: u64) -> PropertyGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices = (0..n as i64)
        .map(|vid| {
            let l = rng.gen_range(0..vertex_labels);
            Vertex { vid, label: label_name(l), attrs: vertex_attrs(&mut rng, l) }
        })
        .collect();
    let edges = (0..m as i64)
        .map(|eid| Edge {
            eid,
            src: rng.gen_range(0..n as i64),
            dst: rng.gen_range(0..n as i64),
            label: label_name(rng.gen_range(0..edge_labels)),
            attrs: edge_attrs(&mut rng),
        })
        .collect();
    PropertyGraph { vertices, edges }
}

/// `k` fresh edges between existing vertices, ids after the current max.
pub fn random_new_edges(g: &PropertyGraph, k: usize, seed: u64) -> Vec<Edge> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let next = g.edges.iter().map(|e| e.eid).max().map_or(0, |m| m + 1);
    let label = g.edges.first().map_or("E".to_string(), |e| e.label.clone());
    (0..k as i64)
        .map(|i| Edge {
            eid: next + i,
            src: g.vertices.choose(&mut rng).unwrap().vid,
            dst: g.vertices.choose(&mut rng).unwrap().vid,
            label: label.clone(),
            attrs: Attrs::new(),
        })
        .collect()
}

/// A well-formed random batch for a graph from `random_labeled`: edge
/// deletions, deletion of some vertices together with their edges, one
/// attribute update (delete plus reinsert), new vertices and new edges.
pub fn random_delta(g: &PropertyGraph, vertex_labels: usize, edge_labels: usize, seed: u64) -> GraphDelta {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = GraphDelta::default();
    let mut dead_e = std::collections::HashSet::new();
    for e in &g.edges {
        if rng.gen_bool(0.1) {
            d.del_edges.push(e.eid);
            dead_e.insert(e.eid);
        }
    }
    let mut dead_v = std::collections::HashSet::new();
    for v in &g.vertices {
        if rng.gen_bool(0.05) {
            dead_v.insert(v.vid);
        }
    }
    for e in &g.edges {
        if (dead_v.contains(&e.src) || dead_v.contains(&e.dst)) && dead_e.insert(e.eid) {
            d.del_edges.push(e.eid);
        }
    }
    d.del_vertices = g.vertices.iter().map(|v| v.vid).filter(|v| dead_v.contains(v)).collect();
    let survivors: Vec<&Vertex> = g.vertices.iter().filter(|v| !dead_v.contains(&v.vid)).collect();
    if let Some(v) = survivors.choose(&mut rng) {
        // attribute update of an isolated copy: its edges go and come back
        let mut nv = (*v).clone();
        let l: usize = nv.label[1..].parse().unwrap_or(1);
        nv.attrs = vertex_attrs(&mut rng, l);
        d.del_vertices.push(nv.vid);
        for e in &g.edges {
            if (e.src == nv.vid || e.dst == nv.vid) && !dead_e.contains(&e.eid) {
                dead_e.insert(e.eid);
                d.del_edges.push(e.eid);
                d.add_edges.push(e.clone());
            }
        }
        d.add_vertices.push(nv);
    }
    let first_v = g.vertices.iter().map(|v| v.vid).max().map_or(0, |m| m + 1);
    for vid in first_v..first_v + rng.gen_range(0..5) {
        let l = rng.gen_range(0..vertex_labels);
        d.add_vertices.push(Vertex { vid, label: label_name(l), attrs: vertex_attrs(&mut rng, l) });
    }
    let live: Vec<i64> = survivors.iter().map(|v| v.vid).chain(d.add_vertices.iter().map(|v| v.vid)).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let mut next_e = g.edges.iter().map(|e| e.eid).max().map_or(0, |m| m + 1);
    if !live.is_empty() {
        for _ in 0..rng.gen_range(0..20) {
            d.add_edges.push(Edge {
                eid: next_e,
                src: *live.choose(&mut rng).unwrap(),
                dst: *live.choose(&mut rng).unwrap(),
                label: label_name(rng.gen_range(0..edge_labels)),
                attrs: edge_attrs(&mut rng),
            });
            next_e += 1;
        }
    }
    d
}
