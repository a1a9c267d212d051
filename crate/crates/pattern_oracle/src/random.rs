//! Random connected patterns for differential testing.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::{Pattern, PatternEdge, PatternQuery, PatternVertex};

/// A connected pattern with `edges` edges (at least 1). A cyclic pattern
/// gets a spanning tree plus at least one closing edge; an acyclic one is a
/// tree. Each variable carries a label with probability `label_p`.
pub fn random_pattern<R: Rng>(
    rng: &mut R,
    edges: usize,
    cyclic: bool,
    vertex_labels: &[String],
    edge_labels: &[String],
    label_p: f64,
) -> Pattern {
    assert!(edges >= 1);
    let closing = if cyclic { rng.gen_range(1..=edges.min(3)) } else { 0 };
    let tree_edges = edges - closing;
    let n = tree_edges + 1;
    let label = |rng: &mut R, pool: &[String]| if rng.gen_bool(label_p) { pool.choose(rng).cloned() } else { None };
    let vertices: Vec<PatternVertex> =
        (0..n).map(|i| PatternVertex { var: format!("v{i}"), label: label(rng, vertex_labels) }).collect();
    let mut es = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let (s, d) = if rng.gen_bool(0.5) { (i, j) } else { (j, i) };
        es.push((s, d));
    }
    for _ in 0..closing {
        // a self-loop is the only way to close a cycle on one vertex
        let s = rng.gen_range(0..n);
        let d = if n == 1 { 0 } else { rng.gen_range(0..n) };
        es.push((s, d));
    }
    es.shuffle(rng);
    let edges = es
        .into_iter()
        .enumerate()
        .map(|(k, (s, d))| PatternEdge {
            var: Some(format!("e{k}")),
            src: format!("v{s}"),
            dst: format!("v{d}"),
            label: label(rng, edge_labels),
        })
        .collect();
    Pattern { vertices, edges }
}

/// Project every vertex id plus, now and then, an edge id or attribute.
pub fn random_query<R: Rng>(rng: &mut R, pattern: Pattern, vertex_attrs: &[&str], edge_attrs: &[&str]) -> PatternQuery {
    let mut projection: Vec<(String, String)> = pattern.vertices.iter().map(|v| (v.var.clone(), "id".to_string())).collect();
    for e in &pattern.edges {
        if rng.gen_bool(0.3) {
            projection.push((e.var.clone().unwrap(), "id".into()));
        }
        if !edge_attrs.is_empty() && rng.gen_bool(0.2) {
            projection.push((e.var.clone().unwrap(), edge_attrs.choose(rng).unwrap().to_string()));
        }
    }
    for v in &pattern.vertices {
        if !vertex_attrs.is_empty() && rng.gen_bool(0.2) {
            projection.push((v.var.clone(), vertex_attrs.choose(rng).unwrap().to_string()));
        }
    }
    PatternQuery { pattern, conditions: vec![], projection }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let labels: Vec<String> = (0..4).map(|i| format!("L{i}")).collect();
        for k in 1..=5 {
            for cyclic in [false, true] {
                let p = random_pattern(&mut rng, k, cyclic, &labels, &labels, 0.5);
                p.validate().unwrap();
                assert_eq!(p.edges.len(), k);
                assert_eq!(p.is_cyclic(), cyclic);
            }
        }
    }
}
