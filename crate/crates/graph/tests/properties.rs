use std::collections::{BTreeSet, HashMap, VecDeque};

use proptest::prelude::*;
use rg_graph::{canonical_dump, gen, ConvertOptions, GraphStats, PropertyGraph, RgGraphStore};
use rg_store::{validate_regular_form, StoreConfig};

fn small_cfg() -> StoreConfig {
    // small pages so promotion and block chains show up in tiny graphs
    StoreConfig { block_size: 512, segment_threshold: 128, ..StoreConfig::default() }
}

/// Vertices within `depth` undirected hops, by plain BFS over the edge list.
fn bfs_oracle(g: &PropertyGraph, roots: &[i64], depth: usize) -> (BTreeSet<i64>, BTreeSet<i64>) {
    let mut adj: HashMap<i64, Vec<(i64, i64)>> = HashMap::new();
    for e in &g.edges {
        adj.entry(e.src).or_default().push((e.eid, e.dst));
        adj.entry(e.dst).or_default().push((e.eid, e.src));
    }
    let mut dist = HashMap::new();
    let mut q = VecDeque::new();
    for r in roots {
        dist.insert(*r, 0);
        q.push_back(*r);
    }
    let mut edges = BTreeSet::new();
    while let Some(v) = q.pop_front() {
        let d = dist[&v];
        if d >= depth {
            continue;
        }
        for (eid, w) in adj.get(&v).cloned().unwrap_or_default() {
            edges.insert(eid);
            if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(w) {
                slot.insert(d + 1);
                q.push_back(w);
            }
        }
    }
    (dist.into_keys().collect(), edges)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn roundtrip(n in 1usize..40, m in 0usize..120, seed in any::<u64>(), locality in any::<bool>()) {
        let g = gen::random_labeled(n, m, 3, 2, seed);
        let opts = ConvertOptions { locality, ..Default::default() };
        let s = RgGraphStore::convert_with(&g, small_cfg(), opts).unwrap();
        prop_assert_eq!(s.browse(None, None).unwrap(), g.normalized());
        prop_assert!(validate_regular_form(&s.store).ok());
    }

    #[test]
    fn update_matches_rebuild(n in 1usize..40, m in 0usize..120, seed in any::<u64>(), rounds in 1usize..4) {
        let mut g = gen::random_labeled(n, m, 3, 2, seed);
        let mut s = RgGraphStore::convert(&g, small_cfg()).unwrap();
        for r in 0..rounds {
            let d = gen::random_delta(&g, 3, 2, seed.wrapping_add(r as u64));
            s.apply_delta(&d).unwrap();
            g = g.apply(&d).unwrap();
            let rebuilt = RgGraphStore::convert(&g, small_cfg()).unwrap();
            prop_assert_eq!(canonical_dump(&s), canonical_dump(&rebuilt));
            prop_assert_eq!(s.store.tuple_count(s.d_out), g.edges.len());
            prop_assert_eq!(s.store.tuple_count(s.d_in), g.edges.len());
            prop_assert!(validate_regular_form(&s.store).ok());
        }
        prop_assert_eq!(s.browse(None, None).unwrap(), g.normalized());
    }

    #[test]
    fn browse_matches_bfs(seed in any::<u64>(), depth in 0usize..4) {
        let g = gen::random_labeled(60, 90, 2, 2, seed);
        let s = RgGraphStore::convert(&g, StoreConfig::default()).unwrap();
        let roots = [(seed % 60) as i64, (seed / 7 % 60) as i64];
        let sub = s.browse(Some(&roots), Some(depth)).unwrap();
        let (vs, es) = bfs_oracle(&g, &roots, depth);
        prop_assert_eq!(sub.vertices.iter().map(|v| v.vid).collect::<BTreeSet<_>>(), vs);
        prop_assert_eq!(sub.edges.iter().map(|e| e.eid).collect::<BTreeSet<_>>(), es);
    }
}

#[test]
fn degree_sums_match_edge_count() {
    let g = gen::random_labeled(200, 1000, 4, 4, 11);
    let s = RgGraphStore::convert(&g, StoreConfig::default()).unwrap();
    let (mut outs, mut ins) = (0, 0);
    for v in s.vertex_ids() {
        outs += s.neighbors(v, true).unwrap().len();
        ins += s.neighbors(v, false).unwrap().len();
    }
    assert_eq!((outs, ins), (1000, 1000));
    let st = GraphStats::collect(&s);
    assert!((st.degree("D_V", "out_L", None) * 200.0 - 1000.0).abs() < 1e-9);
}

#[test]
fn star_stats() {
    let s = RgGraphStore::convert(&gen::star(100), StoreConfig::default()).unwrap();
    let st = GraphStats::collect(&s);
    assert_eq!(st.degrees["D_V.out_L"].linked, 1);
    assert!((st.degree("D_V", "out_L", None) - 100.0 / 101.0).abs() < 1e-12);
    assert_eq!(s.neighbors(0, true).unwrap().len(), 100);
}

#[test]
fn triangle_out_ratio() {
    let g = rg_graph::io::read_edges("eid,src,dst,label\n0,0,1,E\n1,1,2,E\n2,2,0,E\n".as_bytes()).unwrap();
    let vertices = rg_graph::io::read_vertices("vid,label\n0,V\n1,V\n2,V\n".as_bytes()).unwrap();
    let s = RgGraphStore::convert(&PropertyGraph { vertices, edges: g }, StoreConfig::default()).unwrap();
    let st = GraphStats::collect(&s);
    assert_eq!(st.degrees["D_V.out_L"].linked as f64 / st.card("D_V") as f64, 1.0);
}

#[test]
fn insert_into_empty_out_rebinds_sentinel() {
    let g = gen::star(3);
    let mut s = RgGraphStore::convert(&g, StoreConfig::default()).unwrap();
    assert!(s.neighbors(2, true).unwrap().is_empty());
    let d = rg_graph::io::parse_delta("+E 50 2 3 E\n").unwrap();
    let rep = s.apply_delta(&d).unwrap();
    assert_eq!(rep.new_fragments, 1);
    assert_eq!(s.neighbors(2, true).unwrap(), vec![(50, 3)]);
}

#[test]
fn attribute_update_is_delete_plus_insert() {
    let g = rg_graph::PropertyGraph {
        vertices: rg_graph::io::read_vertices("vid,label,age\n1,User,20\n2,User,30\n".as_bytes()).unwrap(),
        edges: vec![],
    };
    let mut s = RgGraphStore::convert(&g, StoreConfig::default()).unwrap();
    s.apply_delta(&rg_graph::io::parse_delta("-V 1\n+V 1 User age=21\n").unwrap()).unwrap();
    assert_eq!(s.vertex_attr(1, "age"), rg_store::PlainValue::Int(21));
    assert_eq!(s.vertex_attr(2, "age"), rg_store::PlainValue::Int(30));
}

#[test]
fn imdb_ontology() {
    let vertices = rg_graph::io::read_vertices(
        "vid,label,title,year,name\n1,Movie,Heat,1995,\n2,Actor,,,Pacino\n3,Director,,,Mann\n".as_bytes(),
    )
    .unwrap();
    let edges = rg_graph::io::read_edges("eid,src,dst,label,role\n1,2,1,ActedIn,cop\n2,3,1,Directed,\n".as_bytes()).unwrap();
    let s = RgGraphStore::convert(&PropertyGraph { vertices, edges }, StoreConfig::default()).unwrap();
    let o = s.extract_ontology();
    assert_eq!(o.vertex_labels.len(), 3);
    assert_eq!(o.vertex_labels["Movie"], vec!["title".to_string(), "year".to_string()]);
    assert_eq!(o.vertex_labels["Actor"], vec!["name".to_string()]);
    assert_eq!(o.edge_labels["ActedIn"], vec!["role".to_string()]);
    assert!(o.edge_labels["Directed"].is_empty());
}
