#![allow(dead_code)]

use rg_exec::Database;
use rg_graph::{PropertyGraph, RgGraphStore};
use rg_store::StoreConfig;

/// Small blocks and a low segment threshold, so even toy graphs span
/// several fragments of both kinds.
pub fn small_cfg() -> StoreConfig {
    StoreConfig { block_size: 1024, segment_threshold: 128, ..StoreConfig::default() }
}

pub fn db_with(g: &PropertyGraph, cfg: StoreConfig) -> Database {
    let mut db = Database::new();
    db.add_graph("g", RgGraphStore::convert(g, cfg).unwrap());
    db
}

pub fn db(g: &PropertyGraph) -> Database {
    db_with(g, small_cfg())
}

use rand::seq::SliceRandom;
use rand::Rng;
use rg_pattern_oracle::random::{random_pattern, random_query};
use rg_pattern_oracle::{CmpOp, Condition, Operand, PatternQuery};
use rg_store::PlainValue;

/// A random pattern query over `random_labeled` graphs: up to `max_edges`
/// edges, cyclic with probability `cyclic_p`, and now and then an
/// attribute condition.
pub fn random_case<R: Rng>(rng: &mut R, labels: usize, max_edges: usize, cyclic_p: f64) -> PatternQuery {
    let names: Vec<String> = (0..labels).map(rg_graph::gen::label_name).collect();
    let k = rng.gen_range(1..=max_edges);
    let cyclic = rng.gen_bool(cyclic_p);
    let p = random_pattern(rng, k, cyclic, &names, &names, 0.5);
    let mut q = random_query(rng, p, &["w", "name"], &["ts"]);
    if rng.gen_bool(0.3) {
        let v = q.pattern.vertices.choose(rng).unwrap().var.clone();
        let op = *[CmpOp::Lt, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne].choose(rng).unwrap();
        q.conditions.push(Condition {
            left: Operand::Attr { var: v, attr: "w".into() },
            op,
            right: Operand::Const(PlainValue::Int(rng.gen_range(0..10))),
        });
    }
    if q.pattern.edges.len() >= 2 && rng.gen_bool(0.2) {
        let e = &q.pattern.edges;
        q.conditions.push(Condition {
            left: Operand::Attr { var: e[0].var.clone().unwrap(), attr: "ts".into() },
            op: CmpOp::Lt,
            right: Operand::Attr { var: e[1].var.clone().unwrap(), attr: "ts".into() },
        });
    }
    q
}
