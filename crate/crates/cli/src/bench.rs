//! Desk-scale benchmark presets. Each returns a result table; timing
//! columns can be blanked so reports stay byte-identical across runs.

use std::time::Instant;

use rg_exec::{execute, Database, ExecOptions};
use rg_graph::{gen, GraphDelta, PropertyGraph, RgGraphStore};
use rg_planner::{optimize_with, CostParams, Method, PlanBuilder, PlanError, Planned, PlannerOptions, PlannerStats};
use rg_querygraph::build_query_graph;
use rg_sqldelta::{build_logical, parse, BoundQuery};
use rg_store::{FragmentPolicy, PlainValue, StoreConfig, Table};

use crate::CliError;

pub const PRESETS: [&str; 4] = ["triangle", "patterns", "ablation", "memory"];

/// Left-deep plan in query-graph node order: from the first node, explore
/// into the lowest-numbered node that can be reached, else join a scan of
/// it. Stands in for "no optimizer".
pub fn canonical_plan(q: &BoundQuery, stats: &PlannerStats, params: CostParams) -> Result<Planned, PlanError> {
    let g = build_query_graph(q)?;
    let b = PlanBuilder::new(&g, stats, params);
    let aliases: Vec<&str> = g.nodes.iter().map(|n| n.alias.as_str()).collect();
    let mut cur = b.scan(aliases[0])?;
    loop {
        if let Ok(done) = b.finish(cur.clone()) {
            return Ok(Planned { graph: g.clone(), plan: done });
        }
        let covered = cur.nodes | cur.consumed;
        let open: Vec<(usize, &str)> = aliases.iter().copied().enumerate().filter(|(i, _)| covered & (1 << i) == 0).collect();
        let explored = open
            .iter()
            .find_map(|(_, a)| [Method::Nl, Method::Hash].into_iter().find_map(|m| b.explore(&cur, a, m).ok()));
        let next = explored.or_else(|| {
            open.iter().find_map(|(_, a)| {
                let s = b.scan(a).ok()?;
                [Method::Hash, Method::Nl].into_iter().find_map(|m| b.join(&cur, &s, m).ok())
            })
        });
        cur = next.ok_or(PlanError::NoPlan)?;
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

fn time_cell(x: f64, timing: bool) -> PlainValue {
    if timing {
        PlainValue::Str(format!("{x:.2}"))
    } else {
        PlainValue::Str("-".into())
    }
}

pub const TRIANGLE_SQL: &str = "select a.id, b.id, c.id from g match (a)-[e]->(b)-[f]->(c)-[h]->(a)";
pub const TRIANGLE_BASELINE_SQL: &str =
    "select e1.src, e2.src, e3.src from E as e1 join E as e2 on e1.dst = e2.src join E as e3 on e2.dst = e3.src and e3.dst = e1.src";

#[derive(Clone, Debug)]
pub struct TriangleReport {
    pub edges: usize,
    pub explore_count: usize,
    pub join_count: usize,
    pub explore_ms: f64,
    pub join_ms: f64,
    pub explore_plan: String,
    pub join_plan: String,
}

impl TriangleReport {
    pub fn speedup(&self) -> f64 {
        self.join_ms / self.explore_ms
    }
}

/// The edge list as a plain relation E(eid, src, dst).
pub fn edge_table(g: &PropertyGraph) -> Table {
    let mut t = Table::new(vec!["eid".into(), "src".into(), "dst".into()]);
    t.rows = g.edges.iter().map(|e| vec![PlainValue::Int(e.eid), PlainValue::Int(e.src), PlainValue::Int(e.dst)]).collect();
    t
}

/// Directed triangles on a uniform graph: optimized exploration plan
/// against a three-way hash join over the edge table, median of `runs`.
pub fn triangle(vertices: usize, edges: usize, runs: usize, seed: u64, chunk_size: usize) -> Result<TriangleReport, CliError> {
    let g = gen::uniform(vertices, edges, seed);
    let mut db = Database::new();
    db.add_graph("g", RgGraphStore::convert(&g, StoreConfig::default())?);
    db.add_table("E", edge_table(&g));
    let params = CostParams::default();
    let opts = ExecOptions { chunk_size };
    let ex = rg_exec::plan_sql(&db, TRIANGLE_SQL, &params)?;
    let bl = rg_exec::plan_sql(&db, TRIANGLE_BASELINE_SQL, &params)?;
    let (mut te, mut tj) = (Vec::new(), Vec::new());
    let (mut ce, mut cj) = (0, 0);
    for _ in 0..runs.max(1) {
        let t = Instant::now();
        ce = execute(&ex, &db, &opts)?.len();
        te.push(ms(t));
        let t = Instant::now();
        cj = execute(&bl, &db, &opts)?.len();
        tj.push(ms(t));
    }
    Ok(TriangleReport {
        edges,
        explore_count: ce,
        join_count: cj,
        explore_ms: median(te),
        join_ms: median(tj),
        explore_plan: ex.plan.shape(),
        join_plan: bl.plan.shape(),
    })
}

pub fn triangle_table(r: &TriangleReport, timing: bool) -> Table {
    let mut t = Table::new(vec!["plan".into(), "count".into(), "median_ms".into()]);
    t.rows.push(vec![PlainValue::Str("exploration".into()), PlainValue::Int(r.explore_count as i64), time_cell(r.explore_ms, timing)]);
    t.rows.push(vec![PlainValue::Str("edge_hash_join".into()), PlainValue::Int(r.join_count as i64), time_cell(r.join_ms, timing)]);
    t
}

/// Fixed pattern workload over a labeled random graph.
pub const PATTERNS: [(&str, &str); 6] = [
    ("path2", "select a.id, c.id from g match (a: L0)-[e: L0]->(b)-[f: L1]->(c)"),
    ("triangle", "select a.id, b.id, c.id from g match (a)-[e]->(b)-[f]->(c)-[h]->(a)"),
    ("cycle4", "select a.id from g match (a)-[e]->(b)-[f]->(c)-[h]->(d)-[k]->(a)"),
    ("star3", "select a.id from g match (a: L1)-[e]->(b) (a)-[f]->(c) (a)-[h]->(d) where b.w < c.w and c.w < d.w"),
    ("two_cycle", "select a.id, b.id from g match (a)-[e]->(b)-[f]->(a) where e.ts < f.ts"),
    ("diamond", "select a.id, d.id from g match (a)-[e]->(b)-[f]->(d) (a)-[h]->(c)-[k]->(d)"),
];

pub fn pattern_graph(seed: u64) -> PropertyGraph {
    gen::random_labeled(2000, 10000, 2, 2, seed)
}

fn run_workload(db: &Database, plans: &[Planned], chunk_size: usize) -> Result<(Vec<usize>, f64), CliError> {
    let t = Instant::now();
    let mut counts = Vec::new();
    for p in plans {
        counts.push(execute(p, db, &ExecOptions { chunk_size })?.len());
    }
    Ok((counts, ms(t)))
}

fn plan_all(db: &Database, params: CostParams, opts: PlannerOptions, canonical: bool) -> Result<Vec<Planned>, CliError> {
    let stats = db.planner_stats();
    PATTERNS
        .iter()
        .map(|(_, sql)| {
            let q = build_logical(&parse(sql)?, db)?;
            Ok(if canonical { canonical_plan(&q, &stats, params)? } else { optimize_with(&q, &stats, params, opts)? })
        })
        .collect()
}

pub fn patterns(seed: u64, params: CostParams, chunk_size: usize, timing: bool) -> Result<Table, CliError> {
    let mut db = Database::new();
    db.add_graph("g", RgGraphStore::convert(&pattern_graph(seed), StoreConfig::default())?);
    let mut t = Table::new(vec!["query".into(), "rows".into(), "plan_ms".into(), "exec_ms".into()]);
    for (name, sql) in PATTERNS {
        let s = Instant::now();
        let p = rg_exec::plan_sql(&db, sql, &params)?;
        let plan_ms = ms(s);
        let s = Instant::now();
        let n = execute(&p, &db, &ExecOptions { chunk_size })?.len();
        t.rows.push(vec![PlainValue::Str(name.into()), PlainValue::Int(n as i64), time_cell(plan_ms, timing), time_cell(ms(s), timing)]);
    }
    Ok(t)
}

/// Switches one component off at a time and reruns the pattern workload.
pub fn ablation(seed: u64, params: CostParams, chunk_size: usize, timing: bool) -> Result<Table, CliError> {
    let mut db = Database::new();
    db.add_graph("g", RgGraphStore::convert(&pattern_graph(seed), StoreConfig::default())?);
    let full = plan_all(&db, params, PlannerOptions::default(), false)?;
    let (base, full_ms) = run_workload(&db, &full, chunk_size)?;
    let mut t = Table::new(vec!["feature".into(), "full_ms".into(), "ablated_ms".into(), "same_result".into()]);
    let variants = [
        ("hash_ops", PlannerOptions { hash: false, ..Default::default() }, false),
        ("intersective", PlannerOptions { intersective: false, ..Default::default() }, false),
        ("optimizer", PlannerOptions::default(), true),
    ];
    for (name, opts, canonical) in variants {
        let plans = plan_all(&db, params, opts, canonical)?;
        let (counts, abl_ms) = run_workload(&db, &plans, chunk_size)?;
        t.rows.push(vec![
            PlainValue::Str(name.into()),
            time_cell(full_ms, timing),
            time_cell(abl_ms, timing),
            PlainValue::Bool(counts == base),
        ]);
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryRow {
    pub topology: &'static str,
    pub policy: FragmentPolicy,
    pub storage_bytes: u64,
    pub data_bytes: u64,
    /// Bytes moved by reallocation while inserting 1‰ new edges.
    pub moved_bytes: u64,
}

pub fn memory_config(policy: FragmentPolicy) -> StoreConfig {
    StoreConfig { block_size: 64 * 1024, segment_threshold: 8 * 1024, ..StoreConfig::default() }.with_policy(policy)
}

/// Degree exponent of the skewed toy, mid-range for real networks. Storage
/// overhead of the heterogeneous policy grows with skew: fragments just
/// over the threshold each leave most of a 64 KB block empty.
pub const POWER_LAW_EXPONENT: f64 = 2.5;

pub fn topologies(seed: u64) -> Vec<(&'static str, PropertyGraph)> {
    vec![
        ("uniform", gen::uniform(20_000, 100_000, seed)),
        ("star", gen::star(20_000)),
        ("power_law", gen::power_law(20_000, 100_000, POWER_LAW_EXPONENT, seed)),
    ]
}

/// Storage under each fragment policy, then the movement caused by
/// inserting 1‰ random edges.
pub fn memory(seed: u64) -> Result<Vec<MemoryRow>, CliError> {
    let mut rows = Vec::new();
    for (name, g) in topologies(seed) {
        let k = (g.edges.len() / 1000).max(1);
        let delta = GraphDelta { add_edges: gen::random_new_edges(&g, k, seed ^ 0x5eed), ..GraphDelta::default() };
        for policy in [FragmentPolicy::Heterogeneous, FragmentPolicy::PureSegment, FragmentPolicy::PureBlock] {
            let mut s = RgGraphStore::convert(&g, memory_config(policy))?;
            let (storage_bytes, data_bytes) = (s.store.storage_bytes(), s.store.data_bytes());
            let report = s.apply_delta(&delta)?;
            rows.push(MemoryRow { topology: name, policy, storage_bytes, data_bytes, moved_bytes: report.moved_bytes });
        }
    }
    Ok(rows)
}

pub fn memory_table(rows: &[MemoryRow]) -> Table {
    let mut t = Table::new(["topology", "policy", "storage_bytes", "data_bytes", "moved_bytes"].map(String::from).to_vec());
    for r in rows {
        let policy = match r.policy {
            FragmentPolicy::Heterogeneous => "hetero",
            FragmentPolicy::PureSegment => "pure_segment",
            FragmentPolicy::PureBlock => "pure_block",
        };
        t.rows.push(vec![
            PlainValue::Str(r.topology.into()),
            PlainValue::Str(policy.into()),
            PlainValue::Int(r.storage_bytes as i64),
            PlainValue::Int(r.data_bytes as i64),
            PlainValue::Int(r.moved_bytes as i64),
        ]);
    }
    t
}
