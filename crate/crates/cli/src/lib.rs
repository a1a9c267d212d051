//! The `rg` shell. A session holds named graphs and relations plus the
//! configuration; `Session::run` takes one statement and returns its
//! printed output.

pub mod bench;
mod session_io;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rg_exec::{execute, Database, ExecError, ExecOptions, DEFAULT_CHUNK_SIZE};
use rg_graph::{io, GraphError, GraphStats, RgGraphStore};
use rg_planner::{optimize_with, CostParams, Overrides, PlanError, Planned, PlannerOptions};
use rg_sqldelta::{build_logical, parse};
use rg_store::{StoreConfig, StoreError, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: parse, bind, planning, data or configuration errors.
    #[error("{0}")]
    User(String),
    /// Broken invariant inside the engine.
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

macro_rules! user_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::User(e.to_string())
            }
        }
    )*};
}

user_error!(ExecError, GraphError, PlanError, StoreError, std::io::Error, rg_sqldelta::ParseError, rg_sqldelta::BindError);

fn user(msg: impl Into<String>) -> CliError {
    CliError::User(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Tsv,
    Table,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "tsv" => Ok(Format::Tsv),
            "table" => Ok(Format::Table),
            _ => Err(user(format!("unknown format `{s}` (csv, tsv or table)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
            Format::Table => "table",
        })
    }
}

pub fn render(t: &Table, f: Format) -> String {
    match f {
        Format::Csv => t.to_delimited(','),
        Format::Tsv => t.to_delimited('\t'),
        Format::Table => t.to_pretty(),
    }
}

#[derive(Clone, Debug)]
pub struct Config {
    /// Used for graphs loaded after it is set.
    pub store: StoreConfig,
    pub params: CostParams,
    pub planner: PlannerOptions,
    /// Off: plans follow query-graph node order instead of the cost model.
    pub optimizer: bool,
    pub chunk_size: usize,
    pub format: Format,
    pub timing: bool,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            store: StoreConfig::default(),
            params: CostParams::default(),
            planner: PlannerOptions::default(),
            optimizer: true,
            chunk_size: DEFAULT_CHUNK_SIZE,
            format: Format::Csv,
            timing: true,
            seed: 42,
        }
    }
}

fn on_off(v: &str) -> Result<bool, CliError> {
    match v {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        _ => Err(user(format!("expected on or off, got `{v}`"))),
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| user(format!("bad value `{v}` for {key}")))
}

impl Config {
    pub const KEYS: [&'static str; 11] = [
        "tau",
        "kappa",
        "chunk_size",
        "block_size",
        "segment_threshold",
        "format",
        "timing",
        "hash",
        "intersective",
        "optimizer",
        "seed",
    ];

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "tau" => self.params.tau.to_string(),
            "kappa" => self.params.kappa.to_string(),
            "chunk_size" => self.chunk_size.to_string(),
            "block_size" => self.store.block_size.to_string(),
            "segment_threshold" => self.store.segment_threshold.to_string(),
            "format" => self.format.to_string(),
            "timing" => if self.timing { "on" } else { "off" }.into(),
            "hash" => if self.planner.hash { "on" } else { "off" }.into(),
            "intersective" => if self.planner.intersective { "on" } else { "off" }.into(),
            "optimizer" => if self.optimizer { "on" } else { "off" }.into(),
            "seed" => self.seed.to_string(),
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "tau" => {
                let tau: f64 = num(key, v)?;
                if !(0.0..=1.0).contains(&tau) {
                    return Err(user("tau must lie in [0, 1]"));
                }
                self.params.tau = tau;
            }
            "kappa" => self.params.kappa = num(key, v)?,
            "chunk_size" => {
                let c: usize = num(key, v)?;
                if c == 0 {
                    return Err(user("chunk_size must be positive"));
                }
                self.chunk_size = c;
            }
            "block_size" | "segment_threshold" => {
                let mut cfg = self.store.clone();
                let n: u32 = num(key, v)?;
                if key == "block_size" {
                    cfg.block_size = n;
                } else {
                    cfg.segment_threshold = n;
                }
                cfg.validate()?;
                self.store = cfg;
            }
            "format" => self.format = v.parse()?,
            "timing" => self.timing = on_off(v)?,
            "hash" => self.planner.hash = on_off(v)?,
            "intersective" => self.planner.intersective = on_off(v)?,
            "optimizer" => self.optimizer = on_off(v)?,
            "seed" => self.seed = num(key, v)?,
            _ => return Err(user(format!("unknown setting `{key}`"))),
        }
        Ok(())
    }
}

#[derive(Default)]
pub struct Session {
    pub db: Database,
    pub cfg: Config,
}

/// Splits input into statements. Dot commands end at the end of their
/// line, except `.explain`, which like SQL runs to a `;` (or end of input).
#[derive(Default)]
pub struct StatementReader {
    pending: String,
}

impl StatementReader {
    pub fn push_line(&mut self, line: &str) -> Option<String> {
        let t = line.trim();
        if self.pending.is_empty() {
            if t.is_empty() || t.starts_with("--") || t.starts_with('#') {
                return None;
            }
            if t.starts_with('.') && !t.starts_with(".explain") {
                return Some(t.trim_end_matches(';').trim().to_string());
            }
        }
        if !self.pending.is_empty() {
            self.pending.push('\n');
        }
        self.pending.push_str(line.trim_end());
        if t.ends_with(';') {
            return self.finish();
        }
        None
    }

    pub fn finish(&mut self) -> Option<String> {
        let s = std::mem::take(&mut self.pending);
        let s = s.trim().trim_end_matches(';').trim();
        (!s.is_empty()).then(|| s.to_string())
    }

    pub fn is_pending(&self) -> bool {
        !self.pending.is_empty()
    }
}

pub fn split_statements(text: &str) -> Vec<String> {
    let mut r = StatementReader::default();
    let mut out: Vec<String> = text.lines().filter_map(|l| r.push_line(l)).collect();
    out.extend(r.finish());
    out
}

fn args(rest: &str) -> Vec<&str> {
    rest.split_whitespace().collect()
}

fn want(cmd: &str, a: &[&str], min: usize, max: usize, usage: &str) -> Result<(), CliError> {
    if a.len() < min || a.len() > max {
        return Err(user(format!("usage: {cmd} {usage}")));
    }
    Ok(())
}

impl Session {
    pub fn new(cfg: Config) -> Session {
        Session { db: Database::new(), cfg }
    }

    /// Runs a whole script; stops at the first error.
    pub fn run_script(&mut self, text: &str, out: &mut impl std::io::Write) -> Result<(), CliError> {
        for stmt in split_statements(text) {
            let s = self.run(&stmt)?;
            out.write_all(s.as_bytes())?;
        }
        Ok(())
    }

    pub fn plan(&self, sql: &str) -> Result<Planned, CliError> {
        let q = build_logical(&parse(sql)?, &self.db)?;
        let stats = self.db.planner_stats();
        let nested = q.plan.leaves().iter().any(|l| matches!(l.kind, rg_sqldelta::LeafKind::Delta(_)));
        if !self.cfg.optimizer && !nested {
            return Ok(bench::canonical_plan(&q, &stats, self.cfg.params)?);
        }
        Ok(optimize_with(&q, &stats, self.cfg.params, self.cfg.planner)?)
    }

    pub fn query(&self, sql: &str) -> Result<Table, CliError> {
        let p = self.plan(sql)?;
        Ok(execute(&p, &self.db, &ExecOptions { chunk_size: self.cfg.chunk_size })?)
    }

    fn graph(&self, name: &str) -> Result<&RgGraphStore, CliError> {
        self.db.graphs.get(name).ok_or_else(|| user(format!("no graph named `{name}`")))
    }

    /// One statement in, printed output out (newline-terminated).
    pub fn run(&mut self, stmt: &str) -> Result<String, CliError> {
        let stmt = stmt.trim();
        if !stmt.starts_with('.') {
            return self.sql(stmt);
        }
        let (cmd, rest) = stmt.split_once(char::is_whitespace).unwrap_or((stmt, ""));
        let rest = rest.trim();
        let a = args(rest);
        match cmd {
            ".load_graph" => {
                want(cmd, &a, 3, 3, "NAME VERTICES.csv EDGES.csv")?;
                let g = io::load_graph(Path::new(a[1]), Path::new(a[2]))?;
                let s = RgGraphStore::convert(&g, self.cfg.store.clone())?;
                let msg = format!("graph {}: {} vertices, {} edges\n", a[0], s.vertex_count(), s.edge_count());
                self.db.add_graph(a[0], s);
                Ok(msg)
            }
            ".load_table" => {
                want(cmd, &a, 2, 2, "NAME FILE.csv")?;
                let t = io::load_table(Path::new(a[1]))?;
                let msg = format!("table {}: {} rows, columns {}\n", a[0], t.len(), t.columns.join(","));
                self.db.add_table(a[0], t);
                Ok(msg)
            }
            ".stats" => {
                want(cmd, &a, 1, 1, "NAME")?;
                if let Some(g) = self.db.graphs.get(a[0]) {
                    Ok(format!("vertices {}\nedges {}\n{}", g.vertex_count(), g.edge_count(), GraphStats::collect(g)))
                } else if let Some(t) = self.db.tables.get(a[0]) {
                    Ok(format!("rows {}\ncolumns {}\n", t.len(), t.columns.join(",")))
                } else {
                    Err(user(format!("no graph or table named `{}`", a[0])))
                }
            }
            ".overrides" => {
                want(cmd, &a, 1, 1, "FILE|none")?;
                if a[0] == "none" {
                    self.db.overrides = Overrides::default();
                    return Ok("statistics overrides cleared\n".into());
                }
                let o = Overrides::parse(&std::fs::read_to_string(a[0])?)?;
                let n = o.card.len() + o.degree.len() + o.distinct.len();
                self.db.overrides = o;
                Ok(format!("{n} statistics overrides loaded\n"))
            }
            ".explain" => {
                if rest.is_empty() {
                    return Err(user("usage: .explain QUERY"));
                }
                let p = self.plan(rest)?;
                Ok(format!("cost={:.1}\n{}", p.cost(), p.explain()))
            }
            ".browse" => {
                want(cmd, &a, 2, 3, "GRAPH VID|all [DEPTH|all]")?;
                let g = self.graph(a[0])?;
                let roots: Option<Vec<i64>> = match a[1] {
                    "all" => None,
                    v => Some(vec![num("vid", v)?]),
                };
                let depth = match a.get(2) {
                    None => Some(1),
                    Some(&"all") => None,
                    Some(d) => Some(num("depth", d)?),
                };
                let sub = g.browse(roots.as_deref(), depth)?;
                let mut buf = Vec::new();
                io::write_vertices(&mut buf, &sub.vertices)?;
                buf.push(b'\n');
                io::write_edges(&mut buf, &sub.edges)?;
                String::from_utf8(buf).map_err(|e| CliError::Internal(e.to_string()))
            }
            ".update" => {
                want(cmd, &a, 2, 2, "GRAPH DELTA_FILE")?;
                let d = io::parse_delta(&std::fs::read_to_string(a[1])?)?;
                let g = self.db.graphs.get_mut(a[0]).ok_or_else(|| user(format!("no graph named `{}`", a[0])))?;
                let r = g.apply_delta(&d)?;
                Ok(format!(
                    "graph {}: {} vertices, {} edges; moved_bytes={} new_fragments={} promotions={}\n",
                    a[0],
                    g.vertex_count(),
                    g.edge_count(),
                    r.moved_bytes,
                    r.new_fragments,
                    r.promotions
                ))
            }
            ".bench" => self.bench(&a),
            ".set" => {
                if a.is_empty() {
                    return Ok(Config::KEYS.iter().map(|k| format!("{k} = {}\n", self.cfg.get(k).unwrap())).collect());
                }
                want(cmd, &a, 2, 2, "KEY VALUE")?;
                self.cfg.set(a[0], a[1])?;
                Ok(format!("{} = {}\n", a[0], self.cfg.get(a[0]).unwrap()))
            }
            ".save" => {
                want(cmd, &a, 1, 1, "DIR")?;
                session_io::save(self, Path::new(a[0]))?;
                Ok(format!("saved {} graphs, {} tables to {}\n", self.db.graphs.len(), self.db.tables.len(), a[0]))
            }
            ".open" => {
                want(cmd, &a, 1, 1, "DIR")?;
                *self = session_io::open(Path::new(a[0]), self.cfg.clone())?;
                Ok(format!("opened {} graphs, {} tables from {}\n", self.db.graphs.len(), self.db.tables.len(), a[0]))
            }
            ".help" => Ok(HELP.into()),
            _ => Err(user(format!("unknown command `{cmd}` (try .help)"))),
        }
    }

    fn sql(&self, sql: &str) -> Result<String, CliError> {
        let t0 = Instant::now();
        let t = self.query(sql)?;
        let mut s = render(&t, self.cfg.format);
        let ms = t0.elapsed().as_secs_f64() * 1e3;
        match (self.cfg.format, self.cfg.timing) {
            // the table layout already ends with its row count
            (Format::Table, true) => s.push_str(&format!("-- {ms:.2} ms\n")),
            (Format::Table, false) => {}
            (_, true) => s.push_str(&format!("-- {} rows in {ms:.2} ms\n", t.len())),
            (_, false) => s.push_str(&format!("-- {} rows\n", t.len())),
        }
        Ok(s)
    }

    fn bench(&self, a: &[&str]) -> Result<String, CliError> {
        let Some(&preset) = a.first() else {
            return Err(user(format!("usage: .bench {}", bench::PRESETS.join("|"))));
        };
        let mut kv = std::collections::BTreeMap::new();
        for x in &a[1..] {
            let (k, v) = x.split_once('=').ok_or_else(|| user(format!("expected key=value, got `{x}`")))?;
            kv.insert(k, v);
        }
        let get = |k: &str, d: usize| -> Result<usize, CliError> { kv.get(k).map_or(Ok(d), |v| num(k, v)) };
        let (seed, timing, chunk) = (self.cfg.seed, self.cfg.timing, self.cfg.chunk_size);
        let t = match preset {
            "triangle" => {
                let edges = get("edges", 100_000)?;
                let r = bench::triangle(get("vertices", edges / 10)?, edges, get("runs", 5)?, seed, chunk)?;
                bench::triangle_table(&r, timing)
            }
            "patterns" => bench::patterns(seed, self.cfg.params, chunk, timing)?,
            "ablation" => bench::ablation(seed, self.cfg.params, chunk, timing)?,
            "memory" => bench::memory_table(&bench::memory(seed)?),
            _ => return Err(user(format!("unknown preset `{preset}` ({})", bench::PRESETS.join(", ")))),
        };
        Ok(render(&t, self.cfg.format))
    }
}

pub const HELP: &str = "\
.load_graph NAME VERTICES.csv EDGES.csv   load and convert a property graph
.load_table NAME FILE.csv                 load a plain relation
.stats NAME                               counts and planner statistics
.overrides FILE|none                      inject planner statistics
.explain QUERY;                           show the chosen plan and its cost
QUERY;                                    run a query
.browse GRAPH VID|all [DEPTH|all]         print a neighbourhood as CSV
.update GRAPH DELTA_FILE                  apply a batch update
.bench triangle|patterns|ablation|memory [key=value ...]
.set [KEY VALUE]                          show or change settings
.save DIR / .open DIR                     write or read a session
";
