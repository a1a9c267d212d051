use std::collections::BTreeMap;

use rg_graph::{GraphStats, RgGraphStore, TableStats};
use rg_planner::{Overrides, PlannerStats};
use rg_sqldelta::Catalog;
use rg_store::Table;

/// Named graphs (each in its own store) and plain relations.
#[derive(Default)]
pub struct Database {
    pub graphs: BTreeMap<String, RgGraphStore>,
    pub tables: BTreeMap<String, Table>,
    /// Graph used by `match` clauses without `from`.
    pub default_graph: Option<String>,
    /// Injected statistics, applied on top of collected ones.
    pub overrides: Overrides,
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_graph(&mut self, name: &str, g: RgGraphStore) {
        self.graphs.insert(name.to_string(), g);
        if self.default_graph.is_none() {
            self.default_graph = Some(name.to_string());
        }
    }

    pub fn add_table(&mut self, name: &str, t: Table) {
        self.tables.insert(name.to_string(), t);
    }

    pub fn planner_stats(&self) -> PlannerStats {
        PlannerStats {
            graphs: self.graphs.iter().map(|(n, g)| (n.clone(), GraphStats::collect(g))).collect(),
            tables: self.tables.iter().map(|(n, t)| (n.clone(), TableStats::collect(t))).collect(),
            overrides: self.overrides.clone(),
            ..PlannerStats::default()
        }
    }
}

impl Catalog for Database {
    fn table_columns(&self, name: &str) -> Option<Vec<String>> {
        self.tables.get(name).map(|t| t.columns.clone())
    }

    fn is_graph(&self, name: &str) -> bool {
        self.graphs.contains_key(name)
    }

    fn default_graph(&self) -> Option<String> {
        self.default_graph.clone()
    }
}
