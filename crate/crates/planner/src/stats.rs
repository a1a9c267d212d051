use std::collections::{BTreeMap, BTreeSet};

use rg_graph::{GraphStats, TableStats};
use rg_querygraph::{members, NodeId, NodeRole, NodeSet, QueryGraph};
use rg_sqldelta::{BoolExpr, CmpOp, LeafKind, RefAttr, Scalar};

use crate::PlanError;

/// Values that replace estimates, keyed by alias names.
///
/// File format, one `key = value` per line, `#` starts a comment:
///
/// ```text
/// card(D_V^0) = 1000            # base cardinality of an alias
/// card(D_V^0, D_o^0) = 1e4      # result size of a node set (consumed helpers included)
/// deg(D_V^0.out_L) = 100        # mean number of tuples one reference resolves to
/// distinct(D.uid) = 1000
/// ```
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub card: BTreeMap<BTreeSet<String>, f64>,
    pub degree: BTreeMap<(String, String), f64>,
    pub distinct: BTreeMap<(String, String), f64>,
}

fn split_col(s: &str) -> Option<(String, String)> {
    let (a, c) = s.trim().rsplit_once('.')?;
    Some((a.trim().to_string(), c.trim().to_string()))
}

impl Overrides {
    pub fn parse(text: &str) -> Result<Overrides, PlanError> {
        let mut o = Overrides::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let bad = |m: &str| PlanError::Stats(format!("line {}: {m}: `{raw}`", no + 1));
            let (key, val) = line.split_once('=').ok_or_else(|| bad("expected `key = value`"))?;
            let v: f64 = val.trim().parse().map_err(|_| bad("value is not a number"))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(bad("value must be a non-negative number"));
            }
            let key = key.trim();
            let (kind, rest) = key.split_once('(').ok_or_else(|| bad("expected card(..), deg(..) or distinct(..)"))?;
            let args = rest.strip_suffix(')').ok_or_else(|| bad("missing `)`"))?;
            match kind.trim() {
                "card" => {
                    let set: BTreeSet<String> = args.split(',').map(|a| a.trim().to_string()).filter(|a| !a.is_empty()).collect();
                    if set.is_empty() {
                        return Err(bad("empty alias list"));
                    }
                    o.card.insert(set, v);
                }
                "deg" => {
                    o.degree.insert(split_col(args).ok_or_else(|| bad("expected alias.column"))?, v);
                }
                "distinct" => {
                    o.distinct.insert(split_col(args).ok_or_else(|| bad("expected alias.column"))?, v);
                }
                other => return Err(bad(&format!("unknown statistic `{other}`"))),
            }
        }
        Ok(o)
    }
}

/// Everything the estimator reads.
#[derive(Clone, Debug)]
pub struct PlannerStats {
    pub graphs: BTreeMap<String, GraphStats>,
    pub tables: BTreeMap<String, TableStats>,
    pub overrides: Overrides,
    /// Used when nothing is known about a relation.
    pub default_card: f64,
    pub default_degree: f64,
}

impl Default for PlannerStats {
    fn default() -> Self {
        PlannerStats {
            graphs: BTreeMap::new(),
            tables: BTreeMap::new(),
            overrides: Overrides::default(),
            default_card: 1000.0,
            default_degree: 10.0,
        }
    }
}

const RANGE_SEL: f64 = 1.0 / 3.0;

/// Estimates for one query graph. Delta leaves carry their cardinality in
/// `leaf_cards`, filled once their subplans are optimized.
pub struct Estimator<'a> {
    pub stats: &'a PlannerStats,
    pub g: &'a QueryGraph,
    pub leaf_cards: &'a BTreeMap<NodeId, f64>,
}

impl Estimator<'_> {
    fn graph(&self) -> Option<&GraphStats> {
        let name = &self.g.pattern.as_ref()?.graph;
        self.stats.graphs.get(name)
    }

    fn rel_name(&self, n: NodeId) -> Option<&'static str> {
        match self.g.nodes[n].role {
            NodeRole::Vertex(_) => Some("D_V"),
            NodeRole::OutEdge(_) => Some("D_out"),
            NodeRole::InEdge(_) => Some("D_in"),
            NodeRole::Relation => None,
        }
    }

    /// Fraction of a graph relation's tuples carrying the node's label.
    fn label_fraction(&self, n: NodeId) -> f64 {
        let (Some(rel), Some(label)) = (self.rel_name(n), self.g.nodes[n].leaf.label.as_deref()) else { return 1.0 };
        match self.graph() {
            Some(gs) if gs.card(rel) > 0 => gs.label_count(rel, label) as f64 / gs.card(rel) as f64,
            Some(_) => 0.0,
            None => 1.0,
        }
    }

    /// Unfiltered size of the relation behind a node.
    fn relation_card(&self, n: NodeId) -> f64 {
        let node = &self.g.nodes[n];
        if let Some(c) = self.leaf_cards.get(&n) {
            return *c;
        }
        match (&node.leaf.kind, self.rel_name(n)) {
            (_, Some(rel)) => self.graph().map_or(self.stats.default_card, |gs| gs.card(rel) as f64),
            (LeafKind::Table(t), None) => self.stats.tables.get(t).map_or(self.stats.default_card, |s| s.card as f64),
            _ => self.stats.default_card,
        }
    }

    /// Base cardinality of a node with its label and filters applied.
    pub fn base_card(&self, n: NodeId) -> f64 {
        let alias = &self.g.nodes[n].alias;
        if let Some(c) = self.stats.overrides.card.get(&BTreeSet::from([alias.clone()])) {
            return *c;
        }
        self.relation_card(n) * self.label_fraction(n) * self.node_filter_sel(n)
    }

    fn node_filter_sel(&self, n: NodeId) -> f64 {
        self.g.nodes[n].filters.iter().map(|f| self.selectivity(f)).product()
    }

    /// Selectivity of arriving at node `n` by exploration: its label and filters.
    pub fn arrival_sel(&self, n: NodeId) -> f64 {
        self.label_fraction(n) * self.node_filter_sel(n)
    }

    /// Mean number of tuples `alias.attr` resolves to.
    pub fn degree(&self, n: NodeId, attr: RefAttr) -> f64 {
        let alias = &self.g.nodes[n].alias;
        if let Some(d) = self.stats.overrides.degree.get(&(alias.clone(), attr.name().to_string())) {
            return *d;
        }
        match attr {
            RefAttr::DstL | RefAttr::SrcL => 1.0,
            RefAttr::OutL | RefAttr::InL => match self.graph() {
                Some(gs) => gs.degree("D_V", attr.name(), self.g.nodes[n].leaf.label.as_deref()),
                None => self.stats.default_degree,
            },
        }
    }

    /// Distinct values of a column of the alias.
    pub fn distinct(&self, alias: &str, column: &str) -> f64 {
        if let Some(d) = self.stats.overrides.distinct.get(&(alias.to_string(), column.to_string())) {
            return *d;
        }
        let Some(n) = self.g.node(alias) else { return self.stats.default_card };
        let card = match self.stats.overrides.card.get(&BTreeSet::from([alias.to_string()])) {
            Some(c) => *c,
            None => self.relation_card(n) * self.label_fraction(n),
        }
        .max(1.0);
        let node = &self.g.nodes[n];
        let known = match &node.leaf.kind {
            LeafKind::Vertex | LeafKind::OutEdge | LeafKind::InEdge if matches!(column, "vid" | "eid") => Some(card),
            LeafKind::Vertex | LeafKind::OutEdge | LeafKind::InEdge => node.leaf.label.as_ref().and_then(|l| {
                let prefix = if matches!(node.leaf.kind, LeafKind::Vertex) { "V_A" } else { "E_A" };
                let rs = self.graph()?.relations.get(&format!("{prefix}:{l}"))?;
                rs.distinct.get(column).map(|d| *d as f64)
            }),
            LeafKind::Table(t) => self.stats.tables.get(t).and_then(|s| s.distinct.get(column)).map(|d| *d as f64),
            LeafKind::Delta(_) => None,
        };
        known.unwrap_or(card).clamp(1.0, card)
    }

    pub fn selectivity(&self, e: &BoolExpr) -> f64 {
        match e {
            BoolExpr::And(v) => v.iter().map(|e| self.selectivity(e)).product(),
            BoolExpr::Or(v) => v.iter().map(|e| self.selectivity(e)).sum::<f64>().min(1.0),
            BoolExpr::Cmp { left, op, right } => {
                let d = |s: &Scalar| match s {
                    Scalar::Col(c) => self.distinct(&c.alias, &c.column),
                    Scalar::Lit(_) => 1.0,
                };
                match op {
                    CmpOp::Eq => 1.0 / d(left).max(d(right)),
                    CmpOp::Ne => 1.0 - 1.0 / d(left).max(d(right)),
                    _ => RANGE_SEL,
                }
            }
        }
    }

    /// Overridden result size of a node set (consumed helpers included).
    pub fn set_override(&self, s: NodeSet) -> Option<f64> {
        if self.stats.overrides.card.is_empty() {
            return None;
        }
        let key: BTreeSet<String> = members(s).map(|n| self.g.nodes[n].alias.clone()).collect();
        self.stats.overrides.card.get(&key).copied()
    }
}
