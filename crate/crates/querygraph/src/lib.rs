//! The extended query graph: one node per alias of an extended relation,
//! explore edges for reference columns, value edges for plain conditions,
//! duplicate pairs for the two directions of each pattern edge.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rg_sqldelta::{
    BoolExpr, BoundQuery, ColumnRef, CmpOp, Leaf, LeafKind, LogicalPlan, PatternInfo, RefAttr, Scalar, END_VID,
};
use thiserror::Error;

pub type NodeId = usize;
/// Node sets as bit masks; queries are limited to 64 aliases.
pub type NodeSet = u64;

pub const MAX_NODES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("query has {0} aliases; at most 64 are supported")]
    TooManyNodes(usize),
    #[error("query graph: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeRole {
    Vertex(usize),
    OutEdge(usize),
    InEdge(usize),
    Relation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QNode {
    pub alias: String,
    pub leaf: Leaf,
    pub role: NodeRole,
    /// Single-alias conditions besides the label test.
    pub filters: Vec<BoolExpr>,
    /// Edge node of a pattern edge nobody reads attributes of: it may stand
    /// in an explorative condition instead of being scanned.
    pub condition_only: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EdgeKind {
    /// `a.attr` references tuples of `b`.
    Explore { attr: RefAttr, pattern_edge: usize },
    /// Undirected. Same-pointer conditions are value edges on the end
    /// reference fields of two edge nodes; they only feed explorative
    /// conditions and are left out of neighborhoods and join predicates.
    Value { pred: BoolExpr, same_pointer: bool },
    Dup,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QEdge {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: EdgeKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryGraph {
    pub nodes: Vec<QNode>,
    pub edges: Vec<QEdge>,
    /// Conditions over three or more aliases, applied on top.
    pub residual: Vec<BoolExpr>,
    pub outputs: Vec<(ColumnRef, String)>,
    pub columns: Vec<String>,
    pub pattern: Option<PatternInfo>,
    by_alias: BTreeMap<String, NodeId>,
}

pub fn bit(n: NodeId) -> NodeSet {
    1u64 << n
}

pub fn members(s: NodeSet) -> impl Iterator<Item = NodeId> {
    (0..64).filter(move |i| s & (1u64 << i) != 0)
}

impl QueryGraph {
    pub fn node(&self, alias: &str) -> Option<NodeId> {
        self.by_alias.get(alias).copied()
    }

    pub fn all(&self) -> NodeSet {
        if self.nodes.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.nodes.len()) - 1
        }
    }

    /// Nodes adjacent to `s` over explore and plain value edges.
    pub fn neighborhood(&self, s: NodeSet) -> NodeSet {
        let mut out = 0;
        for e in &self.edges {
            if !self.connects(e) {
                continue;
            }
            if s & bit(e.a) != 0 {
                out |= bit(e.b);
            }
            if s & bit(e.b) != 0 {
                out |= bit(e.a);
            }
        }
        out & !s
    }

    fn connects(&self, e: &QEdge) -> bool {
        match &e.kind {
            EdgeKind::Explore { .. } => true,
            EdgeKind::Value { same_pointer, .. } => !same_pointer,
            EdgeKind::Dup => false,
        }
    }

    pub fn is_connected(&self, s: NodeSet) -> bool {
        if s == 0 {
            return false;
        }
        let mut seen = bit(s.trailing_zeros() as usize);
        loop {
            let grow = (seen | self.neighborhood(seen)) & s;
            if grow == seen {
                return seen == s;
            }
            seen = grow;
        }
    }

    pub fn dup_partner(&self, n: NodeId) -> Option<NodeId> {
        self.edges.iter().find_map(|e| match e.kind {
            EdgeKind::Dup if e.a == n => Some(e.b),
            EdgeKind::Dup if e.b == n => Some(e.a),
            _ => None,
        })
    }

    /// Explore edges with one end in each set, as (edge index, from, to).
    pub fn crossing_explores(&self, s1: NodeSet, s2: NodeSet) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| {
                let e = &self.edges[i];
                matches!(e.kind, EdgeKind::Explore { .. })
                    && ((s1 & bit(e.a) != 0 && s2 & bit(e.b) != 0) || (s2 & bit(e.a) != 0 && s1 & bit(e.b) != 0))
            })
            .collect()
    }

    /// Plain value conditions with one end in each set.
    pub fn crossing_values(&self, s1: NodeSet, s2: NodeSet) -> Vec<&BoolExpr> {
        self.edges
            .iter()
            .filter_map(|e| match &e.kind {
                EdgeKind::Value { pred, same_pointer: false }
                    if (s1 & bit(e.a) != 0 && s2 & bit(e.b) != 0) || (s2 & bit(e.a) != 0 && s1 & bit(e.b) != 0) =>
                {
                    Some(pred)
                }
                _ => None,
            })
            .collect()
    }

    /// Deterministic text form for golden tests and EXPLAIN.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let mut parts: Vec<String> = Vec::new();
            if let Some(l) = &n.leaf.label {
                parts.push(format!("label={l}"));
            }
            parts.extend(n.filters.iter().map(|f| f.to_string()));
            let filter = if parts.is_empty() { "-".to_string() } else { parts.join(" and ") };
            let _ = write!(out, "NODE {} filter={filter}", n.alias);
            if n.condition_only {
                out.push_str(" condition-only");
            }
            out.push('\n');
        }
        for e in &self.edges {
            let (a, b) = (&self.nodes[e.a].alias, &self.nodes[e.b].alias);
            let _ = match &e.kind {
                EdgeKind::Explore { attr, .. } => writeln!(out, "EDGE explore {} {a}→{b}", attr.name()),
                EdgeKind::Value { pred, same_pointer: true } => writeln!(out, "EDGE value same-pointer({pred}) {a}→{b}"),
                EdgeKind::Value { pred, .. } => writeln!(out, "EDGE value {pred} {a}→{b}"),
                EdgeKind::Dup => writeln!(out, "EDGE duplicate - {a}→{b}"),
            };
        }
        for r in &self.residual {
            let _ = writeln!(out, "RESIDUAL {r}");
        }
        out
    }
}

fn col_eq(a: ColumnRef, b: ColumnRef) -> BoolExpr {
    BoolExpr::Cmp { left: Scalar::Col(a), op: CmpOp::Eq, right: Scalar::Col(b) }
}

/// Rewrite references to `from` as references to `to`.
pub fn rename_alias(e: &BoolExpr, from: &str, to: &str) -> BoolExpr {
    e.map_columns(&|c| if c.alias == from { ColumnRef::new(to, &c.column) } else { c.clone() })
}

/// Conjuncts of user conditions in the plan. Conditions the binder derived
/// from pattern structure are skipped; the graph encodes them itself.
fn collect_conditions(p: &LogicalPlan, out: &mut Vec<BoolExpr>) {
    match p {
        LogicalPlan::Scan(_) => {}
        LogicalPlan::Explore { input, .. } | LogicalPlan::Project { input, .. } => collect_conditions(input, out),
        LogicalPlan::Filter { input, pred } => {
            out.extend(pred.clone().conjuncts().into_iter().filter(|c| c.columns().iter().all(|c| c.column != END_VID)));
            collect_conditions(input, out);
        }
        LogicalPlan::ValueJoin { left, right, cond } => {
            if let Some(c) = cond {
                out.extend(c.clone().conjuncts());
            }
            collect_conditions(left, out);
            collect_conditions(right, out);
        }
    }
}

pub fn build_query_graph(q: &BoundQuery) -> Result<QueryGraph, BuildError> {
    let mut leaves: Vec<(Leaf, NodeRole)> = Vec::new();
    if let Some(p) = &q.pattern {
        for (k, v) in p.vertices.iter().enumerate() {
            leaves.push((Leaf { alias: v.alias.clone(), kind: LeafKind::Vertex, label: v.label.clone() }, NodeRole::Vertex(k)));
        }
        for (i, e) in p.edges.iter().enumerate() {
            leaves.push((Leaf { alias: e.out_alias.clone(), kind: LeafKind::OutEdge, label: e.label.clone() }, NodeRole::OutEdge(i)));
            leaves.push((Leaf { alias: e.in_alias.clone(), kind: LeafKind::InEdge, label: e.label.clone() }, NodeRole::InEdge(i)));
        }
    }
    for l in q.plan.leaves() {
        if matches!(l.kind, LeafKind::Table(_) | LeafKind::Delta(_)) {
            leaves.push((l.clone(), NodeRole::Relation));
        }
    }
    if leaves.len() > MAX_NODES {
        return Err(BuildError::TooManyNodes(leaves.len()));
    }
    leaves.sort_by(|a, b| a.0.alias.cmp(&b.0.alias));
    let mut by_alias = BTreeMap::new();
    for (i, (l, _)) in leaves.iter().enumerate() {
        if by_alias.insert(l.alias.clone(), i).is_some() {
            return Err(BuildError::Invalid(format!("alias `{}` appears twice", l.alias)));
        }
    }
    let nodes: Vec<QNode> = leaves
        .into_iter()
        .map(|(leaf, role)| QNode { alias: leaf.alias.clone(), leaf, role, filters: vec![], condition_only: false })
        .collect();
    let mut g = QueryGraph {
        nodes,
        edges: vec![],
        residual: vec![],
        outputs: q.outputs().to_vec(),
        columns: q.columns.clone(),
        pattern: q.pattern.clone(),
        by_alias,
    };
    let id = |g: &QueryGraph, a: &str| g.by_alias[a];

    // pattern structure
    let mut referenced_edges: BTreeSet<String> = BTreeSet::new();
    if let Some(p) = q.pattern.clone() {
        for (i, e) in p.edges.iter().enumerate() {
            let (vs, vd) = (id(&g, &p.vertices[e.src].alias), id(&g, &p.vertices[e.dst].alias));
            let (o, n) = (id(&g, &e.out_alias), id(&g, &e.in_alias));
            let ex = |attr| EdgeKind::Explore { attr, pattern_edge: i };
            g.edges.push(QEdge { a: vs, b: o, kind: ex(RefAttr::OutL) });
            g.edges.push(QEdge { a: vd, b: n, kind: ex(RefAttr::InL) });
            if e.src != e.dst {
                g.edges.push(QEdge { a: o, b: vd, kind: ex(RefAttr::DstL) });
                g.edges.push(QEdge { a: n, b: vs, kind: ex(RefAttr::SrcL) });
            } else {
                // a self-loop's end must designate the vertex it hangs off
                for x in [o, n] {
                    let pred = col_eq(ColumnRef::new(&g.nodes[x].alias, END_VID), ColumnRef::new(&g.nodes[vs].alias, "vid"));
                    g.edges.push(QEdge { a: vs, b: x, kind: EdgeKind::Value { pred, same_pointer: false } });
                }
            }
            g.edges.push(QEdge { a: o, b: n, kind: EdgeKind::Dup });
        }
        // end fields designating the same vertex
        for v in 0..p.vertices.len() {
            let mut ends: Vec<(NodeId, RefAttr)> = Vec::new();
            for e in p.edges.iter().filter(|e| e.src != e.dst) {
                if e.dst == v {
                    ends.push((id(&g, &e.out_alias), RefAttr::DstL));
                }
                if e.src == v {
                    ends.push((id(&g, &e.in_alias), RefAttr::SrcL));
                }
            }
            ends.sort();
            for x in 0..ends.len() {
                for y in x + 1..ends.len() {
                    let (a, fa) = ends[x];
                    let (b, fb) = ends[y];
                    if g.dup_partner(a) == Some(b) {
                        continue;
                    }
                    let pred = col_eq(ColumnRef::new(&g.nodes[a].alias, fa.name()), ColumnRef::new(&g.nodes[b].alias, fb.name()));
                    g.edges.push(QEdge { a, b, kind: EdgeKind::Value { pred, same_pointer: true } });
                }
            }
        }
    }

    // user conditions: edge-variable references attach to both directions
    let out_to_in: BTreeMap<String, String> = q
        .pattern
        .iter()
        .flat_map(|p| p.edges.iter().map(|e| (e.out_alias.clone(), e.in_alias.clone())))
        .collect();
    let mut conds = Vec::new();
    collect_conditions(&q.plan, &mut conds);
    for c in &g.outputs {
        if out_to_in.contains_key(&c.0.alias) {
            referenced_edges.insert(c.0.alias.clone());
        }
    }
    for c in conds {
        let aliases = c.aliases();
        for a in &aliases {
            if !g.by_alias.contains_key(a) {
                return Err(BuildError::Invalid(format!("condition `{c}` names unknown alias `{a}`")));
            }
            if out_to_in.contains_key(a) {
                referenced_edges.insert(a.clone());
            }
        }
        match aliases.len() {
            0 => g.residual.push(c),
            1 | 2 => {
                let edge_aliases: Vec<&String> = aliases.iter().filter(|a| out_to_in.contains_key(*a)).collect();
                let mut variants = vec![c.clone()];
                for ea in edge_aliases {
                    let alt = &out_to_in[ea];
                    variants = variants.into_iter().flat_map(|v| [rename_alias(&v, ea, alt), v]).collect();
                }
                for v in variants {
                    let al: Vec<String> = v.aliases().into_iter().collect();
                    if al.len() == 1 {
                        let n = id(&g, &al[0]);
                        g.nodes[n].filters.push(v);
                    } else {
                        let (a, b) = (id(&g, &al[0]), id(&g, &al[1]));
                        g.edges.push(QEdge { a, b, kind: EdgeKind::Value { pred: v, same_pointer: false } });
                    }
                }
            }
            _ => g.residual.push(c),
        }
    }
    if let Some(p) = &q.pattern {
        for e in &p.edges {
            let free = !referenced_edges.contains(&e.out_alias);
            for a in [&e.out_alias, &e.in_alias] {
                let n = id(&g, a);
                g.nodes[n].condition_only = free;
            }
        }
    }
    Ok(g)
}
