//! Reference semantics for pattern queries: plain backtracking over a
//! property graph, no indexes beyond adjacency lists.
//!
//! A match assigns every pattern vertex to a graph vertex and every pattern
//! edge to a graph edge with the right label and endpoints. Distinct
//! pattern vertices may share an image, and parallel graph edges give
//! distinct matches.

use std::cmp::Ordering;
use std::collections::HashMap;

use rg_graph::PropertyGraph;
use rg_store::{PlainValue, Table};

pub mod random;
mod sql;

pub use sql::to_sql;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternVertex {
    pub var: String,
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternEdge {
    pub var: Option<String>,
    pub src: String,
    pub dst: String,
    pub label: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Pattern {
    pub vertices: Vec<PatternVertex>,
    pub edges: Vec<PatternEdge>,
}

impl Pattern {
    pub fn vertex_index(&self, var: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.var == var)
    }

    pub fn edge_index(&self, var: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.var.as_deref() == Some(var))
    }

    pub fn validate(&self) -> Result<(), String> {
        let mut seen = std::collections::HashSet::new();
        for v in &self.vertices {
            if !seen.insert(v.var.as_str()) {
                return Err(format!("variable `{}` declared twice", v.var));
            }
        }
        for e in &self.edges {
            if let Some(var) = &e.var {
                if !seen.insert(var.as_str()) {
                    return Err(format!("variable `{var}` declared twice"));
                }
            }
            for end in [&e.src, &e.dst] {
                if self.vertex_index(end).is_none() {
                    return Err(format!("edge endpoint `{end}` is not a declared vertex"));
                }
            }
        }
        Ok(())
    }

    /// True when the underlying undirected multigraph has a cycle
    /// (self-loops and parallel pattern edges count).
    pub fn is_cyclic(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for e in &self.edges {
            let a = find(&mut parent, self.vertex_index(&e.src).unwrap());
            let b = find(&mut parent, self.vertex_index(&e.dst).unwrap());
            if a == b {
                return true;
            }
            parent[a] = b;
        }
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn eval(self, a: &PlainValue, b: &PlainValue) -> bool {
        let Some(o) = a.sql_cmp(b) else { return false };
        match self {
            CmpOp::Eq => o == Ordering::Equal,
            CmpOp::Ne => o != Ordering::Equal,
            CmpOp::Lt => o == Ordering::Less,
            CmpOp::Le => o != Ordering::Greater,
            CmpOp::Gt => o == Ordering::Greater,
            CmpOp::Ge => o != Ordering::Less,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Operand {
    Attr { var: String, attr: String },
    Const(PlainValue),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Condition {
    pub left: Operand,
    pub op: CmpOp,
    pub right: Operand,
}

/// A pattern, a conjunction of conditions, and the projected (var, attr)
/// pairs. `id` on any variable is its vertex or edge id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PatternQuery {
    pub pattern: Pattern,
    pub conditions: Vec<Condition>,
    pub projection: Vec<(String, String)>,
}

/// Images of the pattern's vertices and edges, as indexes into the graph's
/// vertex and edge vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

struct Adjacency {
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    src: Vec<usize>,
    dst: Vec<usize>,
}

fn adjacency(g: &PropertyGraph) -> Adjacency {
    let idx = g.vertex_index();
    let mut a = Adjacency { out: vec![vec![]; g.vertices.len()], inc: vec![vec![]; g.vertices.len()], src: vec![], dst: vec![] };
    for (i, e) in g.edges.iter().enumerate() {
        let (s, d) = (idx[&e.src], idx[&e.dst]);
        a.out[s].push(i);
        a.inc[d].push(i);
        a.src.push(s);
        a.dst.push(d);
    }
    a
}

/// Edge visiting order that keeps the matched part connected where it can.
fn edge_order(p: &Pattern) -> Vec<usize> {
    let mut bound = vec![false; p.vertices.len()];
    let mut done = vec![false; p.edges.len()];
    let mut order = Vec::new();
    while order.len() < p.edges.len() {
        let score = |i: usize| {
            let e = &p.edges[i];
            bound[p.vertex_index(&e.src).unwrap()] as u8 + bound[p.vertex_index(&e.dst).unwrap()] as u8
        };
        let next = (0..p.edges.len()).filter(|i| !done[*i]).max_by_key(|i| (score(*i), std::cmp::Reverse(*i))).unwrap();
        done[next] = true;
        order.push(next);
        let e = &p.edges[next];
        bound[p.vertex_index(&e.src).unwrap()] = true;
        bound[p.vertex_index(&e.dst).unwrap()] = true;
    }
    order
}

/// Every match of `p` in `g`.
pub fn match_assignments(p: &Pattern, g: &PropertyGraph) -> Vec<Assignment> {
    p.validate().expect("malformed pattern");
    let adj = adjacency(g);
    let order = edge_order(p);
    let vlabel_ok = |pv: usize, gv: usize| p.vertices[pv].label.as_ref().is_none_or(|l| *l == g.vertices[gv].label);
    let elabel_ok = |pe: usize, ge: usize| p.edges[pe].label.as_ref().is_none_or(|l| *l == g.edges[ge].label);
    let ends: Vec<(usize, usize)> =
        p.edges.iter().map(|e| (p.vertex_index(&e.src).unwrap(), p.vertex_index(&e.dst).unwrap())).collect();
    let mut hv: Vec<Option<usize>> = vec![None; p.vertices.len()];
    let mut he: Vec<usize> = vec![0; p.edges.len()];
    let mut out = Vec::new();

    struct Ctx<'a> {
        order: &'a [usize],
        ends: &'a [(usize, usize)],
        adj: &'a Adjacency,
        nv: usize,
        nge: usize,
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        k: usize,
        c: &Ctx,
        hv: &mut Vec<Option<usize>>,
        he: &mut Vec<usize>,
        vlabel_ok: &dyn Fn(usize, usize) -> bool,
        elabel_ok: &dyn Fn(usize, usize) -> bool,
        out: &mut Vec<Assignment>,
    ) {
        if k == c.order.len() {
            // isolated pattern vertices range over all graph vertices
            if let Some(free) = hv.iter().position(|h| h.is_none()) {
                for gv in 0..c.nv {
                    if vlabel_ok(free, gv) {
                        hv[free] = Some(gv);
                        rec(k, c, hv, he, vlabel_ok, elabel_ok, out);
                    }
                }
                hv[free] = None;
                return;
            }
            out.push(Assignment { vertices: hv.iter().map(|h| h.unwrap()).collect(), edges: he.clone() });
            return;
        }
        let pe = c.order[k];
        let (ps, pd) = c.ends[pe];
        let candidates: Box<dyn Iterator<Item = usize>> = match (hv[ps], hv[pd]) {
            (Some(s), _) => Box::new(c.adj.out[s].iter().copied()),
            (None, Some(d)) => Box::new(c.adj.inc[d].iter().copied()),
            (None, None) => Box::new(0..c.nge),
        };
        for ge in candidates {
            if !elabel_ok(pe, ge) {
                continue;
            }
            let (gs, gd) = (c.adj.src[ge], c.adj.dst[ge]);
            let (old_s, old_d) = (hv[ps], hv[pd]);
            if old_s.is_some_and(|s| s != gs) || !vlabel_ok(ps, gs) {
                continue;
            }
            hv[ps] = Some(gs);
            if hv[pd].is_some_and(|d| d != gd) || !vlabel_ok(pd, gd) {
                hv[ps] = old_s;
                continue;
            }
            hv[pd] = Some(gd);
            he[pe] = ge;
            rec(k + 1, c, hv, he, vlabel_ok, elabel_ok, out);
            hv[pd] = old_d;
            hv[ps] = old_s;
        }
    }

    let c = Ctx { order: &order, ends: &ends, adj: &adj, nv: g.vertices.len(), nge: g.edges.len() };
    rec(0, &c, &mut hv, &mut he, &vlabel_ok, &elabel_ok, &mut out);
    out
}

enum VarRef {
    Vertex(usize),
    Edge(usize),
}

fn resolve_var(p: &Pattern, var: &str) -> VarRef {
    if let Some(i) = p.vertex_index(var) {
        VarRef::Vertex(i)
    } else if let Some(i) = p.edge_index(var) {
        VarRef::Edge(i)
    } else {
        panic!("unknown pattern variable `{var}`")
    }
}

/// Value of `var.attr` under an assignment. Missing attributes are null.
pub fn attr_value(p: &Pattern, g: &PropertyGraph, a: &Assignment, var: &str, attr: &str) -> PlainValue {
    match resolve_var(p, var) {
        VarRef::Vertex(i) => {
            let v = &g.vertices[a.vertices[i]];
            match attr {
                "id" => PlainValue::Int(v.vid),
                _ => v.attrs.get(attr).cloned().unwrap_or(PlainValue::Null),
            }
        }
        VarRef::Edge(i) => {
            let e = &g.edges[a.edges[i]];
            match attr {
                "id" => PlainValue::Int(e.eid),
                _ => e.attrs.get(attr).cloned().unwrap_or(PlainValue::Null),
            }
        }
    }
}

/// The query's answer as a bag: one row per match passing the conditions.
pub fn match_bruteforce(q: &PatternQuery, g: &PropertyGraph) -> Table {
    let p = &q.pattern;
    let columns = q.projection.iter().map(|(v, a)| format!("{v}.{a}")).collect();
    let mut t = Table::new(columns);
    let operand = |o: &Operand, a: &Assignment| match o {
        Operand::Attr { var, attr } => attr_value(p, g, a, var, attr),
        Operand::Const(c) => c.clone(),
    };
    for a in match_assignments(p, g) {
        if q.conditions.iter().all(|c| c.op.eval(&operand(&c.left, &a), &operand(&c.right, &a))) {
            t.rows.push(q.projection.iter().map(|(v, at)| attr_value(p, g, &a, v, at)).collect());
        }
    }
    t
}

/// Matches counted per graph edge triple, by scanning all edge triples. An
/// independent check for three-edge patterns.
pub fn count_by_edge_triples(p: &Pattern, g: &PropertyGraph) -> usize {
    assert_eq!(p.edges.len(), 3);
    let idx: HashMap<i64, usize> = g.vertex_index();
    let mut n = 0;
    for e0 in &g.edges {
        for e1 in &g.edges {
            for e2 in &g.edges {
                let ge = [e0, e1, e2];
                let mut h: Vec<Option<usize>> = vec![None; p.vertices.len()];
                let ok = p.edges.iter().zip(ge).all(|(pe, e)| {
                    if pe.label.as_ref().is_some_and(|l| *l != e.label) {
                        return false;
                    }
                    let (s, d) = (p.vertex_index(&pe.src).unwrap(), p.vertex_index(&pe.dst).unwrap());
                    for (pv, gv) in [(s, idx[&e.src]), (d, idx[&e.dst])] {
                        match h[pv] {
                            Some(x) if x != gv => return false,
                            _ => h[pv] = Some(gv),
                        }
                    }
                    true
                });
                let labels_ok = h.iter().enumerate().all(|(pv, gv)| {
                    gv.is_some_and(|gv| p.vertices[pv].label.as_ref().is_none_or(|l| *l == g.vertices[gv].label))
                });
                if ok && labels_ok {
                    n += 1;
                }
            }
        }
    }
    n
}
