use std::fmt::{self, Write as _};
use std::rc::Rc;

use rg_querygraph::{bit, NodeId, NodeSet, QueryGraph};
use rg_sqldelta::{BoolExpr, BoundMatcher, CmpOp, ColumnRef, LeafKind, RefAttr, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Nl,
    Hash,
}

/// θ^I: ψ(source.attr)[field] ∋ probe.target_field, standing in for the
/// consumed helper node.
#[derive(Clone, Debug, PartialEq)]
pub struct IxCond {
    pub edge: usize,
    pub source: NodeId,
    pub source_alias: String,
    pub attr: RefAttr,
    pub helper: NodeId,
    pub helper_alias: String,
    pub helper_label: Option<String>,
    pub field: RefAttr,
    pub probe_alias: String,
    pub target_field: RefAttr,
}

impl fmt::Display for IxCond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ψ({}.{})[{}] ∋ {}.{}",
            self.source_alias,
            self.attr.name(),
            self.field.name(),
            self.probe_alias,
            self.target_field.name()
        )
    }
}

#[derive(Clone, Debug)]
pub enum PhysOp {
    Scan { node: NodeId, alias: String, kind: LeafKind, label: Option<String>, filters: Vec<BoolExpr> },
    /// Materializes both inputs, then pairs them with the matcher.
    DeltaJoin { node: NodeId, alias: String, left: Box<Planned>, right: Box<Planned>, matcher: BoundMatcher, columns: Vec<String> },
    Explore {
        input: Rc<PhysPlan>,
        from: NodeId,
        from_alias: String,
        attr: RefAttr,
        to: NodeId,
        to_alias: String,
        to_kind: LeafKind,
        label: Option<String>,
        /// Probe-node filters and value conditions towards the input.
        filters: Vec<BoolExpr>,
        ix: Vec<IxCond>,
        method: Method,
        /// For the hash variant without θ^I: (input column, probe column).
        hash_key: Option<(ColumnRef, ColumnRef)>,
    },
    Join { left: Rc<PhysPlan>, right: Rc<PhysPlan>, method: Method, keys: Vec<(ColumnRef, ColumnRef)>, preds: Vec<BoolExpr> },
    Filter { input: Rc<PhysPlan>, preds: Vec<BoolExpr> },
    Project { input: Rc<PhysPlan>, items: Vec<(ColumnRef, String)> },
}

#[derive(Clone, Debug)]
pub struct PhysPlan {
    pub op: PhysOp,
    pub nodes: NodeSet,
    pub consumed: NodeSet,
    pub card: f64,
    pub cost: f64,
}

/// An optimized unit: its query graph and plan.
#[derive(Clone, Debug)]
pub struct Planned {
    pub graph: QueryGraph,
    pub plan: Rc<PhysPlan>,
}

impl Planned {
    pub fn cost(&self) -> f64 {
        self.plan.cost
    }

    pub fn explain(&self) -> String {
        self.plan.explain(true)
    }

    /// The same operator tree with every exploration and/or value join
    /// switched to `explore` / `join` where that method applies, plus the
    /// number of operators switched. Estimates are kept as they were.
    /// Exploration can only hash over out_L/in_L with a key or θ^I; a value
    /// join only hashes on equality keys across its sides.
    pub fn with_methods(&self, explore: Option<Method>, join: Option<Method>) -> (Planned, usize) {
        let mut n = 0;
        let plan = Rc::new(remethod(&self.plan, &self.graph, explore, join, &mut n));
        (Planned { graph: self.graph.clone(), plan }, n)
    }
}

fn remethod(p: &PhysPlan, g: &QueryGraph, explore: Option<Method>, join: Option<Method>, n: &mut usize) -> PhysPlan {
    let mut rec = |c: &Rc<PhysPlan>| Rc::new(remethod(c, g, explore, join, n));
    let op = match &p.op {
        PhysOp::Scan { .. } => p.op.clone(),
        PhysOp::DeltaJoin { node, alias, left, right, matcher, columns } => {
            let (l, a) = left.with_methods(explore, join);
            let (r, b) = right.with_methods(explore, join);
            *n += a + b;
            PhysOp::DeltaJoin {
                node: *node,
                alias: alias.clone(),
                left: Box::new(l),
                right: Box::new(r),
                matcher: matcher.clone(),
                columns: columns.clone(),
            }
        }
        PhysOp::Explore { input, from, from_alias, attr, to, to_alias, to_kind, label, filters, ix, method, hash_key } => {
            let input = rec(input);
            let hashable = matches!(attr, RefAttr::OutL | RefAttr::InL) && (!ix.is_empty() || hash_key.is_some());
            let m = match explore {
                Some(Method::Hash) if !hashable => *method,
                Some(m) => m,
                None => *method,
            };
            *n += usize::from(m != *method);
            PhysOp::Explore {
                input,
                from: *from,
                from_alias: from_alias.clone(),
                attr: *attr,
                to: *to,
                to_alias: to_alias.clone(),
                to_kind: to_kind.clone(),
                label: label.clone(),
                filters: filters.clone(),
                ix: ix.clone(),
                method: m,
                hash_key: hash_key.clone(),
            }
        }
        PhysOp::Join { left, right, method, keys, preds } => {
            let (l, r) = (rec(left), rec(right));
            let (mut keys, mut preds) = (keys.clone(), preds.clone());
            match join {
                Some(Method::Nl) if *method == Method::Hash => {
                    preds.extend(keys.drain(..).map(|(a, b)| BoolExpr::Cmp { left: Scalar::Col(a), op: CmpOp::Eq, right: Scalar::Col(b) }));
                }
                Some(Method::Hash) if *method == Method::Nl => {
                    let side = |c: &ColumnRef, s: NodeSet| g.node(&c.alias).is_some_and(|x| s & bit(x) != 0);
                    preds.retain(|e| match e {
                        BoolExpr::Cmp { left: Scalar::Col(a), op: CmpOp::Eq, right: Scalar::Col(b) } => {
                            if side(a, l.nodes) && side(b, r.nodes) {
                                keys.push((a.clone(), b.clone()));
                                false
                            } else if side(b, l.nodes) && side(a, r.nodes) {
                                keys.push((b.clone(), a.clone()));
                                false
                            } else {
                                true
                            }
                        }
                        _ => true,
                    });
                }
                _ => {}
            }
            let m = if keys.is_empty() { Method::Nl } else { Method::Hash };
            *n += usize::from(m != *method);
            PhysOp::Join { left: l, right: r, method: m, keys, preds }
        }
        PhysOp::Filter { input, preds } => PhysOp::Filter { input: rec(input), preds: preds.clone() },
        PhysOp::Project { input, items } => PhysOp::Project { input: rec(input), items: items.clone() },
    };
    PhysPlan { op, nodes: p.nodes, consumed: p.consumed, card: p.card, cost: p.cost }
}

fn filt(label: &Option<String>, filters: &[BoolExpr]) -> String {
    let mut parts: Vec<String> = label.iter().map(|l| format!("label={l}")).collect();
    parts.extend(filters.iter().map(|f| f.to_string()));
    if parts.is_empty() {
        String::new()
    } else {
        format!(" [{}]", parts.join(" and "))
    }
}

impl PhysPlan {
    pub fn name(&self) -> &'static str {
        match &self.op {
            PhysOp::Scan { .. } => "Scan",
            PhysOp::DeltaJoin { .. } => "DeltaJoin",
            PhysOp::Explore { ix, method, .. } => match (ix.is_empty(), method) {
                (true, Method::Nl) => "ExploreNL",
                (true, Method::Hash) => "ExploreHash",
                (false, Method::Nl) => "IxExploreNL",
                (false, Method::Hash) => "IxExploreHash",
            },
            PhysOp::Join { method: Method::Hash, .. } => "HashJoin",
            PhysOp::Join { method: Method::Nl, .. } => "NlJoin",
            PhysOp::Filter { .. } => "Filter",
            PhysOp::Project { .. } => "Project",
        }
    }

    fn line(&self) -> String {
        let head = self.name();
        match &self.op {
            PhysOp::Scan { alias, kind, label, filters, .. } => {
                let rel = match kind {
                    LeafKind::Vertex => "D_V".to_string(),
                    LeafKind::OutEdge => "D_out".to_string(),
                    LeafKind::InEdge => "D_in".to_string(),
                    LeafKind::Table(t) => t.clone(),
                    LeafKind::Delta(_) => "δ".to_string(),
                };
                format!("{head} {rel} as {alias}{}", filt(label, filters))
            }
            PhysOp::DeltaJoin { alias, matcher, .. } => format!("{head} as {alias} {:?}", matcher.kind),
            PhysOp::Explore { from_alias, attr, to_alias, label, filters, ix, .. } => {
                let mut s = format!("{head} {from_alias}.{} -> {to_alias}{}", attr.name(), filt(label, filters));
                for c in ix {
                    let _ = write!(s, " θ^I {c}");
                }
                s
            }
            PhysOp::Join { keys, preds, .. } => {
                let mut conds: Vec<String> = keys.iter().map(|(a, b)| format!("{a} = {b}")).collect();
                conds.extend(preds.iter().map(|p| p.to_string()));
                if conds.is_empty() {
                    conds.push("true".into());
                }
                format!("{head} {}", conds.join(" and "))
            }
            PhysOp::Filter { preds, .. } => {
                format!("{head} {}", preds.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" and "))
            }
            PhysOp::Project { items, .. } => {
                format!("{head} {}", items.iter().map(|(c, n)| format!("{c} as {n}")).collect::<Vec<_>>().join(", "))
            }
        }
    }

    pub fn children(&self) -> Vec<&PhysPlan> {
        match &self.op {
            PhysOp::Scan { .. } => vec![],
            PhysOp::DeltaJoin { left, right, .. } => vec![&left.plan, &right.plan],
            PhysOp::Explore { input, .. } | PhysOp::Filter { input, .. } | PhysOp::Project { input, .. } => vec![input],
            PhysOp::Join { left, right, .. } => vec![left, right],
        }
    }

    /// Indented operator tree; `numbers` adds `est_card=` and `cum_cost=`.
    pub fn explain(&self, numbers: bool) -> String {
        let mut out = String::new();
        self.explain_into(&mut out, 0, numbers);
        out
    }

    fn explain_into(&self, out: &mut String, depth: usize, numbers: bool) {
        let _ = write!(out, "{}{}", "  ".repeat(depth), self.line());
        if numbers {
            let _ = write!(out, "  est_card={} cum_cost={}", fmt_num(self.card), fmt_num(self.cost));
        }
        out.push('\n');
        for c in self.children() {
            c.explain_into(out, depth + 1, numbers);
        }
    }

    /// Operators and aliases only, e.g. `ExploreNL(D_o^0.dst_L->D_V^1; Scan(D_V^0))`.
    pub fn shape(&self) -> String {
        let kids: Vec<String> = self.children().iter().map(|c| c.shape()).collect();
        let own = match &self.op {
            PhysOp::Scan { alias, .. } | PhysOp::DeltaJoin { alias, .. } => alias.clone(),
            PhysOp::Explore { from_alias, attr, to_alias, ix, .. } => {
                let mut s = format!("{from_alias}.{}->{to_alias}", attr.name());
                for c in ix {
                    let _ = write!(s, " {c}");
                }
                s
            }
            _ => String::new(),
        };
        let mut parts = Vec::new();
        if !own.is_empty() {
            parts.push(own);
        }
        parts.extend(kids);
        format!("{}({})", self.name(), parts.join("; "))
    }

    /// Every operator, pre-order.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a PhysPlan)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.2}")
    }
}
