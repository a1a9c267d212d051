use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rg_store::PlainValue;

use crate::ast::{
    self, CmpOp, ColRef, Expr, FromItem, MatcherSpec, Operand, Select, SelectItem, Source,
};
use crate::error::BindError;

type Result<T> = std::result::Result<T, BindError>;

/// Name resolution against loaded data.
pub trait Catalog {
    fn table_columns(&self, name: &str) -> Option<Vec<String>>;
    fn is_graph(&self, name: &str) -> bool;
    /// The graph a `match` without `from` runs against.
    fn default_graph(&self) -> Option<String>;
}

/// Reference columns of the graph relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RefAttr {
    OutL,
    InL,
    DstL,
    SrcL,
}

impl RefAttr {
    pub fn name(self) -> &'static str {
        match self {
            RefAttr::OutL => "out_L",
            RefAttr::InL => "in_L",
            RefAttr::DstL => "dst_L",
            RefAttr::SrcL => "src_L",
        }
    }
}

/// Virtual column of an edge node: id of the vertex its end reference
/// designates.
pub const END_VID: &str = "$end_vid";

#[derive(Clone, Debug, PartialEq)]
pub enum LeafKind {
    Vertex,
    OutEdge,
    InEdge,
    Table(String),
    /// Materialized result of a δ-join, a base relation for its consumer.
    Delta(Box<DeltaSpec>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub alias: String,
    pub kind: LeafKind,
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnRef {
    pub alias: String,
    pub column: String,
}

impl ColumnRef {
    pub fn new(alias: impl Into<String>, column: impl Into<String>) -> Self {
        ColumnRef {
            alias: alias.into(),
            column: column.into(),
        }
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.alias, self.column)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Col(ColumnRef),
    Lit(PlainValue),
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Col(c) => write!(f, "{c}"),
            Scalar::Lit(PlainValue::Str(s)) => write!(f, "'{s}'"),
            Scalar::Lit(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoolExpr {
    Cmp {
        left: Scalar,
        op: CmpOp,
        right: Scalar,
    },
    And(Vec<BoolExpr>),
    Or(Vec<BoolExpr>),
}

impl BoolExpr {
    pub fn aliases(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_aliases(&mut out);
        out
    }

    fn collect_aliases(&self, out: &mut BTreeSet<String>) {
        match self {
            BoolExpr::Cmp { left, right, .. } => {
                for s in [left, right] {
                    if let Scalar::Col(c) = s {
                        out.insert(c.alias.clone());
                    }
                }
            }
            BoolExpr::And(v) | BoolExpr::Or(v) => v.iter().for_each(|e| e.collect_aliases(out)),
        }
    }

    /// Top-level conjuncts.
    pub fn conjuncts(self) -> Vec<BoolExpr> {
        match self {
            BoolExpr::And(v) => v.into_iter().flat_map(BoolExpr::conjuncts).collect(),
            e => vec![e],
        }
    }

    pub fn columns(&self) -> Vec<&ColumnRef> {
        let mut out = Vec::new();
        fn walk<'a>(e: &'a BoolExpr, out: &mut Vec<&'a ColumnRef>) {
            match e {
                BoolExpr::Cmp { left, right, .. } => {
                    for s in [left, right] {
                        if let Scalar::Col(c) = s {
                            out.push(c);
                        }
                    }
                }
                BoolExpr::And(v) | BoolExpr::Or(v) => v.iter().for_each(|e| walk(e, out)),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Rewrite every column reference.
    pub fn map_columns(&self, f: &dyn Fn(&ColumnRef) -> ColumnRef) -> BoolExpr {
        let m = |s: &Scalar| match s {
            Scalar::Col(c) => Scalar::Col(f(c)),
            s => s.clone(),
        };
        match self {
            BoolExpr::Cmp { left, op, right } => BoolExpr::Cmp {
                left: m(left),
                op: *op,
                right: m(right),
            },
            BoolExpr::And(v) => BoolExpr::And(v.iter().map(|e| e.map_columns(f)).collect()),
            BoolExpr::Or(v) => BoolExpr::Or(v.iter().map(|e| e.map_columns(f)).collect()),
        }
    }

    pub fn eval(&self, get: &dyn Fn(&ColumnRef) -> PlainValue) -> bool {
        match self {
            BoolExpr::Cmp { left, op, right } => {
                let v = |s: &Scalar| match s {
                    Scalar::Col(c) => get(c),
                    Scalar::Lit(l) => l.clone(),
                };
                op.eval(&v(left), &v(right))
            }
            BoolExpr::And(v) => v.iter().all(|e| e.eval(get)),
            BoolExpr::Or(v) => v.iter().any(|e| e.eval(get)),
        }
    }

    pub fn and(parts: Vec<BoolExpr>) -> Option<BoolExpr> {
        match parts.len() {
            0 => None,
            1 => parts.into_iter().next(),
            _ => Some(BoolExpr::And(parts)),
        }
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolExpr::Cmp { left, op, right } => write!(f, "{left} {} {right}", op.symbol()),
            BoolExpr::And(v) => write!(
                f,
                "{}",
                v.iter()
                    .map(|e| format!("({e})"))
                    .collect::<Vec<_>>()
                    .join(" and ")
            ),
            BoolExpr::Or(v) => write!(
                f,
                "{}",
                v.iter()
                    .map(|e| format!("({e})"))
                    .collect::<Vec<_>>()
                    .join(" or ")
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternVertexInfo {
    pub var: String,
    pub alias: String,
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternEdgeInfo {
    pub var: String,
    pub src: usize,
    pub dst: usize,
    pub label: Option<String>,
    pub out_alias: String,
    pub in_alias: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PatternInfo {
    pub graph: String,
    pub vertices: Vec<PatternVertexInfo>,
    pub edges: Vec<PatternEdgeInfo>,
}

/// ψ(source.attr)[field] ∋ target: some tuple of the fragment referenced
/// by `source.attr` has its `field` equal to `target`. It stands in for
/// pattern edge `edge` without exploring its edge node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplorativeCond {
    pub edge: usize,
    pub source: String,
    pub attr: RefAttr,
    pub helper: String,
    pub field: RefAttr,
    pub target: ColumnRef,
}

impl fmt::Display for ExplorativeCond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ψ({}.{})[{}] ∋ {}",
            self.source,
            self.attr.name(),
            self.field.name(),
            self.target
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MatcherKind {
    Exact,
    Fuzzy(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundMatcher {
    pub kind: MatcherKind,
    /// Column index in the left input.
    pub left_col: usize,
    /// Column index in the right input; this is A_0, dropped from the output.
    pub right_col: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaSpec {
    pub left: BoundQuery,
    pub right: BoundQuery,
    pub matcher: BoundMatcher,
    /// Output names: left columns, then right columns without A_0.
    pub columns: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LogicalPlan {
    Scan(Leaf),
    Explore {
        input: Box<LogicalPlan>,
        from: String,
        attr: RefAttr,
        to: Leaf,
        edge: usize,
        conds: Vec<ExplorativeCond>,
    },
    Filter {
        input: Box<LogicalPlan>,
        pred: BoolExpr,
    },
    ValueJoin {
        left: Box<LogicalPlan>,
        right: Box<LogicalPlan>,
        cond: Option<BoolExpr>,
    },
    Project {
        input: Box<LogicalPlan>,
        items: Vec<(ColumnRef, String)>,
    },
}

impl LogicalPlan {
    /// Pattern edges checked by this plan, once per Explore into an edge
    /// node and once per explorative condition.
    pub fn topology_checks(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.walk(&mut |p| {
            if let LogicalPlan::Explore {
                attr, edge, conds, ..
            } = p
            {
                if matches!(attr, RefAttr::OutL | RefAttr::InL) {
                    out.push(*edge);
                }
                out.extend(conds.iter().map(|c| c.edge));
            }
        });
        out
    }

    pub fn walk(&self, f: &mut dyn FnMut(&LogicalPlan)) {
        f(self);
        match self {
            LogicalPlan::Scan(_) => {}
            LogicalPlan::Explore { input, .. }
            | LogicalPlan::Filter { input, .. }
            | LogicalPlan::Project { input, .. } => input.walk(f),
            LogicalPlan::ValueJoin { left, right, .. } => {
                left.walk(f);
                right.walk(f);
            }
        }
    }

    /// Leaves in plan order.
    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        fn go<'a>(p: &'a LogicalPlan, out: &mut Vec<&'a Leaf>) {
            match p {
                LogicalPlan::Scan(l) => out.push(l),
                LogicalPlan::Explore { input, to, .. } => {
                    go(input, out);
                    out.push(to);
                }
                LogicalPlan::Filter { input, .. } | LogicalPlan::Project { input, .. } => {
                    go(input, out)
                }
                LogicalPlan::ValueJoin { left, right, .. } => {
                    go(left, out);
                    go(right, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    fn fmt_indent(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        let pad = "  ".repeat(depth);
        match self {
            LogicalPlan::Scan(l) => {
                write!(f, "{pad}Scan {}", l.alias)?;
                if let Some(lb) = &l.label {
                    write!(f, " label={lb}")?;
                }
                writeln!(f)
            }
            LogicalPlan::Explore {
                input,
                from,
                attr,
                to,
                conds,
                ..
            } => {
                write!(f, "{pad}Explore {from}.{} -> {}", attr.name(), to.alias)?;
                if let Some(lb) = &to.label {
                    write!(f, " label={lb}")?;
                }
                for c in conds {
                    write!(f, " [{c}]")?;
                }
                writeln!(f)?;
                input.fmt_indent(f, depth + 1)
            }
            LogicalPlan::Filter { input, pred } => {
                writeln!(f, "{pad}Filter {pred}")?;
                input.fmt_indent(f, depth + 1)
            }
            LogicalPlan::ValueJoin { left, right, cond } => {
                match cond {
                    Some(c) => writeln!(f, "{pad}ValueJoin {c}")?,
                    None => writeln!(f, "{pad}ValueJoin true")?,
                }
                left.fmt_indent(f, depth + 1)?;
                right.fmt_indent(f, depth + 1)
            }
            LogicalPlan::Project { input, items } => {
                let cols: Vec<String> = items.iter().map(|(c, n)| format!("{c} as {n}")).collect();
                writeln!(f, "{pad}Project {}", cols.join(", "))?;
                input.fmt_indent(f, depth + 1)
            }
        }
    }
}

impl fmt::Display for LogicalPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_indent(f, 0)
    }
}

/// One optimization unit: a plan whose leaves are base relations (δ-join
/// results count as base relations) topped by a projection.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundQuery {
    pub plan: LogicalPlan,
    pub pattern: Option<PatternInfo>,
    pub columns: Vec<String>,
}

impl BoundQuery {
    /// Projection items of the top operator.
    pub fn outputs(&self) -> &[(ColumnRef, String)] {
        match &self.plan {
            LogicalPlan::Project { items, .. } => items,
            _ => &[],
        }
    }
}

#[derive(Clone, Debug)]
enum Entry {
    /// Columns of one leaf, addressed by their own names.
    Leaf {
        alias: String,
        columns: Vec<String>,
    },
    /// Output columns of a flattened subquery.
    Renamed {
        columns: Vec<(String, ColumnRef)>,
    },
    Vertex {
        alias: String,
    },
    Edge {
        alias: String,
    },
    /// Addressable by qualifier but not part of `*`.
    Hidden(Box<Entry>),
}

#[derive(Clone, Debug, Default)]
struct Scope {
    /// Qualifier to entry, in declaration order.
    entries: Vec<(String, Entry)>,
}

impl Scope {
    fn merge(mut self, other: Scope) -> Result<Scope> {
        for (q, e) in other.entries {
            if self.entries.iter().any(|(k, _)| *k == q) {
                return Err(BindError(format!(
                    "name `{q}` is used twice in one from-clause"
                )));
            }
            self.entries.push((q, e));
        }
        Ok(self)
    }

    fn lookup_in(entry: &Entry, name: &str) -> Option<ColumnRef> {
        match entry {
            Entry::Leaf { alias, columns } => columns
                .iter()
                .any(|c| c == name)
                .then(|| ColumnRef::new(alias, name)),
            Entry::Renamed { columns } => columns
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, c)| c.clone()),
            _ if name.starts_with('$') => None,
            Entry::Vertex { alias } => Some(ColumnRef::new(
                alias,
                if name == "id" { "vid" } else { name },
            )),
            Entry::Edge { alias } => Some(ColumnRef::new(
                alias,
                if name == "id" { "eid" } else { name },
            )),
            Entry::Hidden(e) => Scope::lookup_in(e, name),
        }
    }

    fn resolve(&self, c: &ColRef) -> Result<ColumnRef> {
        match &c.qualifier {
            Some(q) => {
                let (_, e) = self
                    .entries
                    .iter()
                    .find(|(k, _)| k == q)
                    .ok_or_else(|| BindError(format!("unknown name `{q}` in `{c}`")))?;
                Scope::lookup_in(e, &c.name)
                    .ok_or_else(|| BindError(format!("`{q}` has no column `{}`", c.name)))
            }
            None => {
                let hits: Vec<ColumnRef> = self
                    .entries
                    .iter()
                    .filter(|(_, e)| matches!(e, Entry::Leaf { .. } | Entry::Renamed { .. }))
                    .filter_map(|(_, e)| Scope::lookup_in(e, &c.name))
                    .collect();
                match hits.len() {
                    1 => Ok(hits.into_iter().next().unwrap()),
                    0 => Err(BindError(format!("unknown column `{}`", c.name))),
                    _ => Err(BindError(format!("column `{}` is ambiguous", c.name))),
                }
            }
        }
    }

    /// Expansion of `*`: output name and column for everything visible.
    fn star(&self) -> Vec<(String, ColumnRef)> {
        let mut out = Vec::new();
        for (q, e) in &self.entries {
            match e {
                Entry::Leaf { alias, columns } => out.extend(
                    columns
                        .iter()
                        .map(|c| (c.clone(), ColumnRef::new(alias, c))),
                ),
                Entry::Renamed { columns } => out.extend(columns.iter().cloned()),
                Entry::Vertex { alias } => {
                    out.push((format!("{q}.id"), ColumnRef::new(alias, "vid")))
                }
                Entry::Edge { alias } => {
                    out.push((format!("{q}.id"), ColumnRef::new(alias, "eid")))
                }
                Entry::Hidden(_) => {}
            }
        }
        out
    }
}

struct Binder<'a> {
    catalog: &'a dyn Catalog,
    /// Pattern of the unit being bound.
    pattern: Option<PatternInfo>,
    delta_count: usize,
}

/// Bind a parsed query into its logical plan.
pub fn build_logical(q: &Select, catalog: &dyn Catalog) -> Result<BoundQuery> {
    let mut b = Binder {
        catalog,
        pattern: None,
        delta_count: 0,
    };
    b.unit_from_select(q)
}

fn bind_operand(o: &Operand, scope: &Scope) -> Result<Scalar> {
    Ok(match o {
        Operand::Col(c) => Scalar::Col(scope.resolve(c)?),
        Operand::Lit(v) => Scalar::Lit(v.clone()),
    })
}

fn bind_expr(e: &Expr, scope: &Scope) -> Result<BoolExpr> {
    Ok(match e {
        Expr::Cmp { left, op, right } => BoolExpr::Cmp {
            left: bind_operand(left, scope)?,
            op: *op,
            right: bind_operand(right, scope)?,
        },
        Expr::And(a, b) => BoolExpr::And(vec![bind_expr(a, scope)?, bind_expr(b, scope)?]),
        Expr::Or(a, b) => BoolExpr::Or(vec![bind_expr(a, scope)?, bind_expr(b, scope)?]),
    })
}

fn output_name(c: &ColRef, alias: &Option<String>) -> String {
    match alias {
        Some(a) => a.clone(),
        None => c.to_string(),
    }
}

impl Binder<'_> {
    fn unit_from_select(&mut self, q: &Select) -> Result<BoundQuery> {
        let saved = self.pattern.take();
        let (plan, outputs) = self.select(q)?;
        let pattern = std::mem::replace(&mut self.pattern, saved);
        let columns = outputs.iter().map(|(n, _)| n.clone()).collect();
        let items = outputs.into_iter().map(|(n, c)| (c, n)).collect();
        Ok(BoundQuery {
            plan: LogicalPlan::Project {
                input: Box::new(plan),
                items,
            },
            pattern,
            columns,
        })
    }

    /// A from-item bound as its own unit (operand of a δ-join).
    fn unit_from_item(&mut self, item: &FromItem) -> Result<(BoundQuery, Option<String>)> {
        let saved = self.pattern.take();
        let (plan, scope) = self.from_item(item)?;
        let pattern = std::mem::replace(&mut self.pattern, saved);
        let outputs = scope.star();
        let columns = outputs.iter().map(|(n, _)| n.clone()).collect();
        let items = outputs.into_iter().map(|(n, c)| (c, n)).collect();
        let name = match item {
            FromItem::Table { name, alias } => Some(alias.clone().unwrap_or_else(|| name.clone())),
            FromItem::Sub { alias, .. } => alias.clone(),
            _ => None,
        };
        Ok((
            BoundQuery {
                plan: LogicalPlan::Project {
                    input: Box::new(plan),
                    items,
                },
                pattern,
                columns,
            },
            name,
        ))
    }

    fn select(&mut self, q: &Select) -> Result<(LogicalPlan, Vec<(String, ColumnRef)>)> {
        let (plan, outputs, _) = self.select_scoped(q)?;
        Ok((plan, outputs))
    }

    #[allow(clippy::type_complexity)]
    fn select_scoped(&mut self, q: &Select) -> Result<(LogicalPlan, Vec<(String, ColumnRef)>, Scope)> {
        let (mut plan, scope) = match &q.source {
            Source::From(item) => self.from_item(item)?,
            Source::Match { graph, paths } => self.pattern_source(graph.as_deref(), paths)?,
        };
        if let Some(w) = &q.filter {
            plan = LogicalPlan::Filter {
                input: Box::new(plan),
                pred: bind_expr(w, &scope)?,
            };
        }
        let mut outputs = Vec::new();
        for it in &q.items {
            match it {
                SelectItem::Star => outputs.extend(scope.star()),
                SelectItem::Column { col, alias } => {
                    outputs.push((output_name(col, alias), scope.resolve(col)?))
                }
            }
        }
        Ok((plan, outputs, scope))
    }

    #[allow(clippy::wrong_self_convention)] // named after the grammar rule
    fn from_item(&mut self, item: &FromItem) -> Result<(LogicalPlan, Scope)> {
        match item {
            FromItem::Table { name, alias } => {
                let columns = match self.catalog.table_columns(name) {
                    Some(c) => c,
                    None if self.catalog.is_graph(name) => {
                        return Err(BindError(format!(
                            "`{name}` is a graph; query it with a match clause"
                        )))
                    }
                    None => return Err(BindError(format!("unknown relation `{name}`"))),
                };
                let alias = alias.clone().unwrap_or_else(|| name.clone());
                let leaf = Leaf {
                    alias: alias.clone(),
                    kind: LeafKind::Table(name.clone()),
                    label: None,
                };
                let scope = Scope {
                    entries: vec![(alias.clone(), Entry::Leaf { alias, columns })],
                };
                Ok((LogicalPlan::Scan(leaf), scope))
            }
            FromItem::Sub { query, alias } => {
                let (plan, outputs, inner) = self.select_scoped(query)?;
                let q = alias
                    .clone()
                    .unwrap_or_else(|| format!("_sub{}", self.delta_count));
                let mut entries = vec![(q, Entry::Renamed { columns: outputs })];
                // pattern variables stay addressable through a flattened subquery
                for (k, e) in inner.entries {
                    let hidden = match e {
                        Entry::Vertex { .. } | Entry::Edge { .. } => Entry::Hidden(Box::new(e)),
                        e @ Entry::Hidden(_) => e,
                        _ => continue,
                    };
                    if entries.iter().all(|(q, _)| *q != k) {
                        entries.push((k, hidden));
                    }
                }
                Ok((plan, Scope { entries }))
            }
            FromItem::Join { left, right, on } => {
                let (lp, ls) = self.from_item(left)?;
                let (rp, rs) = self.from_item(right)?;
                let scope = ls.merge(rs)?;
                let cond = bind_expr(on, &scope)?;
                Ok((
                    LogicalPlan::ValueJoin {
                        left: Box::new(lp),
                        right: Box::new(rp),
                        cond: Some(cond),
                    },
                    scope,
                ))
            }
            FromItem::Map {
                left,
                right,
                matcher,
            } => self.delta(left, right, matcher.as_ref()),
        }
    }

    fn delta(
        &mut self,
        left: &FromItem,
        right: &FromItem,
        matcher: Option<&MatcherSpec>,
    ) -> Result<(LogicalPlan, Scope)> {
        let (lq, lname) = self.unit_from_item(left)?;
        let (rq, rname) = self.unit_from_item(right)?;
        if rq.columns.is_empty() {
            return Err(BindError("the right operand of map has no columns".into()));
        }
        let find = |cols: &[String], side: &Option<String>, c: &ColRef| -> Result<usize> {
            let qualified = c.to_string();
            cols.iter()
                .position(|n| {
                    *n == qualified
                        || (c.qualifier.is_none() || c.qualifier == *side) && *n == c.name
                })
                .ok_or_else(|| BindError(format!("map operand has no column `{c}`")))
        };
        let (kind, left_col, right_col) = match matcher {
            None => {
                let r = 0;
                let l = lq
                    .columns
                    .iter()
                    .position(|n| *n == rq.columns[0])
                    .unwrap_or(0);
                if lq.columns.is_empty() {
                    return Err(BindError("the left operand of map has no columns".into()));
                }
                (MatcherKind::Exact, l, r)
            }
            Some(MatcherSpec::Exact { left, right }) => (
                MatcherKind::Exact,
                find(&lq.columns, &lname, left)?,
                find(&rq.columns, &rname, right)?,
            ),
            Some(MatcherSpec::Fuzzy {
                left,
                right,
                threshold,
            }) => {
                if !(0.0..=1.0).contains(threshold) {
                    return Err(BindError(format!(
                        "fuzzy threshold {threshold} is outside [0, 1]"
                    )));
                }
                (
                    MatcherKind::Fuzzy(*threshold),
                    find(&lq.columns, &lname, left)?,
                    find(&rq.columns, &rname, right)?,
                )
            }
        };
        let mut columns = lq.columns.clone();
        let mut right_names = Vec::new();
        for (i, c) in rq.columns.iter().enumerate() {
            if i == right_col {
                continue;
            }
            let name = if columns.contains(c) {
                format!("{}.{c}", rname.clone().unwrap_or_else(|| "right".into()))
            } else {
                c.clone()
            };
            right_names.push((c.clone(), name.clone()));
            columns.push(name);
        }
        let alias = format!("δ{}", self.delta_count);
        self.delta_count += 1;
        let mut entries = Vec::new();
        let left_entry: Vec<(String, ColumnRef)> = lq
            .columns
            .iter()
            .map(|c| (c.clone(), ColumnRef::new(&alias, c)))
            .collect();
        let right_entry: Vec<(String, ColumnRef)> = right_names
            .iter()
            .map(|(c, n)| (c.clone(), ColumnRef::new(&alias, n)))
            .collect();
        entries.push((
            lname.clone().unwrap_or_else(|| format!("{alias}_left")),
            Entry::Renamed {
                columns: left_entry,
            },
        ));
        entries.push((
            rname.clone().unwrap_or_else(|| format!("{alias}_right")),
            Entry::Renamed {
                columns: right_entry,
            },
        ));
        let spec = DeltaSpec {
            left: lq,
            right: rq,
            matcher: BoundMatcher {
                kind,
                left_col,
                right_col,
            },
            columns,
        };
        let leaf = Leaf {
            alias,
            kind: LeafKind::Delta(Box::new(spec)),
            label: None,
        };
        Ok((LogicalPlan::Scan(leaf), Scope { entries }))
    }

    fn pattern_source(
        &mut self,
        graph: Option<&str>,
        paths: &[ast::Path],
    ) -> Result<(LogicalPlan, Scope)> {
        let graph = match graph {
            Some(g) if self.catalog.is_graph(g) => g.to_string(),
            Some(g) => return Err(BindError(format!("unknown graph `{g}`"))),
            None => self
                .catalog
                .default_graph()
                .ok_or_else(|| BindError("no graph to match against".into()))?,
        };
        let mut info = self.pattern.take().unwrap_or_else(|| PatternInfo {
            graph: graph.clone(),
            ..Default::default()
        });
        if info.graph != graph {
            return Err(BindError(
                "one query may match against only one graph".into(),
            ));
        }
        let v0 = info.vertices.len();
        let e0 = info.edges.len();
        let mut local: HashMap<String, usize> = HashMap::new();
        let mut scope = Scope::default();
        let mut vertex =
            |info: &mut PatternInfo, scope: &mut Scope, n: &ast::NodePat| -> Result<usize> {
                if let Some(&i) = local.get(&n.var) {
                    let have = &mut info.vertices[i].label;
                    match (&have, &n.label) {
                        (Some(a), Some(b)) if a != b => {
                            return Err(BindError(format!(
                                "vertex `{}` has two labels, `{a}` and `{b}`",
                                n.var
                            )))
                        }
                        (None, Some(b)) => *have = Some(b.clone()),
                        _ => {}
                    }
                    return Ok(i);
                }
                let i = info.vertices.len();
                let alias = format!("D_V^{i}");
                info.vertices.push(PatternVertexInfo {
                    var: n.var.clone(),
                    alias: alias.clone(),
                    label: n.label.clone(),
                });
                local.insert(n.var.clone(), i);
                scope.entries.push((n.var.clone(), Entry::Vertex { alias }));
                Ok(i)
            };
        for p in paths {
            for (k, e) in p.edges.iter().enumerate() {
                let s = vertex(&mut info, &mut scope, &p.nodes[k])?;
                let d = vertex(&mut info, &mut scope, &p.nodes[k + 1])?;
                let i = info.edges.len();
                let var = e.var.clone().unwrap_or_else(|| format!("_e{i}"));
                let (out_alias, in_alias) = (format!("D_o^{i}"), format!("D_i^{i}"));
                if scope.entries.iter().any(|(q, _)| *q == var) {
                    return Err(BindError(format!(
                        "pattern variable `{var}` is declared twice"
                    )));
                }
                scope.entries.push((
                    var.clone(),
                    Entry::Edge {
                        alias: out_alias.clone(),
                    },
                ));
                info.edges.push(PatternEdgeInfo {
                    var,
                    src: s,
                    dst: d,
                    label: e.label.clone(),
                    out_alias,
                    in_alias,
                });
            }
            if p.edges.is_empty() {
                vertex(&mut info, &mut scope, &p.nodes[0])?;
            }
        }
        let plan = pattern_plan(&info, v0, e0);
        self.pattern = Some(info);
        Ok((plan, scope))
    }
}

fn vertex_leaf(info: &PatternInfo, v: usize) -> Leaf {
    Leaf {
        alias: info.vertices[v].alias.clone(),
        kind: LeafKind::Vertex,
        label: info.vertices[v].label.clone(),
    }
}

/// Appendix-style translation: edges taken from the last written to the
/// first. An edge with one bound endpoint becomes two chained explorations;
/// one with both endpoints bound becomes an explorative condition on an
/// earlier exploration whose edge node designates the same vertex.
fn pattern_plan(info: &PatternInfo, v0: usize, e0: usize) -> LogicalPlan {
    let nv = info.vertices.len();
    let mut bound = vec![false; nv];
    let mut plan: Option<LogicalPlan> = None;
    let mut component: Option<LogicalPlan> = None;
    // (edge node alias, its end field, vertex designated)
    let mut designators: Vec<(String, RefAttr, usize)> = Vec::new();
    let mut pending: Vec<(String, ExplorativeCond)> = Vec::new();
    let mut filters: Vec<BoolExpr> = Vec::new();
    let flush = |plan: &mut Option<LogicalPlan>, component: &mut Option<LogicalPlan>| {
        if let Some(c) = component.take() {
            *plan = Some(match plan.take() {
                None => c,
                Some(p) => LogicalPlan::ValueJoin {
                    left: Box::new(p),
                    right: Box::new(c),
                    cond: None,
                },
            });
        }
    };
    let explore = |input: LogicalPlan, from: &str, attr: RefAttr, to: Leaf, edge: usize| {
        LogicalPlan::Explore {
            input: Box::new(input),
            from: from.to_string(),
            attr,
            to,
            edge,
            conds: vec![],
        }
    };
    let end_eq = |edge_alias: &str, v: usize| BoolExpr::Cmp {
        left: Scalar::Col(ColumnRef::new(edge_alias, END_VID)),
        op: CmpOp::Eq,
        right: Scalar::Col(ColumnRef::new(&info.vertices[v].alias, "vid")),
    };
    for i in (e0..info.edges.len()).rev() {
        let e = &info.edges[i];
        let (s, d) = (e.src, e.dst);
        let out_leaf = Leaf {
            alias: e.out_alias.clone(),
            kind: LeafKind::OutEdge,
            label: e.label.clone(),
        };
        let in_leaf = Leaf {
            alias: e.in_alias.clone(),
            kind: LeafKind::InEdge,
            label: e.label.clone(),
        };
        if !bound[s] && !bound[d] {
            flush(&mut plan, &mut component);
            component = Some(LogicalPlan::Scan(vertex_leaf(info, s)));
            bound[s] = true;
        }
        let cur = component.take().expect("component open");
        let sa = info.vertices[s].alias.clone();
        let da = info.vertices[d].alias.clone();
        let next = if s == d {
            // self-loop: the edge's end must designate the vertex itself
            filters.push(end_eq(&e.out_alias, s));
            explore(cur, &sa, RefAttr::OutL, out_leaf, i)
        } else if bound[s] && !bound[d] {
            bound[d] = true;
            designators.push((e.out_alias.clone(), RefAttr::DstL, d));
            let c = explore(cur, &sa, RefAttr::OutL, out_leaf, i);
            explore(c, &e.out_alias, RefAttr::DstL, vertex_leaf(info, d), i)
        } else if !bound[s] && bound[d] {
            bound[s] = true;
            designators.push((e.in_alias.clone(), RefAttr::SrcL, s));
            let c = explore(cur, &da, RefAttr::InL, in_leaf, i);
            explore(c, &e.in_alias, RefAttr::SrcL, vertex_leaf(info, s), i)
        } else if let Some((x, f, _)) = designators
            .iter()
            .find(|(_, f, v)| *f == RefAttr::DstL && *v == d)
        {
            pending.push((
                x.clone(),
                ExplorativeCond {
                    edge: i,
                    source: sa,
                    attr: RefAttr::OutL,
                    helper: e.out_alias.clone(),
                    field: RefAttr::DstL,
                    target: ColumnRef::new(x, f.name()),
                },
            ));
            cur
        } else if let Some((x, f, _)) = designators
            .iter()
            .find(|(_, f, v)| *f == RefAttr::SrcL && *v == s)
        {
            pending.push((
                x.clone(),
                ExplorativeCond {
                    edge: i,
                    source: da,
                    attr: RefAttr::InL,
                    helper: e.in_alias.clone(),
                    field: RefAttr::SrcL,
                    target: ColumnRef::new(x, f.name()),
                },
            ));
            cur
        } else {
            filters.push(end_eq(&e.out_alias, d));
            explore(cur, &sa, RefAttr::OutL, out_leaf, i)
        };
        component = Some(next);
    }
    flush(&mut plan, &mut component);
    for v in (v0..nv).filter(|&v| !bound[v]) {
        let leaf = LogicalPlan::Scan(vertex_leaf(info, v));
        plan = Some(match plan.take() {
            None => leaf,
            Some(p) => LogicalPlan::ValueJoin {
                left: Box::new(p),
                right: Box::new(leaf),
                cond: None,
            },
        });
    }
    let mut plan = plan.expect("pattern has at least one vertex");
    attach_conds(&mut plan, &mut pending);
    match BoolExpr::and(filters) {
        Some(pred) => LogicalPlan::Filter {
            input: Box::new(plan),
            pred,
        },
        None => plan,
    }
}

/// Put each explorative condition on the exploration that introduced its
/// target's edge node.
fn attach_conds(plan: &mut LogicalPlan, pending: &mut Vec<(String, ExplorativeCond)>) {
    match plan {
        LogicalPlan::Explore {
            input, to, conds, ..
        } => {
            pending.retain(|(x, c)| {
                if *x == to.alias {
                    conds.push(c.clone());
                    false
                } else {
                    true
                }
            });
            attach_conds(input, pending);
        }
        LogicalPlan::Filter { input, .. } | LogicalPlan::Project { input, .. } => {
            attach_conds(input, pending)
        }
        LogicalPlan::ValueJoin { left, right, .. } => {
            attach_conds(left, pending);
            attach_conds(right, pending);
        }
        LogicalPlan::Scan(_) => {}
    }
}
