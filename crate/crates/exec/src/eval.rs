use std::cell::RefCell;
use std::rc::Rc;

use rg_graph::{RgGraphStore, DV_IN, DV_LABEL, DV_OUT, DV_VID, E_END, E_EID, E_LABEL};
use rg_querygraph::{NodeId, NodeRole, QueryGraph};
use rg_sqldelta::{BoolExpr, CmpOp, ColumnRef, LeafKind, Scalar, END_VID};
use rg_store::{PlainValue, RefValue, RowLoc, Table};

use crate::{Database, ExecError, ExecStats, Result};

pub(crate) enum Source<'a> {
    Vertex,
    Edge,
    Table(&'a Table),
    Delta(usize),
}

/// What a query-graph node's slots point into, for one plan.
pub(crate) struct Env<'a> {
    pub graph: Option<&'a RgGraphStore>,
    pub g: &'a QueryGraph,
    pub sources: Vec<Source<'a>>,
    pub deltas: Vec<Table>,
    /// Per node: required label code, `Some(None)` if the label does not
    /// occur in the graph at all.
    pub labels: Vec<Option<Option<u32>>>,
    pub chunk: usize,
    pub stats: Rc<RefCell<ExecStats>>,
}

#[derive(Clone, Debug)]
pub(crate) enum Acc {
    Vid,
    VLabel,
    VAttr(String),
    VRef(usize),
    Eid,
    ELabel,
    EndVid,
    EAttr(String),
    ERef,
    Col(usize),
}

#[derive(Clone, Debug)]
pub(crate) struct Access {
    pub node: NodeId,
    pub acc: Acc,
}

#[derive(Clone, Debug)]
pub(crate) enum Operand {
    Col(Access),
    Lit(PlainValue),
}

#[derive(Clone, Debug)]
pub(crate) enum Pred {
    Cmp(Operand, CmpOp, Operand),
    And(Vec<Pred>),
    Or(Vec<Pred>),
}

impl<'a> Env<'a> {
    pub fn new(db: &'a Database, g: &'a QueryGraph, chunk: usize, stats: Rc<RefCell<ExecStats>>) -> Result<Env<'a>> {
        let graph = match &g.pattern {
            Some(p) => Some(db.graphs.get(&p.graph).ok_or_else(|| ExecError::UnknownRelation(p.graph.clone()))?),
            None => None,
        };
        let mut sources = Vec::with_capacity(g.nodes.len());
        let mut labels = Vec::with_capacity(g.nodes.len());
        let mut deltas = 0;
        for n in &g.nodes {
            sources.push(match &n.leaf.kind {
                LeafKind::Vertex => Source::Vertex,
                LeafKind::OutEdge | LeafKind::InEdge => Source::Edge,
                LeafKind::Table(t) => Source::Table(db.tables.get(t).ok_or_else(|| ExecError::UnknownRelation(t.clone()))?),
                LeafKind::Delta(_) => {
                    deltas += 1;
                    Source::Delta(deltas - 1)
                }
            });
            labels.push(match (&n.leaf.label, graph) {
                (Some(l), Some(gr)) => Some(gr.labels.code(l)),
                _ => None,
            });
        }
        Ok(Env { graph, g, sources, deltas: Vec::with_capacity(deltas), labels, chunk, stats })
    }

    pub fn store(&self) -> &'a rg_store::Store {
        &self.graph.expect("graph node without a graph").store
    }

    pub fn is_graph_node(&self, n: NodeId) -> bool {
        matches!(self.sources[n], Source::Vertex | Source::Edge)
    }

    /// Label test for a graph tuple reached or scanned for node `n`.
    #[inline]
    pub fn label_ok(&self, n: NodeId, loc: RowLoc) -> bool {
        match self.labels[n] {
            None => true,
            Some(None) => false,
            Some(Some(code)) => {
                let col = if matches!(self.sources[n], Source::Vertex) { DV_LABEL } else { E_LABEL };
                self.store().read_u32(loc, col) == Some(code)
            }
        }
    }

    pub fn access(&self, c: &ColumnRef) -> Result<Access> {
        let node = self.g.node(&c.alias).ok_or_else(|| ExecError::Type(format!("unknown alias {}", c.alias)))?;
        let col = c.column.as_str();
        let acc = match (&self.sources[node], self.g.nodes[node].role) {
            (Source::Vertex, _) => match col {
                "vid" => Acc::Vid,
                "label" => Acc::VLabel,
                "out_L" => Acc::VRef(DV_OUT),
                "in_L" => Acc::VRef(DV_IN),
                _ => Acc::VAttr(col.to_string()),
            },
            (Source::Edge, NodeRole::OutEdge(_) | NodeRole::InEdge(_)) => match col {
                "eid" => Acc::Eid,
                "label" => Acc::ELabel,
                END_VID => Acc::EndVid,
                "dst_L" | "src_L" => Acc::ERef,
                _ => Acc::EAttr(col.to_string()),
            },
            (Source::Edge, _) => return Err(ExecError::Type(format!("{} is not an edge", c.alias))),
            (Source::Table(t), _) => Acc::Col(t.column_index(col).ok_or_else(|| ExecError::Type(format!("no column {c}")))?),
            (Source::Delta(_), _) => {
                let cols = match &self.g.nodes[node].leaf.kind {
                    LeafKind::Delta(spec) => &spec.columns,
                    _ => unreachable!(),
                };
                Acc::Col(cols.iter().position(|x| x == col).ok_or_else(|| ExecError::Type(format!("no column {c}")))?)
            }
        };
        Ok(Access { node, acc })
    }

    pub fn pred(&self, e: &BoolExpr) -> Result<Pred> {
        Ok(match e {
            BoolExpr::Cmp { left, op, right } => Pred::Cmp(self.operand(left)?, *op, self.operand(right)?),
            BoolExpr::And(v) => Pred::And(v.iter().map(|e| self.pred(e)).collect::<Result<_>>()?),
            BoolExpr::Or(v) => Pred::Or(v.iter().map(|e| self.pred(e)).collect::<Result<_>>()?),
        })
    }

    fn operand(&self, s: &Scalar) -> Result<Operand> {
        Ok(match s {
            Scalar::Col(c) => Operand::Col(self.access(c)?),
            Scalar::Lit(v) => Operand::Lit(v.clone()),
        })
    }

    /// Storage row of the single vertex an edge tuple's end reference
    /// designates, packed.
    #[inline]
    pub fn end_vertex(&self, edge: RowLoc) -> Result<u64> {
        let s = self.store();
        let r = s.read_ref(edge, E_END).ok_or_else(|| ExecError::Type("edge without end reference".into()))?;
        let v = s.resolve(&r)?;
        debug_assert_eq!(v.len(), 1);
        Ok(RowLoc { frag: v.frag, row: v.start }.pack())
    }

    pub fn read_ref(&self, loc: RowLoc, col: usize) -> Result<RefValue> {
        self.store().read_ref(loc, col).ok_or_else(|| ExecError::Type(format!("column {col} holds no reference")))
    }

    fn id_list(&self, r: &RefValue, id_col: usize) -> Result<PlainValue> {
        let s = self.store();
        let ids: Vec<String> = s.resolve(r)?.iter().map(|l| s.read_i64(l, id_col).unwrap_or_default().to_string()).collect();
        Ok(PlainValue::Str(format!("[{}]", ids.join(","))))
    }

    pub fn value(&self, a: &Access, slot: u64) -> Result<PlainValue> {
        let loc = || RowLoc::unpack(slot);
        Ok(match &a.acc {
            Acc::Vid => PlainValue::Int(self.store().read_i64(loc(), DV_VID).unwrap_or_default()),
            Acc::Eid => PlainValue::Int(self.store().read_i64(loc(), E_EID).unwrap_or_default()),
            Acc::VLabel | Acc::ELabel => {
                let col = if matches!(a.acc, Acc::VLabel) { DV_LABEL } else { E_LABEL };
                let code = self.store().read_u32(loc(), col).unwrap_or_default();
                PlainValue::Str(self.graph.unwrap().labels.name(code).to_string())
            }
            Acc::VAttr(name) => {
                let vid = self.store().read_i64(loc(), DV_VID).unwrap_or_default();
                self.graph.unwrap().vertex_attr(vid, name)
            }
            Acc::EAttr(name) => {
                let eid = self.store().read_i64(loc(), E_EID).unwrap_or_default();
                self.graph.unwrap().edge_attr(eid, name)
            }
            Acc::EndVid => {
                let v = RowLoc::unpack(self.end_vertex(loc())?);
                PlainValue::Int(self.store().read_i64(v, DV_VID).unwrap_or_default())
            }
            Acc::VRef(col) => self.id_list(&self.read_ref(loc(), *col)?, E_EID)?,
            Acc::ERef => self.id_list(&self.read_ref(loc(), E_END)?, DV_VID)?,
            Acc::Col(i) => match &self.sources[a.node] {
                Source::Table(t) => t.rows[slot as usize][*i].clone(),
                Source::Delta(d) => self.deltas[*d].rows[slot as usize][*i].clone(),
                _ => unreachable!(),
            },
        })
    }

    pub fn eval(&self, p: &Pred, row: &dyn Fn(NodeId) -> u64) -> Result<bool> {
        Ok(match p {
            Pred::Cmp(l, op, r) => {
                let v = |o: &Operand| -> Result<PlainValue> {
                    match o {
                        Operand::Col(a) => self.value(a, row(a.node)),
                        Operand::Lit(v) => Ok(v.clone()),
                    }
                };
                op.eval(&v(l)?, &v(r)?)
            }
            Pred::And(v) => {
                for p in v {
                    if !self.eval(p, row)? {
                        return Ok(false);
                    }
                }
                true
            }
            Pred::Or(v) => {
                for p in v {
                    if self.eval(p, row)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    pub fn eval_all(&self, ps: &[Pred], row: &dyn Fn(NodeId) -> u64) -> Result<bool> {
        for p in ps {
            if !self.eval(p, row)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
