use std::cell::RefCell;
use std::collections::{HashMap, VecDeque};
use std::rc::Rc;

use rg_er::{exact_id_matcher, fuzzy_string_matcher, Col, ErMatcher};
use rg_graph::{DV_IN, DV_OUT, E_END};
use rg_planner::{Method, PhysOp, PhysPlan, Planned};
use rg_querygraph::{bit, NodeId, NodeSet};
use rg_sqldelta::{CmpOp, LeafKind, MatcherKind, RefAttr};
use rg_store::{PlainValue, RefValue, RowLoc, Table};

use crate::chunk::Chunk;
use crate::eval::{Access, Env, Operand, Pred, Source};
use crate::{Database, ExecError, ExecStats, Result};

pub(crate) fn run(p: &Planned, db: &Database, chunk: usize, stats: &Rc<RefCell<ExecStats>>) -> Result<Table> {
    let mut env = Env::new(db, &p.graph, chunk, stats.clone())?;
    let mut deltas: HashMap<NodeId, Table> = HashMap::new();
    let mut err = None;
    p.plan.walk(&mut |op| {
        if let PhysOp::DeltaJoin { node, left, right, matcher, columns, .. } = &op.op {
            if err.is_none() && !deltas.contains_key(node) {
                match delta_join(left, right, matcher, columns, db, chunk, stats) {
                    Ok(t) => {
                        deltas.insert(*node, t);
                    }
                    Err(e) => err = Some(e),
                }
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    for (n, node) in p.graph.nodes.iter().enumerate() {
        if matches!(node.leaf.kind, LeafKind::Delta(_)) {
            env.deltas.push(deltas.remove(&n).ok_or_else(|| ExecError::Type(format!("δ-join leaf {} has no plan", node.alias)))?);
        }
    }
    let PhysOp::Project { input, items } = &p.plan.op else {
        return Err(ExecError::Type("plan root must be a projection".into()));
    };
    let accs: Vec<Access> = items.iter().map(|(c, _)| env.access(c)).collect::<Result<_>>()?;
    let mut root = build(input, &env)?;
    let mut out = Table::new(items.iter().map(|(_, n)| n.clone()).collect());
    while let Some(c) = root.next(&env)? {
        for i in 0..c.len {
            out.rows.push(accs.iter().map(|a| env.value(a, c.get(a.node, i))).collect::<Result<_>>()?);
        }
    }
    Ok(out)
}

/// Pipeline breaker: both sides run to completion, then the matcher pairs
/// their rows. Output: left row, then right row without A_0.
fn delta_join(
    left: &Planned,
    right: &Planned,
    m: &rg_sqldelta::BoundMatcher,
    columns: &[String],
    db: &Database,
    chunk: usize,
    stats: &Rc<RefCell<ExecStats>>,
) -> Result<Table> {
    let l = run(left, db, chunk, stats)?;
    let r = run(right, db, chunk, stats)?;
    let pairs = match m.kind {
        MatcherKind::Exact => exact_id_matcher(Col::Index(m.left_col), Col::Index(m.right_col)).matches(&l, &r)?,
        MatcherKind::Fuzzy(th) => fuzzy_string_matcher(Col::Index(m.left_col), Col::Index(m.right_col), th).matches(&l, &r)?,
    };
    let mut t = Table::new(columns.to_vec());
    for (i, j) in pairs {
        let mut row = l.rows[i].clone();
        row.extend(r.rows[j].iter().enumerate().filter(|(k, _)| *k != m.right_col).map(|(_, v)| v.clone()));
        t.rows.push(row);
    }
    Ok(t)
}

trait Op {
    fn next(&mut self, env: &Env) -> Result<Option<Chunk>>;
}

type BoxOp = Box<dyn Op>;

/// Output buffer cutting rows into chunks of at most the chunk size.
struct Out {
    width: usize,
    present: NodeSet,
    size: usize,
    buf: Chunk,
    ready: VecDeque<Chunk>,
}

impl Out {
    fn new(width: usize, present: NodeSet, size: usize) -> Out {
        Out { width, present, size, buf: Chunk::new(width, present), ready: VecDeque::new() }
    }

    #[inline]
    fn seal_if_full(&mut self) {
        if self.buf.len >= self.size {
            let full = std::mem::replace(&mut self.buf, Chunk::new(self.width, self.present));
            self.ready.push_back(full);
        }
    }

    fn push_from(&mut self, src: &Chunk, i: usize, extra: &[(NodeId, u64)]) {
        self.buf.push_from(src, i, extra);
        self.seal_if_full();
    }

    fn push_pair(&mut self, a: &Chunk, i: usize, b: &Chunk, j: usize) {
        self.buf.push_pair(a, i, b, j);
        self.seal_if_full();
    }

    fn finish(&mut self) {
        if self.buf.len > 0 {
            let last = std::mem::replace(&mut self.buf, Chunk::new(self.width, self.present));
            self.ready.push_back(last);
        }
    }

    fn pop(&mut self, env: &Env) -> Option<Chunk> {
        let c = self.ready.pop_front()?;
        let mut s = env.stats.borrow_mut();
        s.chunks += 1;
        s.max_chunk_rows = s.max_chunk_rows.max(c.len);
        Some(c)
    }
}

fn preds(env: &Env, ps: &[rg_sqldelta::BoolExpr]) -> Result<Vec<Pred>> {
    ps.iter().map(|p| env.pred(p)).collect()
}

fn build(p: &PhysPlan, env: &Env) -> Result<BoxOp> {
    let width = env.g.nodes.len();
    let out = || Out::new(width, p.nodes, env.chunk);
    Ok(match &p.op {
        PhysOp::Scan { node, filters, .. } => {
            let rows: Vec<u64> = match &env.sources[*node] {
                Source::Vertex => {
                    let g = env.graph.unwrap();
                    g.store.view_of(g.dv_fragment())?.iter().map(RowLoc::pack).collect()
                }
                Source::Edge => {
                    let g = env.graph.unwrap();
                    let rel = if matches!(env.g.nodes[*node].leaf.kind, LeafKind::OutEdge) { g.d_out } else { g.d_in };
                    g.store.scan(rel).map(RowLoc::pack).collect()
                }
                Source::Table(t) => (0..t.len() as u64).collect(),
                Source::Delta(d) => (0..env.deltas[*d].len() as u64).collect(),
            };
            Box::new(Scan { node: *node, rows, at: 0, preds: preds(env, filters)?, out: out() })
        }
        PhysOp::DeltaJoin { node, .. } => {
            let Source::Delta(d) = env.sources[*node] else { unreachable!() };
            Box::new(Scan { node: *node, rows: (0..env.deltas[d].len() as u64).collect(), at: 0, preds: vec![], out: out() })
        }
        PhysOp::Explore { input, from, attr, to, filters, ix, method, hash_key, .. } => {
            let col = ref_col(*attr);
            let ix = ix
                .iter()
                .map(|c| IxExec { source: c.source, col: ref_col(c.attr), helper: c.helper, cache: HashMap::new() })
                .collect();
            let key = match hash_key {
                Some((l, r)) if *method == Method::Hash => Some((env.access(l)?, env.access(r)?)),
                _ => None,
            };
            Box::new(Explore {
                input: build(input, env)?,
                from: *from,
                to: *to,
                col,
                preds: preds(env, filters)?,
                ix,
                hash: *method == Method::Hash,
                key,
                cache: HashMap::new(),
                out: out(),
                done: false,
            })
        }
        PhysOp::Join { left, right, method, keys, preds: ps } => {
            let mut keys = keys.iter().map(|(l, r)| Ok((env.access(l)?, env.access(r)?))).collect::<Result<Vec<_>>>()?;
            let mut ps = preds(env, ps)?;
            if *method == Method::Nl {
                ps.extend(keys.drain(..).map(|(l, r)| Pred::Cmp(Operand::Col(l), CmpOp::Eq, Operand::Col(r))));
            }
            // hash: build the smaller estimated side; NL: materialize the right
            let build_left = *method == Method::Hash && left.card < right.card;
            let (b, s) = if build_left { (left, right) } else { (right, left) };
            Box::new(Join {
                build_plan: Some(build(b, env)?),
                probe: build(s, env)?,
                built: None,
                build_left,
                hash: *method == Method::Hash,
                keys,
                preds: ps,
                table: HashMap::new(),
                out: out(),
                done: false,
            })
        }
        PhysOp::Filter { input, preds: ps } => Box::new(Filter { input: build(input, env)?, preds: preds(env, ps)?, out: out(), done: false }),
        PhysOp::Project { .. } => return Err(ExecError::Type("projection below the plan root".into())),
    })
}

fn ref_col(a: RefAttr) -> usize {
    match a {
        RefAttr::OutL => DV_OUT,
        RefAttr::InL => DV_IN,
        RefAttr::DstL | RefAttr::SrcL => E_END,
    }
}

struct Scan {
    node: NodeId,
    rows: Vec<u64>,
    at: usize,
    preds: Vec<Pred>,
    out: Out,
}

impl Op for Scan {
    fn next(&mut self, env: &Env) -> Result<Option<Chunk>> {
        let graph = env.is_graph_node(self.node);
        let one = Chunk::new(env.g.nodes.len(), 0);
        while self.out.ready.is_empty() && self.at < self.rows.len() {
            let slot = self.rows[self.at];
            self.at += 1;
            if graph && !env.label_ok(self.node, RowLoc::unpack(slot)) {
                continue;
            }
            let n = self.node;
            if env.eval_all(&self.preds, &|_| slot)? {
                self.out.push_from(&one, 0, &[(n, slot)]);
            }
        }
        if self.at >= self.rows.len() {
            self.out.finish();
        }
        Ok(self.out.pop(env))
    }
}

struct IxExec {
    source: NodeId,
    col: usize,
    helper: NodeId,
    /// Per distinct A' reference: helper-labeled tuples counted by the
    /// vertex their end reference designates.
    cache: HashMap<RefValue, Rc<HashMap<u64, u32>>>,
}

struct Explore {
    input: BoxOp,
    from: NodeId,
    to: NodeId,
    col: usize,
    preds: Vec<Pred>,
    ix: Vec<IxExec>,
    hash: bool,
    key: Option<(Access, Access)>,
    cache: HashMap<RefValue, Rc<HashMap<PlainValue, Vec<u64>>>>,
    out: Out,
    done: bool,
}

impl Explore {
    fn key_table(&mut self, env: &Env, r: &RefValue) -> Result<Rc<HashMap<PlainValue, Vec<u64>>>> {
        if let Some(t) = self.cache.get(r) {
            env.stats.borrow_mut().explore_hits += 1;
            return Ok(t.clone());
        }
        env.stats.borrow_mut().explore_builds += 1;
        let probe = &self.key.as_ref().unwrap().1;
        let mut t: HashMap<PlainValue, Vec<u64>> = HashMap::new();
        for loc in env.store().resolve(r)?.iter() {
            if env.label_ok(self.to, loc) {
                let v = env.value(probe, loc.pack())?;
                if !v.is_null() {
                    t.entry(v).or_default().push(loc.pack());
                }
            }
        }
        let t = Rc::new(t);
        self.cache.insert(*r, t.clone());
        Ok(t)
    }

    fn process(&mut self, env: &Env, c: &Chunk) -> Result<()> {
        let store = env.store();
        let mut srcs: Vec<RefValue> = Vec::with_capacity(self.ix.len());
        let mut counts: Vec<Option<Rc<HashMap<u64, u32>>>> = Vec::with_capacity(self.ix.len());
        let mut cands: Vec<u64> = Vec::new();
        for i in 0..c.len {
            let r = env.read_ref(RowLoc::unpack(c.get(self.from, i)), self.col)?;
            cands.clear();
            match &self.key {
                Some((ka, _)) if self.hash => {
                    let v = env.value(ka, c.get(ka.node, i))?;
                    let t = self.key_table(env, &r)?;
                    if let Some(hit) = t.get(&v) {
                        cands.extend_from_slice(hit);
                    }
                }
                _ => cands.extend(store.resolve(&r)?.iter().filter(|l| env.label_ok(self.to, *l)).map(RowLoc::pack)),
            }
            if cands.is_empty() {
                continue;
            }
            srcs.clear();
            counts.clear();
            for x in &mut self.ix {
                let sr = env.read_ref(RowLoc::unpack(c.get(x.source, i)), x.col)?;
                if self.hash {
                    let table = match x.cache.get(&sr) {
                        Some(t) => {
                            env.stats.borrow_mut().explore_hits += 1;
                            t.clone()
                        }
                        None => {
                            env.stats.borrow_mut().explore_builds += 1;
                            let mut m: HashMap<u64, u32> = HashMap::new();
                            for l in store.resolve(&sr)?.iter() {
                                if env.label_ok(x.helper, l) {
                                    *m.entry(env.end_vertex(l)?).or_default() += 1;
                                }
                            }
                            let t = Rc::new(m);
                            x.cache.insert(sr, t.clone());
                            t
                        }
                    };
                    counts.push(Some(table));
                } else {
                    counts.push(None);
                }
                srcs.push(sr);
            }
            for &t in &cands {
                let to = self.to;
                if !env.eval_all(&self.preds, &|n| if n == to { t } else { c.get(n, i) })? {
                    continue;
                }
                let mut mult = 1u64;
                if !self.ix.is_empty() {
                    let target = env.end_vertex(RowLoc::unpack(t))?;
                    for (k, x) in self.ix.iter().enumerate() {
                        let n = match &counts[k] {
                            Some(m) => m.get(&target).copied().unwrap_or(0) as u64,
                            None => {
                                let mut n = 0;
                                for l in store.resolve(&srcs[k])?.iter() {
                                    if env.label_ok(x.helper, l) && env.end_vertex(l)? == target {
                                        n += 1;
                                    }
                                }
                                n
                            }
                        };
                        mult *= n;
                        if mult == 0 {
                            break;
                        }
                    }
                }
                for _ in 0..mult {
                    self.out.push_from(c, i, &[(to, t)]);
                }
            }
        }
        Ok(())
    }
}

impl Op for Explore {
    fn next(&mut self, env: &Env) -> Result<Option<Chunk>> {
        while self.out.ready.is_empty() && !self.done {
            match self.input.next(env)? {
                Some(c) => self.process(env, &c)?,
                None => {
                    self.done = true;
                    self.out.finish();
                }
            }
        }
        Ok(self.out.pop(env))
    }
}

fn drain(op: &mut BoxOp, env: &Env, present: NodeSet) -> Result<Chunk> {
    let mut all = Chunk::new(env.g.nodes.len(), present);
    while let Some(c) = op.next(env)? {
        all.present = c.present;
        all.append(&c);
    }
    Ok(all)
}

struct Join {
    build_plan: Option<BoxOp>,
    probe: BoxOp,
    built: Option<Chunk>,
    build_left: bool,
    hash: bool,
    /// (left column, right column)
    keys: Vec<(Access, Access)>,
    preds: Vec<Pred>,
    table: HashMap<Vec<PlainValue>, Vec<usize>>,
    out: Out,
    done: bool,
}

impl Join {
    fn key(&self, env: &Env, c: &Chunk, i: usize, build_side: bool) -> Result<Option<Vec<PlainValue>>> {
        let mut k = Vec::with_capacity(self.keys.len());
        for (l, r) in &self.keys {
            let a = if build_side == self.build_left { l } else { r };
            let v = env.value(a, c.get(a.node, i))?;
            if v.is_null() {
                return Ok(None);
            }
            k.push(v);
        }
        Ok(Some(k))
    }

    fn prepare(&mut self, env: &Env) -> Result<()> {
        let Some(mut op) = self.build_plan.take() else { return Ok(()) };
        let b = drain(&mut op, env, 0)?;
        if self.hash {
            env.stats.borrow_mut().hash_join_builds += 1;
            for j in 0..b.len {
                if let Some(k) = self.key(env, &b, j, true)? {
                    self.table.entry(k).or_default().push(j);
                }
            }
        }
        self.built = Some(b);
        Ok(())
    }

    fn process(&mut self, env: &Env, c: &Chunk) -> Result<()> {
        let b = self.built.take().unwrap();
        let mut res = Ok(());
        for i in 0..c.len {
            let matches: Vec<usize> = if self.hash {
                match self.key(env, c, i, false) {
                    Ok(Some(k)) => self.table.get(&k).cloned().unwrap_or_default(),
                    Ok(None) => vec![],
                    Err(e) => {
                        res = Err(e);
                        break;
                    }
                }
            } else {
                (0..b.len).collect()
            };
            for j in matches {
                let row = |n: NodeId| if b.present & bit(n) != 0 { b.get(n, j) } else { c.get(n, i) };
                match env.eval_all(&self.preds, &row) {
                    Ok(true) => self.out.push_pair(c, i, &b, j),
                    Ok(false) => {}
                    Err(e) => {
                        res = Err(e);
                        break;
                    }
                }
            }
        }
        self.built = Some(b);
        res
    }
}

impl Op for Join {
    fn next(&mut self, env: &Env) -> Result<Option<Chunk>> {
        self.prepare(env)?;
        while self.out.ready.is_empty() && !self.done {
            match self.probe.next(env)? {
                Some(c) => self.process(env, &c)?,
                None => {
                    self.done = true;
                    self.out.finish();
                }
            }
        }
        Ok(self.out.pop(env))
    }
}

struct Filter {
    input: BoxOp,
    preds: Vec<Pred>,
    out: Out,
    done: bool,
}

impl Op for Filter {
    fn next(&mut self, env: &Env) -> Result<Option<Chunk>> {
        while self.out.ready.is_empty() && !self.done {
            match self.input.next(env)? {
                Some(c) => {
                    for i in 0..c.len {
                        if env.eval_all(&self.preds, &|n| c.get(n, i))? {
                            self.out.push_from(&c, i, &[]);
                        }
                    }
                }
                None => {
                    self.done = true;
                    self.out.finish();
                }
            }
        }
        Ok(self.out.pop(env))
    }
}
