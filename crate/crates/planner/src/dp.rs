use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use rg_querygraph::{bit, members, rename_alias, EdgeKind, NodeId, NodeRole, NodeSet, QueryGraph};
use rg_sqldelta::{BoolExpr, CmpOp, ColumnRef, RefAttr, Scalar, END_VID};

use crate::physical::{IxCond, Method, PhysOp, PhysPlan};
use crate::stats::{Estimator, PlannerStats};
use crate::PlanError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostParams {
    /// Scan cost relative to a join's output.
    pub tau: f64,
    /// Cost per pair compared by an entity-resolution join.
    pub kappa: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams { tau: 0.2, kappa: 1.0 }
    }
}

/// Switches for ablation runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlannerOptions {
    /// Allow explorative conditions (intersective exploration).
    pub intersective: bool,
    /// Allow hash variants.
    pub hash: bool,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        PlannerOptions { intersective: true, hash: true }
    }
}

fn upto(i: usize) -> NodeSet {
    if i >= 63 {
        u64::MAX
    } else {
        (1u64 << (i + 1)) - 1
    }
}

fn subsets(s: NodeSet) -> impl Iterator<Item = NodeSet> {
    // all non-empty subsets, smallest first
    let mut sub: NodeSet = 0;
    std::iter::from_fn(move || {
        sub = sub.wrapping_sub(s) & s;
        (sub != 0).then_some(sub)
    })
}

fn ref_attr(name: &str) -> Option<RefAttr> {
    Some(match name {
        "out_L" => RefAttr::OutL,
        "in_L" => RefAttr::InL,
        "dst_L" => RefAttr::DstL,
        "src_L" => RefAttr::SrcL,
        _ => return None,
    })
}

/// Planning state for one query graph.
pub struct Ctx<'a> {
    pub g: &'a QueryGraph,
    pub stats: &'a PlannerStats,
    pub params: CostParams,
    pub opts: PlannerOptions,
    pub leaf_cards: BTreeMap<NodeId, f64>,
    /// Prebuilt leaves for δ-join nodes.
    pub leaf_plans: BTreeMap<NodeId, Rc<PhysPlan>>,
    partner: Vec<Option<NodeId>>,
    dup_pairs: Vec<NodeSet>,
    edge_nodes: NodeSet,
    /// Result size per covered node set, fixed by its first estimate so
    /// that every plan of a set agrees on it.
    cards: RefCell<HashMap<NodeSet, f64>>,
}

impl<'a> Ctx<'a> {
    pub fn new(g: &'a QueryGraph, stats: &'a PlannerStats, params: CostParams, opts: PlannerOptions) -> Self {
        let partner: Vec<Option<NodeId>> = (0..g.nodes.len()).map(|n| g.dup_partner(n)).collect();
        let dup_pairs = g.edges.iter().filter(|e| matches!(e.kind, EdgeKind::Dup)).map(|e| bit(e.a) | bit(e.b)).collect();
        let edge_nodes = g
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n.role, NodeRole::OutEdge(_) | NodeRole::InEdge(_)))
            .fold(0, |m, (i, _)| m | bit(i));
        Ctx { g, stats, params, opts, leaf_cards: BTreeMap::new(), leaf_plans: BTreeMap::new(), partner, dup_pairs, edge_nodes, cards: RefCell::default() }
    }

    pub fn est(&self) -> Estimator<'_> {
        Estimator { stats: self.stats, g: self.g, leaf_cards: &self.leaf_cards }
    }

    fn partners(&self, s: NodeSet) -> NodeSet {
        members(s).filter_map(|n| self.partner[n]).fold(0, |m, p| m | bit(p))
    }

    fn dup_free(&self, s: NodeSet) -> bool {
        self.dup_pairs.iter().all(|p| s & p != *p)
    }

    fn nbr(&self, s: NodeSet, exclude: NodeSet) -> NodeSet {
        self.g.neighborhood(s) & !self.partners(exclude)
    }

    /// Connected-subgraph / connected-complement pairs over dup-free sets,
    /// each unordered pair once, in the order of DPccp.
    pub fn enumerate_pairs(&self) -> Vec<(NodeSet, NodeSet)> {
        let mut out = Vec::new();
        for i in (0..self.g.nodes.len()).rev() {
            let s = bit(i);
            self.emit_csg(s, &mut out);
            self.csg_rec(s, upto(i), &mut out);
        }
        out
    }

    fn emit_csg(&self, s1: NodeSet, out: &mut Vec<(NodeSet, NodeSet)>) {
        let x = s1 | upto(s1.trailing_zeros() as usize);
        let nb = self.nbr(s1, s1) & !x;
        for i in members(nb).collect::<Vec<_>>().into_iter().rev() {
            let s2 = bit(i);
            out.push((s1, s2));
            self.cmp_rec(s1, s2, x | (upto(i) & nb), out);
        }
    }

    fn csg_rec(&self, s1: NodeSet, x: NodeSet, out: &mut Vec<(NodeSet, NodeSet)>) {
        let nb = self.nbr(s1, s1) & !x;
        let grown: Vec<NodeSet> = subsets(nb).map(|sub| s1 | sub).filter(|s| self.dup_free(*s)).collect();
        for s in &grown {
            self.emit_csg(*s, out);
        }
        for s in grown {
            self.csg_rec(s, x | nb, out);
        }
    }

    fn cmp_rec(&self, s1: NodeSet, s2: NodeSet, x: NodeSet, out: &mut Vec<(NodeSet, NodeSet)>) {
        let nb = self.nbr(s2, s1 | s2) & !x;
        let grown: Vec<NodeSet> = subsets(nb).map(|sub| s2 | sub).filter(|s| self.dup_free(*s)).collect();
        for s in &grown {
            out.push((s1, *s));
        }
        for s in grown {
            self.cmp_rec(s1, s, x | nb, out);
        }
    }

    /// Structural legality of a pair: no duplicate pair split across the
    /// sides; at most one explore edge between them, into a single node.
    /// Two crossing edges are allowed when they enter a single edge node
    /// and leave it again by its end reference (the edge closes a cycle).
    pub fn is_legal_pair(&self, s1: NodeSet, s2: NodeSet) -> bool {
        if self.partners(s1) & s2 != 0 {
            return false;
        }
        let xs = self.g.crossing_explores(s1, s2);
        match xs.len() {
            0 => true,
            1 => {
                let e = &self.g.edges[xs[0]];
                (s2 == bit(e.b) && s1 & bit(e.a) != 0) || (s1 == bit(e.b) && s2 & bit(e.a) != 0)
            }
            2 => self.closing(s1, s2).is_some() || self.closing(s2, s1).is_some(),
            _ => false,
        }
    }

    /// For input `s1` and single probe `s2`: the entering explore edge and,
    /// when the probe's end also points back into `s1`, that edge too.
    fn entry(&self, s1: NodeSet, s2: NodeSet) -> Option<(usize, Option<usize>)> {
        if s2.count_ones() != 1 {
            return None;
        }
        let xs = self.g.crossing_explores(s1, s2);
        match xs.len() {
            1 => {
                let e = &self.g.edges[xs[0]];
                (s2 == bit(e.b)).then_some((xs[0], None))
            }
            2 => self.closing(s1, s2),
            _ => None,
        }
    }

    fn closing(&self, s1: NodeSet, s2: NodeSet) -> Option<(usize, Option<usize>)> {
        if s2.count_ones() != 1 {
            return None;
        }
        let b = s2.trailing_zeros() as usize;
        let xs = self.g.crossing_explores(s1, s2);
        let into = xs.iter().copied().find(|&i| {
            let e = &self.g.edges[i];
            e.b == b && matches!(e.kind, EdgeKind::Explore { attr: RefAttr::OutL | RefAttr::InL, .. })
        })?;
        let back = xs.iter().copied().find(|&i| {
            let e = &self.g.edges[i];
            e.a == b && matches!(e.kind, EdgeKind::Explore { attr: RefAttr::DstL | RefAttr::SrcL, .. })
        })?;
        Some((into, Some(back)))
    }

    /// Explorative conditions for exploring into `b` from `s1` (ResolveExp):
    /// a node outside both sides, one explore edge away from `s1`, whose end
    /// designates the same vertex as `b`'s end.
    pub fn resolve_exp(&self, s1: NodeSet, consumed: NodeSet, b: NodeId) -> Vec<IxCond> {
        let mut out: Vec<IxCond> = Vec::new();
        let mut taken = consumed;
        for e in &self.g.edges {
            let EdgeKind::Explore { attr, pattern_edge } = e.kind else { continue };
            let h = e.b;
            if s1 & bit(e.a) == 0 || (s1 | taken) & bit(h) != 0 || h == b || !self.g.nodes[h].condition_only {
                continue;
            }
            if let Some(p) = self.partner[h] {
                if (s1 | taken | bit(b)) & bit(p) != 0 {
                    continue;
                }
            }
            for sp in &self.g.edges {
                let EdgeKind::Value { pred: BoolExpr::Cmp { left: Scalar::Col(l), right: Scalar::Col(r), .. }, same_pointer: true } = &sp.kind
                else {
                    continue;
                };
                if !((sp.a == h && sp.b == b) || (sp.a == b && sp.b == h)) {
                    continue;
                }
                let (hc, bc) = if l.alias == self.g.nodes[h].alias { (l, r) } else { (r, l) };
                out.push(IxCond {
                    edge: pattern_edge,
                    source: e.a,
                    source_alias: self.g.nodes[e.a].alias.clone(),
                    attr,
                    helper: h,
                    helper_alias: self.g.nodes[h].alias.clone(),
                    helper_label: self.g.nodes[h].leaf.label.clone(),
                    field: ref_attr(&hc.column).expect("end reference"),
                    probe_alias: self.g.nodes[b].alias.clone(),
                    target_field: ref_attr(&bc.column).expect("end reference"),
                });
                taken |= bit(h);
                break;
            }
        }
        out
    }

    fn vertex_card(&self) -> f64 {
        let gs = self.g.pattern.as_ref().and_then(|p| self.stats.graphs.get(&p.graph));
        gs.map_or(self.stats.default_card, |g| g.card("D_V") as f64).max(1.0)
    }

    fn card_for(&self, s: NodeSet, k: NodeSet, estimate: f64) -> f64 {
        if let Some(c) = self.est().set_override(s | k) {
            return c;
        }
        *self.cards.borrow_mut().entry(s | k).or_insert(estimate)
    }

    pub fn scan(&self, n: NodeId) -> Rc<PhysPlan> {
        if let Some(p) = self.leaf_plans.get(&n) {
            return p.clone();
        }
        let node = &self.g.nodes[n];
        let card = self.est().base_card(n);
        Rc::new(PhysPlan {
            op: PhysOp::Scan {
                node: n,
                alias: node.alias.clone(),
                kind: node.leaf.kind.clone(),
                label: node.leaf.label.clone(),
                filters: node.filters.clone(),
            },
            nodes: bit(n),
            consumed: 0,
            card,
            cost: self.params.tau * card,
        })
    }

    /// Explore from `p1` into the single node `b`; one plan per allowed
    /// physical variant, the heuristic's choice first.
    pub fn explore(&self, p1: &Rc<PhysPlan>, b: NodeId, variants: bool) -> Vec<PhysPlan> {
        let (s1, k1) = (p1.nodes, p1.consumed);
        let Some((into, back)) = self.entry(s1, bit(b)) else { return vec![] };
        if k1 & bit(b) != 0 || self.partner[b].is_some_and(|p| (s1 | k1) & bit(p) != 0) {
            return vec![];
        }
        let e = &self.g.edges[into];
        let EdgeKind::Explore { attr, .. } = e.kind else { unreachable!() };
        let a = e.a;
        let ix = if self.opts.intersective { self.resolve_exp(s1, k1, b) } else { vec![] };
        let k = ix.iter().fold(k1, |m, c| m | bit(c.helper));
        let node = &self.g.nodes[b];
        let mut filters = node.filters.clone();
        filters.extend(self.g.crossing_values(s1, bit(b)).into_iter().cloned());
        let est = self.est();
        let mut sel = est.arrival_sel(b);
        for f in &filters[node.filters.len()..] {
            sel *= est.selectivity(f);
        }
        if let Some(bi) = back {
            let c = self.g.edges[bi].b;
            filters.push(BoolExpr::Cmp {
                left: Scalar::Col(ColumnRef::new(&node.alias, END_VID)),
                op: CmpOp::Eq,
                right: Scalar::Col(ColumnRef::new(&self.g.nodes[c].alias, "vid")),
            });
            sel /= self.vertex_card();
        }
        let v = self.vertex_card();
        for c in &ix {
            sel *= (est.degree(c.source, c.attr) * est.arrival_sel(c.helper) / v).min(1.0);
        }
        let t1 = p1.card;
        let deg = est.degree(a, attr);
        let card = self.card_for(s1 | bit(b), k, t1 * deg * sel);
        let fragment = matches!(attr, RefAttr::OutL | RefAttr::InL);
        let hash_key = filters.iter().find_map(|f| match f {
            BoolExpr::Cmp { left: Scalar::Col(l), op: CmpOp::Eq, right: Scalar::Col(r) } => {
                let in_s1 = |c: &ColumnRef| self.g.node(&c.alias).is_some_and(|n| s1 & bit(n) != 0);
                if in_s1(l) && r.alias == node.alias {
                    Some((l.clone(), r.clone()))
                } else if in_s1(r) && l.alias == node.alias {
                    Some((r.clone(), l.clone()))
                } else {
                    None
                }
            }
            _ => None,
        });
        let hash_ok = self.opts.hash && fragment && (!ix.is_empty() || hash_key.is_some());
        let heuristic = if hash_ok && s1.count_ones() > 1 { Method::Hash } else { Method::Nl };
        let mut methods = vec![heuristic];
        if variants && hash_ok {
            methods.push(if heuristic == Method::Hash { Method::Nl } else { Method::Hash });
        }
        let tau = self.params.tau;
        methods
            .into_iter()
            .map(|method| {
                let local = match (ix.is_empty(), method) {
                    (true, Method::Nl) => tau * t1 * deg,
                    (true, Method::Hash) => tau * t1 * deg + card,
                    (false, Method::Nl) => {
                        tau * t1 * deg * 0.5 * ix.iter().map(|c| est.degree(c.source, c.attr)).sum::<f64>()
                    }
                    (false, Method::Hash) => {
                        tau * t1 * deg + ix.iter().map(|c| tau * t1 * est.degree(c.source, c.attr)).sum::<f64>() + card
                    }
                };
                PhysPlan {
                    op: PhysOp::Explore {
                        input: p1.clone(),
                        from: a,
                        from_alias: self.g.nodes[a].alias.clone(),
                        attr,
                        to: b,
                        to_alias: node.alias.clone(),
                        to_kind: node.leaf.kind.clone(),
                        label: node.leaf.label.clone(),
                        filters: filters.clone(),
                        ix: ix.clone(),
                        method,
                        hash_key: if ix.is_empty() { hash_key.clone() } else { None },
                    },
                    nodes: s1 | bit(b),
                    consumed: k,
                    card,
                    cost: p1.cost + local,
                }
            })
            .collect()
    }

    /// Value join of two plans with no explore edge between them.
    pub fn join(&self, p1: &Rc<PhysPlan>, p2: &Rc<PhysPlan>, variants: bool) -> Vec<PhysPlan> {
        let (s1, s2, k1, k2) = (p1.nodes, p2.nodes, p1.consumed, p2.consumed);
        if (k1 & (s2 | k2)) != 0 || (k2 & s1) != 0 || !self.dup_free(s1 | s2 | k1 | k2) {
            return vec![];
        }
        if !self.g.crossing_explores(s1, s2).is_empty() {
            return vec![];
        }
        let in_side = |c: &ColumnRef, s: NodeSet| self.g.node(&c.alias).is_some_and(|n| s & bit(n) != 0);
        let mut keys = Vec::new();
        let mut preds = Vec::new();
        let est = self.est();
        let mut sel = 1.0;
        for p in self.g.crossing_values(s1, s2) {
            sel *= est.selectivity(p);
            match p {
                BoolExpr::Cmp { left: Scalar::Col(l), op: CmpOp::Eq, right: Scalar::Col(r) } if in_side(l, s1) && in_side(r, s2) => {
                    keys.push((l.clone(), r.clone()))
                }
                BoolExpr::Cmp { left: Scalar::Col(l), op: CmpOp::Eq, right: Scalar::Col(r) } if in_side(r, s1) && in_side(l, s2) => {
                    keys.push((r.clone(), l.clone()))
                }
                other => preds.push(other.clone()),
            }
        }
        let card = self.card_for(s1 | s2, k1 | k2, p1.card * p2.card * sel);
        let heuristic = if keys.is_empty() || !self.opts.hash { Method::Nl } else { Method::Hash };
        let mut methods = vec![heuristic];
        if variants && heuristic == Method::Hash {
            methods.push(Method::Nl);
        }
        methods
            .into_iter()
            .map(|method| {
                let local = match method {
                    Method::Hash => card,
                    Method::Nl => p1.card * p2.card,
                };
                let (mut keys, mut preds) = (keys.clone(), preds.clone());
                if method == Method::Nl {
                    preds.extend(keys.drain(..).map(|(l, r)| BoolExpr::Cmp { left: Scalar::Col(l), op: CmpOp::Eq, right: Scalar::Col(r) }));
                }
                PhysPlan {
                    op: PhysOp::Join { left: p1.clone(), right: p2.clone(), method, keys, preds },
                    nodes: s1 | s2,
                    consumed: k1 | k2,
                    card,
                    cost: p1.cost + p2.cost + local,
                }
            })
            .collect()
    }

    /// Non-edge nodes must all be present; each pattern edge is covered by
    /// exactly one of its edge nodes, present or consumed.
    pub fn is_complete(&self, p: &PhysPlan, within: NodeSet) -> bool {
        let required = within & !self.edge_nodes;
        let u = p.nodes | p.consumed;
        p.nodes & required == required && self.dup_pairs.iter().filter(|d| *d & within == **d).all(|d| u & d != 0)
    }

    /// Canonical edge aliases (outgoing direction) renamed to the
    /// incoming edge node where the plan uses that one.
    fn renames(&self, nodes: NodeSet) -> Vec<(String, String)> {
        let Some(p) = &self.g.pattern else { return vec![] };
        p.edges
            .iter()
            .filter(|e| self.g.node(&e.in_alias).is_some_and(|n| nodes & bit(n) != 0))
            .map(|e| (e.out_alias.clone(), e.in_alias.clone()))
            .collect()
    }

    /// Residual filter and projection on top of a complete plan.
    pub fn finish(&self, p: Rc<PhysPlan>) -> Rc<PhysPlan> {
        let renames = self.renames(p.nodes);
        let rename = |e: &BoolExpr| renames.iter().fold(e.clone(), |e, (from, to)| rename_alias(&e, from, to));
        let mut top = p;
        if !self.g.residual.is_empty() {
            let preds: Vec<BoolExpr> = self.g.residual.iter().map(rename).collect();
            let sel: f64 = preds.iter().map(|f| self.est().selectivity(f)).product();
            top = Rc::new(PhysPlan {
                nodes: top.nodes,
                consumed: top.consumed,
                card: top.card * sel,
                cost: top.cost,
                op: PhysOp::Filter { input: top.clone(), preds },
            });
        }
        let items = self
            .g
            .outputs
            .iter()
            .map(|(c, n)| {
                let alias = renames.iter().find(|(f, _)| *f == c.alias).map_or(c.alias.clone(), |(_, t)| t.clone());
                (ColumnRef::new(alias, &c.column), n.clone())
            })
            .collect();
        Rc::new(PhysPlan {
            nodes: top.nodes,
            consumed: top.consumed,
            card: top.card,
            cost: top.cost,
            op: PhysOp::Project { input: top.clone(), items },
        })
    }

    fn components(&self) -> Vec<NodeSet> {
        let mut left = self.g.all();
        let mut out = Vec::new();
        while left != 0 {
            let mut c = bit(left.trailing_zeros() as usize);
            loop {
                let grown = c | (self.g.neighborhood(c) & left);
                if grown == c {
                    break;
                }
                c = grown;
            }
            out.push(c);
            left &= !c;
        }
        out
    }

    /// Dynamic program over csg-cmp pairs. With `all`, every plan is kept
    /// (up to `limit` per table entry) instead of the cheapest per
    /// consumed set. Returns complete plans per connected component,
    /// cheapest first.
    fn run(&self, all: bool, variants: bool, limit: usize) -> Result<Vec<Vec<Rc<PhysPlan>>>, PlanError> {
        let mut memo: HashMap<NodeSet, Vec<Rc<PhysPlan>>> = HashMap::new();
        for n in 0..self.g.nodes.len() {
            if self.edge_nodes & bit(n) == 0 {
                memo.insert(bit(n), vec![self.scan(n)]);
            }
        }
        let mut pairs = self.enumerate_pairs();
        pairs.sort_by_key(|(a, b)| (a | b).count_ones());
        let add = |memo: &mut HashMap<NodeSet, Vec<Rc<PhysPlan>>>, p: PhysPlan| -> Result<(), PlanError> {
            let entry = memo.entry(p.nodes).or_default();
            if all {
                if entry.len() >= limit {
                    return Err(PlanError::TooManyPlans(limit));
                }
                entry.push(Rc::new(p));
            } else if let Some(i) = entry.iter().position(|q| q.consumed == p.consumed) {
                if p.cost < entry[i].cost {
                    entry[i] = Rc::new(p);
                }
            } else {
                entry.push(Rc::new(p));
            }
            Ok(())
        };
        for (s1, s2) in pairs {
            if !self.is_legal_pair(s1, s2) {
                continue;
            }
            for (a, b) in [(s1, s2), (s2, s1)] {
                let Some(inputs) = memo.get(&a).cloned() else { continue };
                if b.count_ones() == 1 && self.entry(a, b).is_some() {
                    let bn = b.trailing_zeros() as usize;
                    for p1 in &inputs {
                        for p in self.explore(p1, bn, variants) {
                            add(&mut memo, p)?;
                        }
                    }
                }
            }
            if self.g.crossing_explores(s1, s2).is_empty() {
                // the larger side goes left
                let (l, r) = if (s2.count_ones(), s1.trailing_zeros()) > (s1.count_ones(), s2.trailing_zeros()) { (s2, s1) } else { (s1, s2) };
                let (Some(ls), Some(rs)) = (memo.get(&l).cloned(), memo.get(&r).cloned()) else { continue };
                for p1 in &ls {
                    for p2 in &rs {
                        for p in self.join(p1, p2, variants) {
                            add(&mut memo, p)?;
                        }
                    }
                }
            }
        }
        let mut out = Vec::new();
        for c in self.components() {
            let mut done: Vec<Rc<PhysPlan>> = memo
                .iter()
                .filter(|(s, _)| **s & !c == 0)
                .flat_map(|(_, ps)| ps.iter().filter(|p| self.is_complete(p, c)).cloned())
                .collect();
            if done.is_empty() {
                return Err(PlanError::NoPlan);
            }
            done.sort_by(|x, y| x.cost.total_cmp(&y.cost).then_with(|| x.shape().cmp(&y.shape())));
            out.push(done);
        }
        Ok(out)
    }

    fn cross(&self, parts: Vec<Rc<PhysPlan>>) -> Rc<PhysPlan> {
        let mut it = parts.into_iter();
        let mut acc = it.next().expect("at least one component");
        for p in it {
            let card = acc.card * p.card;
            acc = Rc::new(PhysPlan {
                nodes: acc.nodes | p.nodes,
                consumed: acc.consumed | p.consumed,
                card,
                cost: acc.cost + p.cost + card,
                op: PhysOp::Join { left: acc.clone(), right: p, method: Method::Nl, keys: vec![], preds: vec![] },
            });
        }
        acc
    }

    pub fn best(&self) -> Result<Rc<PhysPlan>, PlanError> {
        let comps = self.run(false, false, usize::MAX)?;
        let parts = comps.into_iter().map(|mut v| v.swap_remove(0)).collect();
        Ok(self.finish(self.cross(parts)))
    }

    /// Every complete plan; with `variants`, both physical methods wherever
    /// a choice exists, else the heuristic's method only.
    pub fn all_plans(&self, variants: bool, limit: usize) -> Result<Vec<Rc<PhysPlan>>, PlanError> {
        let comps = self.run(true, variants, limit)?;
        let mut acc: Vec<Vec<Rc<PhysPlan>>> = vec![vec![]];
        for c in comps {
            let mut next = Vec::new();
            for prefix in &acc {
                for p in &c {
                    let mut v = prefix.clone();
                    v.push(p.clone());
                    next.push(v);
                }
                if next.len() > limit {
                    return Err(PlanError::TooManyPlans(limit));
                }
            }
            acc = next;
        }
        Ok(acc.into_iter().map(|parts| self.finish(self.cross(parts))).collect())
    }
}

pub(crate) fn delta_card(left: f64, right: f64) -> f64 {
    // one partner per row of the smaller side
    left.min(right)
}
