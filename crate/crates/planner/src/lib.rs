//! Cost-based planning over the extended query graph: DPccp enumeration,
//! explore/join costing with C_emm, and plan explanation.

mod dp;
mod physical;
mod stats;

use std::rc::Rc;

use rg_querygraph::{bit, build_query_graph, BuildError, QueryGraph};
use rg_sqldelta::{BoundQuery, LeafKind};

pub use dp::{CostParams, Ctx, PlannerOptions};
pub use physical::{IxCond, Method, PhysOp, PhysPlan, Planned};
pub use stats::{Estimator, Overrides, PlannerStats};

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("no complete plan exists for the query graph")]
    NoPlan,
    #[error("statistics: {0}")]
    Stats(String),
    #[error("more than {0} plans")]
    TooManyPlans(usize),
    #[error("plan builder: {0}")]
    Builder(String),
}

/// Planned δ-join leaves by query-graph node.
type DeltaLeaves = Vec<(usize, Rc<PhysPlan>)>;

/// Builds the query graph and a context with δ-join leaves planned.
fn prepare(q: &BoundQuery, stats: &PlannerStats, params: CostParams, opts: PlannerOptions) -> Result<(QueryGraph, DeltaLeaves), PlanError> {
    let g = build_query_graph(q)?;
    let mut leaves = Vec::new();
    for (n, node) in g.nodes.iter().enumerate() {
        let LeafKind::Delta(spec) = &node.leaf.kind else { continue };
        let left = optimize_with(&spec.left, stats, params, opts)?;
        let right = optimize_with(&spec.right, stats, params, opts)?;
        let (l, r) = (left.plan.card, right.plan.card);
        let plan = PhysPlan {
            nodes: bit(n),
            consumed: 0,
            card: dp::delta_card(l, r),
            cost: left.cost() + right.cost() + params.kappa * l * r,
            op: PhysOp::DeltaJoin {
                node: n,
                alias: node.alias.clone(),
                left: Box::new(left),
                right: Box::new(right),
                matcher: spec.matcher.clone(),
                columns: spec.columns.clone(),
            },
        };
        leaves.push((n, Rc::new(plan)));
    }
    Ok((g, leaves))
}

fn ctx<'a>(g: &'a QueryGraph, leaves: &[(usize, Rc<PhysPlan>)], stats: &'a PlannerStats, params: CostParams, opts: PlannerOptions) -> Ctx<'a> {
    let mut c = Ctx::new(g, stats, params, opts);
    for (n, p) in leaves {
        c.leaf_cards.insert(*n, p.card);
        c.leaf_plans.insert(*n, p.clone());
    }
    c
}

pub fn optimize(q: &BoundQuery, stats: &PlannerStats, params: &CostParams) -> Result<Planned, PlanError> {
    optimize_with(q, stats, *params, PlannerOptions::default())
}

pub fn optimize_with(q: &BoundQuery, stats: &PlannerStats, params: CostParams, opts: PlannerOptions) -> Result<Planned, PlanError> {
    let (g, leaves) = prepare(q, stats, params, opts)?;
    let plan = ctx(&g, &leaves, stats, params, opts).best()?;
    Ok(Planned { graph: g, plan })
}

/// Every legal plan of the query, both physical variants wherever the
/// choice exists. Fails once more than `limit` plans would be produced.
pub fn enumerate_all_plans(q: &BoundQuery, stats: &PlannerStats, params: &CostParams, limit: usize) -> Result<Vec<Planned>, PlanError> {
    enumerate(q, stats, params, true, limit)
}

/// Every legal plan with physical methods chosen by the heuristic; the
/// optimizer returns the cheapest of these.
pub fn enumerate_heuristic_plans(q: &BoundQuery, stats: &PlannerStats, params: &CostParams, limit: usize) -> Result<Vec<Planned>, PlanError> {
    enumerate(q, stats, params, false, limit)
}

fn enumerate(q: &BoundQuery, stats: &PlannerStats, params: &CostParams, variants: bool, limit: usize) -> Result<Vec<Planned>, PlanError> {
    let opts = PlannerOptions::default();
    let (g, leaves) = prepare(q, stats, *params, opts)?;
    let plans = ctx(&g, &leaves, stats, *params, opts).all_plans(variants, limit)?;
    Ok(plans.into_iter().map(|plan| Planned { graph: g.clone(), plan }).collect())
}

/// Assembles a plan step by step, costing each operator like the
/// optimizer does. Used to evaluate fixed plans.
pub struct PlanBuilder<'a> {
    ctx: Ctx<'a>,
}

impl<'a> PlanBuilder<'a> {
    pub fn new(g: &'a QueryGraph, stats: &'a PlannerStats, params: CostParams) -> Self {
        PlanBuilder { ctx: Ctx::new(g, stats, params, PlannerOptions::default()) }
    }

    fn id(&self, alias: &str) -> Result<usize, PlanError> {
        self.ctx.g.node(alias).ok_or_else(|| PlanError::Builder(format!("unknown alias {alias}")))
    }

    pub fn scan(&self, alias: &str) -> Result<Rc<PhysPlan>, PlanError> {
        Ok(self.ctx.scan(self.id(alias)?))
    }

    pub fn explore(&self, input: &Rc<PhysPlan>, to: &str, method: Method) -> Result<Rc<PhysPlan>, PlanError> {
        let b = self.id(to)?;
        let found = self.ctx.explore(input, b, true).into_iter().find(|p| matches!(p.op, PhysOp::Explore { method: m, .. } if m == method));
        found.map(Rc::new).ok_or_else(|| PlanError::Builder(format!("cannot explore into {to} with {method:?}")))
    }

    pub fn join(&self, left: &Rc<PhysPlan>, right: &Rc<PhysPlan>, method: Method) -> Result<Rc<PhysPlan>, PlanError> {
        let found = self.ctx.join(left, right, true).into_iter().find(|p| matches!(p.op, PhysOp::Join { method: m, .. } if m == method));
        found.map(Rc::new).ok_or_else(|| PlanError::Builder(format!("cannot join with {method:?}")))
    }

    pub fn finish(&self, p: Rc<PhysPlan>) -> Result<Rc<PhysPlan>, PlanError> {
        if !self.ctx.is_complete(&p, self.ctx.g.all()) {
            return Err(PlanError::Builder("plan does not cover the query graph".into()));
        }
        Ok(self.ctx.finish(p))
    }
}
