// Fixed-plan costs and plan choice for the running hybrid query under
// injected statistics.

use rg_planner::{optimize, CostParams, Method, Overrides, PlanBuilder, PlannerStats};
use rg_querygraph::{build_query_graph, QueryGraph};
use rg_sqldelta::{build_logical, parse, BoundQuery, Catalog};

struct Cat;

impl Catalog for Cat {
    fn table_columns(&self, name: &str) -> Option<Vec<String>> {
        (name == "D").then(|| vec!["uid".into(), "profile".into()])
    }
    fn is_graph(&self, name: &str) -> bool {
        name == "g"
    }
    fn default_graph(&self) -> Option<String> {
        Some("g".into())
    }
}

const QUERY: &str = "select v0.id as vid_0, v2.id as vid_2, D.profile as user_profile
    from (
        select v0.id as vid_0, v2.id as vid_2, v1.attr as link_attr
        match (v0: User)-[e0: Share]->(v1: Link)
              (v2: User)-[e1: Share]->(v1: Link)
              (v2: User)-[e2: Follow]->(v0: User)
    ) as P join D on P.vid_0 = D.uid";

const STATS: &str = "
card(D_V^0) = 1000
card(D_V^2) = 1000
card(D) = 1000
deg(D_V^0.out_L) = 100
deg(D_V^0.in_L) = 100
deg(D_V^1.in_L) = 100
deg(D_V^2.out_L) = 100
card(D_V^0, D_o^0) = 1e4
card(D_V^0, D_o^0, D_V^1, D) = 2000
card(D, D_V^0, D_V^1, D_o^0, D_i^1, D_i^2) = 1e4
card(D_V^0, D) = 1e4
card(D_V^0, D, D_o^0) = 2e5
card(D_V^2, D_o^1) = 1e3
card(D_V^2, D_o^1, D_V^1) = 1e4
card(D_V^2, D_o^1, D_V^1, D_o^2, D_i^0) = 2000
card(D_V^2, D_o^1, D_V^1, D_o^2, D_i^0, D_V^0) = 1e4
card(D_V^2, D_o^1, D_V^1, D_o^2, D_i^0, D_V^0, D) = 1e4
";

fn query() -> BoundQuery {
    build_logical(&parse(QUERY).unwrap(), &Cat).unwrap()
}

fn stats() -> PlannerStats {
    PlannerStats { overrides: Overrides::parse(STATS).unwrap(), ..PlannerStats::default() }
}

fn graph() -> QueryGraph {
    build_query_graph(&query()).unwrap()
}

fn plan_h(b: &PlanBuilder) -> rg_planner::PhysPlan {
    let h2 = b.explore(&b.scan("D_V^0").unwrap(), "D_o^0", Method::Nl).unwrap();
    let h4 = b.explore(&h2, "D_V^1", Method::Nl).unwrap();
    let h6 = b.join(&h4, &b.scan("D").unwrap(), Method::Hash).unwrap();
    let h8 = b.explore(&h6, "D_i^1", Method::Hash).unwrap();
    let top = b.explore(&h8, "D_V^2", Method::Nl).unwrap();
    (*b.finish(top).unwrap()).clone()
}

fn plan_rf(b: &PlanBuilder) -> rg_planner::PhysPlan {
    let r2 = b.join(&b.scan("D_V^0").unwrap(), &b.scan("D").unwrap(), Method::Hash).unwrap();
    let r4 = b.explore(&r2, "D_o^0", Method::Nl).unwrap();
    let r6 = b.explore(&r4, "D_V^1", Method::Nl).unwrap();
    let r8 = b.explore(&r6, "D_i^1", Method::Hash).unwrap();
    let top = b.explore(&r8, "D_V^2", Method::Nl).unwrap();
    (*b.finish(top).unwrap()).clone()
}

fn plan_gf(b: &PlanBuilder) -> rg_planner::PhysPlan {
    let g2 = b.explore(&b.scan("D_V^2").unwrap(), "D_o^1", Method::Nl).unwrap();
    let g4 = b.explore(&g2, "D_V^1", Method::Nl).unwrap();
    let g6 = b.explore(&g4, "D_o^2", Method::Hash).unwrap();
    let g8 = b.explore(&g6, "D_V^0", Method::Nl).unwrap();
    let top = b.join(&g8, &b.scan("D").unwrap(), Method::Hash).unwrap();
    (*b.finish(top).unwrap()).clone()
}

#[test]
fn golden_costs() {
    let (g, s) = (graph(), stats());
    let b = PlanBuilder::new(&g, &s, CostParams::default());
    let (h, rf, gf) = (plan_h(&b), plan_rf(&b), plan_gf(&b));
    assert_eq!(h.cost, 116400.0, "{}", h.explain(true));
    assert_eq!(rf.cost, 342400.0, "{}", rf.explain(true));
    assert_eq!(gf.cost, 433000.0, "{}", gf.explain(true));
    assert!((h.cost / rf.cost - 0.34).abs() <= 0.005);
    assert!((h.cost / gf.cost - 0.27).abs() <= 0.005);
}

#[test]
fn intersective_steps_consume_the_third_edge() {
    let (g, s) = (graph(), stats());
    let b = PlanBuilder::new(&g, &s, CostParams::default());
    let h = plan_h(&b).explain(false);
    assert!(h.contains("IxExploreHash D_V^1.in_L -> D_i^1"), "{h}");
    assert!(h.contains("θ^I ψ(D_V^0.in_L)[src_L] ∋ D_i^1.src_L"), "{h}");
    let gf = plan_gf(&b).explain(false);
    assert!(gf.contains("θ^I ψ(D_V^1.in_L)[src_L] ∋ D_o^2.dst_L"), "{gf}");
}

#[test]
fn optimizer_picks_plan_h() {
    let (g, s) = (graph(), stats());
    let b = PlanBuilder::new(&g, &s, CostParams::default());
    let want = plan_h(&b);
    let got = optimize(&query(), &s, &CostParams::default()).unwrap();
    assert_eq!(got.plan.shape(), want.shape(), "\n{}", got.explain());
    assert_eq!(got.cost(), 116400.0);
}

#[test]
fn argmin_is_scale_invariant() {
    let s = stats();
    let base = optimize(&query(), &s, &CostParams::default()).unwrap();
    let mut scaled = s.clone();
    for v in scaled.overrides.card.values_mut() {
        *v *= 10.0;
    }
    let big = optimize(&query(), &scaled, &CostParams::default()).unwrap();
    assert_eq!(base.plan.shape(), big.plan.shape());
}

