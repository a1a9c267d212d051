use rg_sqldelta::{build_logical, parse, Catalog, LeafKind, LogicalPlan, RefAttr};

struct Cat;

impl Catalog for Cat {
    fn table_columns(&self, name: &str) -> Option<Vec<String>> {
        match name {
            "D" => Some(vec!["uid".into(), "profile".into()]),
            "D_E" => Some(vec!["profile".into(), "entity".into()]),
            "t" => Some(vec!["a".into(), "b".into()]),
            _ => None,
        }
    }
    fn is_graph(&self, name: &str) -> bool {
        name == "g"
    }
    fn default_graph(&self) -> Option<String> {
        Some("g".into())
    }
}

const RUNNING: &str = "select * from (
    select v0.id as vid_0, v2.id as vid_2, D.profile as user_profile
    from (
        select v0.id as vid_0, v2.id as vid_2, v1.attr as link_attr
        match (v0: User)-[e0: Share]->(v1: Link)
              (v2: User)-[e1: Share]->(v1: Link)
              (v2: User)-[e2: Follow]->(v0: User)
    ) as P join D on P.vid_0 = D.uid
) as P_R map D_E";

fn bind(q: &str) -> rg_sqldelta::BoundQuery {
    build_logical(&parse(q).unwrap(), &Cat).unwrap()
}

fn strip_project(p: &LogicalPlan) -> &LogicalPlan {
    match p {
        LogicalPlan::Project { input, .. } => input,
        p => p,
    }
}

#[test]
fn one_edge_is_two_explorations() {
    let q = bind("select x.id, y.id from g match (x: User)-[e: Follow]->(y: User)");
    let LogicalPlan::Explore {
        input,
        attr: RefAttr::DstL,
        to,
        ..
    } = strip_project(&q.plan)
    else {
        panic!("{}", q.plan)
    };
    assert_eq!(to.alias, "D_V^1");
    let LogicalPlan::Explore {
        input,
        attr: RefAttr::OutL,
        to,
        ..
    } = &**input
    else {
        panic!()
    };
    assert_eq!(to.alias, "D_o^0");
    assert_eq!(to.label.as_deref(), Some("Follow"));
    let LogicalPlan::Scan(l) = &**input else {
        panic!()
    };
    assert_eq!(
        (l.alias.as_str(), l.kind.clone()),
        ("D_V^0", LeafKind::Vertex)
    );
    assert_eq!(q.columns, vec!["x.id", "y.id"]);
}

#[test]
fn running_example() {
    let q = bind(RUNNING);
    // the outer unit reads only the δ-join result
    let LogicalPlan::Scan(leaf) = strip_project(&q.plan) else {
        panic!("{}", q.plan)
    };
    let LeafKind::Delta(spec) = &leaf.kind else {
        panic!()
    };
    assert_eq!(spec.left.columns, vec!["vid_0", "vid_2", "user_profile"]);
    assert_eq!(
        spec.columns,
        vec!["vid_0", "vid_2", "user_profile", "entity"]
    );
    assert_eq!(q.columns, spec.columns);
    // default matcher: left column named like the right's first column, else the left's first
    assert_eq!((spec.matcher.left_col, spec.matcher.right_col), (0, 0));

    let inner = &spec.left;
    let LogicalPlan::ValueJoin {
        left,
        cond: Some(c),
        ..
    } = strip_project(&inner.plan)
    else {
        panic!("{}", inner.plan)
    };
    assert_eq!(c.to_string(), "D_V^0.vid = D.uid");
    let mut checks = left.topology_checks();
    checks.sort();
    assert_eq!(checks, vec![0, 1, 2]);
    let mut conds = Vec::new();
    left.walk(&mut |p| {
        if let LogicalPlan::Explore { conds: c, .. } = p {
            conds.extend(c.iter().map(|c| c.to_string()));
        }
    });
    assert_eq!(conds, vec!["ψ(D_V^0.out_L)[dst_L] ∋ D_o^1.dst_L"]);
    let p = inner.pattern.as_ref().unwrap();
    assert_eq!(
        p.vertices
            .iter()
            .map(|v| v.var.as_str())
            .collect::<Vec<_>>(),
        vec!["v0", "v1", "v2"]
    );
}

#[test]
fn self_loop_and_two_cycle() {
    let q = bind("select a.id from g match (a)-[e]->(a)");
    assert!(matches!(strip_project(&q.plan), LogicalPlan::Filter { .. }));
    assert_eq!(q.plan.topology_checks(), vec![0]);
    let q = bind("select a.id, b.id from g match (a)-[e]->(b)-[f]->(a)");
    let mut c = q.plan.topology_checks();
    c.sort();
    assert_eq!(c, vec![0, 1]);
}

#[test]
fn pattern_star_and_filters() {
    let q = bind("select * from g match (a: L0)-[e]->(b) where a.w > 3 and e.ts < 5");
    assert_eq!(q.columns, vec!["a.id", "b.id", "e.id"]);
    let LogicalPlan::Filter { pred, .. } = strip_project(&q.plan) else {
        panic!()
    };
    assert_eq!(pred.to_string(), "(D_V^0.w > 3) and (D_o^0.ts < 5)");
}

#[test]
fn bind_errors() {
    for q in [
        "select z from t",
        "select * from nope",
        "select * from g",
        "select * from h match (a)-[e]->(b)",
        "select * from g match (a: X)-[e]->(a: Y)",
        "select * from t map D using exact(t.zz = D.uid)",
        "select a from t join D on t.a = D.uid join D on t.a = D.uid",
    ] {
        assert!(build_logical(&parse(q).unwrap(), &Cat).is_err(), "{q}");
    }
}

#[test]
fn plain_join() {
    let q = bind("select t.a, profile from t join D on t.b = D.uid where a = 1");
    assert_eq!(q.columns, vec!["t.a", "profile"]);
    let LogicalPlan::Filter { input, .. } = strip_project(&q.plan) else {
        panic!()
    };
    assert!(matches!(**input, LogicalPlan::ValueJoin { .. }));
}
