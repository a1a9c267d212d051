// Physical-variant equivalence: the same operator tree run with nested-loop
// and hash methods must give the same bag.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rg_exec::{execute, plan_sql, run_sql, Database, ExecOptions};
use rg_graph::gen;
use rg_pattern_oracle::{match_bruteforce, to_sql, CmpOp, Condition, Operand};
use rg_planner::{CostParams, Method};
use rg_store::{PlainValue, Table};

use common::{db, random_case};

fn opts() -> ExecOptions {
    ExecOptions::default()
}

fn table(rows: &[i64]) -> Table {
    let mut t = Table::new(vec!["k".into()]);
    t.rows = rows.iter().map(|k| vec![PlainValue::Int(*k)]).collect();
    t
}

#[test]
fn cross_join_and_disjoint_keys() {
    let mut d = Database::new();
    d.add_table("A", table(&[1, 2, 3]));
    d.add_table("B", table(&[4, 5, 6]));
    let p = CostParams::default();
    assert_eq!(run_sql(&d, "select A.k, B.k from A join B on 1 = 1", &p, &opts()).unwrap().len(), 9);
    assert!(run_sql(&d, "select A.k, B.k from A join B on A.k = B.k", &p, &opts()).unwrap().is_empty());
    assert!(run_sql(&d, "select * from A map B using exact(A.k = B.k)", &p, &opts()).unwrap().is_empty());
}

#[test]
fn explore_hash_matches_nested_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut flipped = 0;
    for trial in 0..30 {
        let g = gen::random_labeled(40, 200, 2, 2, 300 + trial);
        let d = db(&g);
        let mut q = random_case(&mut rng, 2, 4, 0.0);
        if q.pattern.edges.len() >= 2 {
            let e = &q.pattern.edges;
            q.conditions.push(Condition {
                left: Operand::Attr { var: e[0].var.clone().unwrap(), attr: "ts".into() },
                op: CmpOp::Eq,
                right: Operand::Attr { var: e[1].var.clone().unwrap(), attr: "ts".into() },
            });
        }
        let p = plan_sql(&d, &to_sql(&q, "g"), &CostParams::default()).unwrap();
        let (nl, _) = p.with_methods(Some(Method::Nl), None);
        let (hash, n) = nl.with_methods(Some(Method::Hash), None);
        flipped += n;
        let want = match_bruteforce(&q, &g);
        assert!(execute(&nl, &d, &opts()).unwrap().bag_eq(&want));
        assert!(execute(&hash, &d, &opts()).unwrap().bag_eq(&want), "{}", hash.explain());
    }
    assert!(flipped >= 10, "only {flipped} explorations could hash");
}

#[test]
fn intersective_hash_matches_nested_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut flipped = 0;
    for trial in 0..30 {
        let g = gen::random_labeled(40, 250, 2, 2, 400 + trial);
        let d = db(&g);
        let q = random_case(&mut rng, 2, 5, 1.0);
        let p = plan_sql(&d, &to_sql(&q, "g"), &CostParams::default()).unwrap();
        let (nl, _) = p.with_methods(Some(Method::Nl), None);
        let (hash, n) = nl.with_methods(Some(Method::Hash), None);
        let mut ix = 0;
        hash.plan.walk(&mut |o| {
            if let rg_planner::PhysOp::Explore { ix: c, method: Method::Hash, .. } = &o.op {
                ix += usize::from(!c.is_empty());
            }
        });
        flipped += n.min(ix);
        let want = match_bruteforce(&q, &g);
        assert!(execute(&nl, &d, &opts()).unwrap().bag_eq(&want));
        assert!(execute(&hash, &d, &opts()).unwrap().bag_eq(&want), "{}", hash.explain());
    }
    assert!(flipped >= 10, "only {flipped} intersective explorations hashed");
}

#[test]
fn hash_join_matches_nested_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut flipped = 0;
    for _ in 0..30 {
        let mut d = Database::new();
        for name in ["A", "B", "C"] {
            let mut t = Table::new(vec!["k".into(), "v".into()]);
            for _ in 0..rng.gen_range(0..30) {
                let k = if rng.gen_bool(0.1) { PlainValue::Null } else { PlainValue::Int(rng.gen_range(0..8)) };
                t.rows.push(vec![k, PlainValue::Int(rng.gen_range(0..5))]);
            }
            d.add_table(name, t);
        }
        let q = "select A.k, A.v, B.v, C.v from A join B on A.k = B.k join C on B.k = C.k and A.v <= C.v";
        let p = plan_sql(&d, q, &CostParams::default()).unwrap();
        let (hash, _) = p.with_methods(None, Some(Method::Hash));
        let (nl, n) = hash.with_methods(None, Some(Method::Nl));
        flipped += n;
        let a = execute(&hash, &d, &opts()).unwrap();
        assert!(a.bag_eq(&execute(&nl, &d, &opts()).unwrap()));
        assert!(a.bag_eq(&execute(&p, &d, &opts()).unwrap()));
    }
    assert_eq!(flipped, 60);
}
