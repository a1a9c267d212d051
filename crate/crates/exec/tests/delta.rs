use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rg_exec::{run_sql, Database, ExecOptions};
use rg_planner::CostParams;
use rg_store::{PlainValue, Table};

fn run(d: &Database, q: &str) -> Table {
    run_sql(d, q, &CostParams::default(), &ExecOptions::default()).unwrap()
}

fn random_table<R: Rng>(rng: &mut R, cols: [&str; 2], n: usize, keys: i64) -> Table {
    let mut t = Table::new(cols.iter().map(|c| c.to_string()).collect());
    for i in 0..n {
        let k = if rng.gen_bool(0.1) { PlainValue::Null } else { PlainValue::Int(rng.gen_range(0..keys)) };
        t.rows.push(vec![k, PlainValue::Str(format!("{}{i}", cols[1]))]);
    }
    t
}

#[test]
fn exact_matching_is_the_equi_join_without_the_right_key() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let mut d = Database::new();
        let (nl, nr, keys) = (rng.gen_range(0..40), rng.gen_range(0..40), rng.gen_range(1..15));
        d.add_table("L", random_table(&mut rng, ["k", "x"], nl, keys));
        d.add_table("R", random_table(&mut rng, ["k2", "y"], nr, keys));
        let got = run(&d, "select * from L map R using exact(L.k = R.k2)");
        let want = run(&d, "select L.k, L.x, R.y from L join R on L.k = R.k2");
        assert_eq!(got.columns, vec!["k", "x", "y"]);
        assert_eq!(got.sorted_rows(), want.sorted_rows());
    }
}

#[test]
fn fuzzy_matching_reproduces_the_labeled_pairs() {
    let mut d = Database::new();
    let (l, r) = (rg_er::fixture::left(), rg_er::fixture::right());
    let lid = l.column_index("id").unwrap();
    let rid = r.column_index("entity").unwrap();
    let want: std::collections::BTreeSet<(PlainValue, PlainValue)> = rg_er::fixture::truth()
        .into_iter()
        .map(|(i, j)| (l.rows[i][lid].clone(), r.rows[j][rid].clone()))
        .collect();
    d.add_table("A", l);
    d.add_table("B", r);
    let t = run(&d, "select * from A map B using fuzzy(A.title ~ B.name, 0.8)");
    assert_eq!(t.columns, vec!["id", "title", "entity"]);
    let bid = 2;
    let got: std::collections::BTreeSet<(PlainValue, PlainValue)> =
        t.rows.iter().map(|r| (r[lid].clone(), r[bid].clone())).collect();
    assert_eq!(got.len(), t.len());
    assert_eq!(got, want);
}
