//! Twenty movie titles (ten per side) with typos, punctuation and case
//! noise, and the hand-labeled set of pairs naming the same film.

use rg_store::{PlainValue, Table};

const LEFT: &str = include_str!("../data/titles_left.csv");
const RIGHT: &str = include_str!("../data/titles_right.csv");
const TRUTH: &str = include_str!("../data/titles_truth.csv");

fn parse(text: &str) -> Table {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let columns = rd.headers().expect("fixture header").iter().map(str::to_string).collect();
    let mut t = Table::new(columns);
    for rec in rd.records() {
        let rec = rec.expect("fixture row");
        t.rows.push(
            rec.iter()
                .map(|f| match f.parse::<i64>() {
                    Ok(v) => PlainValue::Int(v),
                    Err(_) => PlainValue::Str(f.to_string()),
                })
                .collect(),
        );
    }
    t
}

/// `(id, title)` rows.
pub fn left() -> Table {
    parse(LEFT)
}

/// `(name, entity)` rows.
pub fn right() -> Table {
    parse(RIGHT)
}

/// Matching `(left row, right row)` index pairs, sorted.
pub fn truth() -> Vec<(usize, usize)> {
    let (l, r, t) = (left(), right(), parse(TRUTH));
    let mut out: Vec<(usize, usize)> = t
        .rows
        .iter()
        .map(|row| {
            let i = l.rows.iter().position(|x| x[0] == row[0]).expect("labeled id exists");
            let j = r.rows.iter().position(|x| x[0] == row[1]).expect("labeled name exists");
            (i, j)
        })
        .collect();
    out.sort();
    out
}
