use std::io::{Read, Write};
use std::path::Path;

use rg_store::{PlainValue, Table};

use crate::error::{GraphError, Result};
use crate::model::{Attrs, Edge, GraphDelta, PropertyGraph, Vertex};

/// Parse a whole column with one type: integers, then numbers, then
/// booleans; anything else keeps the original text. Empty cells are null.
fn typed_column(raw: &[&str]) -> Vec<PlainValue> {
    let inferred: Vec<PlainValue> = raw.iter().map(|s| PlainValue::infer(s)).collect();
    let all = |f: fn(&PlainValue) -> bool| inferred.iter().all(|v| v.is_null() || f(v));
    if all(|v| matches!(v, PlainValue::Int(_))) || all(|v| matches!(v, PlainValue::Bool(_))) {
        return inferred;
    }
    if all(|v| matches!(v, PlainValue::Int(_) | PlainValue::Float(_))) {
        return inferred
            .into_iter()
            .map(|v| match v {
                PlainValue::Int(i) => PlainValue::Float(i as f64),
                v => v,
            })
            .collect();
    }
    raw.iter()
        .zip(inferred)
        .map(|(s, v)| if v.is_null() { v } else { PlainValue::Str(s.to_string()) })
        .collect()
}

/// Header plus typed columns of a CSV source.
fn read_typed<R: Read>(r: R) -> Result<(Vec<String>, Vec<Vec<PlainValue>>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).escape(Some(b'\\')).from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let records: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;
    let mut cols = Vec::with_capacity(header.len());
    for c in 0..header.len() {
        let raw: Vec<&str> = records.iter().map(|r| r.get(c).unwrap_or("")).collect();
        cols.push(typed_column(&raw));
    }
    let rows = (0..records.len()).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
    Ok((header, rows))
}

fn expect_header(header: &[String], want: &[&str], what: &str) -> Result<()> {
    if header.len() < want.len() || header.iter().zip(want).any(|(h, w)| h != w) {
        return Err(GraphError::Input(format!("{what} CSV header must start with {}", want.join(","))));
    }
    Ok(())
}

fn int_field(v: &PlainValue, what: &str, line: usize) -> Result<i64> {
    v.as_i64().ok_or_else(|| GraphError::Input(format!("{what} on data row {line} is not an integer")))
}

fn label_field(v: &PlainValue) -> String {
    match v {
        PlainValue::Str(s) => s.clone(),
        PlainValue::Null => String::new(),
        other => other.to_string(),
    }
}

fn attrs_of(header: &[String], row: &[PlainValue], from: usize) -> Attrs {
    header[from..]
        .iter()
        .zip(&row[from..])
        .filter(|(_, v)| !v.is_null())
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

pub fn read_vertices<R: Read>(r: R) -> Result<Vec<Vertex>> {
    let (header, rows) = read_typed(r)?;
    expect_header(&header, &["vid", "label"], "vertex")?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            Ok(Vertex { vid: int_field(&row[0], "vid", i + 1)?, label: label_field(&row[1]), attrs: attrs_of(&header, row, 2) })
        })
        .collect()
}

pub fn read_edges<R: Read>(r: R) -> Result<Vec<Edge>> {
    let (header, rows) = read_typed(r)?;
    expect_header(&header, &["eid", "src", "dst", "label"], "edge")?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            Ok(Edge {
                eid: int_field(&row[0], "eid", i + 1)?,
                src: int_field(&row[1], "src", i + 1)?,
                dst: int_field(&row[2], "dst", i + 1)?,
                label: label_field(&row[3]),
                attrs: attrs_of(&header, row, 4),
            })
        })
        .collect()
}

pub fn load_graph(vertices: &Path, edges: &Path) -> Result<PropertyGraph> {
    let g = PropertyGraph {
        vertices: read_vertices(std::fs::File::open(vertices)?)?,
        edges: read_edges(std::fs::File::open(edges)?)?,
    };
    g.validate()?;
    Ok(g)
}

pub fn read_table<R: Read>(r: R) -> Result<Table> {
    let (header, rows) = read_typed(r)?;
    let mut t = Table::new(header);
    t.rows = rows;
    Ok(t)
}

pub fn load_table(path: &Path) -> Result<Table> {
    read_table(std::fs::File::open(path)?)
}

fn attr_names<'a>(items: impl Iterator<Item = &'a Attrs>) -> Vec<String> {
    let mut names: Vec<String> = items.flat_map(|a| a.keys().cloned()).collect();
    names.sort();
    names.dedup();
    names
}

fn field(v: Option<&PlainValue>) -> String {
    match v {
        None | Some(PlainValue::Null) => String::new(),
        Some(v) => v.to_string(),
    }
}

/// Inverse of [`read_table`] for values that keep their type on reparsing.
pub fn write_table<W: Write>(w: W, t: &Table) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().escape(b'\\').double_quote(false).from_writer(w);
    wr.write_record(&t.columns)?;
    for row in &t.rows {
        wr.write_record(row.iter().map(|v| field(Some(v))))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_vertices<W: Write>(w: W, vs: &[Vertex]) -> Result<()> {
    let names = attr_names(vs.iter().map(|v| &v.attrs));
    let mut wr = csv::WriterBuilder::new().escape(b'\\').double_quote(false).from_writer(w);
    let mut header = vec!["vid".to_string(), "label".to_string()];
    header.extend(names.iter().cloned());
    wr.write_record(&header)?;
    for v in vs {
        let mut rec = vec![v.vid.to_string(), v.label.clone()];
        rec.extend(names.iter().map(|n| field(v.attrs.get(n))));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_edges<W: Write>(w: W, es: &[Edge]) -> Result<()> {
    let names = attr_names(es.iter().map(|e| &e.attrs));
    let mut wr = csv::WriterBuilder::new().escape(b'\\').double_quote(false).from_writer(w);
    let mut header: Vec<String> = ["eid", "src", "dst", "label"].iter().map(|s| s.to_string()).collect();
    header.extend(names.iter().cloned());
    wr.write_record(&header)?;
    for e in es {
        let mut rec = vec![e.eid.to_string(), e.src.to_string(), e.dst.to_string(), e.label.clone()];
        rec.extend(names.iter().map(|n| field(e.attrs.get(n))));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

/// Split a delta line into tokens. Double quotes group text; `\"` inside
/// them is a literal quote. Quoted tokens come back flagged so their
/// values stay strings.
fn tokenize(line: &str) -> Result<Vec<(String, bool)>> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut in_q = false;
    let mut chars = line.chars();
    let mut started = false;
    while let Some(c) = chars.next() {
        match c {
            '\\' if in_q => match chars.next() {
                Some(n) => cur.push(n),
                None => return Err(GraphError::Input("dangling escape".into())),
            },
            '"' => {
                in_q = !in_q;
                quoted = true;
                started = true;
            }
            c if c.is_whitespace() && !in_q => {
                if started {
                    out.push((std::mem::take(&mut cur), quoted));
                    quoted = false;
                    started = false;
                }
            }
            c => {
                cur.push(c);
                started = true;
            }
        }
    }
    if in_q {
        return Err(GraphError::Input("unterminated quote".into()));
    }
    if started {
        out.push((cur, quoted));
    }
    Ok(out)
}

fn parse_attrs(tokens: &[(String, bool)], line: usize) -> Result<Attrs> {
    let mut attrs = Attrs::new();
    for (tok, quoted) in tokens {
        let (k, v) = tok.split_once('=').ok_or_else(|| GraphError::Input(format!("line {line}: expected key=value, got `{tok}`")))?;
        let v = if *quoted { PlainValue::Str(v.to_string()) } else { PlainValue::infer(v) };
        attrs.insert(k.to_string(), v);
    }
    Ok(attrs)
}

/// Parse the line-oriented delta format (`+V`, `-V`, `+E`, `-E`).
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_delta(text: &str) -> Result<GraphDelta> {
    let mut d = GraphDelta::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let toks = tokenize(t)?;
        let id = |k: usize| -> Result<i64> {
            toks.get(k)
                .and_then(|(s, _)| s.parse().ok())
                .ok_or_else(|| GraphError::Input(format!("line {line}: missing or bad id")))
        };
        let label = |k: usize| -> Result<String> {
            toks.get(k).map(|(s, _)| s.clone()).ok_or_else(|| GraphError::Input(format!("line {line}: missing label")))
        };
        match toks[0].0.as_str() {
            "+V" => d.add_vertices.push(Vertex { vid: id(1)?, label: label(2)?, attrs: parse_attrs(&toks[3..], line)? }),
            "-V" => d.del_vertices.push(id(1)?),
            "+E" => d.add_edges.push(Edge {
                eid: id(1)?,
                src: id(2)?,
                dst: id(3)?,
                label: label(4)?,
                attrs: parse_attrs(&toks[5..], line)?,
            }),
            "-E" => d.del_edges.push(id(1)?),
            other => return Err(GraphError::Input(format!("line {line}: unknown directive `{other}`"))),
        }
    }
    Ok(d)
}
