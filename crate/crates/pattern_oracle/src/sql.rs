//! Renders a pattern query as a `match` statement, so the engine and the
//! oracle can be run on the same input.

use std::fmt::Write;

use rg_store::PlainValue;

use crate::{CmpOp, Operand, PatternQuery};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn literal(v: &PlainValue) -> String {
    match v {
        PlainValue::Null => "null".into(),
        PlainValue::Str(s) => format!("'{}'", s.replace('\'', "''")),
        PlainValue::Float(f) => format!("{f:?}"),
        other => other.to_string(),
    }
}

fn operand(o: &Operand) -> String {
    match o {
        Operand::Attr { var, attr } => format!("{}.{}", quote(var), quote(attr)),
        Operand::Const(c) => literal(c),
    }
}

fn op(o: CmpOp) -> &'static str {
    match o {
        CmpOp::Eq => "=",
        CmpOp::Ne => "<>",
        CmpOp::Lt => "<",
        CmpOp::Le => "<=",
        CmpOp::Gt => ">",
        CmpOp::Ge => ">=",
    }
}

/// One path per pattern edge; output columns are named `var.attr` like the
/// oracle's.
pub fn to_sql(q: &PatternQuery, graph: &str) -> String {
    let p = &q.pattern;
    let vertex = |var: &str| {
        let v = &p.vertices[p.vertex_index(var).expect("edge end not declared")];
        match &v.label {
            Some(l) => format!("({}: {})", quote(var), quote(l)),
            None => format!("({})", quote(var)),
        }
    };
    let mut s = String::from("select ");
    let cols: Vec<String> =
        q.projection.iter().map(|(v, a)| format!("{}.{} as {}", quote(v), quote(a), quote(&format!("{v}.{a}")))).collect();
    s.push_str(&cols.join(", "));
    write!(s, " from {} match", quote(graph)).unwrap();
    for (k, e) in p.edges.iter().enumerate() {
        let var = e.var.clone().unwrap_or_else(|| format!("_e{k}"));
        let label = e.label.as_ref().map(|l| format!(": {}", quote(l))).unwrap_or_default();
        write!(s, " {}-[{}{}]->{}", vertex(&e.src), quote(&var), label, vertex(&e.dst)).unwrap();
    }
    for v in &p.vertices {
        if !p.edges.iter().any(|e| e.src == v.var || e.dst == v.var) {
            write!(s, " {}", vertex(&v.var)).unwrap();
        }
    }
    if !q.conditions.is_empty() {
        let cs: Vec<String> =
            q.conditions.iter().map(|c| format!("{} {} {}", operand(&c.left), op(c.op), operand(&c.right))).collect();
        write!(s, " where {}", cs.join(" and ")).unwrap();
    }
    s
}
