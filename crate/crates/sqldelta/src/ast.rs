use std::fmt;

use rg_store::PlainValue;

#[derive(Clone, Debug, PartialEq)]
pub struct Select {
    pub items: Vec<SelectItem>,
    pub source: Source,
    pub filter: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SelectItem {
    Star,
    Column { col: ColRef, alias: Option<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColRef {
    pub qualifier: Option<String>,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    From(FromItem),
    /// A pattern over `graph` (the session's only graph when omitted).
    Match {
        graph: Option<String>,
        paths: Vec<Path>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum FromItem {
    Table {
        name: String,
        alias: Option<String>,
    },
    Sub {
        query: Box<Select>,
        alias: Option<String>,
    },
    Join {
        left: Box<FromItem>,
        right: Box<FromItem>,
        on: Expr,
    },
    Map {
        left: Box<FromItem>,
        right: Box<FromItem>,
        matcher: Option<MatcherSpec>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum MatcherSpec {
    Exact {
        left: ColRef,
        right: ColRef,
    },
    Fuzzy {
        left: ColRef,
        right: ColRef,
        threshold: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodePat {
    pub var: String,
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgePat {
    pub var: Option<String>,
    pub label: Option<String>,
}

/// `(a)-[e]->(b)-[f]->(c)`: `nodes.len() == edges.len() + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub nodes: Vec<NodePat>,
    pub edges: Vec<EdgePat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    /// The operator with its operands swapped.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            o => o,
        }
    }

    pub fn eval(self, a: &PlainValue, b: &PlainValue) -> bool {
        use std::cmp::Ordering::*;
        let Some(o) = a.sql_cmp(b) else { return false };
        match self {
            CmpOp::Eq => o == Equal,
            CmpOp::Ne => o != Equal,
            CmpOp::Lt => o == Less,
            CmpOp::Le => o != Greater,
            CmpOp::Gt => o == Greater,
            CmpOp::Ge => o != Less,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Operand {
    Col(ColRef),
    Lit(PlainValue),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Cmp {
        left: Operand,
        op: CmpOp,
        right: Operand,
    },
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

fn is_keyword(s: &str) -> bool {
    crate::lexer::KEYWORDS.contains(&s.to_ascii_lowercase().as_str())
}

/// Identifiers that would not lex back as themselves get double quotes.
fn ident(s: &str) -> String {
    let plain = s
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_keyword(s);
    if plain {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('"', "\"\""))
    }
}

fn literal(v: &PlainValue) -> String {
    match v {
        PlainValue::Null => "null".into(),
        PlainValue::Str(s) => format!("'{}'", s.replace('\'', "''")),
        PlainValue::Float(f) => {
            let s = format!("{f:?}");
            if s.contains(['.', 'e', 'E']) || !f.is_finite() {
                s
            } else {
                format!("{s}.0")
            }
        }
        other => other.to_string(),
    }
}

impl fmt::Display for ColRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.qualifier {
            Some(q) => write!(f, "{}.{}", ident(q), ident(&self.name)),
            None => write!(f, "{}", ident(&self.name)),
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Col(c) => write!(f, "{c}"),
            Operand::Lit(v) => write!(f, "{}", literal(v)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Cmp { left, op, right } => write!(f, "{left} {} {right}", op.symbol()),
            // both operators associate to the left; `or` binds looser
            Expr::And(a, b) => {
                let l = if matches!(**a, Expr::Or(..)) {
                    format!("({a})")
                } else {
                    a.to_string()
                };
                let r = if matches!(**b, Expr::Cmp { .. }) {
                    b.to_string()
                } else {
                    format!("({b})")
                };
                write!(f, "{l} and {r}")
            }
            Expr::Or(a, b) => {
                let r = if matches!(**b, Expr::Or(..)) {
                    format!("({b})")
                } else {
                    b.to_string()
                };
                write!(f, "{a} or {r}")
            }
        }
    }
}

impl fmt::Display for NodePat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(l) => write!(f, "({}: {})", ident(&self.var), ident(l)),
            None => write!(f, "({})", ident(&self.var)),
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.nodes[0])?;
        for (e, n) in self.edges.iter().zip(&self.nodes[1..]) {
            let inner = match (&e.var, &e.label) {
                (Some(v), Some(l)) => format!("{}: {}", ident(v), ident(l)),
                (Some(v), None) => ident(v),
                (None, Some(l)) => format!(": {}", ident(l)),
                (None, None) => String::new(),
            };
            write!(f, "-[{inner}]->{n}")?;
        }
        Ok(())
    }
}

impl fmt::Display for MatcherSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatcherSpec::Exact { left, right } => write!(f, "exact({left} = {right})"),
            MatcherSpec::Fuzzy {
                left,
                right,
                threshold,
            } => write!(f, "fuzzy({left} ~ {right}, {threshold:?})"),
        }
    }
}

impl fmt::Display for FromItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alias = |a: &Option<String>| {
            a.as_ref()
                .map(|a| format!(" as {}", ident(a)))
                .unwrap_or_default()
        };
        match self {
            FromItem::Table { name, alias: a } => write!(f, "{}{}", ident(name), alias(a)),
            FromItem::Sub { query, alias: a } => write!(f, "({query}){}", alias(a)),
            FromItem::Join { left, right, on } => write!(f, "{left} join {} on {on}", Paren(right)),
            FromItem::Map {
                left,
                right,
                matcher,
            } => {
                write!(f, "{left} map {}", Paren(right))?;
                if let Some(m) = matcher {
                    write!(f, " using {m}")?;
                }
                Ok(())
            }
        }
    }
}

/// Right operands of join/map are single items; nested ones need brackets.
struct Paren<'a>(&'a FromItem);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            FromItem::Join { .. } | FromItem::Map { .. } => write!(f, "({})", self.0),
            other => write!(f, "{other}"),
        }
    }
}

impl fmt::Display for Select {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "select ")?;
        for (i, it) in self.items.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match it {
                SelectItem::Star => write!(f, "*")?,
                SelectItem::Column {
                    col,
                    alias: Some(a),
                } => write!(f, "{col} as {}", ident(a))?,
                SelectItem::Column { col, alias: None } => write!(f, "{col}")?,
            }
        }
        match &self.source {
            Source::From(item) => write!(f, " from {item}")?,
            Source::Match { graph, paths } => {
                if let Some(g) = graph {
                    write!(f, " from {}", ident(g))?;
                }
                for p in paths {
                    write!(f, " match {p}")?;
                }
            }
        }
        if let Some(w) = &self.filter {
            write!(f, " where {w}")?;
        }
        Ok(())
    }
}
