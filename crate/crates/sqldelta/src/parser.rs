use rg_store::PlainValue;

use crate::ast::*;
use crate::error::ParseError;
use crate::lexer::{lex, Tok, Token, KEYWORDS};

pub fn parse(text: &str) -> Result<Select, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let q = p.select()?;
    if p.peek() != &Tok::Eof {
        return Err(p.error("unexpected input after query"));
    }
    Ok(q)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        let found = match &t.tok {
            Tok::Eof => "end of input".to_string(),
            Tok::Ident { text, .. } => format!("`{text}`"),
            other => format!("{other:?}"),
        };
        ParseError {
            line: t.line,
            col: t.col,
            msg: format!("{} (found {found})", msg.into()),
        }
    }

    fn is_kw_at(&self, k: usize, kw: &str) -> bool {
        matches!(self.peek_at(k), Tok::Ident { text, quoted: false } if text.eq_ignore_ascii_case(kw))
    }

    fn is_kw(&self, kw: &str) -> bool {
        self.is_kw_at(0, kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{kw}`")))
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn at_ident(&self) -> bool {
        match self.peek() {
            Tok::Ident { text, quoted } => {
                *quoted || !KEYWORDS.contains(&text.to_ascii_lowercase().as_str())
            }
            _ => false,
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        if !self.at_ident() {
            return Err(self.error("expected identifier"));
        }
        match self.next() {
            Tok::Ident { text, .. } => Ok(text),
            _ => unreachable!(),
        }
    }

    fn select(&mut self) -> Result<Select, ParseError> {
        self.expect_kw("select")?;
        let mut items = vec![self.select_item()?];
        while *self.peek() == Tok::Comma {
            self.next();
            items.push(self.select_item()?);
        }
        let mut graph = None;
        let mut from = None;
        if self.eat_kw("from") {
            if self.at_ident() && self.is_kw_at(1, "match") {
                graph = Some(self.ident()?);
            } else {
                from = Some(self.from_item()?);
            }
        }
        let mut paths = Vec::new();
        while self.eat_kw("match") {
            paths.push(self.path()?);
            // further paths follow after a comma or directly, one per line
            while matches!(self.peek(), Tok::Comma | Tok::LParen) {
                if *self.peek() == Tok::Comma {
                    self.next();
                }
                paths.push(self.path()?);
            }
        }
        let source = match (from, paths.is_empty()) {
            (Some(item), true) => Source::From(item),
            (None, false) => Source::Match { graph, paths },
            (Some(_), false) => {
                return Err(self.error("a match clause takes a graph name, not a from-list"))
            }
            (None, true) => return Err(self.error("expected `from` or `match`")),
        };
        let filter = if self.eat_kw("where") {
            Some(self.expr()?)
        } else {
            None
        };
        Ok(Select {
            items,
            source,
            filter,
        })
    }

    fn select_item(&mut self) -> Result<SelectItem, ParseError> {
        if *self.peek() == Tok::Star {
            self.next();
            return Ok(SelectItem::Star);
        }
        let col = self.colref()?;
        let alias = if self.eat_kw("as") {
            Some(self.ident()?)
        } else {
            None
        };
        Ok(SelectItem::Column { col, alias })
    }

    fn colref(&mut self) -> Result<ColRef, ParseError> {
        let first = self.ident()?;
        if *self.peek() == Tok::Dot {
            self.next();
            let name = self.ident()?;
            Ok(ColRef {
                qualifier: Some(first),
                name,
            })
        } else {
            Ok(ColRef {
                qualifier: None,
                name: first,
            })
        }
    }

    fn alias(&mut self) -> Result<Option<String>, ParseError> {
        if self.eat_kw("as") {
            return Ok(Some(self.ident()?));
        }
        if self.at_ident() {
            return Ok(Some(self.ident()?));
        }
        Ok(None)
    }

    #[allow(clippy::wrong_self_convention)] // named after the grammar rule
    fn from_item(&mut self) -> Result<FromItem, ParseError> {
        let mut left = self.from_primary()?;
        loop {
            if self.eat_kw("join") {
                let right = self.from_primary()?;
                self.expect_kw("on")?;
                let on = self.expr()?;
                left = FromItem::Join {
                    left: Box::new(left),
                    right: Box::new(right),
                    on,
                };
            } else if self.eat_kw("map") {
                let right = self.from_primary()?;
                let matcher = if self.eat_kw("using") {
                    Some(self.matcher()?)
                } else {
                    None
                };
                left = FromItem::Map {
                    left: Box::new(left),
                    right: Box::new(right),
                    matcher,
                };
            } else {
                return Ok(left);
            }
        }
    }

    #[allow(clippy::wrong_self_convention)]
    fn from_primary(&mut self) -> Result<FromItem, ParseError> {
        if *self.peek() == Tok::LParen {
            self.next();
            if self.is_kw("select") {
                let q = self.select()?;
                self.expect(Tok::RParen, "`)`")?;
                let alias = self.alias()?;
                return Ok(FromItem::Sub {
                    query: Box::new(q),
                    alias,
                });
            }
            let item = self.from_item()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(item);
        }
        let name = self.ident()?;
        let alias = self.alias()?;
        Ok(FromItem::Table { name, alias })
    }

    fn matcher(&mut self) -> Result<MatcherSpec, ParseError> {
        let kind = self.ident()?.to_ascii_lowercase();
        self.expect(Tok::LParen, "`(`")?;
        let left = self.colref()?;
        let m = match kind.as_str() {
            "exact" => {
                self.expect(Tok::Op("="), "`=`")?;
                MatcherSpec::Exact {
                    left,
                    right: self.colref()?,
                }
            }
            "fuzzy" => {
                self.expect(Tok::Tilde, "`~`")?;
                let right = self.colref()?;
                let mut threshold = 0.8;
                if *self.peek() == Tok::Comma {
                    self.next();
                    threshold = match self.next() {
                        Tok::Float(f) => f,
                        Tok::Int(i) => i as f64,
                        _ => return Err(self.error("expected a threshold")),
                    };
                }
                MatcherSpec::Fuzzy {
                    left,
                    right,
                    threshold,
                }
            }
            other => return Err(self.error(format!("unknown matcher `{other}`"))),
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(m)
    }

    fn path(&mut self) -> Result<Path, ParseError> {
        let mut nodes = vec![self.node()?];
        let mut edges = Vec::new();
        while *self.peek() == Tok::Minus {
            self.next();
            self.expect(Tok::LBracket, "`[`")?;
            let var = if self.at_ident() {
                Some(self.ident()?)
            } else {
                None
            };
            let label = if *self.peek() == Tok::Colon {
                self.next();
                Some(self.ident()?)
            } else {
                None
            };
            self.expect(Tok::RBracket, "`]`")?;
            self.expect(Tok::Arrow, "`->`")?;
            edges.push(EdgePat { var, label });
            nodes.push(self.node()?);
        }
        Ok(Path { nodes, edges })
    }

    fn node(&mut self) -> Result<NodePat, ParseError> {
        self.expect(Tok::LParen, "`(` opening a pattern vertex")?;
        let var = self.ident()?;
        let label = if *self.peek() == Tok::Colon {
            self.next();
            Some(self.ident()?)
        } else {
            None
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(NodePat { var, label })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.and_expr()?;
        while self.eat_kw("or") {
            let r = self.and_expr()?;
            e = Expr::Or(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.atom()?;
        while self.eat_kw("and") {
            let r = self.atom()?;
            e = Expr::And(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::LParen {
            self.next();
            let e = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(e);
        }
        let left = self.operand()?;
        let op = match self.next() {
            Tok::Op("=") => CmpOp::Eq,
            Tok::Op("!=") => CmpOp::Ne,
            Tok::Op("<") => CmpOp::Lt,
            Tok::Op("<=") => CmpOp::Le,
            Tok::Op(">") => CmpOp::Gt,
            Tok::Op(">=") => CmpOp::Ge,
            _ => {
                self.pos -= 1;
                return Err(self.error("expected a comparison operator"));
            }
        };
        let right = self.operand()?;
        Ok(Expr::Cmp { left, op, right })
    }

    fn operand(&mut self) -> Result<Operand, ParseError> {
        let neg = if *self.peek() == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        let v = match self.peek().clone() {
            Tok::Int(i) => PlainValue::Int(if neg { -i } else { i }),
            Tok::Float(f) => PlainValue::Float(if neg { -f } else { f }),
            _ if neg => return Err(self.error("expected a number after `-`")),
            Tok::Str(s) => PlainValue::Str(s),
            Tok::Ident {
                ref text,
                quoted: false,
            } if text.eq_ignore_ascii_case("true") => PlainValue::Bool(true),
            Tok::Ident {
                ref text,
                quoted: false,
            } if text.eq_ignore_ascii_case("false") => PlainValue::Bool(false),
            Tok::Ident {
                ref text,
                quoted: false,
            } if text.eq_ignore_ascii_case("null") => PlainValue::Null,
            _ => return Ok(Operand::Col(self.colref()?)),
        };
        self.next();
        Ok(Operand::Lit(v))
    }
}
