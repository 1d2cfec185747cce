//! Recursive-descent parser for declarations, static terms and expressions.

use crate::diag::{Diagnostic, Span};
use crate::statics::{ArrowKind, CmpOp, IntOp, Name, Sort, StaticTerm as S};

use super::ast::*;
use super::lexer::{lex, Tok, Token};

pub fn parse_program(src: &str) -> Result<Program, Diagnostic> {
    let mut p = Parser::new(src)?;
    let mut decls = Vec::new();
    while !p.at(&Tok::Eof) {
        decls.push(p.decl()?);
    }
    Ok(Program { decls })
}

/// Parses a standalone static term (used by tests and tooling).
pub fn parse_static(src: &str) -> Result<S, Diagnostic> {
    let mut p = Parser::new(src)?;
    let t = p.static_term()?;
    p.expect(&Tok::Eof)?;
    Ok(t)
}

pub fn parse_expr(src: &str) -> Result<Expr, Diagnostic> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.expect(&Tok::Eof)?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &str) -> Diagnostic {
        Diagnostic::error(
            "syntax",
            self.span(),
            format!("expected {}, found {}", expected, self.peek()),
        )
    }

    fn expect(&mut self, t: &Tok) -> PResult<Span> {
        if self.at(t) {
            Ok(self.bump().span)
        } else {
            Err(self.error(&t.to_string()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Span> {
        if self.at_kw(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.error(&format!("`{}`", kw)))
        }
    }

    fn ident(&mut self) -> PResult<(Name, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                let sp = self.bump().span;
                Ok((s, sp))
            }
            _ => Err(self.error("identifier")),
        }
    }

    fn sort(&mut self) -> PResult<Sort> {
        match self.peek().clone() {
            Tok::Ident(s) => match Sort::from_keyword(&s) {
                Some(so) => {
                    self.bump();
                    Ok(so)
                }
                None => Err(self.error("a sort (addr, bool, int, view, type, viewtype)")),
            },
            _ => Err(self.error("a sort")),
        }
    }

    fn comma_list<T>(
        &mut self,
        close: &Tok,
        mut item: impl FnMut(&mut Self) -> PResult<T>,
    ) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(&Tok::Comma)?;
        }
    }

    // ---- declarations ----

    fn decl(&mut self) -> PResult<Decl> {
        let start = self.span();
        if self.eat_kw("dataview") {
            return self.dataview(start);
        }
        if self.at_kw("viewdef") || self.at_kw("typedef") {
            let is_view = self.at_kw("viewdef");
            self.bump();
            let (name, _) = self.ident()?;
            let params = if self.eat(&Tok::LParen) {
                self.comma_list(&Tok::RParen, |p| {
                    let (n, _) = p.ident()?;
                    p.expect(&Tok::Colon)?;
                    Ok((n, p.sort()?))
                })?
            } else {
                Vec::new()
            };
            self.expect(&Tok::Eq)?;
            let body = self.static_term()?;
            let d = AbbrevDecl {
                name,
                params,
                body,
                span: start.to(self.prev_span()),
            };
            return Ok(if is_view {
                Decl::ViewDef(d)
            } else {
                Decl::TypeDef(d)
            });
        }
        if self.at_kw("fun") || self.at_kw("prfun") || self.at_kw("extern") {
            return Ok(Decl::Fun(self.fun_decl()?));
        }
        if self.eat_kw("val") {
            match self.peek().clone() {
                Tok::Ident(s) if s == "main" => {
                    self.bump();
                }
                _ => return Err(self.error("`main` (the only top-level value)")),
            }
            self.expect(&Tok::Eq)?;
            return Ok(Decl::Main(self.expr()?));
        }
        Err(self.error("a declaration"))
    }

    fn dataview(&mut self, start: Span) -> PResult<Decl> {
        let (name, _) = self.ident()?;
        self.expect(&Tok::LParen)?;
        let sorts = self.comma_list(&Tok::RParen, |p| p.sort())?;
        self.expect(&Tok::Eq)?;
        let mut clauses = Vec::new();
        self.eat(&Tok::Bar);
        loop {
            let cstart = self.span();
            let quant = if self.eat(&Tok::LBrace) {
                self.quant_body(&Tok::RBrace)?
            } else {
                QuantGroup::default()
            };
            let (cname, _) = self.ident()?;
            self.expect(&Tok::LParen)?;
            let indices = self.comma_list(&Tok::RParen, |p| p.static_term())?;
            let args = if self.eat_kw("of") {
                self.expect(&Tok::LParen)?;
                Some(self.comma_list(&Tok::RParen, |p| p.static_term())?)
            } else {
                None
            };
            clauses.push(ConClause {
                quant,
                name: cname,
                indices,
                args,
                span: cstart.to(self.prev_span()),
            });
            if !self.eat(&Tok::Bar) {
                break;
            }
        }
        Ok(Decl::Dataview(DataviewDecl {
            name,
            sorts,
            clauses,
            span: start.to(self.prev_span()),
        }))
    }

    /// Parses after the opening `{` or `[`: binders, then guards after `|`,
    /// or guards alone.
    fn quant_body(&mut self, close: &Tok) -> PResult<QuantGroup> {
        let mut q = QuantGroup::default();
        let binder_start = matches!(self.peek(), Tok::Ident(_)) && self.peek_at(1) == &Tok::Colon;
        if binder_start {
            loop {
                let (n, _) = self.ident()?;
                self.expect(&Tok::Colon)?;
                q.binders.push((n, self.sort()?));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            if self.eat(close) {
                return Ok(q);
            }
            self.expect(&Tok::Bar)?;
        }
        loop {
            q.guards.push(self.static_prop()?);
            if self.eat(close) {
                return Ok(q);
            }
            self.expect(&Tok::Comma)?;
        }
    }

    fn fun_decl(&mut self) -> PResult<FunDecl> {
        let start = self.span();
        let is_extern = self.eat_kw("extern");
        let kind = if self.eat_kw("fun") {
            FunKind::Fun
        } else if self.eat_kw("prfun") {
            FunKind::PrFun
        } else {
            return Err(self.error("`fun` or `prfun`"));
        };
        let (name, _) = self.ident()?;
        let mut quants = Vec::new();
        while self.eat(&Tok::LBrace) {
            quants.push(self.quant_body(&Tok::RBrace)?);
        }
        let metric = if self.eat(&Tok::MetricOpen) {
            let mut m = Vec::new();
            if !self.eat(&Tok::MetricClose) {
                loop {
                    m.push(self.static_add()?);
                    if self.eat(&Tok::MetricClose) {
                        break;
                    }
                    self.expect(&Tok::Comma)?;
                }
            }
            Some(m)
        } else {
            None
        };
        self.expect(&Tok::LParen)?;
        let params = self.param_groups()?;
        let ret = if self.eat(&Tok::Colon) {
            Some(self.static_term()?)
        } else {
            None
        };
        let body = if !is_extern && self.eat(&Tok::Eq) {
            Some(self.expr()?)
        } else {
            None
        };
        if body.is_none() && !is_extern {
            return Err(self.error("`=` and a function body"));
        }
        Ok(FunDecl {
            kind,
            is_extern,
            name,
            quants,
            metric,
            params,
            ret,
            body,
            span: start.to(self.prev_span()),
        })
    }

    /// After `(`: parameters split into `|`-separated groups.
    fn param_groups(&mut self) -> PResult<Vec<Vec<Param>>> {
        let mut groups = vec![Vec::new()];
        loop {
            if self.eat(&Tok::RParen) {
                return Ok(groups);
            }
            if self.eat(&Tok::Bar) {
                groups.push(Vec::new());
                continue;
            }
            let p = self.param()?;
            groups.last_mut().unwrap().push(p);
            if !matches!(self.peek(), Tok::Bar | Tok::RParen) {
                self.expect(&Tok::Comma)?;
            }
        }
    }

    fn param(&mut self) -> PResult<Param> {
        let start = self.span();
        let name = match self.peek().clone() {
            Tok::Ident(s) if s == "_" => {
                self.bump();
                s
            }
            _ => self.ident()?.0,
        };
        let ty = if self.eat(&Tok::Colon) {
            Some(self.static_term()?)
        } else {
            None
        };
        Ok(Param {
            name,
            ty,
            span: start.to(self.prev_span()),
        })
    }

    // ---- static terms ----

    pub fn static_term(&mut self) -> PResult<S> {
        if self.eat(&Tok::LBrace) {
            let q = self.quant_body(&Tok::RBrace)?;
            let body = self.static_term()?;
            return Ok(S::forall_all(&q.binders, q.guards, body));
        }
        if self.eat(&Tok::LBracket) {
            let q = self.quant_body(&Tok::RBracket)?;
            let body = self.static_term()?;
            return Ok(S::exists_all(&q.binders, q.guards, body));
        }
        let lhs = self.static_prop()?;
        let arrow = match self.peek() {
            Tok::Arrow => Some((0, ArrowKind::Pure)),
            Tok::ArrowOnce => Some((0, ArrowKind::Once)),
            Tok::ViewArrow => Some((1, ArrowKind::Pure)),
            Tok::ViewArrowOnce => Some((1, ArrowKind::Once)),
            Tok::Lolli => Some((2, ArrowKind::Pure)),
            _ => None,
        };
        match arrow {
            None => Ok(lhs),
            Some((which, k)) => {
                self.bump();
                let rhs = Box::new(self.static_term()?);
                let lhs = Box::new(lhs);
                Ok(match which {
                    0 => S::Arrow(k, lhs, rhs),
                    1 => S::ViewArrow(k, lhs, rhs),
                    _ => S::Lolli(lhs, rhs),
                })
            }
        }
    }

    /// Implication level and below (no quantifiers or arrows at the top).
    fn static_prop(&mut self) -> PResult<S> {
        let lhs = self.static_or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.static_prop()?;
            return Ok(S::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn static_or(&mut self) -> PResult<S> {
        let mut lhs = self.static_and()?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.static_and()?;
            lhs = S::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn static_and(&mut self) -> PResult<S> {
        let mut lhs = self.static_cmp()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.static_cmp()?;
            lhs = S::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn static_cmp(&mut self) -> PResult<S> {
        let lhs = self.static_at()?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::EqEq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.static_at()?;
        Ok(S::cmp(op, lhs, rhs))
    }

    fn static_at(&mut self) -> PResult<S> {
        let lhs = self.static_add()?;
        if self.eat(&Tok::At) {
            let l = self.static_add()?;
            return Ok(S::at(lhs, l));
        }
        Ok(lhs)
    }

    fn static_add(&mut self) -> PResult<S> {
        let mut lhs = self.static_mul()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => IntOp::Add,
                Tok::Minus => IntOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.static_mul()?;
            lhs = S::IntOp(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn static_mul(&mut self) -> PResult<S> {
        let mut lhs = self.static_prefix()?;
        loop {
            let op = match self.peek() {
                Tok::Star => IntOp::Mul,
                Tok::Slash => IntOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.static_prefix()?;
            lhs = S::IntOp(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn static_prefix(&mut self) -> PResult<S> {
        if self.eat(&Tok::Bang) {
            return Ok(S::Boxed(Box::new(self.static_prefix()?)));
        }
        if self.eat(&Tok::Tilde) {
            return Ok(S::Not(Box::new(self.static_prefix()?)));
        }
        if self.eat(&Tok::Minus) {
            if let Tok::Int(n) = *self.peek() {
                self.bump();
                return Ok(S::Int(-n));
            }
            return Ok(S::Neg(Box::new(self.static_prefix()?)));
        }
        self.static_atom()
    }

    fn starts_static_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !is_keyword(s),
            Tok::Int(_) | Tok::QuoteParen => true,
            _ => false,
        }
    }

    fn static_atom(&mut self) -> PResult<S> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(S::Int(n))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                match s.as_str() {
                    "true" => return Ok(S::Bool(true)),
                    "false" => return Ok(S::Bool(false)),
                    "null" => return Ok(S::Addr(0)),
                    _ => {}
                }
                if self.eat(&Tok::LParen) {
                    let args = self.comma_list(&Tok::RParen, |p| p.static_term())?;
                    return Ok(S::App(s, args));
                }
                if self.starts_static_atom() {
                    let arg = self.static_atom()?;
                    return Ok(S::App(s, vec![arg]));
                }
                Ok(S::Var(s))
            }
            Tok::LParen => {
                self.bump();
                let items = self.comma_list(&Tok::RParen, |p| p.static_term())?;
                if items.len() == 1 {
                    return Ok(items.into_iter().next().unwrap());
                }
                if !self.eat(&Tok::At) {
                    return Err(self.error("`@` after a parenthesised type list"));
                }
                let l = self.static_add()?;
                Ok(S::MultiAt(items, Box::new(l)))
            }
            Tok::QuoteParen => {
                self.bump();
                let mut first = Vec::new();
                let mut views = None;
                loop {
                    if self.eat(&Tok::RParen) {
                        break;
                    }
                    if self.eat(&Tok::Bar) {
                        if views.is_some() {
                            return Err(self.error("at most one `|` in a tuple"));
                        }
                        views = Some(std::mem::take(&mut first));
                        continue;
                    }
                    first.push(self.static_term()?);
                    if !matches!(self.peek(), Tok::Bar | Tok::RParen) {
                        self.expect(&Tok::Comma)?;
                    }
                }
                Ok(S::Tuple {
                    views,
                    items: first,
                })
            }
            _ => Err(self.error("a static term")),
        }
    }

    // ---- expressions ----

    pub fn expr(&mut self) -> PResult<Expr> {
        let start = self.span();
        if self.eat_kw("if") {
            let c = self.expr()?;
            self.expect_kw("then")?;
            let a = self.expr()?;
            self.expect_kw("else")?;
            let b = self.expr()?;
            let sp = start.to(b.span);
            return Ok(Expr::new(
                ExprKind::If(Box::new(c), Box::new(a), Box::new(b)),
                sp,
            ));
        }
        if self.eat_kw("sif") {
            let c = self.static_prop()?;
            self.expect_kw("then")?;
            let a = self.expr()?;
            self.expect_kw("else")?;
            let b = self.expr()?;
            let sp = start.to(b.span);
            return Ok(Expr::new(ExprKind::Sif(c, Box::new(a), Box::new(b)), sp));
        }
        if self.at_kw("lam") || self.at_kw("llam") {
            let once = self.at_kw("llam");
            self.bump();
            let params = self.lam_params()?;
            self.expect(&Tok::FatArrow)?;
            let body = self.expr()?;
            let sp = start.to(body.span);
            return Ok(Expr::new(
                ExprKind::Lam {
                    once,
                    params,
                    body: Box::new(body),
                },
                sp,
            ));
        }
        if self.eat_kw("fix") {
            let (name, _) = self.ident()?;
            let params = self.lam_params()?;
            let ret = if self.eat(&Tok::Colon) {
                Some(self.static_prop()?)
            } else {
                None
            };
            self.expect(&Tok::FatArrow)?;
            let body = self.expr()?;
            let sp = start.to(body.span);
            return Ok(Expr::new(
                ExprKind::Fix {
                    name,
                    params,
                    ret,
                    body: Box::new(body),
                },
                sp,
            ));
        }
        self.binary(1)
    }

    fn lam_params(&mut self) -> PResult<Vec<Param>> {
        if self.eat(&Tok::LParen) {
            self.comma_list(&Tok::RParen, |p| p.param())
        } else {
            let (name, span) = self.ident()?;
            Ok(vec![Param {
                name,
                ty: None,
                span,
            }])
        }
    }

    fn binop_at(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::OrOr => BinOp::Or,
            Tok::AndAnd => BinOp::And,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            _ => return None,
        })
    }

    fn infix_ident_at(&self) -> Option<String> {
        match self.peek() {
            Tok::Ident(s) if INFIX_IDENTS.contains(&s.as_str()) => Some(s.clone()),
            _ => None,
        }
    }

    /// Precedence climbing; infix identifiers sit at the comparison level.
    fn binary(&mut self, min: u8) -> PResult<Expr> {
        let mut lhs = self.app()?;
        loop {
            if let Some(op) = self.binop_at() {
                let p = op.prec();
                if p < min {
                    return Ok(lhs);
                }
                self.bump();
                let rhs = self.binary(p + 1)?;
                let sp = lhs.span.to(rhs.span);
                lhs = Expr::new(ExprKind::BinOp(op, Box::new(lhs), Box::new(rhs)), sp);
                continue;
            }
            if let Some(f) = self.infix_ident_at() {
                if 3 < min {
                    return Ok(lhs);
                }
                self.bump();
                let rhs = self.binary(4)?;
                let sp = lhs.span.to(rhs.span);
                lhs = Expr::new(
                    ExprKind::Call {
                        func: f,
                        statics: None,
                        groups: vec![vec![lhs, rhs]],
                        infix: true,
                    },
                    sp,
                );
                continue;
            }
            return Ok(lhs);
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !is_keyword(s) && !INFIX_IDENTS.contains(&s.as_str()),
            Tok::Int(_) | Tok::QuoteParen | Tok::LParen => true,
            _ => false,
        }
    }

    fn app(&mut self) -> PResult<Expr> {
        let start = self.span();
        let name = match self.peek().clone() {
            Tok::Ident(s)
                if !is_keyword(&s)
                    && !INFIX_IDENTS.contains(&s.as_str())
                    && !matches!(s.as_str(), "true" | "false" | "null") =>
            {
                s
            }
            _ => return self.atom(),
        };
        self.bump();
        let statics = if self.eat(&Tok::LBrace) {
            Some(self.comma_list(&Tok::RBrace, |p| p.static_term())?)
        } else {
            None
        };
        if self.eat(&Tok::LParen) {
            let groups = self.arg_groups()?;
            return Ok(Expr::new(
                ExprKind::Call {
                    func: name,
                    statics,
                    groups,
                    infix: false,
                },
                start.to(self.prev_span()),
            ));
        }
        if self.starts_atom() {
            let arg = self.atom()?;
            let sp = start.to(arg.span);
            return Ok(Expr::new(
                ExprKind::Call {
                    func: name,
                    statics,
                    groups: vec![vec![arg]],
                    infix: false,
                },
                sp,
            ));
        }
        if statics.is_some() {
            return Ok(Expr::new(
                ExprKind::Call {
                    func: name,
                    statics,
                    groups: vec![],
                    infix: false,
                },
                start.to(self.prev_span()),
            ));
        }
        Ok(Expr::new(ExprKind::Var(name), start))
    }

    fn arg_groups(&mut self) -> PResult<Vec<Vec<Expr>>> {
        let mut groups = vec![Vec::new()];
        loop {
            if self.eat(&Tok::RParen) {
                return Ok(groups);
            }
            if self.eat(&Tok::Bar) {
                groups.push(Vec::new());
                continue;
            }
            let e = self.expr()?;
            groups.last_mut().unwrap().push(e);
            if !matches!(self.peek(), Tok::Bar | Tok::RParen) {
                self.expect(&Tok::Comma)?;
            }
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(n), start))
            }
            Tok::Minus if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                let Tok::Int(n) = self.bump().tok else {
                    unreachable!()
                };
                Ok(Expr::new(ExprKind::Int(-n), start.to(self.prev_span())))
            }
            Tok::Ident(s) if s == "let" => {
                self.bump();
                let mut decls = Vec::new();
                while !self.at_kw("in") {
                    decls.push(self.local_decl()?);
                }
                self.expect_kw("in")?;
                let body = self.expr()?;
                self.expect_kw("end")?;
                Ok(Expr::new(
                    ExprKind::Let(decls, Box::new(body)),
                    start.to(self.prev_span()),
                ))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                let kind = match s.as_str() {
                    "true" => ExprKind::Bool(true),
                    "false" => ExprKind::Bool(false),
                    "null" => ExprKind::Null,
                    _ => ExprKind::Var(s),
                };
                Ok(Expr::new(kind, start))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                if self.eat(&Tok::Colon) {
                    let t = self.static_term()?;
                    self.expect(&Tok::RParen)?;
                    return Ok(Expr::new(
                        ExprKind::Ann(Box::new(e), t),
                        start.to(self.prev_span()),
                    ));
                }
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::QuoteParen => {
                self.bump();
                let mut first = Vec::new();
                let mut proofs = None;
                loop {
                    if self.eat(&Tok::RParen) {
                        break;
                    }
                    if self.eat(&Tok::Bar) {
                        if proofs.is_some() {
                            return Err(self.error("at most one `|` in a tuple"));
                        }
                        proofs = Some(std::mem::take(&mut first));
                        continue;
                    }
                    first.push(self.expr()?);
                    if !matches!(self.peek(), Tok::Bar | Tok::RParen) {
                        self.expect(&Tok::Comma)?;
                    }
                }
                Ok(Expr::new(
                    ExprKind::Tuple {
                        proofs,
                        items: first,
                    },
                    start.to(self.prev_span()),
                ))
            }
            _ => Err(self.error("an expression")),
        }
    }

    fn local_decl(&mut self) -> PResult<LocalDecl> {
        let start = self.span();
        if self.at_kw("fun") || self.at_kw("prfun") {
            return Ok(LocalDecl::Fun(self.fun_decl()?));
        }
        let proof = if self.eat_kw("val") {
            false
        } else if self.eat_kw("prval") {
            true
        } else {
            return Err(self.error("`val`, `prval`, `fun`, `prfun` or `in`"));
        };
        let pat = self.pattern()?;
        self.expect(&Tok::Eq)?;
        let rhs = self.expr()?;
        let span = start.to(rhs.span);
        Ok(if proof {
            LocalDecl::PrVal { pat, rhs, span }
        } else {
            LocalDecl::Val { pat, rhs, span }
        })
    }

    fn pattern(&mut self) -> PResult<Pat> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Ident(s) if s == "_" => {
                self.bump();
                Ok(Pat {
                    kind: PatKind::Wild,
                    span: start,
                })
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                if self.eat(&Tok::LParen) {
                    let args = self.comma_list(&Tok::RParen, |p| p.pattern())?;
                    return Ok(Pat {
                        kind: PatKind::Con(s, args),
                        span: start.to(self.prev_span()),
                    });
                }
                Ok(Pat {
                    kind: PatKind::Var(s),
                    span: start,
                })
            }
            Tok::QuoteParen => {
                self.bump();
                let mut first = Vec::new();
                let mut proofs = None;
                loop {
                    if self.eat(&Tok::RParen) {
                        break;
                    }
                    if self.eat(&Tok::Bar) {
                        if proofs.is_some() {
                            return Err(self.error("at most one `|` in a tuple pattern"));
                        }
                        proofs = Some(std::mem::take(&mut first));
                        continue;
                    }
                    first.push(self.pattern()?);
                    if !matches!(self.peek(), Tok::Bar | Tok::RParen) {
                        self.expect(&Tok::Comma)?;
                    }
                }
                Ok(Pat {
                    kind: PatKind::Tuple {
                        proofs,
                        items: first,
                    },
                    span: start.to(self.prev_span()),
                })
            }
            _ => Err(self.error("a pattern")),
        }
    }
}
