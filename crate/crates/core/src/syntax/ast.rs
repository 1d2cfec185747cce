//! Surface abstract syntax, as produced by the parser.
//!
//! Static terms are shared with the checker ([`StaticTerm`]); expressions
//! are classified into proof and dynamic terms later, by [`crate::elab`].

use crate::diag::Span;
use crate::statics::{Name, Sort, StaticTerm};

pub const KEYWORDS: &[&str] = &[
    "dataview", "viewdef", "typedef", "fun", "prfun", "extern", "val", "prval", "let", "in", "end",
    "if", "then", "else", "sif", "lam", "llam", "fix", "of",
];

/// Identifiers used as infix binary functions (`n igt 0`).
pub const INFIX_IDENTS: &[&str] = &["igt", "ige", "ilt", "ile", "ieq", "ineq"];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub decls: Vec<Decl>,
}

impl Program {
    pub fn main(&self) -> Option<&Expr> {
        self.decls.iter().find_map(|d| match d {
            Decl::Main(e) => Some(e),
            _ => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Dataview(DataviewDecl),
    ViewDef(AbbrevDecl),
    TypeDef(AbbrevDecl),
    Fun(FunDecl),
    Main(Expr),
}

impl Decl {
    pub fn span(&self) -> Span {
        match self {
            Decl::Dataview(d) => d.span,
            Decl::ViewDef(d) | Decl::TypeDef(d) => d.span,
            Decl::Fun(f) => f.span,
            Decl::Main(e) => e.span,
        }
    }
}

/// `{a:σ, .. | B, ..}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuantGroup {
    pub binders: Vec<(Name, Sort)>,
    pub guards: Vec<StaticTerm>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataviewDecl {
    pub name: Name,
    pub sorts: Vec<Sort>,
    pub clauses: Vec<ConClause>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConClause {
    pub quant: QuantGroup,
    pub name: Name,
    pub indices: Vec<StaticTerm>,
    /// The `of (..)` part, if present.
    pub args: Option<Vec<StaticTerm>>,
    pub span: Span,
}

/// `viewdef` / `typedef`.
#[derive(Clone, Debug, PartialEq)]
pub struct AbbrevDecl {
    pub name: Name,
    pub params: Vec<(Name, Sort)>,
    pub body: StaticTerm,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunKind {
    Fun,
    PrFun,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: Name,
    pub ty: Option<StaticTerm>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunDecl {
    pub kind: FunKind,
    pub is_extern: bool,
    pub name: Name,
    pub quants: Vec<QuantGroup>,
    pub metric: Option<Vec<StaticTerm>>,
    /// Parameter groups separated by `|`.
    pub params: Vec<Vec<Param>>,
    pub ret: Option<StaticTerm>,
    pub body: Option<Expr>,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "<>",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength: higher binds tighter.
    pub fn prec(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Var(Name),
    Int(i64),
    Bool(bool),
    Null,
    /// `'(p1, .. | e1, ..)`; `proofs` is `None` without a bar.
    Tuple {
        proofs: Option<Vec<Expr>>,
        items: Vec<Expr>,
    },
    Call {
        func: Name,
        statics: Option<Vec<StaticTerm>>,
        groups: Vec<Vec<Expr>>,
        infix: bool,
    },
    BinOp(BinOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Sif(StaticTerm, Box<Expr>, Box<Expr>),
    Let(Vec<LocalDecl>, Box<Expr>),
    /// `lam (x: T, ..) => e` or, once-only, `llam`.
    Lam {
        once: bool,
        params: Vec<Param>,
        body: Box<Expr>,
    },
    /// `fix f (x: T, ..): T' => e`.
    Fix {
        name: Name,
        params: Vec<Param>,
        ret: Option<StaticTerm>,
        body: Box<Expr>,
    },
    /// `(e : T)`.
    Ann(Box<Expr>, StaticTerm),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LocalDecl {
    Val { pat: Pat, rhs: Expr, span: Span },
    PrVal { pat: Pat, rhs: Expr, span: Span },
    Fun(FunDecl),
}

impl LocalDecl {
    pub fn span(&self) -> Span {
        match self {
            LocalDecl::Val { span, .. } | LocalDecl::PrVal { span, .. } => *span,
            LocalDecl::Fun(f) => f.span,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pat {
    pub kind: PatKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PatKind {
    Wild,
    Var(Name),
    Tuple {
        proofs: Option<Vec<Pat>>,
        items: Vec<Pat>,
    },
    Con(Name, Vec<Pat>),
}

/// Structural equality ignoring spans, used by the round-trip property.
pub trait SpanFree {
    fn strip(&self) -> Self;
}

impl SpanFree for Program {
    fn strip(&self) -> Self {
        Program {
            decls: self.decls.iter().map(|d| d.strip()).collect(),
        }
    }
}

impl SpanFree for Decl {
    fn strip(&self) -> Self {
        match self {
            Decl::Dataview(d) => Decl::Dataview(DataviewDecl {
                span: Span::DUMMY,
                clauses: d
                    .clauses
                    .iter()
                    .map(|c| ConClause {
                        span: Span::DUMMY,
                        ..c.clone()
                    })
                    .collect(),
                ..d.clone()
            }),
            Decl::ViewDef(d) => Decl::ViewDef(AbbrevDecl {
                span: Span::DUMMY,
                ..d.clone()
            }),
            Decl::TypeDef(d) => Decl::TypeDef(AbbrevDecl {
                span: Span::DUMMY,
                ..d.clone()
            }),
            Decl::Fun(f) => Decl::Fun(f.strip()),
            Decl::Main(e) => Decl::Main(e.strip()),
        }
    }
}

impl SpanFree for FunDecl {
    fn strip(&self) -> Self {
        FunDecl {
            span: Span::DUMMY,
            params: self
                .params
                .iter()
                .map(|g| g.iter().map(|p| p.strip()).collect())
                .collect(),
            body: self.body.as_ref().map(|b| b.strip()),
            ..self.clone()
        }
    }
}

impl SpanFree for Param {
    fn strip(&self) -> Self {
        Param {
            span: Span::DUMMY,
            ..self.clone()
        }
    }
}

impl SpanFree for Expr {
    fn strip(&self) -> Self {
        let s = |e: &Expr| Box::new(e.strip());
        let all = |es: &[Expr]| es.iter().map(|e| e.strip()).collect::<Vec<_>>();
        let kind = match &self.kind {
            ExprKind::Tuple { proofs, items } => ExprKind::Tuple {
                proofs: proofs.as_ref().map(|p| all(p)),
                items: all(items),
            },
            ExprKind::Call {
                func,
                statics,
                groups,
                infix,
            } => ExprKind::Call {
                func: func.clone(),
                statics: statics.clone(),
                groups: groups.iter().map(|g| all(g)).collect(),
                infix: *infix,
            },
            ExprKind::BinOp(op, a, b) => ExprKind::BinOp(*op, s(a), s(b)),
            ExprKind::If(c, a, b) => ExprKind::If(s(c), s(a), s(b)),
            ExprKind::Sif(c, a, b) => ExprKind::Sif(c.clone(), s(a), s(b)),
            ExprKind::Let(ds, b) => ExprKind::Let(ds.iter().map(|d| d.strip()).collect(), s(b)),
            ExprKind::Lam { once, params, body } => ExprKind::Lam {
                once: *once,
                params: params.iter().map(|p| p.strip()).collect(),
                body: s(body),
            },
            ExprKind::Fix {
                name,
                params,
                ret,
                body,
            } => ExprKind::Fix {
                name: name.clone(),
                params: params.iter().map(|p| p.strip()).collect(),
                ret: ret.clone(),
                body: s(body),
            },
            ExprKind::Ann(e, t) => ExprKind::Ann(s(e), t.clone()),
            k => k.clone(),
        };
        Expr {
            kind,
            span: Span::DUMMY,
        }
    }
}

impl SpanFree for LocalDecl {
    fn strip(&self) -> Self {
        match self {
            LocalDecl::Val { pat, rhs, .. } => LocalDecl::Val {
                pat: pat.strip(),
                rhs: rhs.strip(),
                span: Span::DUMMY,
            },
            LocalDecl::PrVal { pat, rhs, .. } => LocalDecl::PrVal {
                pat: pat.strip(),
                rhs: rhs.strip(),
                span: Span::DUMMY,
            },
            LocalDecl::Fun(f) => LocalDecl::Fun(f.strip()),
        }
    }
}

impl SpanFree for Pat {
    fn strip(&self) -> Self {
        let all = |ps: &[Pat]| ps.iter().map(|p| p.strip()).collect::<Vec<_>>();
        let kind = match &self.kind {
            PatKind::Tuple { proofs, items } => PatKind::Tuple {
                proofs: proofs.as_ref().map(|p| all(p)),
                items: all(items),
            },
            PatKind::Con(n, ps) => PatKind::Con(n.clone(), all(ps)),
            k => k.clone(),
        };
        Pat {
            kind,
            span: Span::DUMMY,
        }
    }
}
