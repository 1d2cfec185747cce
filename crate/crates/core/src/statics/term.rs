//! Static terms: the sorted index language shared by propositions, types,
//! views and viewtypes.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

pub type Name = String;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sort {
    Addr,
    Bool,
    Int,
    View,
    Type,
    ViewType,
}

impl Sort {
    pub fn keyword(self) -> &'static str {
        match self {
            Sort::Addr => "addr",
            Sort::Bool => "bool",
            Sort::Int => "int",
            Sort::View => "view",
            Sort::Type => "type",
            Sort::ViewType => "viewtype",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Sort> {
        Some(match s {
            "addr" => Sort::Addr,
            "bool" => Sort::Bool,
            "int" => Sort::Int,
            "view" => Sort::View,
            "type" => Sort::Type,
            "viewtype" => Sort::ViewType,
            _ => return None,
        })
    }

    /// Index sorts are the ones handed to the arithmetic solver.
    pub fn is_index(self) -> bool {
        matches!(self, Sort::Addr | Sort::Bool | Sort::Int)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "<>",
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
        }
    }
}

/// `->` versus the once-only `->0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArrowKind {
    Pure,
    Once,
}

/// A static term. `Tuple` and `MultiAt` are surface forms that
/// [`crate::decls::Env::resolve`] rewrites into the formal connectives.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StaticTerm {
    Var(Name),
    /// Unification variable, internal to the checker.
    Meta(u32),
    /// Address constant `l_n`; `Addr(0)` is null.
    Addr(u64),
    Int(i64),
    Bool(bool),
    IntOp(IntOp, Box<StaticTerm>, Box<StaticTerm>),
    Neg(Box<StaticTerm>),
    Cmp(CmpOp, Box<StaticTerm>, Box<StaticTerm>),
    Not(Box<StaticTerm>),
    And(Box<StaticTerm>, Box<StaticTerm>),
    Or(Box<StaticTerm>, Box<StaticTerm>),
    Implies(Box<StaticTerm>, Box<StaticTerm>),

    BoolTy,
    IntTy,
    BoolOf(Box<StaticTerm>),
    IntOf(Box<StaticTerm>),
    Ptr(Box<StaticTerm>),
    Unit,
    Top,
    Prod(Vec<StaticTerm>),
    Arrow(ArrowKind, Box<StaticTerm>, Box<StaticTerm>),
    /// `V ⊃ VT` (pure) or `V ⊸0 VT` (once).
    ViewArrow(ArrowKind, Box<StaticTerm>, Box<StaticTerm>),

    At(Box<StaticTerm>, Box<StaticTerm>),
    Emp,
    Tensor(Vec<StaticTerm>),
    Lolli(Box<StaticTerm>, Box<StaticTerm>),
    Boxed(Box<StaticTerm>),
    /// `V ∧ VT`.
    VAnd(Box<StaticTerm>, Box<StaticTerm>),

    /// `B ⊃ X`.
    Guard(Box<StaticTerm>, Box<StaticTerm>),
    /// `B ∧ X`.
    Assert(Box<StaticTerm>, Box<StaticTerm>),
    Forall(Name, Sort, Box<StaticTerm>),
    Exists(Name, Sort, Box<StaticTerm>),
    /// Dataview, viewdef or typedef applied to static arguments.
    App(Name, Vec<StaticTerm>),

    /// Surface `'(v1, .., vn | t1, .., tm)`; `views` is `None` without a bar.
    Tuple {
        views: Option<Vec<StaticTerm>>,
        items: Vec<StaticTerm>,
    },
    /// Surface `(T0, .., Tn) @ L`.
    MultiAt(Vec<StaticTerm>, Box<StaticTerm>),
}

use StaticTerm as S;

static FRESH: AtomicU64 = AtomicU64::new(0);

/// A name that cannot clash with source identifiers.
pub fn fresh_name(base: &str) -> Name {
    let base = base.split('$').next().unwrap_or(base);
    let n = FRESH.fetch_add(1, Ordering::Relaxed);
    format!("{}${}", base, n)
}

impl StaticTerm {
    pub fn var(n: impl Into<Name>) -> S {
        S::Var(n.into())
    }
    pub fn add(a: S, b: S) -> S {
        S::IntOp(IntOp::Add, Box::new(a), Box::new(b))
    }
    pub fn sub(a: S, b: S) -> S {
        S::IntOp(IntOp::Sub, Box::new(a), Box::new(b))
    }
    pub fn cmp(op: CmpOp, a: S, b: S) -> S {
        S::Cmp(op, Box::new(a), Box::new(b))
    }
    pub fn eq(a: S, b: S) -> S {
        S::cmp(CmpOp::Eq, a, b)
    }
    pub fn not(a: S) -> S {
        S::Not(Box::new(a))
    }
    pub fn and(a: S, b: S) -> S {
        S::And(Box::new(a), Box::new(b))
    }
    pub fn at(t: S, l: S) -> S {
        S::At(Box::new(t), Box::new(l))
    }
    pub fn vand(v: S, t: S) -> S {
        S::VAnd(Box::new(v), Box::new(t))
    }
    pub fn app(n: impl Into<Name>, args: Vec<S>) -> S {
        S::App(n.into(), args)
    }

    /// Tensor of a component list; one component stands for itself and none is `Emp`.
    pub fn tensor(mut vs: Vec<S>) -> S {
        match vs.len() {
            0 => S::Emp,
            1 => vs.pop().unwrap(),
            _ => S::Tensor(vs),
        }
    }

    pub fn prod(mut ts: Vec<S>) -> S {
        match ts.len() {
            0 => S::Unit,
            1 => ts.pop().unwrap(),
            _ => S::Prod(ts),
        }
    }

    /// `views ∧ items`, omitting an empty view part.
    pub fn viewtype(views: Vec<S>, items: Vec<S>) -> S {
        let t = S::prod(items);
        if views.is_empty() {
            t
        } else {
            S::vand(S::tensor(views), t)
        }
    }

    pub fn conj(props: impl IntoIterator<Item = S>) -> S {
        props.into_iter().reduce(S::and).unwrap_or(S::Bool(true))
    }

    pub fn forall_all(binders: &[(Name, Sort)], guards: Vec<S>, body: S) -> S {
        let mut t = body;
        for g in guards.into_iter().rev() {
            t = S::Guard(Box::new(g), Box::new(t));
        }
        for (n, s) in binders.iter().rev() {
            t = S::Forall(n.clone(), *s, Box::new(t));
        }
        t
    }

    pub fn exists_all(binders: &[(Name, Sort)], guards: Vec<S>, body: S) -> S {
        let mut t = body;
        if !guards.is_empty() {
            t = S::Assert(Box::new(S::conj(guards)), Box::new(t));
        }
        for (n, s) in binders.iter().rev() {
            t = S::Exists(n.clone(), *s, Box::new(t));
        }
        t
    }

    fn children(&self) -> Vec<&S> {
        match self {
            S::Var(_) | S::Meta(_) | S::Addr(_) | S::Int(_) | S::Bool(_) => vec![],
            S::BoolTy | S::IntTy | S::Unit | S::Top | S::Emp => vec![],
            S::Neg(a) | S::Not(a) | S::BoolOf(a) | S::IntOf(a) | S::Ptr(a) | S::Boxed(a) => {
                vec![a]
            }
            S::IntOp(_, a, b)
            | S::Cmp(_, a, b)
            | S::And(a, b)
            | S::Or(a, b)
            | S::Implies(a, b)
            | S::Arrow(_, a, b)
            | S::ViewArrow(_, a, b)
            | S::At(a, b)
            | S::Lolli(a, b)
            | S::VAnd(a, b)
            | S::Guard(a, b)
            | S::Assert(a, b) => vec![a, b],
            S::Prod(xs) | S::Tensor(xs) | S::App(_, xs) => xs.iter().collect(),
            S::Forall(_, _, b) | S::Exists(_, _, b) => vec![b],
            S::Tuple { views, items } => views.iter().flatten().chain(items.iter()).collect(),
            S::MultiAt(ts, l) => ts.iter().chain(std::iter::once(&**l)).collect(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            S::Var(n) => {
                if !bound.contains(n) {
                    out.insert(n.clone());
                }
            }
            S::Forall(n, _, b) | S::Exists(n, _, b) => {
                bound.push(n.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    pub fn has_free(&self, name: &str) -> bool {
        self.free_vars().contains(name)
    }

    pub fn metas(&self, out: &mut BTreeSet<u32>) {
        if let S::Meta(m) = self {
            out.insert(*m);
        }
        for c in self.children() {
            c.metas(out);
        }
    }

    pub fn has_metas(&self) -> bool {
        let mut s = BTreeSet::new();
        self.metas(&mut s);
        !s.is_empty()
    }

    /// Applies `f` bottom-up to every node.
    pub fn map(&self, f: &mut dyn FnMut(S) -> S) -> S {
        let m = |x: &S, f: &mut dyn FnMut(S) -> S| Box::new(x.map(f));
        let t = match self {
            S::Var(_) | S::Meta(_) | S::Addr(_) | S::Int(_) | S::Bool(_) => self.clone(),
            S::BoolTy | S::IntTy | S::Unit | S::Top | S::Emp => self.clone(),
            S::Neg(a) => S::Neg(m(a, f)),
            S::Not(a) => S::Not(m(a, f)),
            S::BoolOf(a) => S::BoolOf(m(a, f)),
            S::IntOf(a) => S::IntOf(m(a, f)),
            S::Ptr(a) => S::Ptr(m(a, f)),
            S::Boxed(a) => S::Boxed(m(a, f)),
            S::IntOp(o, a, b) => S::IntOp(*o, m(a, f), m(b, f)),
            S::Cmp(o, a, b) => S::Cmp(*o, m(a, f), m(b, f)),
            S::And(a, b) => S::And(m(a, f), m(b, f)),
            S::Or(a, b) => S::Or(m(a, f), m(b, f)),
            S::Implies(a, b) => S::Implies(m(a, f), m(b, f)),
            S::Arrow(k, a, b) => S::Arrow(*k, m(a, f), m(b, f)),
            S::ViewArrow(k, a, b) => S::ViewArrow(*k, m(a, f), m(b, f)),
            S::At(a, b) => S::At(m(a, f), m(b, f)),
            S::Lolli(a, b) => S::Lolli(m(a, f), m(b, f)),
            S::VAnd(a, b) => S::VAnd(m(a, f), m(b, f)),
            S::Guard(a, b) => S::Guard(m(a, f), m(b, f)),
            S::Assert(a, b) => S::Assert(m(a, f), m(b, f)),
            S::Prod(xs) => S::Prod(xs.iter().map(|x| x.map(f)).collect()),
            S::Tensor(xs) => S::Tensor(xs.iter().map(|x| x.map(f)).collect()),
            S::App(n, xs) => S::App(n.clone(), xs.iter().map(|x| x.map(f)).collect()),
            S::Forall(n, s, b) => S::Forall(n.clone(), *s, m(b, f)),
            S::Exists(n, s, b) => S::Exists(n.clone(), *s, m(b, f)),
            S::Tuple { views, items } => S::Tuple {
                views: views
                    .as_ref()
                    .map(|vs| vs.iter().map(|x| x.map(f)).collect()),
                items: items.iter().map(|x| x.map(f)).collect(),
            },
            S::MultiAt(ts, l) => S::MultiAt(ts.iter().map(|x| x.map(f)).collect(), m(l, f)),
        };
        f(t)
    }

    /// Capture-avoiding simultaneous substitution of static variables.
    pub fn subst(&self, sub: &[(Name, S)]) -> S {
        if sub.is_empty() {
            return self.clone();
        }
        match self {
            S::Var(n) => sub
                .iter()
                .rev()
                .find(|(k, _)| k == n)
                .map(|(_, v)| v.clone())
                .unwrap_or_else(|| self.clone()),
            S::Forall(n, s, b) | S::Exists(n, s, b) => {
                let inner: Vec<(Name, S)> = sub.iter().filter(|(k, _)| k != n).cloned().collect();
                let captures = inner.iter().any(|(_, v)| v.has_free(n));
                let (n2, body) = if captures {
                    let fresh = fresh_name(n);
                    (fresh.clone(), b.subst(&[(n.clone(), S::Var(fresh))]))
                } else {
                    (n.clone(), (**b).clone())
                };
                let body = Box::new(body.subst(&inner));
                match self {
                    S::Forall(..) => S::Forall(n2, *s, body),
                    _ => S::Exists(n2, *s, body),
                }
            }
            _ => self.shallow_rebuild(|c| c.subst(sub)),
        }
    }

    fn shallow_rebuild(&self, mut f: impl FnMut(&S) -> S) -> S {
        let mut g = |x: &S| Box::new(f(x));
        match self {
            S::Var(_) | S::Meta(_) | S::Addr(_) | S::Int(_) | S::Bool(_) => self.clone(),
            S::BoolTy | S::IntTy | S::Unit | S::Top | S::Emp => self.clone(),
            S::Neg(a) => S::Neg(g(a)),
            S::Not(a) => S::Not(g(a)),
            S::BoolOf(a) => S::BoolOf(g(a)),
            S::IntOf(a) => S::IntOf(g(a)),
            S::Ptr(a) => S::Ptr(g(a)),
            S::Boxed(a) => S::Boxed(g(a)),
            S::IntOp(o, a, b) => S::IntOp(*o, g(a), g(b)),
            S::Cmp(o, a, b) => S::Cmp(*o, g(a), g(b)),
            S::And(a, b) => S::And(g(a), g(b)),
            S::Or(a, b) => S::Or(g(a), g(b)),
            S::Implies(a, b) => S::Implies(g(a), g(b)),
            S::Arrow(k, a, b) => S::Arrow(*k, g(a), g(b)),
            S::ViewArrow(k, a, b) => S::ViewArrow(*k, g(a), g(b)),
            S::At(a, b) => S::At(g(a), g(b)),
            S::Lolli(a, b) => S::Lolli(g(a), g(b)),
            S::VAnd(a, b) => S::VAnd(g(a), g(b)),
            S::Guard(a, b) => S::Guard(g(a), g(b)),
            S::Assert(a, b) => S::Assert(g(a), g(b)),
            S::Prod(xs) => S::Prod(xs.iter().map(|x| *g(x)).collect()),
            S::Tensor(xs) => S::Tensor(xs.iter().map(|x| *g(x)).collect()),
            S::App(n, xs) => S::App(n.clone(), xs.iter().map(|x| *g(x)).collect()),
            S::Forall(n, s, b) => S::Forall(n.clone(), *s, g(b)),
            S::Exists(n, s, b) => S::Exists(n.clone(), *s, g(b)),
            S::Tuple { views, items } => S::Tuple {
                views: views.as_ref().map(|vs| vs.iter().map(|x| *g(x)).collect()),
                items: items.iter().map(|x| *g(x)).collect(),
            },
            S::MultiAt(ts, l) => S::MultiAt(ts.iter().map(|x| *g(x)).collect(), g(l)),
        }
    }

    /// Replaces metas by `lookup` results, recursively.
    pub fn zonk(&self, lookup: &dyn Fn(u32) -> Option<S>) -> S {
        self.map(&mut |t| match t {
            S::Meta(m) => match lookup(m) {
                Some(v) => v.zonk(lookup),
                None => S::Meta(m),
            },
            other => other,
        })
    }

    /// Alpha-equivalence (bound names may differ).
    pub fn alpha_eq(&self, other: &S) -> bool {
        fn go(a: &S, b: &S, env: &mut Vec<(Name, Name)>) -> bool {
            match (a, b) {
                (S::Var(x), S::Var(y)) => {
                    for (l, r) in env.iter().rev() {
                        if l == x || r == y {
                            return l == x && r == y;
                        }
                    }
                    x == y
                }
                (S::Forall(x, s1, b1), S::Forall(y, s2, b2))
                | (S::Exists(x, s1, b1), S::Exists(y, s2, b2)) => {
                    if s1 != s2 {
                        return false;
                    }
                    env.push((x.clone(), y.clone()));
                    let r = go(b1, b2, env);
                    env.pop();
                    r
                }
                _ => {
                    if std::mem::discriminant(a) != std::mem::discriminant(b) {
                        return false;
                    }
                    if a.shallow_key() != b.shallow_key() {
                        return false;
                    }
                    let (ca, cb) = (a.children(), b.children());
                    ca.len() == cb.len() && ca.iter().zip(cb.iter()).all(|(x, y)| go(x, y, env))
                }
            }
        }
        go(self, other, &mut Vec::new())
    }

    /// Node-local data other than children, for structural comparisons.
    fn shallow_key(&self) -> String {
        match self {
            S::Var(n) => n.clone(),
            S::Meta(m) => m.to_string(),
            S::Addr(n) => n.to_string(),
            S::Int(i) => i.to_string(),
            S::Bool(b) => b.to_string(),
            S::IntOp(o, ..) => format!("{:?}", o),
            S::Cmp(o, ..) => format!("{:?}", o),
            S::Arrow(k, ..) | S::ViewArrow(k, ..) => format!("{:?}", k),
            S::App(n, xs) => format!("{}/{}", n, xs.len()),
            S::Prod(xs) | S::Tensor(xs) => xs.len().to_string(),
            S::Tuple { views, items } => {
                format!("{:?}/{}", views.as_ref().map(|v| v.len()), items.len())
            }
            S::MultiAt(ts, _) => ts.len().to_string(),
            _ => String::new(),
        }
    }

    /// True when the term is a literal constant of an index sort.
    pub fn is_ground_index(&self) -> bool {
        self.free_vars().is_empty() && !self.has_metas()
    }

    /// Printing precedence: higher binds tighter.
    fn prec(&self) -> u8 {
        match self {
            S::Forall(..) | S::Exists(..) | S::Guard(..) | S::Assert(..) => 0,
            S::Arrow(..) | S::ViewArrow(..) | S::Lolli(..) => 0,
            S::Implies(..) => 1,
            S::Or(..) => 2,
            S::And(..) => 3,
            S::Cmp(..) => 4,
            S::At(..) | S::MultiAt(..) => 5,
            S::IntOp(IntOp::Add | IntOp::Sub, ..) => 6,
            S::IntOp(..) => 7,
            S::Neg(_) | S::Not(_) | S::Boxed(_) => 8,
            S::Int(i) if *i < 0 => 8,
            _ => 9,
        }
    }
}

/// Writes `t`, parenthesised when it binds looser than `min`.
fn write_at(f: &mut fmt::Formatter<'_>, t: &S, min: u8) -> fmt::Result {
    if t.prec() < min {
        write!(f, "({})", t)
    } else {
        write!(f, "{}", t)
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, xs: &[S]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{}", x)?;
    }
    Ok(())
}

fn write_binders(f: &mut fmt::Formatter<'_>, t: &S, open: &str, close: &str) -> fmt::Result {
    // Collapses a run of same-kind quantifiers and a trailing guard/assertion
    // into one bracket, which re-parses to the same nesting.
    let exists = matches!(t, S::Exists(..));
    let mut binders = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            S::Forall(n, s, b) if !exists => {
                binders.push((n, s));
                cur = b;
            }
            S::Exists(n, s, b) if exists => {
                binders.push((n, s));
                cur = b;
            }
            _ => break,
        }
    }
    let mut guards = Vec::new();
    loop {
        match cur {
            S::Guard(g, b) if !exists => {
                guards.push(&**g);
                cur = b;
            }
            S::Assert(g, b) if exists && guards.is_empty() => {
                guards.push(&**g);
                cur = b;
            }
            _ => break,
        }
    }
    f.write_str(open)?;
    for (i, (n, s)) in binders.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{}:{}", n, s)?;
    }
    if !guards.is_empty() {
        if !binders.is_empty() {
            f.write_str(" | ")?;
        }
        for (i, g) in guards.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", g)?;
        }
    }
    f.write_str(close)?;
    f.write_str(" ")?;
    write!(f, "{}", cur)
}

impl fmt::Display for StaticTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            S::Var(n) => f.write_str(n),
            S::Meta(m) => write!(f, "?{}", m),
            S::Addr(0) => f.write_str("null"),
            S::Addr(n) => write!(f, "l_{}", n),
            S::Int(i) => write!(f, "{}", i),
            S::Bool(b) => write!(f, "{}", b),
            S::IntOp(op, a, b) => {
                let (sym, p) = match op {
                    IntOp::Add => ("+", 6),
                    IntOp::Sub => ("-", 6),
                    IntOp::Mul => ("*", 7),
                    IntOp::Div => ("/", 7),
                };
                write_at(f, a, p)?;
                write!(f, " {} ", sym)?;
                write_at(f, b, p + 1)
            }
            S::Neg(a) => {
                f.write_str("-")?;
                write_at(f, a, 9)
            }
            S::Cmp(op, a, b) => {
                write_at(f, a, 5)?;
                write!(f, " {} ", op.symbol())?;
                write_at(f, b, 5)
            }
            S::Not(a) => {
                f.write_str("~")?;
                write_at(f, a, 9)
            }
            S::And(a, b) => {
                write_at(f, a, 3)?;
                f.write_str(" && ")?;
                write_at(f, b, 4)
            }
            S::Or(a, b) => {
                write_at(f, a, 2)?;
                f.write_str(" || ")?;
                write_at(f, b, 3)
            }
            S::Implies(a, b) => {
                write_at(f, a, 2)?;
                f.write_str(" ==> ")?;
                write_at(f, b, 1)
            }
            S::BoolTy => f.write_str("bool"),
            S::IntTy => f.write_str("int"),
            S::BoolOf(b) => write!(f, "bool({})", b),
            S::IntOf(i) => write!(f, "int({})", i),
            S::Ptr(l) => write!(f, "ptr({})", l),
            S::Unit => f.write_str("unit"),
            S::Top => f.write_str("top"),
            S::Prod(xs) => {
                f.write_str("'(")?;
                write_list(f, xs)?;
                f.write_str(")")
            }
            S::Arrow(k, a, b) => {
                write_at(f, a, 1)?;
                f.write_str(if *k == ArrowKind::Pure {
                    " -> "
                } else {
                    " ->0 "
                })?;
                write_at(f, b, 0)
            }
            S::ViewArrow(k, a, b) => {
                write_at(f, a, 1)?;
                f.write_str(if *k == ArrowKind::Pure {
                    " >> "
                } else {
                    " >>0 "
                })?;
                write_at(f, b, 0)
            }
            S::At(t, l) => {
                write_at(f, t, 6)?;
                f.write_str(" @ ")?;
                write_at(f, l, 6)
            }
            S::Emp => f.write_str("'()"),
            S::Tensor(vs) => {
                f.write_str("'(")?;
                write_list(f, vs)?;
                f.write_str(" |)")
            }
            S::Lolli(a, b) => {
                write_at(f, a, 1)?;
                f.write_str(" -o ")?;
                write_at(f, b, 0)
            }
            S::Boxed(v) => {
                f.write_str("!")?;
                write_at(f, v, 9)
            }
            S::VAnd(v, t) => {
                f.write_str("'(")?;
                match &**v {
                    S::Tensor(vs) => write_list(f, vs)?,
                    v => write!(f, "{}", v)?,
                }
                f.write_str(" | ")?;
                match &**t {
                    S::Prod(ts) => write_list(f, ts)?,
                    t => write!(f, "{}", t)?,
                }
                f.write_str(")")
            }
            S::Guard(..) | S::Forall(..) => write_binders(f, self, "{", "}"),
            S::Assert(..) | S::Exists(..) => write_binders(f, self, "[", "]"),
            S::App(n, xs) => {
                write!(f, "{}(", n)?;
                write_list(f, xs)?;
                f.write_str(")")
            }
            S::Tuple { views, items } => {
                f.write_str("'(")?;
                if let Some(vs) = views {
                    write_list(f, vs)?;
                    f.write_str(if items.is_empty() { " |" } else { " | " })?;
                }
                write_list(f, items)?;
                f.write_str(")")
            }
            S::MultiAt(ts, l) => {
                f.write_str("(")?;
                write_list(f, ts)?;
                f.write_str(") @ ")?;
                write_at(f, l, 6)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_avoids_capture() {
        // {n:int} a + n  with a := n  must not capture
        let t = S::Forall(
            "n".into(),
            Sort::Int,
            Box::new(S::add(S::var("a"), S::var("n"))),
        );
        let r = t.subst(&[("a".into(), S::var("n"))]);
        match r {
            S::Forall(bound, _, body) => {
                assert_ne!(bound, "n");
                assert_eq!(*body, S::add(S::var("n"), S::var(bound)));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn alpha_equivalence_ignores_bound_names() {
        let a = S::Exists(
            "l".into(),
            Sort::Addr,
            Box::new(S::Ptr(Box::new(S::var("l")))),
        );
        let b = S::Exists(
            "k".into(),
            Sort::Addr,
            Box::new(S::Ptr(Box::new(S::var("k")))),
        );
        assert!(a.alpha_eq(&b));
        let c = S::Exists(
            "k".into(),
            Sort::Addr,
            Box::new(S::Ptr(Box::new(S::var("l")))),
        );
        assert!(!a.alpha_eq(&c));
    }

    #[test]
    fn display_uses_surface_notation() {
        let v = S::at(S::var("a"), S::add(S::var("l"), S::Int(1)));
        assert_eq!(v.to_string(), "a @ l + 1");
        assert_eq!(S::Addr(0).to_string(), "null");
        let g = S::forall_all(
            &[("n".into(), Sort::Int)],
            vec![S::cmp(CmpOp::Ge, S::var("n"), S::Int(0))],
            S::IntOf(Box::new(S::var("n"))),
        );
        assert_eq!(g.to_string(), "{n:int | n >= 0} int(n)");
    }
}
