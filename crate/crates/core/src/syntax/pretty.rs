//! Pretty-printer producing surface syntax that re-parses to the same tree.

use std::fmt::Write;

use super::ast::*;
use crate::statics::StaticTerm;

const WIDTH: usize = 72;

pub fn pretty_program(p: &Program) -> String {
    let mut out = String::new();
    for (i, d) in p.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&pretty_decl(d));
        out.push('\n');
    }
    out
}

pub fn pretty_decl(d: &Decl) -> String {
    match d {
        Decl::Dataview(dv) => {
            let sorts: Vec<String> = dv.sorts.iter().map(|s| s.to_string()).collect();
            let mut out = format!("dataview {} ({}) =", dv.name, sorts.join(", "));
            for c in &dv.clauses {
                out.push_str("\n  | ");
                if !c.quant.binders.is_empty() || !c.quant.guards.is_empty() {
                    out.push_str(&quant_str(&c.quant));
                    out.push(' ');
                }
                let _ = write!(out, "{} ({})", c.name, statics_str(&c.indices));
                if let Some(args) = &c.args {
                    let _ = write!(out, " of ({})", statics_str(args));
                }
            }
            out
        }
        Decl::ViewDef(a) => abbrev_str("viewdef", a),
        Decl::TypeDef(a) => abbrev_str("typedef", a),
        Decl::Fun(f) => fun_str(f, 0),
        Decl::Main(e) => format!("val main =\n  {}", expr_str(e, 2)),
    }
}

fn abbrev_str(kw: &str, a: &AbbrevDecl) -> String {
    let params: Vec<String> = a
        .params
        .iter()
        .map(|(n, s)| format!("{}:{}", n, s))
        .collect();
    if params.is_empty() {
        format!("{} {} = {}", kw, a.name, a.body)
    } else {
        format!("{} {} ({}) = {}", kw, a.name, params.join(", "), a.body)
    }
}

fn statics_str(ts: &[StaticTerm]) -> String {
    ts.iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn quant_str(q: &QuantGroup) -> String {
    let binders: Vec<String> = q
        .binders
        .iter()
        .map(|(n, s)| format!("{}:{}", n, s))
        .collect();
    let guards = statics_str(&q.guards);
    match (binders.is_empty(), q.guards.is_empty()) {
        (false, true) => format!("{{{}}}", binders.join(", ")),
        (true, _) => format!("{{{}}}", guards),
        (false, false) => format!("{{{} | {}}}", binders.join(", "), guards),
    }
}

fn param_str(p: &Param) -> String {
    match &p.ty {
        Some(t) => format!("{}: {}", p.name, t),
        None => p.name.clone(),
    }
}

fn params_str(groups: &[Vec<Param>]) -> String {
    groups
        .iter()
        .map(|g| g.iter().map(param_str).collect::<Vec<_>>().join(", "))
        .collect::<Vec<_>>()
        .join(" | ")
}

fn fun_str(f: &FunDecl, indent: usize) -> String {
    let mut out = String::new();
    if f.is_extern {
        out.push_str("extern ");
    }
    out.push_str(match f.kind {
        FunKind::Fun => "fun ",
        FunKind::PrFun => "prfun ",
    });
    out.push_str(&f.name);
    for q in &f.quants {
        out.push(' ');
        out.push_str(&quant_str(q));
    }
    if let Some(m) = &f.metric {
        let _ = write!(out, " .<{}>.", statics_str(m));
    }
    let _ = write!(out, " ({})", params_str(&f.params));
    if let Some(r) = &f.ret {
        let _ = write!(out, ": {}", r);
    }
    if let Some(b) = &f.body {
        let body = expr_str(b, indent + 2);
        if out.len() + body.len() + 3 <= WIDTH && !body.contains('\n') {
            let _ = write!(out, " = {}", body);
        } else {
            let _ = write!(out, " =\n{}{}", pad(indent + 2), body);
        }
    }
    out
}

fn pad(n: usize) -> String {
    " ".repeat(n)
}

/// Precedence of an expression when printed; operands binding looser than
/// their context get parentheses.
fn expr_prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::If(..) | ExprKind::Sif(..) | ExprKind::Lam { .. } | ExprKind::Fix { .. } => 0,
        ExprKind::BinOp(op, ..) => op.prec(),
        ExprKind::Call { infix: true, .. } => 3,
        ExprKind::Call { .. } => 8,
        ExprKind::Int(i) if *i < 0 => 8,
        _ => 9,
    }
}

fn expr_at(e: &Expr, min: u8, indent: usize) -> String {
    let s = expr_str(e, indent);
    if expr_prec(e) < min {
        format!("({})", s)
    } else {
        s
    }
}

fn exprs_str(es: &[Expr], indent: usize) -> String {
    es.iter()
        .map(|e| expr_str(e, indent))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Arguments that may follow a function name without parentheses.
fn is_juxtaposable(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Var(_) | ExprKind::Bool(_) | ExprKind::Null | ExprKind::Tuple { .. } => true,
        ExprKind::Int(i) => *i >= 0,
        _ => false,
    }
}

pub fn expr_str(e: &Expr, indent: usize) -> String {
    match &e.kind {
        ExprKind::Var(n) => n.clone(),
        ExprKind::Int(i) => i.to_string(),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Null => "null".into(),
        ExprKind::Tuple { proofs, items } => {
            let items_s = exprs_str(items, indent);
            match proofs {
                None => format!("'({})", items_s),
                Some(ps) if ps.is_empty() => format!("'(| {})", items_s),
                Some(ps) => {
                    let ps_s = exprs_str(ps, indent);
                    if items.is_empty() {
                        format!("'({} |)", ps_s)
                    } else {
                        format!("'({} | {})", ps_s, items_s)
                    }
                }
            }
        }
        ExprKind::Call {
            func,
            statics,
            groups,
            infix,
        } => {
            if *infix && groups.len() == 1 && groups[0].len() == 2 {
                return format!(
                    "{} {} {}",
                    expr_at(&groups[0][0], 4, indent),
                    func,
                    expr_at(&groups[0][1], 4, indent)
                );
            }
            let mut out = func.clone();
            if let Some(st) = statics {
                let _ = write!(out, " {{{}}}", statics_str(st));
            }
            if groups.len() == 1 && groups[0].len() == 1 && is_juxtaposable(&groups[0][0]) {
                let _ = write!(out, " {}", expr_str(&groups[0][0], indent));
            } else if !groups.is_empty() {
                let gs: Vec<String> = groups.iter().map(|g| exprs_str(g, indent)).collect();
                let _ = write!(out, " ({})", gs.join(" | "));
            }
            out
        }
        ExprKind::BinOp(op, a, b) => {
            let p = op.prec();
            format!(
                "{} {} {}",
                expr_at(a, p, indent),
                op.symbol(),
                expr_at(b, p + 1, indent)
            )
        }
        ExprKind::If(c, a, b) => format!(
            "if {} then {} else {}",
            expr_str(c, indent),
            expr_str(a, indent),
            expr_str(b, indent)
        ),
        ExprKind::Sif(c, a, b) => format!(
            "sif {} then {} else {}",
            c,
            expr_str(a, indent),
            expr_str(b, indent)
        ),
        ExprKind::Let(decls, body) => {
            let ds: Vec<String> = decls.iter().map(|d| local_str(d, indent + 2)).collect();
            let b = expr_str(body, indent + 2);
            let one = format!("let {} in {} end", ds.join(" "), b);
            if one.len() + indent <= WIDTH && !one.contains('\n') {
                return one;
            }
            let mut out = String::from("let");
            for d in &ds {
                let _ = write!(out, "\n{}{}", pad(indent + 2), d);
            }
            let _ = write!(
                out,
                "\n{}in\n{}{}\n{}end",
                pad(indent),
                pad(indent + 2),
                b,
                pad(indent)
            );
            out
        }
        ExprKind::Lam { once, params, body } => format!(
            "{} ({}) => {}",
            if *once { "llam" } else { "lam" },
            params.iter().map(param_str).collect::<Vec<_>>().join(", "),
            expr_str(body, indent)
        ),
        ExprKind::Fix {
            name,
            params,
            ret,
            body,
        } => {
            let ps = params.iter().map(param_str).collect::<Vec<_>>().join(", ");
            match ret {
                Some(r) => format!("fix {} ({}): {} => {}", name, ps, r, expr_str(body, indent)),
                None => format!("fix {} ({}) => {}", name, ps, expr_str(body, indent)),
            }
        }
        ExprKind::Ann(e, t) => format!("({} : {})", expr_str(e, indent), t),
    }
}

fn local_str(d: &LocalDecl, indent: usize) -> String {
    match d {
        LocalDecl::Val { pat, rhs, .. } => {
            format!("val {} = {}", pat_str(pat), expr_str(rhs, indent))
        }
        LocalDecl::PrVal { pat, rhs, .. } => {
            format!("prval {} = {}", pat_str(pat), expr_str(rhs, indent))
        }
        LocalDecl::Fun(f) => fun_str(f, indent),
    }
}

pub fn pat_str(p: &Pat) -> String {
    let list = |ps: &[Pat]| ps.iter().map(pat_str).collect::<Vec<_>>().join(", ");
    match &p.kind {
        PatKind::Wild => "_".into(),
        PatKind::Var(n) => n.clone(),
        PatKind::Con(n, args) => format!("{} ({})", n, list(args)),
        PatKind::Tuple { proofs, items } => match proofs {
            None => format!("'({})", list(items)),
            Some(ps) if ps.is_empty() => format!("'(| {})", list(items)),
            Some(ps) if items.is_empty() => format!("'({} |)", list(ps)),
            Some(ps) => format!("'({} | {})", list(ps), list(items)),
        },
    }
}
