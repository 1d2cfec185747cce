//! Surface syntax: lexer, AST, parser and printer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use ast::{Decl, Expr, ExprKind, FunDecl, LocalDecl, Pat, PatKind, Program, SpanFree};
pub use parser::{parse_expr, parse_program, parse_static};
pub use pretty::{expr_str, pretty_decl, pretty_program};

/// Prints an expression in surface syntax.
pub fn pretty_expr(e: &Expr) -> String {
    pretty::expr_str(e, 0)
}
