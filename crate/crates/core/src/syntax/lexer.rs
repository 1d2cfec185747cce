//! Tokenizer for `.vats` sources.

use std::fmt;

use crate::diag::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    /// `'(`
    QuoteParen,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Bar,
    Colon,
    Semi,
    Eq,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Arrow,
    /// `->0`
    ArrowOnce,
    /// `>>`
    ViewArrow,
    /// `>>0`
    ViewArrowOnce,
    /// `-o`
    Lolli,
    FatArrow,
    /// `==>`
    Implies,
    /// `.<`
    MetricOpen,
    /// `>.`
    MetricClose,
    AndAnd,
    OrOr,
    Tilde,
    At,
    Bang,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{}`", s),
            Tok::Int(i) => return write!(f, "`{}`", i),
            Tok::QuoteParen => "'(",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Bar => "|",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Eq => "=",
            Tok::EqEq => "==",
            Tok::Ne => "<>",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Arrow => "->",
            Tok::ArrowOnce => "->0",
            Tok::ViewArrow => ">>",
            Tok::ViewArrowOnce => ">>0",
            Tok::Lolli => "-o",
            Tok::FatArrow => "=>",
            Tok::Implies => "==>",
            Tok::MetricOpen => ".<",
            Tok::MetricClose => ">.",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Tilde => "~",
            Tok::At => "@",
            Tok::Bang => "!",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "`{}`", s)
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'\''
}

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let b = src.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    let peek = |j: usize| b.get(j).copied().unwrap_or(0);
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && peek(i + 1) == b'/' {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'(' && peek(i + 1) == b'*' {
            let start = i;
            let mut depth = 0usize;
            loop {
                if i >= b.len() {
                    return Err(Diagnostic::error(
                        "syntax",
                        Span::new(start, start + 2),
                        "unterminated comment",
                    ));
                }
                if b[i] == b'(' && peek(i + 1) == b'*' {
                    depth += 1;
                    i += 2;
                } else if b[i] == b'*' && peek(i + 1) == b')' {
                    depth -= 1;
                    i += 2;
                    if depth == 0 {
                        break;
                    }
                } else {
                    i += 1;
                }
            }
            continue;
        }
        let start = i;
        if is_ident_start(c) {
            while i < b.len() && is_ident_char(b[i]) {
                // a quote directly before `(` opens a tuple instead
                if b[i] == b'\'' && peek(i + 1) == b'(' {
                    break;
                }
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                span: Span::new(start, i),
            });
            continue;
        }
        if c.is_ascii_digit() {
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[start..i].parse::<i64>().map_err(|_| {
                Diagnostic::error(
                    "syntax",
                    Span::new(start, i),
                    "integer literal out of range",
                )
            })?;
            out.push(Token {
                tok: Tok::Int(n),
                span: Span::new(start, i),
            });
            continue;
        }
        let two = (c, peek(i + 1));
        let (tok, len) = match two {
            (b'\'', b'(') => (Tok::QuoteParen, 2),
            (b'=', b'=') if peek(i + 2) == b'>' => (Tok::Implies, 3),
            (b'-', b'>') if peek(i + 2) == b'0' && !peek(i + 3).is_ascii_digit() => {
                (Tok::ArrowOnce, 3)
            }
            (b'>', b'>') if peek(i + 2) == b'0' && !peek(i + 3).is_ascii_digit() => {
                (Tok::ViewArrowOnce, 3)
            }
            (b'-', b'o') if !is_ident_char(peek(i + 2)) => (Tok::Lolli, 2),
            (b'-', b'>') => (Tok::Arrow, 2),
            (b'>', b'>') => (Tok::ViewArrow, 2),
            (b'=', b'>') => (Tok::FatArrow, 2),
            (b'=', b'=') => (Tok::EqEq, 2),
            (b'<', b'>') => (Tok::Ne, 2),
            (b'!', b'=') => (Tok::Ne, 2),
            (b'<', b'=') => (Tok::Le, 2),
            (b'>', b'=') => (Tok::Ge, 2),
            (b'.', b'<') => (Tok::MetricOpen, 2),
            (b'>', b'.') => (Tok::MetricClose, 2),
            (b'&', b'&') => (Tok::AndAnd, 2),
            (b'|', b'|') => (Tok::OrOr, 2),
            (b'(', _) => (Tok::LParen, 1),
            (b')', _) => (Tok::RParen, 1),
            (b'{', _) => (Tok::LBrace, 1),
            (b'}', _) => (Tok::RBrace, 1),
            (b'[', _) => (Tok::LBracket, 1),
            (b']', _) => (Tok::RBracket, 1),
            (b',', _) => (Tok::Comma, 1),
            (b'|', _) => (Tok::Bar, 1),
            (b':', _) => (Tok::Colon, 1),
            (b';', _) => (Tok::Semi, 1),
            (b'=', _) => (Tok::Eq, 1),
            (b'<', _) => (Tok::Lt, 1),
            (b'>', _) => (Tok::Gt, 1),
            (b'+', _) => (Tok::Plus, 1),
            (b'-', _) => (Tok::Minus, 1),
            (b'*', _) => (Tok::Star, 1),
            (b'/', _) => (Tok::Slash, 1),
            (b'~', _) => (Tok::Tilde, 1),
            (b'@', _) => (Tok::At, 1),
            (b'!', _) => (Tok::Bang, 1),
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(Diagnostic::error(
                    "syntax",
                    Span::new(i, i + ch.len_utf8()),
                    format!("unexpected character `{}`", ch),
                ));
            }
        };
        i += len;
        out.push(Token {
            tok,
            span: Span::new(start, i),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(b.len(), b.len()),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn primes_and_tuples() {
        assert_eq!(
            toks("pf1' '(x)"),
            vec![
                Tok::Ident("pf1'".into()),
                Tok::QuoteParen,
                Tok::Ident("x".into()),
                Tok::RParen,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn nested_comments_vanish() {
        assert_eq!(
            toks("a (* x (* y *) z *) | // rest\n b"),
            vec![
                Tok::Ident("a".into()),
                Tok::Bar,
                Tok::Ident("b".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn metric_brackets() {
        assert_eq!(
            toks(".<i>."),
            vec![
                Tok::MetricOpen,
                Tok::Ident("i".into()),
                Tok::MetricClose,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn once_arrow_needs_adjacent_zero() {
        assert_eq!(toks("->0")[0], Tok::ArrowOnce);
        assert_eq!(toks("-> 0")[0], Tok::Arrow);
    }
}
