//! Linear normal forms of integer and address terms.

use std::collections::BTreeMap;
use std::fmt;

use super::term::{IntOp, Name, StaticTerm as S};

/// An integer unknown: a static variable, a unification variable, or an
/// opaque nonlinear subterm identified by its printed form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(Name),
    Meta(u32),
    Opaque(String),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Var(n) => f.write_str(n),
            Atom::Meta(m) => write!(f, "?{}", m),
            Atom::Opaque(s) => write!(f, "<{}>", s),
        }
    }
}

/// `constant + Σ coeff·atom`, with no zero coefficients stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinForm {
    pub constant: i128,
    pub terms: BTreeMap<Atom, i128>,
}

impl LinForm {
    pub fn constant(c: i128) -> Self {
        LinForm {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    pub fn atom(a: Atom) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(a, 1);
        LinForm { constant: 0, terms }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &LinForm) -> LinForm {
        let mut out = self.clone();
        out.constant += other.constant;
        for (a, c) in &other.terms {
            let e = out.terms.entry(a.clone()).or_insert(0);
            *e += c;
            if *e == 0 {
                out.terms.remove(a);
            }
        }
        out
    }

    pub fn scale(&self, k: i128) -> LinForm {
        if k == 0 {
            return LinForm::default();
        }
        LinForm {
            constant: self.constant * k,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c * k)).collect(),
        }
    }

    pub fn sub(&self, other: &LinForm) -> LinForm {
        self.add(&other.scale(-1))
    }

    pub fn coeff(&self, a: &Atom) -> i128 {
        self.terms.get(a).copied().unwrap_or(0)
    }

    /// Rebuilds a static term denoting this form.
    pub fn to_term(&self) -> S {
        let mut acc: Option<S> = None;
        for (a, c) in &self.terms {
            let base = match a {
                Atom::Var(n) => S::Var(n.clone()),
                Atom::Meta(m) => S::Meta(*m),
                Atom::Opaque(s) => S::Var(s.clone()),
            };
            let (neg, mag) = (*c < 0, c.unsigned_abs() as i64);
            let t = if mag == 1 {
                base
            } else {
                S::IntOp(IntOp::Mul, Box::new(S::Int(mag)), Box::new(base))
            };
            acc = Some(match acc {
                None if neg => S::Neg(Box::new(t)),
                None => t,
                Some(x) if neg => S::sub(x, t),
                Some(x) => S::add(x, t),
            });
        }
        let k = self.constant as i64;
        match acc {
            None => S::Int(k),
            Some(x) if k > 0 => S::add(x, S::Int(k)),
            Some(x) if k < 0 => S::sub(x, S::Int(-k)),
            Some(x) => x,
        }
    }
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// Normalizes a term of sort int or addr. Addresses are integers with
/// null at 0; products of two non-constants and all divisions become
/// opaque atoms shared between equal subterms.
pub fn normalize(t: &S) -> LinForm {
    match t {
        S::Var(n) => LinForm::atom(Atom::Var(n.clone())),
        S::Meta(m) => LinForm::atom(Atom::Meta(*m)),
        S::Addr(n) => LinForm::constant(*n as i128),
        S::Int(i) => LinForm::constant(*i as i128),
        S::Neg(a) => normalize(a).scale(-1),
        S::IntOp(IntOp::Add, a, b) => normalize(a).add(&normalize(b)),
        S::IntOp(IntOp::Sub, a, b) => normalize(a).sub(&normalize(b)),
        S::IntOp(IntOp::Mul, a, b) => {
            let (na, nb) = (normalize(a), normalize(b));
            if na.is_constant() {
                nb.scale(na.constant)
            } else if nb.is_constant() {
                na.scale(nb.constant)
            } else {
                LinForm::atom(Atom::Opaque(format!("{} * {}", na, nb)))
            }
        }
        S::IntOp(IntOp::Div, a, b) => {
            LinForm::atom(Atom::Opaque(format!("{} / {}", normalize(a), normalize(b))))
        }
        other => LinForm::atom(Atom::Opaque(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> S {
        S::var(n)
    }

    #[test]
    fn offsets_cancel() {
        // (l+1)+(i-1)
        let t = S::add(S::add(v("l"), S::Int(1)), S::sub(v("i"), S::Int(1)));
        let f = normalize(&t);
        assert_eq!(f.constant, 0);
        assert_eq!(f.coeff(&Atom::Var("l".into())), 1);
        assert_eq!(f.coeff(&Atom::Var("i".into())), 1);
        assert_eq!(f.terms.len(), 2);
    }

    #[test]
    fn nonlinear_product_is_one_atom() {
        let t = S::IntOp(IntOp::Mul, Box::new(v("i")), Box::new(v("j")));
        let f = normalize(&t);
        assert_eq!(f.terms.len(), 1);
        assert!(matches!(f.terms.keys().next(), Some(Atom::Opaque(_))));
        assert_eq!(normalize(&t), f);
    }

    #[test]
    fn address_constants_are_offsets_from_null() {
        let t = S::add(S::Addr(3), S::Int(2));
        assert_eq!(normalize(&t), LinForm::constant(5));
    }
}
