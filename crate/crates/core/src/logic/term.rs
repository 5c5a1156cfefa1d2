use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use super::decimal::Decimal;

/// A variable with an optional type annotation (`type=":offence"` in RuleML).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    pub name: String,
    pub ty: Option<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>) -> Self {
        Variable {
            name: name.into(),
            ty: None,
        }
    }

    pub fn typed(name: impl Into<String>, ty: impl Into<String>) -> Self {
        Variable {
            name: name.into(),
            ty: Some(ty.into()),
        }
    }
}

/// Argument of an atom or operand of a guard.
///
/// Variant order is the canonical term order used for grounding: numbers
/// (by value) before constant symbols (lexicographic).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Num(Decimal),
    Const(String),
    Var(Variable),
}

impl Term {
    pub fn constant(text: impl Into<String>) -> Self {
        Term::Const(text.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(Variable::new(name))
    }

    pub fn num(value: i64) -> Self {
        Term::Num(Decimal::from_integer(value))
    }

    /// Reads an individual: decimal lexical forms become numbers, anything
    /// else a constant symbol.
    pub fn individual(text: &str) -> Self {
        match text.parse::<Decimal>() {
            Ok(n) if Decimal::is_lexical(text) => Term::Num(n),
            _ => Term::Const(text.to_string()),
        }
    }

    pub fn is_ground(&self) -> bool {
        !matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }
}

fn is_plain_symbol(text: &str) -> bool {
    let mut chars = text.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_plain_variable(text: &str) -> bool {
    let mut chars = text.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Num(n) => write!(f, "{n}"),
            Term::Const(c) if is_plain_symbol(c) => f.write_str(c),
            Term::Const(c) => {
                f.write_str("\"")?;
                for ch in c.chars() {
                    if ch == '"' || ch == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{ch}")?;
                }
                f.write_str("\"")
            }
            Term::Var(v) if is_plain_variable(&v.name) => f.write_str(&v.name),
            Term::Var(v) => write!(f, "?{}", v.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.args.iter().filter_map(Term::as_var)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, arg) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{arg}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn positive(atom: Atom) -> Self {
        Literal { atom, negated: false }
    }

    pub fn negative(atom: Atom) -> Self {
        Literal { atom, negated: true }
    }

    pub fn complement(&self) -> Self {
        Literal {
            atom: self.atom.clone(),
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("~")?;
        }
        write!(f, "{}", self.atom)
    }
}

impl Serialize for Literal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Comparator {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Comparator {
    pub const ALL: [Comparator; 6] = [
        Comparator::Le,
        Comparator::Ge,
        Comparator::Ne,
        Comparator::Lt,
        Comparator::Gt,
        Comparator::Eq,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
        }
    }

    pub fn from_symbol(symbol: &str) -> Option<Self> {
        Comparator::ALL.into_iter().find(|c| c.symbol() == symbol)
    }

    fn is_numeric(self) -> bool {
        !matches!(self, Comparator::Eq | Comparator::Ne)
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Arithmetic or equality test in a rule body, discharged at grounding time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Guard {
    pub comparator: Comparator,
    pub lhs: Term,
    pub rhs: Term,
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.comparator, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GuardError {
    #[error("guard `{0}` compares a constant symbol with a numeric comparator")]
    TypeMismatch(String),
    #[error("guard `{0}` is not ground")]
    Unground(String),
}

/// Decides a ground guard.
///
/// Ordering comparators require numbers on both sides; `=` and `!=` also
/// accept constant symbols and compare them as strings. A number never equals
/// a constant symbol.
pub fn evaluate_guard(guard: &Guard) -> Result<bool, GuardError> {
    use Comparator::*;
    match (&guard.lhs, &guard.rhs) {
        (Term::Num(a), Term::Num(b)) => Ok(match guard.comparator {
            Lt => a < b,
            Le => a <= b,
            Gt => a > b,
            Ge => a >= b,
            Eq => a == b,
            Ne => a != b,
        }),
        (Term::Var(_), _) | (_, Term::Var(_)) => Err(GuardError::Unground(guard.to_string())),
        _ if guard.comparator.is_numeric() => Err(GuardError::TypeMismatch(guard.to_string())),
        (a, b) => Ok((a == b) == (guard.comparator == Eq)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn guard(c: Comparator, lhs: Term, rhs: Term) -> Guard {
        Guard {
            comparator: c,
            lhs,
            rhs,
        }
    }

    #[test]
    fn guard_examples() {
        assert!(evaluate_guard(&guard(Comparator::Le, Term::num(8), Term::num(10))).unwrap());
        assert!(!evaluate_guard(&guard(Comparator::Gt, Term::num(10), Term::num(10))).unwrap());
        assert!(evaluate_guard(&guard(Comparator::Le, Term::num(10), Term::num(10))).unwrap());
    }

    #[test]
    fn guard_symbols() {
        let g = guard(Comparator::Eq, Term::constant("basic"), Term::constant("basic"));
        assert!(evaluate_guard(&g).unwrap());
        let g = guard(Comparator::Ne, Term::constant("basic"), Term::num(1));
        assert!(evaluate_guard(&g).unwrap());
        let g = guard(Comparator::Lt, Term::constant("basic"), Term::num(1));
        assert!(matches!(evaluate_guard(&g), Err(GuardError::TypeMismatch(_))));
        let g = guard(Comparator::Lt, Term::var("X"), Term::num(1));
        assert!(matches!(evaluate_guard(&g), Err(GuardError::Unground(_))));
    }

    #[test]
    fn display_quotes_ambiguous_constants() {
        let atom = Atom::new(
            "p",
            vec![
                Term::constant("o1"),
                Term::constant("John Doe"),
                Term::constant("2000-01-01"),
                Term::var("X"),
                Term::Var(Variable::new("x")),
                Term::num(8),
            ],
        );
        assert_eq!(atom.to_string(), r#"p(o1, "John Doe", "2000-01-01", X, ?x, 8)"#);
        assert_eq!(Literal::negative(Atom::new("q", vec![])).to_string(), "~q");
    }

    #[test]
    fn complement_is_involutive() {
        let l = Literal::positive(Atom::new("is_minor", vec![Term::constant("d1")]));
        assert_eq!(l.complement().complement(), l);
        assert_ne!(l.complement(), l);
    }
}
