//! Line-oriented text notation for theories.
//!
//! ```text
//! r1: max_imprisonment(Offence, X), X <= 10 => jurisdiction_level(Offence, basic)
//! s1: p -> q
//! d1: ~q ~> r
//! r1 < r3
//! conflict jurisdiction_level/2 @2
//! fact max_imprisonment(o1, 8)
//! ```
//!
//! `=>` is defeasible, `->` strict, `~>` a defeater, `~` negates a literal.
//! Variables start with an upper-case letter or `_` (or are written `?name`)
//! and may carry a type as `Name:type`. Lines starting with `#` or `%` are
//! comments.

use std::fmt::Write;

use thiserror::Error;

use super::decimal::Decimal;
use super::ground::GroundTheory;
use super::term::{Atom, Comparator, Guard, Literal, Term, Variable};
use super::theory::{BodyItem, ConflictDeclaration, Rule, Strength, Superiority, Theory};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct NotationError {
    pub line: usize,
    pub message: String,
}

pub fn parse_theory(text: &str) -> Result<Theory, NotationError> {
    let mut theory = Theory::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let err = |message: String| NotationError { line: n + 1, message };
        if let Some(rest) = line.strip_prefix("fact ") {
            theory.facts.push(parse_atom(rest).map_err(err)?);
        } else if let Some(rest) = line.strip_prefix("conflict ") {
            theory.conflicts.push(parse_conflict(rest).map_err(err)?);
        } else if find_arrow(line).is_some() {
            theory.rules.push(parse_rule(line).map_err(err)?);
        } else if let Some((inferior, superior)) = line.split_once('<') {
            let (inferior, superior) = (inferior.trim(), superior.trim());
            if !is_rule_id(inferior) || !is_rule_id(superior) {
                return Err(err(format!("malformed superiority `{line}`")));
            }
            theory.superiorities.push(Superiority {
                superior: superior.to_string(),
                inferior: inferior.to_string(),
            });
        } else {
            return Err(err(format!("unrecognised line `{line}`")));
        }
    }
    Ok(theory)
}

/// Renders a theory in the notation, rules sorted by id. Variable types are
/// not written.
pub fn serialize_theory(theory: &Theory) -> String {
    let mut out = String::new();
    let mut rules: Vec<&Rule> = theory.rules.iter().collect();
    rules.sort_by(|a, b| a.id.cmp(&b.id));
    for rule in rules {
        let _ = writeln!(out, "{rule}");
    }
    write_tail(&mut out, &theory.superiorities, &theory.conflicts, &theory.facts, |p| {
        theory.arities().get(p).copied()
    });
    out
}

/// Renders a ground theory in the notation, rules in instance order.
pub fn serialize_ground(theory: &GroundTheory) -> String {
    let mut out = String::new();
    for rule in theory.rules() {
        let _ = writeln!(out, "{rule}");
    }
    let arity = |p: &str| {
        theory
            .rules()
            .iter()
            .flat_map(|r| r.body.iter().chain(std::iter::once(&r.head)))
            .map(|l| &l.atom)
            .chain(theory.facts())
            .find(|a| a.predicate == p)
            .map(Atom::arity)
    };
    write_tail(
        &mut out,
        theory.superiorities(),
        theory.conflicts(),
        theory.facts(),
        arity,
    );
    out
}

fn write_tail(
    out: &mut String,
    superiorities: &[Superiority],
    conflicts: &[ConflictDeclaration],
    facts: &[Atom],
    arity: impl Fn(&str) -> Option<usize>,
) {
    let mut sups: Vec<&Superiority> = superiorities.iter().collect();
    sups.sort_by(|a, b| (&a.inferior, &a.superior).cmp(&(&b.inferior, &b.superior)));
    for sup in sups {
        let _ = writeln!(out, "{sup}");
    }
    let mut decls: Vec<&ConflictDeclaration> = conflicts.iter().collect();
    decls.sort();
    for decl in decls {
        match arity(&decl.predicate) {
            Some(a) => {
                let _ = writeln!(out, "conflict {}/{a} @{}", decl.predicate, decl.position);
            }
            None => {
                let _ = writeln!(out, "conflict {} @{}", decl.predicate, decl.position);
            }
        }
    }
    for fact in facts {
        let _ = writeln!(out, "fact {fact}");
    }
}

fn is_rule_id(s: &str) -> bool {
    !s.is_empty() && !s.contains(char::is_whitespace)
}

fn parse_conflict(text: &str) -> Result<ConflictDeclaration, String> {
    let (pred, pos) = text
        .split_once('@')
        .ok_or_else(|| format!("conflict declaration `{text}` lacks `@position`"))?;
    let pred = pred.trim();
    let pred = pred.split_once('/').map_or(pred, |(p, _)| p).trim();
    let position: usize = pos
        .trim()
        .parse()
        .map_err(|_| format!("bad conflict position `{}`", pos.trim()))?;
    if pred.is_empty() || position == 0 {
        return Err(format!("malformed conflict declaration `{text}`"));
    }
    Ok(ConflictDeclaration::new(pred, position))
}

const ARROWS: [(&str, Strength); 3] = [
    ("=>", Strength::Defeasible),
    ("->", Strength::Strict),
    ("~>", Strength::Defeater),
];

/// Byte offset and strength of the rule arrow, outside quotes and parentheses.
fn find_arrow(line: &str) -> Option<(usize, Strength)> {
    let bytes = line.as_bytes();
    let mut scan = Scan::default();
    for i in 0..bytes.len() {
        if scan.step(bytes[i]) && i + 1 < bytes.len() {
            for (arrow, strength) in ARROWS {
                if &line[i..i + 2] == arrow {
                    return Some((i, strength));
                }
            }
        }
    }
    None
}

/// Tracks quote and parenthesis nesting; `step` returns true at top level.
#[derive(Default)]
struct Scan {
    depth: i32,
    quoted: bool,
    escaped: bool,
}

impl Scan {
    fn step(&mut self, b: u8) -> bool {
        if self.quoted {
            match b {
                _ if self.escaped => self.escaped = false,
                b'\\' => self.escaped = true,
                b'"' => self.quoted = false,
                _ => {}
            }
            return false;
        }
        match b {
            b'"' => {
                self.quoted = true;
                false
            }
            b'(' => {
                self.depth += 1;
                false
            }
            b')' => {
                self.depth -= 1;
                false
            }
            _ => self.depth == 0,
        }
    }
}

fn split_top_level(text: &str, sep: u8) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut scan = Scan::default();
    let mut start = 0;
    for (i, b) in text.bytes().enumerate() {
        if scan.step(b) && b == sep {
            parts.push(&text[start..i]);
            start = i + 1;
        }
    }
    parts.push(&text[start..]);
    parts
}

pub fn parse_rule(line: &str) -> Result<Rule, String> {
    let (id, rest) = line
        .split_once(':')
        .ok_or_else(|| format!("rule `{line}` lacks an id"))?;
    let id = id.trim();
    if !is_rule_id(id) {
        return Err(format!("bad rule id `{id}`"));
    }
    let (at, strength) = find_arrow(rest).ok_or_else(|| format!("rule `{id}` lacks an arrow"))?;
    let body_text = rest[..at].trim();
    let head = parse_literal(rest[at + 2..].trim())?;
    let body = if body_text.is_empty() {
        Vec::new()
    } else {
        split_top_level(body_text, b',')
            .into_iter()
            .map(|item| parse_body_item(item.trim()))
            .collect::<Result<_, _>>()?
    };
    Ok(Rule {
        id: id.to_string(),
        strength,
        body,
        head,
    })
}

fn parse_body_item(text: &str) -> Result<BodyItem, String> {
    let bytes = text.as_bytes();
    let mut scan = Scan::default();
    for i in 0..bytes.len() {
        if !scan.step(bytes[i]) {
            continue;
        }
        let two = text.get(i..i + 2).and_then(Comparator::from_symbol);
        let one = text.get(i..i + 1).and_then(Comparator::from_symbol);
        if let Some((comparator, width)) = two.map(|c| (c, 2)).or(one.map(|c| (c, 1))) {
            return Ok(BodyItem::Guard(Guard {
                comparator,
                lhs: parse_term(text[..i].trim())?,
                rhs: parse_term(text[i + width..].trim())?,
            }));
        }
    }
    parse_literal(text).map(BodyItem::Literal)
}

pub fn parse_literal(text: &str) -> Result<Literal, String> {
    match text.strip_prefix('~') {
        Some(rest) => Ok(Literal::negative(parse_atom(rest.trim())?)),
        None => Ok(Literal::positive(parse_atom(text)?)),
    }
}

pub fn parse_atom(text: &str) -> Result<Atom, String> {
    let text = text.trim();
    let (predicate, args) = match text.find('(') {
        Some(open) => {
            let inner = text[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| format!("unbalanced parentheses in `{text}`"))?;
            let args = if inner.trim().is_empty() {
                Vec::new()
            } else {
                split_top_level(inner, b',')
                    .into_iter()
                    .map(|a| parse_term(a.trim()))
                    .collect::<Result<_, _>>()?
            };
            (text[..open].trim(), args)
        }
        None => (text, Vec::new()),
    };
    if predicate.is_empty()
        || !predicate
            .chars()
            .all(|c| c.is_alphanumeric() || c == '_' || c == '.' || c == '-')
    {
        return Err(format!("bad predicate name in `{text}`"));
    }
    Ok(Atom::new(predicate, args))
}

pub fn parse_term(text: &str) -> Result<Term, String> {
    if let Some(quoted) = text.strip_prefix('"') {
        let body = quoted
            .strip_suffix('"')
            .ok_or_else(|| format!("unterminated string `{text}`"))?;
        let mut out = String::new();
        let mut chars = body.chars();
        while let Some(c) = chars.next() {
            if c == '\\' {
                out.push(chars.next().ok_or("dangling escape")?);
            } else {
                out.push(c);
            }
        }
        return Ok(Term::Const(out));
    }
    if Decimal::is_lexical(text) {
        return text.parse::<Decimal>().map(Term::Num).map_err(|e| e.to_string());
    }
    let (name, ty) = match text.split_once(':') {
        Some((n, t)) => (n, Some(t)),
        None => (text, None),
    };
    let (name, forced_var) = match name.strip_prefix('?') {
        Some(n) => (n, true),
        None => (name, false),
    };
    let is_ident = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_');
    if !is_ident(name) {
        return Err(format!("bad term `{text}`"));
    }
    let starts_var = name.starts_with(|c: char| c.is_uppercase() || c == '_');
    if forced_var || starts_var {
        Ok(Term::Var(Variable {
            name: name.to_string(),
            ty: ty.map(str::to_string),
        }))
    } else if ty.is_some() {
        Err(format!("constant `{name}` cannot carry a type"))
    } else {
        Ok(Term::Const(name.to_string()))
    }
}
