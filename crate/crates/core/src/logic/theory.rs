use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::term::{Atom, Guard, Literal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strength {
    Strict,
    Defeasible,
    Defeater,
}

impl Strength {
    pub fn arrow(self) -> &'static str {
        match self {
            Strength::Strict => "->",
            Strength::Defeasible => "=>",
            Strength::Defeater => "~>",
        }
    }

    /// Strict and defeasible rules may support their head; defeaters only attack.
    pub fn supports(self) -> bool {
        !matches!(self, Strength::Defeater)
    }
}

impl fmt::Display for Strength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strength::Strict => "strict",
            Strength::Defeasible => "defeasible",
            Strength::Defeater => "defeater",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BodyItem {
    Literal(Literal),
    Guard(Guard),
}

impl fmt::Display for BodyItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyItem::Literal(l) => l.fmt(f),
            BodyItem::Guard(g) => g.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub id: String,
    pub strength: Strength,
    pub body: Vec<BodyItem>,
    pub head: Literal,
}

impl Rule {
    pub fn body_literals(&self) -> impl Iterator<Item = &Literal> {
        self.body.iter().filter_map(|item| match item {
            BodyItem::Literal(l) => Some(l),
            BodyItem::Guard(_) => None,
        })
    }

    pub fn guards(&self) -> impl Iterator<Item = &Guard> {
        self.body.iter().filter_map(|item| match item {
            BodyItem::Guard(g) => Some(g),
            BodyItem::Literal(_) => None,
        })
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.body_literals()
            .map(|l| &l.atom)
            .chain(std::iter::once(&self.head.atom))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.id)?;
        for (i, item) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{item}")?;
        }
        if !self.body.is_empty() {
            f.write_str(" ")?;
        }
        write!(f, "{} {}", self.strength.arrow(), self.head)
    }
}

/// `superior` prevails over `inferior`; written `inferior < superior`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Superiority {
    pub superior: String,
    pub inferior: String,
}

impl fmt::Display for Superiority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} < {}", self.inferior, self.superior)
    }
}

/// Declares a predicate functional in one argument: two atoms of the
/// predicate conflict when they agree everywhere except at `position`
/// (1-based), where they differ.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConflictDeclaration {
    pub predicate: String,
    pub position: usize,
}

impl ConflictDeclaration {
    pub fn new(predicate: impl Into<String>, position: usize) -> Self {
        ConflictDeclaration {
            predicate: predicate.into(),
            position,
        }
    }

    /// Whether two (positive) atoms conflict under this declaration.
    pub fn excludes(&self, a: &Atom, b: &Atom) -> bool {
        let pos = self.position.wrapping_sub(1);
        a.predicate == self.predicate
            && b.predicate == self.predicate
            && a.arity() == b.arity()
            && pos < a.arity()
            && a.args
                .iter()
                .zip(&b.args)
                .enumerate()
                .all(|(i, (x, y))| if i == pos { x != y } else { x == y })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("duplicate rule id `{0}`")]
    DuplicateRule(String),
    #[error("superiority `{0}` references unknown rule `{1}`")]
    UnknownRule(String, String),
    #[error("superiority `{0}` relates a rule to itself")]
    SelfSuperiority(String),
    #[error("superiority relation is cyclic through `{0}`")]
    CyclicSuperiority(String),
    #[error("predicate `{predicate}` used with arity {found}, expected {expected}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("fact `{0}` is not ground")]
    NonGroundFact(String),
    #[error("conflict declaration on `{predicate}` names position {position}, outside its arity")]
    ConflictPosition { predicate: String, position: usize },
}

/// An unground defeasible theory: rules, superiority, conflict declarations and facts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Theory {
    pub rules: Vec<Rule>,
    pub superiorities: Vec<Superiority>,
    pub conflicts: Vec<ConflictDeclaration>,
    pub facts: Vec<Atom>,
}

impl Theory {
    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    /// Arity of every predicate mentioned in rules or facts, first use wins.
    pub fn arities(&self) -> BTreeMap<&str, usize> {
        let mut arities = BTreeMap::new();
        for atom in self.rules.iter().flat_map(Rule::atoms).chain(&self.facts) {
            arities.entry(atom.predicate.as_str()).or_insert(atom.arity());
        }
        arities
    }

    pub fn head_predicates(&self) -> BTreeSet<&str> {
        self.rules.iter().map(|r| r.head.atom.predicate.as_str()).collect()
    }

    pub fn predicates(&self) -> BTreeSet<&str> {
        self.arities().into_keys().collect()
    }

    /// Checks the load-time invariants.
    pub fn validate(&self) -> Result<(), TheoryError> {
        let mut ids = BTreeSet::new();
        for rule in &self.rules {
            if !ids.insert(rule.id.as_str()) {
                return Err(TheoryError::DuplicateRule(rule.id.clone()));
            }
        }

        let mut arities: HashMap<&str, usize> = HashMap::new();
        for atom in self.rules.iter().flat_map(Rule::atoms).chain(&self.facts) {
            let expected = *arities.entry(&atom.predicate).or_insert(atom.arity());
            if expected != atom.arity() {
                return Err(TheoryError::ArityMismatch {
                    predicate: atom.predicate.clone(),
                    expected,
                    found: atom.arity(),
                });
            }
        }

        if let Some(fact) = self.facts.iter().find(|f| !f.is_ground()) {
            return Err(TheoryError::NonGroundFact(fact.to_string()));
        }

        for decl in &self.conflicts {
            if let Some(&arity) = arities.get(decl.predicate.as_str()) {
                if decl.position == 0 || decl.position > arity {
                    return Err(TheoryError::ConflictPosition {
                        predicate: decl.predicate.clone(),
                        position: decl.position,
                    });
                }
            }
        }

        for sup in &self.superiorities {
            for id in [&sup.superior, &sup.inferior] {
                if !ids.contains(id.as_str()) {
                    return Err(TheoryError::UnknownRule(sup.to_string(), id.clone()));
                }
            }
            if sup.superior == sup.inferior {
                return Err(TheoryError::SelfSuperiority(sup.superior.clone()));
            }
        }
        check_acyclic(
            self.superiorities
                .iter()
                .map(|s| (s.superior.as_str(), s.inferior.as_str())),
        )
        .map_err(|id| TheoryError::CyclicSuperiority(id.to_string()))
    }
}

/// Returns a node on a cycle if the directed edge set has one.
pub(crate) fn check_acyclic<'a>(edges: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<(), &'a str> {
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in edges {
        succ.entry(a).or_default().push(b);
        succ.entry(b).or_default();
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<&str, u8> = succ.keys().map(|k| (*k, 0)).collect();
    for &start in succ.keys() {
        if state[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        state.insert(start, 1);
        while let Some((node, idx)) = stack.pop() {
            if let Some(&next) = succ[node].get(idx) {
                stack.push((node, idx + 1));
                match state[next] {
                    0 => {
                        state.insert(next, 1);
                        stack.push((next, 0));
                    }
                    1 => return Err(next),
                    _ => {}
                }
            } else {
                state.insert(node, 2);
            }
        }
    }
    Ok(())
}
