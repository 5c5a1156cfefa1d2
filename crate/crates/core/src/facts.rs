//! Name-value facts exchanged between the interview, the reasoner and the
//! template (`fact_list/fact` documents).

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use roxmltree::Document;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::InterviewConfig;
use crate::logic::{Atom, ConclusionSet, Decimal, Tag, Term};
use crate::xml::XmlWriter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Text,
    Number,
    Boolean,
    Date,
}

impl ValueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::Text => "text",
            ValueKind::Number => "number",
            ValueKind::Boolean => "boolean",
            ValueKind::Date => "date",
        }
    }

    /// Reads `text` as a value of this kind.
    pub fn parse_value(self, text: &str) -> Result<FactValue, FactError> {
        let bad = || FactError::BadValue {
            kind: self,
            text: text.to_string(),
        };
        Ok(match self {
            ValueKind::Text => FactValue::Text(text.to_string()),
            ValueKind::Number => FactValue::Number(text.trim().parse().map_err(|_| bad())?),
            ValueKind::Boolean => match text.trim() {
                "true" => FactValue::Boolean(true),
                "false" => FactValue::Boolean(false),
                _ => return Err(bad()),
            },
            ValueKind::Date => FactValue::Date(NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d").map_err(|_| bad())?),
        })
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ValueKind {
    type Err = FactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ValueKind::Text),
            "number" => Ok(ValueKind::Number),
            "boolean" => Ok(ValueKind::Boolean),
            "date" => Ok(ValueKind::Date),
            _ => Err(FactError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum FactValue {
    Text(String),
    Number(Decimal),
    Boolean(bool),
    Date(NaiveDate),
}

impl FactValue {
    pub fn kind(&self) -> ValueKind {
        match self {
            FactValue::Text(_) => ValueKind::Text,
            FactValue::Number(_) => ValueKind::Number,
            FactValue::Boolean(_) => ValueKind::Boolean,
            FactValue::Date(_) => ValueKind::Date,
        }
    }

    /// Kind a bare lexical form is read as when no kind is given.
    pub fn infer(text: &str) -> FactValue {
        [ValueKind::Number, ValueKind::Boolean, ValueKind::Date]
            .into_iter()
            .find_map(|k| k.parse_value(text).ok().filter(|v| v.to_string() == text))
            .unwrap_or_else(|| FactValue::Text(text.to_string()))
    }

    /// Term used when the value fills an atom argument.
    pub fn to_term(&self) -> Term {
        match self {
            FactValue::Number(n) => Term::Num(*n),
            other => Term::Const(other.to_string()),
        }
    }
}

impl fmt::Display for FactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactValue::Text(t) => f.write_str(t),
            FactValue::Number(n) => write!(f, "{n}"),
            FactValue::Boolean(b) => write!(f, "{b}"),
            FactValue::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactEntry {
    pub name: String,
    pub value: FactValue,
}

impl FactEntry {
    pub fn new(name: impl Into<String>, value: FactValue) -> Self {
        FactEntry {
            name: name.into(),
            value,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FactError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("expected root element `fact_list`, found `{0}`")]
    WrongRoot(String),
    #[error("fact #{0} has no `name`")]
    MissingName(usize),
    #[error("fact `{0}` has no `value`")]
    MissingValue(String),
    #[error("unexpected element `{0}` in fact list")]
    UnexpectedElement(String),
    #[error("`{text}` is not a valid {kind}")]
    BadValue { kind: ValueKind, text: String },
    #[error("unknown value kind `{0}`")]
    UnknownKind(String),
    #[error("answer for `{entry}` is a {found}, step expects a {expected}")]
    TypeMismatch {
        entry: String,
        expected: ValueKind,
        found: ValueKind,
    },
}

/// Ordered name-value facts with at most one entry per name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactDocument {
    entries: Vec<FactEntry>,
}

impl FactDocument {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry; an existing entry of the same name is replaced in place.
    pub fn insert(&mut self, entry: FactEntry) {
        match self.entries.iter_mut().find(|e| e.name == entry.name) {
            Some(existing) => *existing = entry,
            None => self.entries.push(entry),
        }
    }

    pub fn get(&self, name: &str) -> Option<&FactValue> {
        self.entries.iter().find(|e| e.name == name).map(|e| &e.value)
    }

    pub fn entries(&self) -> &[FactEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<FactEntry> for FactDocument {
    fn from_iter<I: IntoIterator<Item = FactEntry>>(iter: I) -> Self {
        let mut doc = FactDocument::new();
        for e in iter {
            doc.insert(e);
        }
        doc
    }
}

/// Parses a `fact_list` document. A `kind` attribute on `value` pins the
/// value kind; otherwise it is inferred from the lexical form.
pub fn parse_fact_document(text: &str) -> Result<FactDocument, FactError> {
    let doc = Document::parse(text).map_err(|e| FactError::MalformedXml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "fact_list" {
        return Err(FactError::WrongRoot(root.tag_name().name().to_string()));
    }
    let mut out = FactDocument::new();
    for (i, fact) in root.children().filter(|n| n.is_element()).enumerate() {
        if fact.tag_name().name() != "fact" {
            return Err(FactError::UnexpectedElement(fact.tag_name().name().to_string()));
        }
        let child = |name: &str| fact.children().find(|n| n.has_tag_name(name));
        let name = child("name")
            .and_then(|n| n.text())
            .map(str::trim)
            .filter(|n| !n.is_empty())
            .ok_or(FactError::MissingName(i + 1))?;
        let value_node = child("value").ok_or_else(|| FactError::MissingValue(name.to_string()))?;
        let raw = value_node.text().unwrap_or("");
        let value = match value_node.attribute("kind") {
            Some(kind) => kind.parse::<ValueKind>()?.parse_value(raw)?,
            None => FactValue::infer(raw),
        };
        out.insert(FactEntry::new(name, value));
    }
    Ok(out)
}

pub fn serialize_fact_document(facts: &FactDocument) -> String {
    if facts.is_empty() {
        return "<fact_list/>\n".to_string();
    }
    let mut w = XmlWriter::new();
    w.open("fact_list", &[]);
    for entry in &facts.entries {
        w.open("fact", &[]);
        w.leaf("name", &[], &entry.name);
        let text = entry.value.to_string();
        if FactValue::infer(&text) == entry.value {
            w.leaf("value", &[], &text);
        } else {
            w.leaf("value", &[("kind", entry.value.kind().as_str())], &text);
        }
        w.close("fact");
    }
    w.close("fact_list");
    w.finish()
}

/// Builds the reasoner facts for every answered step that carries an atom
/// pattern. Boolean steps assert their atom when true and nothing when false;
/// other steps put the answer into the pattern's hole.
pub fn answers_to_atoms(config: &InterviewConfig, facts: &FactDocument) -> Result<Vec<Atom>, FactError> {
    let mut atoms = Vec::new();
    for step in &config.steps {
        let Some(value) = facts.get(&step.entry) else {
            continue;
        };
        if value.kind() != step.kind {
            return Err(FactError::TypeMismatch {
                entry: step.entry.clone(),
                expected: step.kind,
                found: value.kind(),
            });
        }
        let Some(pattern) = &step.pattern else {
            continue;
        };
        match value {
            FactValue::Boolean(false) => {}
            FactValue::Boolean(true) => atoms.push(pattern.instantiate(config, None)),
            other => atoms.push(pattern.instantiate(config, Some(other.to_term()))),
        }
    }
    Ok(atoms)
}

/// Entries for every `+∂` positive conclusion matched by an export mapping,
/// ordered by entry name then value.
pub fn conclusions_to_entries(conclusions: &ConclusionSet, config: &InterviewConfig) -> Vec<FactEntry> {
    let mut entries: Vec<FactEntry> = conclusions
        .with_tag(Tag::PlusPartial)
        .filter(|l| !l.negated)
        .flat_map(|l| {
            config.exports.iter().filter_map(move |x| {
                if x.predicate != l.atom.predicate {
                    return None;
                }
                let term = l.atom.args.get(x.position.checked_sub(1)?)?;
                let value = match term {
                    Term::Num(n) => FactValue::Number(*n),
                    Term::Const(c) => FactValue::Text(c.clone()),
                    Term::Var(_) => return None,
                };
                Some(FactEntry::new(x.entry.clone(), value))
            })
        })
        .collect();
    entries.sort_by(|a, b| (&a.name, a.value.to_string()).cmp(&(&b.name, b.value.to_string())));
    entries
}
