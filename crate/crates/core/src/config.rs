//! Interview configuration: the analysis-phase binding of a rule-base, a
//! template and an ordered interview, plus conflict declarations and export
//! mappings the rule-base format cannot carry.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use roxmltree::{Document, Node};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::facts::ValueKind;
use crate::logic::notation::parse_term;
use crate::logic::{Atom, ConflictDeclaration, Decimal, Term, Theory};
use crate::rulebase::{load_rulebase, RulebaseError};
use crate::template::{parse_template, Template, TemplateError};
use crate::xml::XmlWriter;

/// An atom with at most one answer hole (`?`). Constant arguments naming a
/// fixed constant are replaced by its value on instantiation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomPattern {
    pub predicate: String,
    pub args: Vec<Option<Term>>,
}

impl AtomPattern {
    pub fn hole(&self) -> Option<usize> {
        self.args.iter().position(Option::is_none)
    }

    pub fn instantiate(&self, config: &InterviewConfig, answer: Option<Term>) -> Atom {
        let args = self
            .args
            .iter()
            .map(|arg| match arg {
                None => answer.clone().expect("hole patterns are instantiated with a value"),
                Some(Term::Const(name)) => match config.fixed_constants.get(name) {
                    Some(value) => Term::individual(value),
                    None => Term::Const(name.clone()),
                },
                Some(other) => other.clone(),
            })
            .collect();
        Atom::new(self.predicate.clone(), args)
    }
}

impl fmt::Display for AtomPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if self.args.is_empty() {
            return Ok(());
        }
        f.write_str("(")?;
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match arg {
                Some(t) => write!(f, "{t}")?,
                None => f.write_str("?")?,
            }
        }
        f.write_str(")")
    }
}

impl std::str::FromStr for AtomPattern {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim();
        let (predicate, inner) = match text.split_once('(') {
            Some((p, rest)) => (
                p.trim(),
                Some(
                    rest.strip_suffix(')')
                        .ok_or_else(|| format!("unbalanced pattern `{text}`"))?,
                ),
            ),
            None => (text, None),
        };
        if predicate.is_empty() || !predicate.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(format!("bad predicate in pattern `{text}`"));
        }
        let mut args = Vec::new();
        for raw in inner.map(split_args).unwrap_or_default() {
            let raw = raw.trim();
            if raw == "?" {
                args.push(None);
                continue;
            }
            let term = parse_term(raw)?;
            if !term.is_ground() {
                return Err(format!("pattern argument `{raw}` is a variable"));
            }
            args.push(Some(term));
        }
        if args.iter().filter(|a| a.is_none()).count() > 1 {
            return Err(format!("pattern `{text}` has more than one hole"));
        }
        Ok(AtomPattern {
            predicate: predicate.to_string(),
            args,
        })
    }
}

fn split_args(inner: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut start, mut quoted, mut escaped) = (0, false, false);
    for (i, c) in inner.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if quoted => escaped = true,
            '"' => quoted = !quoted,
            ',' if !quoted => {
                out.push(&inner[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&inner[start..]);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterviewStep {
    pub order: u32,
    pub entry: String,
    pub question: String,
    pub kind: ValueKind,
    /// Absent for entries that feed only the template.
    pub pattern: Option<AtomPattern>,
    pub explanation: Option<String>,
    pub min: Option<Decimal>,
    pub max: Option<Decimal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportMapping {
    pub predicate: String,
    pub position: usize,
    pub entry: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterviewConfig {
    pub id: String,
    pub title: String,
    pub rulebase: String,
    pub template: String,
    pub goal: String,
    pub fixed_constants: BTreeMap<String, String>,
    pub conflicts: Vec<ConflictDeclaration>,
    pub exports: Vec<ExportMapping>,
    pub steps: Vec<InterviewStep>,
}

impl InterviewConfig {
    pub fn step(&self, order: u32) -> Option<&InterviewStep> {
        self.steps.iter().find(|s| s.order == order)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("goal predicate `{0}` does not occur in the rule-base")]
    UnknownGoal(String),
    #[error("no question assigned for {}", .0.join(", "))]
    CoverageGap(Vec<String>),
    #[error("predicate `{0}` does not occur in the rule-base")]
    UnknownPredicate(String),
    #[error("predicate `{0}` is derived or outside the goal's dependencies and cannot be asked")]
    NotAskable(String),
    #[error("entry name `{0}` is used twice")]
    DuplicateEntry(String),
    #[error("predicate `{0}` is assigned twice")]
    DuplicateAssignment(String),
    #[error("step `{entry}`: {message}")]
    Pattern { entry: String, message: String },
    #[error("export of `{predicate}` position {position}: {message}")]
    Export {
        predicate: String,
        position: usize,
        message: String,
    },
    #[error("conflict declaration on `{predicate}` position {position} does not fit the rule-base")]
    Conflict { predicate: String, position: usize },
    #[error("unsupported locator `{0}`: only file paths are accepted")]
    Locator(String),
    #[error("rule-base {path}: {source}")]
    Rulebase {
        path: String,
        #[source]
        source: RulebaseError,
    },
    #[error("template {path}: {source}")]
    Template {
        path: String,
        #[source]
        source: TemplateError,
    },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Predicates the goal depends on, breadth-first with each level sorted.
/// Guards contribute nothing.
pub fn collect_dependencies(theory: &Theory, goal: &str) -> Result<Vec<String>, ConfigError> {
    if !theory.predicates().contains(goal) {
        return Err(ConfigError::UnknownGoal(goal.to_string()));
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut out = Vec::new();
    let mut frontier: BTreeSet<&str> = BTreeSet::from([goal]);
    while !frontier.is_empty() {
        let next: BTreeSet<&str> = theory
            .rules
            .iter()
            .filter(|r| frontier.contains(r.head.atom.predicate.as_str()))
            .flat_map(|r| r.body_literals().map(|l| l.atom.predicate.as_str()))
            .filter(|p| !seen.contains(p))
            .collect();
        for p in &next {
            seen.insert(p);
            out.push(p.to_string());
        }
        frontier = next;
    }
    Ok(out)
}

/// Members of `deps` heading no rule, in input order.
pub fn askable_predicates(theory: &Theory, deps: &[String]) -> Vec<String> {
    let heads = theory.head_predicates();
    deps.iter().filter(|p| !heads.contains(p.as_str())).cloned().collect()
}

/// One question assignment. Without a predicate the step feeds only the
/// template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    #[serde(default)]
    pub predicate: Option<String>,
    pub question: String,
    pub kind: ValueKind,
    pub entry: String,
    #[serde(default)]
    pub explanation: Option<String>,
    /// Overrides the synthesized atom pattern.
    #[serde(default)]
    pub pattern: Option<String>,
    #[serde(default)]
    pub min: Option<Decimal>,
    #[serde(default)]
    pub max: Option<Decimal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictInput {
    pub predicate: String,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildRequest {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub rulebase: String,
    pub template: String,
    pub goal: String,
    #[serde(default)]
    pub fixed_constants: BTreeMap<String, String>,
    #[serde(default)]
    pub conflicts: Vec<ConflictInput>,
    #[serde(default)]
    pub exports: Vec<ExportMapping>,
    #[serde(default)]
    pub assignments: Vec<Assignment>,
}

/// Builds a config whose steps follow assignment order. Patterns are
/// synthesized from the predicate's arity: positions whose variables are typed
/// or named after a fixed constant take that constant, and the single
/// remaining position becomes the answer hole.
pub fn build_config(request: &BuildRequest, theory: &Theory) -> Result<InterviewConfig, ConfigError> {
    let deps = collect_dependencies(theory, &request.goal)?;
    let askable = askable_predicates(theory, &deps);
    let predicates = theory.predicates();

    let mut entries = BTreeSet::new();
    let mut assigned = BTreeSet::new();
    let mut steps = Vec::new();
    for (i, a) in request.assignments.iter().enumerate() {
        if !entries.insert(a.entry.as_str()) {
            return Err(ConfigError::DuplicateEntry(a.entry.clone()));
        }
        let pattern = match (&a.predicate, &a.pattern) {
            (None, None) => None,
            (_, Some(text)) => Some(text.parse::<AtomPattern>().map_err(|message| ConfigError::Pattern {
                entry: a.entry.clone(),
                message,
            })?),
            (Some(p), None) => {
                if !predicates.contains(p.as_str()) {
                    return Err(ConfigError::UnknownPredicate(p.clone()));
                }
                Some(synthesize_pattern(theory, p, a, &request.fixed_constants)?)
            }
        };
        if let Some(p) = &pattern {
            if !assigned.insert(p.predicate.clone()) {
                return Err(ConfigError::DuplicateAssignment(p.predicate.clone()));
            }
        }
        steps.push(InterviewStep {
            order: i as u32 + 1,
            entry: a.entry.clone(),
            question: a.question.clone(),
            kind: a.kind,
            pattern,
            explanation: a.explanation.clone(),
            min: a.min,
            max: a.max,
        });
    }
    let gap: Vec<String> = askable.iter().filter(|p| !assigned.contains(*p)).cloned().collect();
    if !gap.is_empty() {
        return Err(ConfigError::CoverageGap(gap));
    }

    let config = InterviewConfig {
        id: request.id.clone(),
        title: request.title.clone(),
        rulebase: request.rulebase.clone(),
        template: request.template.clone(),
        goal: request.goal.clone(),
        fixed_constants: request.fixed_constants.clone(),
        conflicts: request
            .conflicts
            .iter()
            .map(|c| ConflictDeclaration::new(c.predicate.clone(), c.position))
            .collect(),
        exports: request.exports.clone(),
        steps,
    };
    validate_config(&config, theory)?;
    Ok(config)
}

fn type_key(text: &str) -> &str {
    text.rsplit(|c: char| !(c.is_alphanumeric() || c == '_'))
        .find(|s| !s.is_empty())
        .unwrap_or("")
}

fn synthesize_pattern(
    theory: &Theory,
    predicate: &str,
    assignment: &Assignment,
    fixed: &BTreeMap<String, String>,
) -> Result<AtomPattern, ConfigError> {
    let arity = theory.arities()[predicate];
    let mut args: Vec<Option<Term>> = vec![None; arity];
    for (pos, slot) in args.iter_mut().enumerate() {
        let mut keys = BTreeSet::new();
        for atom in theory
            .rules
            .iter()
            .flat_map(|r| r.atoms())
            .filter(|a| a.predicate == predicate)
        {
            match &atom.args[pos] {
                Term::Var(v) => {
                    keys.insert(v.name.to_lowercase());
                    if let Some(ty) = &v.ty {
                        keys.insert(type_key(ty).to_lowercase());
                    }
                }
                Term::Const(c) => {
                    keys.insert(c.clone());
                }
                Term::Num(_) => {}
            }
        }
        if let Some(name) = fixed.keys().find(|k| keys.contains(k.as_str())) {
            *slot = Some(Term::Const(name.clone()));
        }
    }
    let holes = args.iter().filter(|a| a.is_none()).count();
    let wanted = usize::from(assignment.kind != ValueKind::Boolean);
    if holes != wanted {
        return Err(ConfigError::Pattern {
            entry: assignment.entry.clone(),
            message: format!(
                "`{predicate}` leaves {holes} position(s) unfilled by fixed constants, a {} step needs {wanted}",
                assignment.kind
            ),
        });
    }
    Ok(AtomPattern {
        predicate: predicate.to_string(),
        args,
    })
}

/// Checks a config against the rule-base it references.
pub fn validate_config(config: &InterviewConfig, theory: &Theory) -> Result<(), ConfigError> {
    check_shape(config)?;
    let deps = collect_dependencies(theory, &config.goal)?;
    let askable = askable_predicates(theory, &deps);
    let arities = theory.arities();

    let mut covered = BTreeSet::new();
    for step in &config.steps {
        let Some(pattern) = &step.pattern else {
            continue;
        };
        let Some(&arity) = arities.get(pattern.predicate.as_str()) else {
            return Err(ConfigError::UnknownPredicate(pattern.predicate.clone()));
        };
        if !askable.contains(&pattern.predicate) {
            return Err(ConfigError::NotAskable(pattern.predicate.clone()));
        }
        if pattern.args.len() != arity {
            return Err(ConfigError::Pattern {
                entry: step.entry.clone(),
                message: format!(
                    "`{}` has arity {arity}, pattern has {}",
                    pattern.predicate,
                    pattern.args.len()
                ),
            });
        }
        covered.insert(pattern.predicate.clone());
    }
    let gap: Vec<String> = askable.into_iter().filter(|p| !covered.contains(p)).collect();
    if !gap.is_empty() {
        return Err(ConfigError::CoverageGap(gap));
    }

    let derivable: BTreeSet<&str> = theory
        .head_predicates()
        .into_iter()
        .chain(theory.facts.iter().map(|f| f.predicate.as_str()))
        .collect();
    for x in &config.exports {
        let message = if !derivable.contains(x.predicate.as_str()) {
            "predicate heads no rule and has no facts"
        } else if x.position == 0 || x.position > arities[x.predicate.as_str()] {
            "position outside the predicate's arity"
        } else {
            continue;
        };
        return Err(ConfigError::Export {
            predicate: x.predicate.clone(),
            position: x.position,
            message: message.to_string(),
        });
    }
    for c in &config.conflicts {
        match arities.get(c.predicate.as_str()) {
            Some(&arity) if c.position >= 1 && c.position <= arity => {}
            _ => {
                return Err(ConfigError::Conflict {
                    predicate: c.predicate.clone(),
                    position: c.position,
                })
            }
        }
    }
    Ok(())
}

/// Structural rules independent of the rule-base.
fn check_shape(config: &InterviewConfig) -> Result<(), ConfigError> {
    let schema = |m: String| Err(ConfigError::Schema(m));
    let mut entries = BTreeSet::new();
    for (i, step) in config.steps.iter().enumerate() {
        if step.order != i as u32 + 1 {
            return schema(format!("step orders must run 1..{} in sequence", config.steps.len()));
        }
        if step.entry.is_empty() {
            return schema(format!("step {} has an empty entry name", step.order));
        }
        if !entries.insert(step.entry.as_str()) {
            return Err(ConfigError::DuplicateEntry(step.entry.clone()));
        }
        if let Some(p) = &step.pattern {
            let wanted = usize::from(step.kind != ValueKind::Boolean);
            let holes = p.args.iter().filter(|a| a.is_none()).count();
            if holes != wanted {
                return Err(ConfigError::Pattern {
                    entry: step.entry.clone(),
                    message: format!("a {} step needs {wanted} hole(s), pattern has {holes}", step.kind),
                });
            }
        }
        if (step.min.is_some() || step.max.is_some()) && step.kind != ValueKind::Number {
            return schema(format!("step {}: min/max apply to number steps only", step.order));
        }
    }
    for x in &config.exports {
        if !entries.insert(x.entry.as_str()) {
            return Err(ConfigError::DuplicateEntry(x.entry.clone()));
        }
    }
    Ok(())
}

pub fn serialize_config(config: &InterviewConfig) -> String {
    let mut w = XmlWriter::new().declaration();
    w.open("assembly_config", &[("id", &config.id), ("title", &config.title)]);
    w.leaf("rulebase", &[], &config.rulebase);
    w.leaf("template", &[], &config.template);
    w.leaf("goal", &[], &config.goal);
    if !config.fixed_constants.is_empty() {
        w.open("fixed_constants", &[]);
        for (name, value) in &config.fixed_constants {
            w.empty("constant", &[("name", name), ("value", value)]);
        }
        w.close("fixed_constants");
    }
    if !config.conflicts.is_empty() {
        w.open("conflicts", &[]);
        for c in &config.conflicts {
            w.empty(
                "conflict",
                &[("predicate", &c.predicate), ("position", &c.position.to_string())],
            );
        }
        w.close("conflicts");
    }
    if !config.exports.is_empty() {
        w.open("exports", &[]);
        for x in &config.exports {
            w.empty(
                "export",
                &[
                    ("predicate", &x.predicate),
                    ("position", &x.position.to_string()),
                    ("entry", &x.entry),
                ],
            );
        }
        w.close("exports");
    }
    w.open("interview", &[]);
    for s in &config.steps {
        let order = s.order.to_string();
        let (min, max) = (s.min.map(|d| d.to_string()), s.max.map(|d| d.to_string()));
        let mut attrs = vec![
            ("order", order.as_str()),
            ("entry", &s.entry),
            ("kind", s.kind.as_str()),
        ];
        if let Some(m) = &min {
            attrs.push(("min", m));
        }
        if let Some(m) = &max {
            attrs.push(("max", m));
        }
        w.open("step", &attrs);
        w.leaf("question", &[], &s.question);
        if let Some(p) = &s.pattern {
            w.leaf("pattern", &[], &p.to_string());
        }
        if let Some(e) = &s.explanation {
            w.leaf("explanation", &[], e);
        }
        w.close("step");
    }
    w.close("interview");
    w.close("assembly_config");
    w.finish()
}

struct Reader<'a, 'i> {
    doc: &'a Document<'i>,
}

impl<'a, 'i> Reader<'a, 'i> {
    fn err<T>(&self, node: Node, message: impl fmt::Display) -> Result<T, ConfigError> {
        let line = self.doc.text_pos_at(node.range().start).row;
        Err(ConfigError::Schema(format!("line {line}: {message}")))
    }

    fn elements(&self, node: Node<'a, 'i>) -> Result<Vec<Node<'a, 'i>>, ConfigError> {
        for child in node.children() {
            if child.is_text() && child.text().is_some_and(|t| !t.trim().is_empty()) {
                return self.err(child, format!("unexpected text in `{}`", node.tag_name().name()));
            }
        }
        Ok(node.children().filter(Node::is_element).collect())
    }

    fn attr(&self, node: Node<'a, 'i>, name: &str) -> Result<&'a str, ConfigError> {
        match node.attribute(name) {
            Some(v) => Ok(v),
            None => self.err(
                node,
                format!("`{}` requires attribute `{name}`", node.tag_name().name()),
            ),
        }
    }

    fn number<T: std::str::FromStr>(&self, node: Node<'a, 'i>, name: &str) -> Result<T, ConfigError> {
        let raw = self.attr(node, name)?;
        match raw.parse() {
            Ok(v) => Ok(v),
            Err(_) => self.err(node, format!("attribute `{name}` is not a number: `{raw}`")),
        }
    }

    fn text(&self, node: Node<'a, 'i>) -> Result<String, ConfigError> {
        if node.children().any(|c| c.is_element()) {
            return self.err(node, format!("`{}` holds text only", node.tag_name().name()));
        }
        Ok(node.text().unwrap_or("").trim().to_string())
    }
}

pub fn parse_config(text: &str) -> Result<InterviewConfig, ConfigError> {
    let doc = Document::parse(text).map_err(|e| ConfigError::MalformedXml(e.to_string()))?;
    let r = Reader { doc: &doc };
    let root = doc.root_element();
    if root.tag_name().name() != "assembly_config" {
        return r.err(
            root,
            format!("root must be `assembly_config`, found `{}`", root.tag_name().name()),
        );
    }
    let mut config = InterviewConfig {
        id: r.attr(root, "id")?.to_string(),
        title: root.attribute("title").unwrap_or_default().to_string(),
        rulebase: String::new(),
        template: String::new(),
        goal: String::new(),
        fixed_constants: BTreeMap::new(),
        conflicts: Vec::new(),
        exports: Vec::new(),
        steps: Vec::new(),
    };
    let mut seen = BTreeSet::new();
    for el in r.elements(root)? {
        let name = el.tag_name().name();
        if !seen.insert(name) {
            return r.err(el, format!("`{name}` appears twice"));
        }
        match name {
            "rulebase" => config.rulebase = r.text(el)?,
            "template" => config.template = r.text(el)?,
            "goal" => config.goal = r.text(el)?,
            "fixed_constants" => {
                for c in r.elements(el)? {
                    if !c.has_tag_name("constant") {
                        return r.err(c, "expected `constant`");
                    }
                    let key = r.attr(c, "name")?.to_string();
                    if config
                        .fixed_constants
                        .insert(key, r.attr(c, "value")?.to_string())
                        .is_some()
                    {
                        return r.err(c, "duplicate fixed constant");
                    }
                }
            }
            "conflicts" => {
                for c in r.elements(el)? {
                    if !c.has_tag_name("conflict") {
                        return r.err(c, "expected `conflict`");
                    }
                    config.conflicts.push(ConflictDeclaration::new(
                        r.attr(c, "predicate")?,
                        r.number(c, "position")?,
                    ));
                }
            }
            "exports" => {
                for x in r.elements(el)? {
                    if !x.has_tag_name("export") {
                        return r.err(x, "expected `export`");
                    }
                    config.exports.push(ExportMapping {
                        predicate: r.attr(x, "predicate")?.to_string(),
                        position: r.number(x, "position")?,
                        entry: r.attr(x, "entry")?.to_string(),
                    });
                }
            }
            "interview" => {
                for s in r.elements(el)? {
                    if !s.has_tag_name("step") {
                        return r.err(s, "expected `step`");
                    }
                    config.steps.push(parse_step(&r, s)?);
                }
            }
            other => return r.err(el, format!("unknown element `{other}`")),
        }
    }
    for required in ["rulebase", "template", "goal", "interview"] {
        if !seen.contains(required) {
            return Err(ConfigError::Schema(format!("missing `{required}`")));
        }
    }
    for (field, value) in [
        ("rulebase", &config.rulebase),
        ("template", &config.template),
        ("goal", &config.goal),
    ] {
        if value.is_empty() {
            return Err(ConfigError::Schema(format!("`{field}` is empty")));
        }
    }
    config.steps.sort_by_key(|s| s.order);
    check_shape(&config)?;
    Ok(config)
}

fn parse_step<'a, 'i>(r: &Reader<'a, 'i>, s: Node<'a, 'i>) -> Result<InterviewStep, ConfigError> {
    let kind_raw = r.attr(s, "kind")?;
    let Ok(kind) = kind_raw.parse::<ValueKind>() else {
        return r.err(s, format!("unknown kind `{kind_raw}`"));
    };
    let bound = |name: &str| -> Result<Option<Decimal>, ConfigError> {
        match s.attribute(name) {
            None => Ok(None),
            Some(raw) => match raw.parse() {
                Ok(d) => Ok(Some(d)),
                Err(_) => r.err(s, format!("`{name}` is not a decimal: `{raw}`")),
            },
        }
    };
    let mut step = InterviewStep {
        order: r.number(s, "order")?,
        entry: r.attr(s, "entry")?.to_string(),
        question: String::new(),
        kind,
        pattern: None,
        explanation: None,
        min: bound("min")?,
        max: bound("max")?,
    };
    let mut has_question = false;
    for child in r.elements(s)? {
        match child.tag_name().name() {
            "question" if !has_question => {
                has_question = true;
                step.question = r.text(child)?;
            }
            "pattern" if step.pattern.is_none() => match r.text(child)?.parse() {
                Ok(p) => step.pattern = Some(p),
                Err(e) => return r.err(child, e),
            },
            "explanation" if step.explanation.is_none() => step.explanation = Some(r.text(child)?),
            other => return r.err(child, format!("unexpected `{other}` in step")),
        }
    }
    if !has_question {
        return r.err(s, "step lacks `question`");
    }
    Ok(step)
}

/// A config with its rule-base and template loaded and cross-checked.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: InterviewConfig,
    pub theory: Theory,
    pub template: Template,
    pub warnings: Vec<String>,
}

impl LoadedConfig {
    pub fn new(config: InterviewConfig, theory: Theory, template: Template) -> Result<Self, ConfigError> {
        theory.validate().map_err(|e| ConfigError::Rulebase {
            path: config.rulebase.clone(),
            source: e.into(),
        })?;
        validate_config(&config, &theory)?;
        Ok(LoadedConfig {
            config,
            theory,
            template,
            warnings: Vec::new(),
        })
    }

    /// Reads a config file; its locators resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = read(path)?;
        let config = parse_config(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rb_path = resolve(base, &config.rulebase)?;
        let (theory, warnings) = load_rulebase(&rb_path).map_err(|source| ConfigError::Rulebase {
            path: rb_path.display().to_string(),
            source,
        })?;
        let tpl_path = resolve(base, &config.template)?;
        let template = parse_template(&read(&tpl_path)?).map_err(|source| ConfigError::Template {
            path: tpl_path.display().to_string(),
            source,
        })?;
        let mut loaded = LoadedConfig::new(config, theory, template)?;
        loaded.warnings = warnings;
        for w in &loaded.warnings {
            tracing::warn!(config = %loaded.config.id, "{w}");
        }
        Ok(loaded)
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn resolve(base: &Path, locator: &str) -> Result<PathBuf, ConfigError> {
    if locator.contains("://") && !locator.starts_with("file://") {
        return Err(ConfigError::Locator(locator.to_string()));
    }
    Ok(base.join(locator.trim_start_matches("file://")))
}
