//! LegalRuleML subset reader.
//!
//! Supported vocabulary: `LegalRuleML`/`Statements` containers,
//! `PrescriptiveStatement`, `OverrideStatement`/`Override` and the RuleML
//! `Rule`, `if`, `then`, `And`, `Atom`, `Rel`, `Var`, `Ind`, `Expr`, `Fun`
//! elements. Anything else is rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use roxmltree::{Document, Node};
use thiserror::Error;

use crate::logic::notation;
use crate::logic::{
    Atom, BodyItem, Comparator, Guard, Literal, Rule, Strength, Superiority, Term, Theory, TheoryError, Variable,
};

pub const LEGALRULEML_NS: &str = "http://docs.oasis-open.org/legalruleml/ns/v1.0/";
pub const RULEML_NS: &str = "http://ruleml.org/spec";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Namespaces {
    pub legalruleml: String,
    pub ruleml: String,
}

impl Default for Namespaces {
    fn default() -> Self {
        Namespaces {
            legalruleml: LEGALRULEML_NS.to_string(),
            ruleml: RULEML_NS.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RulebaseError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("unsupported element `{name}` at line {line}")]
    UnknownElement { name: String, line: u32 },
    #[error("override references unknown statement `{0}`")]
    DanglingOverride(String),
    #[error("duplicate statement or rule key `{0}`")]
    DuplicateKey(String),
    #[error("line {line}: {message}")]
    Invalid { line: u32, message: String },
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Notation(#[from] notation::NotationError),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrescriptiveStatement {
    pub key: String,
    pub rule: Rule,
}

/// `over` prevails over `under`; both are statement references (`#key`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Override {
    pub over: String,
    pub under: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RulebaseDocument {
    /// Prefix → namespace URI as declared on the root element.
    pub namespaces: BTreeMap<String, String>,
    pub statements: Vec<PrescriptiveStatement>,
    pub overrides: Vec<Override>,
    /// Namespace mismatches and similar non-fatal findings.
    pub warnings: Vec<String>,
}

impl RulebaseDocument {
    pub fn parse(text: &str, namespaces: &Namespaces) -> Result<Self, RulebaseError> {
        let doc = Document::parse(text).map_err(|e| RulebaseError::MalformedXml(e.to_string()))?;
        let root = doc.root_element();
        let mut reader = Reader {
            doc: &doc,
            expected: namespaces,
            warned: BTreeSet::new(),
            out: RulebaseDocument {
                namespaces: root
                    .namespaces()
                    .map(|ns| (ns.name().unwrap_or("").to_string(), ns.uri().to_string()))
                    .collect(),
                statements: Vec::new(),
                overrides: Vec::new(),
                warnings: Vec::new(),
            },
        };
        reader.container(root)?;
        Ok(reader.out)
    }

    /// Resolves overrides through statement keys and validates the result.
    pub fn to_theory(&self) -> Result<Theory, RulebaseError> {
        let mut by_key: BTreeMap<&str, &str> = BTreeMap::new();
        for st in &self.statements {
            if by_key.insert(&st.key, &st.rule.id).is_some() {
                return Err(RulebaseError::DuplicateKey(st.key.clone()));
            }
        }
        let resolve = |reference: &str| {
            reference
                .strip_prefix('#')
                .and_then(|k| by_key.get(k))
                .map(|id| id.to_string())
                .ok_or_else(|| RulebaseError::DanglingOverride(reference.to_string()))
        };
        let mut superiorities = Vec::new();
        for o in &self.overrides {
            superiorities.push(Superiority {
                superior: resolve(&o.over)?,
                inferior: resolve(&o.under)?,
            });
        }
        let mut rule_ids = BTreeSet::new();
        for st in &self.statements {
            if !rule_ids.insert(st.rule.id.as_str()) {
                return Err(RulebaseError::DuplicateKey(st.rule.id.clone()));
            }
        }
        let theory = Theory {
            rules: self.statements.iter().map(|s| s.rule.clone()).collect(),
            superiorities,
            ..Theory::default()
        };
        theory.validate()?;
        Ok(theory)
    }
}

/// Parses a LegalRuleML document with the default namespaces.
pub fn parse_rulebase(text: &str) -> Result<Theory, RulebaseError> {
    RulebaseDocument::parse(text, &Namespaces::default())?.to_theory()
}

/// Debug notation of a theory (rules sorted by id).
pub fn serialize_debug(theory: &Theory) -> String {
    notation::serialize_theory(theory)
}

/// Loads a rule-base file, either LegalRuleML XML or the text notation.
/// Returns the theory and any warnings.
pub fn load_rulebase(path: &Path) -> Result<(Theory, Vec<String>), RulebaseError> {
    let text = std::fs::read_to_string(path).map_err(|source| RulebaseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    if text.trim_start().starts_with('<') {
        let doc = RulebaseDocument::parse(&text, &Namespaces::default())?;
        let theory = doc.to_theory()?;
        Ok((theory, doc.warnings))
    } else {
        let theory = notation::parse_theory(&text)?;
        theory.validate()?;
        Ok((theory, Vec::new()))
    }
}

/// Reads ground facts: any root element whose children are RuleML `Atom`s
/// built from `Rel` and `Ind` only.
pub fn parse_fact_atoms(text: &str) -> Result<Vec<Atom>, RulebaseError> {
    let doc = Document::parse(text).map_err(|e| RulebaseError::MalformedXml(e.to_string()))?;
    let namespaces = Namespaces::default();
    let mut reader = Reader {
        doc: &doc,
        expected: &namespaces,
        warned: BTreeSet::new(),
        out: RulebaseDocument {
            namespaces: BTreeMap::new(),
            statements: Vec::new(),
            overrides: Vec::new(),
            warnings: Vec::new(),
        },
    };
    let mut atoms = Vec::new();
    for child in elements(doc.root_element()) {
        reader.expect(child, "Atom", Ns::RuleMl)?;
        match reader.atom(child)? {
            BodyItem::Literal(l) if l.atom.is_ground() => atoms.push(l.atom),
            _ => return Err(reader.invalid(child, "facts must be ground atoms")),
        }
    }
    Ok(atoms)
}

#[derive(Clone, Copy)]
enum Ns {
    LegalRuleMl,
    RuleMl,
}

struct Reader<'a, 'input> {
    doc: &'a Document<'input>,
    expected: &'a Namespaces,
    warned: BTreeSet<String>,
    out: RulebaseDocument,
}

fn elements<'a, 'input>(node: Node<'a, 'input>) -> impl Iterator<Item = Node<'a, 'input>> {
    node.children().filter(Node::is_element)
}

fn text_of(node: Node) -> String {
    node.text().unwrap_or("").trim().to_string()
}

fn strip_colon(s: &str) -> &str {
    s.strip_prefix(':').unwrap_or(s)
}

impl Reader<'_, '_> {
    fn line(&self, node: Node) -> u32 {
        self.doc.text_pos_at(node.range().start).row
    }

    fn invalid(&self, node: Node, message: &str) -> RulebaseError {
        RulebaseError::Invalid {
            line: self.line(node),
            message: format!("`{}`: {message}", node.tag_name().name()),
        }
    }

    fn unknown(&self, node: Node) -> RulebaseError {
        RulebaseError::UnknownElement {
            name: node.tag_name().name().to_string(),
            line: self.line(node),
        }
    }

    fn check_ns(&mut self, node: Node, ns: Ns) {
        let expected = match ns {
            Ns::LegalRuleMl => &self.expected.legalruleml,
            Ns::RuleMl => &self.expected.ruleml,
        };
        let actual = node.tag_name().namespace().unwrap_or("");
        if actual != expected && self.warned.insert(actual.to_string()) {
            let warning = format!(
                "element `{}` is in namespace `{actual}`, expected `{expected}`",
                node.tag_name().name()
            );
            tracing::warn!("{warning}");
            self.out.warnings.push(warning);
        }
    }

    fn expect(&mut self, node: Node, name: &str, ns: Ns) -> Result<(), RulebaseError> {
        if node.tag_name().name() != name {
            return Err(self.unknown(node));
        }
        self.check_ns(node, ns);
        Ok(())
    }

    fn container(&mut self, node: Node) -> Result<(), RulebaseError> {
        match node.tag_name().name() {
            "LegalRuleML" | "Statements" => {
                self.check_ns(node, Ns::LegalRuleMl);
                for child in elements(node) {
                    self.container(child)?;
                }
                Ok(())
            }
            "PrescriptiveStatement" => self.statement(node),
            "OverrideStatement" => self.override_statement(node),
            _ => Err(self.unknown(node)),
        }
    }

    fn statement(&mut self, node: Node) -> Result<(), RulebaseError> {
        self.check_ns(node, Ns::LegalRuleMl);
        let key = node
            .attribute("key")
            .ok_or_else(|| self.invalid(node, "missing `key`"))?;
        let mut children = elements(node);
        let (Some(rule), None) = (children.next(), children.next()) else {
            return Err(self.invalid(node, "expected exactly one `Rule`"));
        };
        self.expect(rule, "Rule", Ns::RuleMl)?;
        let rule = self.rule(rule)?;
        if self.out.statements.iter().any(|s| s.key == key) {
            return Err(RulebaseError::DuplicateKey(key.to_string()));
        }
        self.out.statements.push(PrescriptiveStatement {
            key: key.to_string(),
            rule,
        });
        Ok(())
    }

    fn rule(&mut self, node: Node) -> Result<Rule, RulebaseError> {
        let id = node
            .attribute("key")
            .map(strip_colon)
            .filter(|k| !k.is_empty())
            .ok_or_else(|| self.invalid(node, "missing `key`"))?
            .to_string();
        if let Some(closure) = node.attribute("closure") {
            if closure != "universal" {
                return Err(self.invalid(node, "only `closure=\"universal\"` is supported"));
            }
        }
        let strength = match node.attribute("strength") {
            None | Some("defeasible") => Strength::Defeasible,
            Some("strict") => Strength::Strict,
            Some("defeater") => Strength::Defeater,
            Some(other) => return Err(self.invalid(node, &format!("unknown strength `{other}`"))),
        };
        let mut body = Vec::new();
        let mut head = None;
        for child in elements(node) {
            match child.tag_name().name() {
                "if" if head.is_none() && body.is_empty() => {
                    self.check_ns(child, Ns::RuleMl);
                    body = self.condition(child)?;
                }
                "then" if head.is_none() => {
                    self.check_ns(child, Ns::RuleMl);
                    let mut atoms = elements(child);
                    let (Some(atom), None) = (atoms.next(), atoms.next()) else {
                        return Err(self.invalid(child, "expected exactly one `Atom`"));
                    };
                    self.expect(atom, "Atom", Ns::RuleMl)?;
                    match self.atom(atom)? {
                        BodyItem::Literal(l) => head = Some(l),
                        BodyItem::Guard(_) => return Err(self.invalid(atom, "a rule head cannot be a comparison")),
                    }
                }
                "if" | "then" => return Err(self.invalid(child, "repeated or misplaced")),
                _ => return Err(self.unknown(child)),
            }
        }
        let head = head.ok_or_else(|| self.invalid(node, "missing `then`"))?;
        Ok(Rule {
            id,
            strength,
            body,
            head,
        })
    }

    fn condition(&mut self, node: Node) -> Result<Vec<BodyItem>, RulebaseError> {
        let mut children = elements(node);
        let (Some(inner), None) = (children.next(), children.next()) else {
            return Err(self.invalid(node, "expected one `Atom` or `And`"));
        };
        match inner.tag_name().name() {
            "Atom" => {
                self.check_ns(inner, Ns::RuleMl);
                Ok(vec![self.atom(inner)?])
            }
            "And" => {
                self.check_ns(inner, Ns::RuleMl);
                elements(inner)
                    .map(|a| {
                        self.expect(a, "Atom", Ns::RuleMl)?;
                        self.atom(a)
                    })
                    .collect()
            }
            _ => Err(self.unknown(inner)),
        }
    }

    fn atom(&mut self, node: Node) -> Result<BodyItem, RulebaseError> {
        let children: Vec<Node> = elements(node).collect();
        match children.first().map(|c| c.tag_name().name()) {
            Some("Expr") if children.len() == 1 => self.expr(children[0]).map(BodyItem::Guard),
            Some("Rel") => {
                let rel = children[0];
                self.check_ns(rel, Ns::RuleMl);
                let predicate = match rel.attribute("iri") {
                    Some(iri) => strip_colon(iri).to_string(),
                    None => text_of(rel),
                };
                if predicate.is_empty() {
                    return Err(self.invalid(rel, "empty relation name"));
                }
                let args = children[1..].iter().map(|&c| self.term(c)).collect::<Result<_, _>>()?;
                Ok(BodyItem::Literal(Literal::positive(Atom::new(predicate, args))))
            }
            Some(_) => Err(self.unknown(children[0])),
            None => Err(self.invalid(node, "empty atom")),
        }
    }

    fn expr(&mut self, node: Node) -> Result<Guard, RulebaseError> {
        self.check_ns(node, Ns::RuleMl);
        let children: Vec<Node> = elements(node).collect();
        let [fun, lhs, rhs] = children[..] else {
            return Err(self.invalid(node, "expected `Fun` and two operands"));
        };
        self.expect(fun, "Fun", Ns::RuleMl)?;
        let symbol = text_of(fun);
        let comparator = Comparator::from_symbol(&symbol)
            .ok_or_else(|| self.invalid(fun, &format!("unsupported function `{symbol}`")))?;
        Ok(Guard {
            comparator,
            lhs: self.term(lhs)?,
            rhs: self.term(rhs)?,
        })
    }

    fn term(&mut self, node: Node) -> Result<Term, RulebaseError> {
        self.check_ns(node, Ns::RuleMl);
        let text = text_of(node);
        if text.is_empty() {
            return Err(self.invalid(node, "empty term"));
        }
        match node.tag_name().name() {
            "Var" => Ok(Term::Var(Variable {
                name: text,
                ty: node.attribute("type").map(str::to_string),
            })),
            "Ind" => Ok(Term::individual(&text)),
            _ => Err(self.unknown(node)),
        }
    }

    fn override_statement(&mut self, node: Node) -> Result<(), RulebaseError> {
        self.check_ns(node, Ns::LegalRuleMl);
        for child in elements(node) {
            self.expect(child, "Override", Ns::LegalRuleMl)?;
            let attr = |name| {
                child
                    .attribute(name)
                    .map(str::to_string)
                    .ok_or_else(|| self.invalid(child, &format!("missing `{name}`")))
            };
            let (over, under) = (attr("over")?, attr("under")?);
            self.out.overrides.push(Override { over, under });
        }
        Ok(())
    }
}
