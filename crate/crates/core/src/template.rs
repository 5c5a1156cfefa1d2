//! ToXgene-subset templates rendered into an Akoma Ntoso `doc` envelope.
//!
//! Supported vocabulary: `element` (with `name`), `complexType` (transparent),
//! `tox-value`, `tox-sample` over `[fact_list/fact]` filtered by
//! `EQ([name],'…')`, and `tox-expr value="[value]"`.

use std::sync::LazyLock;

use regex::Regex;
use roxmltree::{Document, Node};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::facts::{FactDocument, FactEntry};
use crate::xml::{escape_text, start_tag, XmlWriter};

pub const AKN_NS: &str = "http://docs.oasis-open.org/legaldocml/ns/akn/3.0";
pub const FACT_PATH: &str = "[fact_list/fact]";

static WHERE_RE: LazyLock<Regex> = LazyLock::new(|| {
    // closing quote and closing paren are each optional
    Regex::new(r"^\s*EQ\(\s*\[([A-Za-z_][A-Za-z0-9_]*)\]\s*,\s*'([^')]*)'?\s*\)?\s*$").unwrap()
});

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateNode {
    Element {
        name: String,
        children: Vec<TemplateNode>,
    },
    Text(String),
    Sample {
        path: String,
        field: String,
        constant: String,
        duplicates: bool,
        children: Vec<TemplateNode>,
    },
    Expr {
        value: String,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("unsupported template element `{name}` at line {line}")]
    UnsupportedElement { name: String, line: u32 },
    #[error("line {line}: bad where expression `{text}`")]
    BadWhere { text: String, line: u32 },
    #[error("line {line}: {message}")]
    Invalid { line: u32, message: String },
    #[error("no fact entry named `{0}`")]
    MissingEntry(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    root: TemplateNode,
    required: Vec<String>,
}

impl Template {
    pub fn root(&self) -> &TemplateNode {
        &self.root
    }

    /// Entry names named by sample filters, in first-occurrence order.
    pub fn required_entries(&self) -> &[String] {
        &self.required
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderMode {
    Draft,
    Final,
}

impl RenderMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RenderMode::Draft => "draft",
            RenderMode::Final => "final",
        }
    }
}

/// Metadata written into the envelope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub document_type: String,
    pub title: String,
    pub configuration: String,
    /// Left empty unless set, so renders stay reproducible.
    pub generated: Option<String>,
}

impl Default for Envelope {
    fn default() -> Self {
        Envelope {
            document_type: "document".into(),
            title: String::new(),
            configuration: String::new(),
            generated: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RenderedDocument {
    pub xml: String,
    pub mode: RenderMode,
    pub unresolved: Vec<String>,
}

pub fn parse_template(text: &str) -> Result<Template, TemplateError> {
    let doc = Document::parse(text).map_err(|e| TemplateError::MalformedXml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "element" {
        return Err(unsupported(&doc, root));
    }
    let root = parse_node(&doc, root, false)?;
    let mut required = Vec::new();
    collect_required(&root, &mut required);
    Ok(Template { root, required })
}

fn line_of(doc: &Document, node: Node) -> u32 {
    doc.text_pos_at(node.range().start).row
}

fn unsupported(doc: &Document, node: Node) -> TemplateError {
    TemplateError::UnsupportedElement {
        name: node.tag_name().name().to_string(),
        line: line_of(doc, node),
    }
}

fn parse_children(doc: &Document, node: Node, bound: bool) -> Result<Vec<TemplateNode>, TemplateError> {
    let mut out = Vec::new();
    for child in node.children() {
        if child.is_text() {
            if child.text().is_some_and(|t| !t.trim().is_empty()) {
                return Err(TemplateError::Invalid {
                    line: line_of(doc, child),
                    message: "bare text must be wrapped in tox-value".into(),
                });
            }
        } else if child.is_element() {
            if child.tag_name().name() == "complexType" {
                out.extend(parse_children(doc, child, bound)?);
            } else {
                out.push(parse_node(doc, child, bound)?);
            }
        }
    }
    Ok(out)
}

fn parse_node(doc: &Document, node: Node, bound: bool) -> Result<TemplateNode, TemplateError> {
    let line = line_of(doc, node);
    let attr = |name: &str| {
        node.attribute(name).ok_or_else(|| TemplateError::Invalid {
            line,
            message: format!("`{}` requires attribute `{name}`", node.tag_name().name()),
        })
    };
    Ok(match node.tag_name().name() {
        "element" => {
            let name = attr("name")?;
            if !is_xml_name(name) {
                return Err(TemplateError::Invalid {
                    line,
                    message: format!("`{name}` is not an element name"),
                });
            }
            TemplateNode::Element {
                name: name.to_string(),
                children: parse_children(doc, node, bound)?,
            }
        }
        "tox-value" => {
            if node.children().any(|c| c.is_element()) {
                return Err(TemplateError::Invalid {
                    line,
                    message: "tox-value holds text only".into(),
                });
            }
            TemplateNode::Text(node.text().unwrap_or("").to_string())
        }
        "tox-sample" => {
            let path = attr("path")?;
            if path != FACT_PATH {
                return Err(TemplateError::Invalid {
                    line,
                    message: format!("unsupported sample path `{path}`"),
                });
            }
            let text = attr("where")?;
            let caps = WHERE_RE
                .captures(text)
                .filter(|c| &c[1] == "name")
                .ok_or_else(|| TemplateError::BadWhere {
                    text: text.to_string(),
                    line,
                })?;
            let duplicates = match node.attribute("duplicates").unwrap_or("no") {
                "yes" => true,
                "no" => false,
                other => {
                    return Err(TemplateError::Invalid {
                        line,
                        message: format!("duplicates must be yes or no, found `{other}`"),
                    })
                }
            };
            TemplateNode::Sample {
                path: path.to_string(),
                field: caps[1].to_string(),
                constant: caps[2].to_string(),
                duplicates,
                children: parse_children(doc, node, true)?,
            }
        }
        "tox-expr" => {
            let value = attr("value")?;
            if value != "[value]" {
                return Err(TemplateError::Invalid {
                    line,
                    message: format!("unsupported expression `{value}`"),
                });
            }
            if !bound {
                return Err(TemplateError::Invalid {
                    line,
                    message: "tox-expr outside tox-sample".into(),
                });
            }
            TemplateNode::Expr {
                value: value.to_string(),
            }
        }
        _ => return Err(unsupported(doc, node)),
    })
}

fn is_xml_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn collect_required(node: &TemplateNode, out: &mut Vec<String>) {
    match node {
        TemplateNode::Element { children, .. } => children.iter().for_each(|c| collect_required(c, out)),
        TemplateNode::Sample { constant, children, .. } => {
            if !out.contains(constant) {
                out.push(constant.clone());
            }
            children.iter().for_each(|c| collect_required(c, out));
        }
        TemplateNode::Text(_) | TemplateNode::Expr { .. } => {}
    }
}

pub fn render(template: &Template, facts: &FactDocument, mode: RenderMode) -> Result<RenderedDocument, TemplateError> {
    render_with(template, facts, mode, &Envelope::default())
}

pub fn render_with(
    template: &Template,
    facts: &FactDocument,
    mode: RenderMode,
    envelope: &Envelope,
) -> Result<RenderedDocument, TemplateError> {
    let mut body = String::new();
    let mut unresolved = Vec::new();
    emit(&template.root, facts, None, mode, &mut body, &mut unresolved)?;

    let mut w = XmlWriter::new().declaration();
    w.open("akomaNtoso", &[("xmlns", AKN_NS)]);
    w.open("doc", &[("name", &envelope.document_type)]);
    w.open("meta", &[]);
    w.open("identification", &[("source", "#docasm")]);
    w.leaf("documentType", &[], &envelope.document_type);
    match &envelope.generated {
        Some(when) => w.leaf("generated", &[], when),
        None => w.empty("generated", &[]),
    }
    w.leaf("configuration", &[], &envelope.configuration);
    w.close("identification");
    w.open("proprietary", &[("source", "#docasm")]);
    w.leaf("status", &[], mode.as_str());
    w.close("proprietary");
    w.close("meta");
    w.open("preface", &[]);
    w.leaf("docTitle", &[], &envelope.title);
    w.close("preface");
    w.open("mainBody", &[]);
    w.raw_line(&body);
    w.close("mainBody");
    w.close("doc");
    w.close("akomaNtoso");
    Ok(RenderedDocument {
        xml: w.finish(),
        mode,
        unresolved,
    })
}

fn emit(
    node: &TemplateNode,
    facts: &FactDocument,
    bound: Option<&FactEntry>,
    mode: RenderMode,
    out: &mut String,
    unresolved: &mut Vec<String>,
) -> Result<(), TemplateError> {
    match node {
        TemplateNode::Element { name, children } => {
            if children.is_empty() {
                start_tag(out, name, &[], true);
                return Ok(());
            }
            start_tag(out, name, &[], false);
            for child in children {
                emit(child, facts, bound, mode, out, unresolved)?;
            }
            out.push_str("</");
            out.push_str(name);
            out.push('>');
        }
        TemplateNode::Text(text) => out.push_str(&escape_text(text)),
        TemplateNode::Sample { constant, children, .. } => match facts.entries().iter().find(|e| &e.name == constant) {
            Some(entry) => {
                for child in children {
                    emit(child, facts, Some(entry), mode, out, unresolved)?;
                }
            }
            None if mode == RenderMode::Final => return Err(TemplateError::MissingEntry(constant.clone())),
            None => {
                start_tag(out, "placeholder", &[("name", constant)], true);
                if !unresolved.contains(constant) {
                    unresolved.push(constant.clone());
                }
            }
        },
        TemplateNode::Expr { .. } => {
            let entry = bound.expect("parser rejects unbound tox-expr");
            start_tag(out, "value", &[("name", &entry.name)], false);
            out.push_str(&escape_text(&entry.value.to_string()));
            out.push_str("</value>");
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn elements<'a, 'i>(n: Node<'a, 'i>) -> Vec<Node<'a, 'i>> {
    n.children().filter(|c| c.is_element()).collect()
}

/// Structural checks on a rendered document: envelope shape and named
/// semantic elements. Not a schema validation.
pub fn validate_output(bytes: &[u8]) -> ValidationReport {
    let mut violations = Vec::new();
    if bytes.starts_with(&[0xEF, 0xBB, 0xBF]) {
        violations.push("byte-order mark present".to_string());
    }
    let Ok(text) = std::str::from_utf8(bytes) else {
        violations.push("not UTF-8".to_string());
        return ValidationReport { violations };
    };
    let doc = match Document::parse(text.trim_start_matches('\u{feff}')) {
        Ok(d) => d,
        Err(_) => {
            violations.push("not well-formed".to_string());
            return ValidationReport { violations };
        }
    };
    let root = doc.root_element();
    if root.tag_name().name() != "akomaNtoso" || root.tag_name().namespace() != Some(AKN_NS) {
        violations.push("root is not akomaNtoso".to_string());
    }
    match elements(root).as_slice() {
        [doc_el] if doc_el.tag_name().name() == "doc" => {
            if doc_el.attribute("name").is_none() {
                violations.push("doc has no name".to_string());
            }
            let parts: Vec<_> = elements(*doc_el)
                .iter()
                .map(|c| c.tag_name().name().to_string())
                .collect();
            for (i, part) in ["meta", "preface", "mainBody"].iter().enumerate() {
                if parts.get(i).map(String::as_str) != Some(part) {
                    violations.push(format!("doc lacks {part} in position {}", i + 1));
                }
            }
            if let Some(meta) = elements(*doc_el).first().filter(|m| m.has_tag_name((AKN_NS, "meta"))) {
                if !meta.children().any(|c| c.tag_name().name() == "identification") {
                    violations.push("meta lacks identification".to_string());
                }
            }
        }
        _ => violations.push("akomaNtoso must contain exactly one doc".to_string()),
    }
    for node in root.descendants().filter(|n| n.is_element()) {
        let name = node.tag_name().name();
        if (name == "value" || name == "placeholder") && node.attribute("name").is_none_or(str::is_empty) {
            violations.push(format!("{name} element without name at line {}", line_of(&doc, node)));
        }
    }
    ValidationReport { violations }
}
