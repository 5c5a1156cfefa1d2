//! Argument graphs built from proof traces.
//!
//! Predicate nodes are proven literals, rule nodes are ground rule instances.
//! Attackers overridden by a superior rule are kept as defeated rule nodes;
//! attackers that failed on an unprovable premise are left out.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::logic::{DefeatReason, ProofRecord, RuleRef, Strength, Tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Predicate,
    Rule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
    /// Proof tag of a predicate node, strongest first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    /// Unground rule a rule node was instantiated from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<Strength>,
    #[serde(default)]
    pub defeated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    PremiseOf,
    Concludes,
    Defeats,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::PremiseOf => "premise-of",
            EdgeKind::Concludes => "concludes",
            EdgeKind::Defeats => "defeats",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
}

/// Nodes sorted by id, edges sorted by (from, to, kind).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

impl ArgumentGraph {
    pub fn node(&self, id: &str) -> Option<&GraphNode> {
        self.nodes
            .binary_search_by(|n| n.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub fn predicate_id(literal: &str) -> String {
    format!("pred:{literal}")
}

pub fn rule_id(instance: &str) -> String {
    format!("rule:{instance}")
}

#[derive(Default)]
struct Builder {
    nodes: BTreeMap<String, GraphNode>,
    edges: BTreeSet<GraphEdge>,
    supporters: BTreeSet<String>,
}

impl Builder {
    fn predicate(&mut self, record: &ProofRecord) -> String {
        let id = predicate_id(&record.conclusion.literal.to_string());
        let tag = record.conclusion.tag;
        let node = self.nodes.entry(id.clone()).or_insert_with(|| GraphNode {
            id: id.clone(),
            kind: NodeKind::Predicate,
            label: record.conclusion.literal.to_string(),
            tag: Some(tag.to_string()),
            source: None,
            strength: None,
            defeated: false,
        });
        if tag == Tag::PlusDelta {
            node.tag = Some(tag.to_string());
        }
        id
    }

    fn rule(&mut self, rule: &RuleRef, defeated: bool) -> String {
        let id = rule_id(&rule.id);
        if !defeated {
            self.supporters.insert(id.clone());
        }
        let node = self.nodes.entry(id.clone()).or_insert_with(|| GraphNode {
            id: id.clone(),
            kind: NodeKind::Rule,
            label: rule.id.clone(),
            tag: None,
            source: Some(rule.source.clone()),
            strength: Some(rule.strength),
            defeated,
        });
        node.defeated = !self.supporters.contains(&id);
        id
    }

    fn edge(&mut self, from: &str, to: &str, kind: EdgeKind) {
        self.edges.insert(GraphEdge {
            from: from.to_string(),
            to: to.to_string(),
            kind,
        });
    }

    fn add(&mut self, record: &ProofRecord) {
        let literal = self.predicate(record);
        if let Some(rule) = &record.supporting_rule {
            let r = self.rule(rule, false);
            self.edge(&r, &literal, EdgeKind::Concludes);
            for premise in &record.premises {
                self.add(premise);
                let p = predicate_id(&premise.conclusion.literal.to_string());
                self.edge(&p, &r, EdgeKind::PremiseOf);
            }
        }
        for defeated in &record.defeated_attackers {
            let DefeatReason::DefeatedBy(winner) = &defeated.reason else {
                continue;
            };
            let w = self.rule(winner, false);
            self.edge(&w, &literal, EdgeKind::Concludes);
            let a = self.rule(&defeated.attacker, true);
            self.edge(&w, &a, EdgeKind::Defeats);
            for premise in &defeated.premises {
                self.add(premise);
                let p = predicate_id(&premise.conclusion.literal.to_string());
                self.edge(&p, &a, EdgeKind::PremiseOf);
            }
        }
    }
}

/// Union of the given traces, deduplicated by literal text and rule id.
pub fn build_graph<'a>(traces: impl IntoIterator<Item = &'a ProofRecord>) -> ArgumentGraph {
    let mut b = Builder::default();
    for record in traces {
        b.add(record);
    }
    ArgumentGraph {
        nodes: b.nodes.into_values().collect(),
        edges: b.edges.into_iter().collect(),
    }
}

fn dot_quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz rendering: predicates as boxes, rules as circles, defeated rules
/// dashed, defeats edges red with a tee head.
pub fn export_dot(graph: &ArgumentGraph) -> String {
    if graph.nodes.is_empty() {
        return "digraph argument {}\n".to_string();
    }
    let mut out = String::from("digraph argument {\n");
    for n in &graph.nodes {
        let shape = match n.kind {
            NodeKind::Predicate => "box",
            NodeKind::Rule => "circle",
        };
        let style = if n.defeated { ", style=dashed" } else { "" };
        let _ = writeln!(
            out,
            "  {} [shape={shape}{style}, label={}];",
            dot_quote(&n.id),
            dot_quote(&n.label)
        );
    }
    for e in &graph.edges {
        let extra = if e.kind == EdgeKind::Defeats {
            ", color=red, arrowhead=tee"
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "  {} -> {} [label={}{extra}];",
            dot_quote(&e.from),
            dot_quote(&e.to),
            dot_quote(e.kind.as_str())
        );
    }
    out.push_str("}\n");
    out
}

pub fn export_json(graph: &ArgumentGraph) -> String {
    serde_json::to_string(graph).expect("graph serialization is infallible")
}

pub fn parse_json(text: &str) -> Result<ArgumentGraph, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::notation::parse_literal;
    use crate::logic::notation::parse_theory;
    use crate::logic::{ground_theory, Conclusion, ConflictDeclaration, Reasoner};

    fn minor_graph() -> ArgumentGraph {
        let mut t = parse_theory(
            "r1: max_imprisonment(Offence, X), X <= 10 => jurisdiction_level(Offence, basic)\n\
             r2: max_imprisonment(Offence, X), X > 10 => jurisdiction_level(Offence, higher)\n\
             r3: is_minor(Defendant) => jurisdiction_level(Offence, higher)\n\
             r1 < r3\n\
             fact max_imprisonment(o1, 8)\n\
             fact is_minor(d1)\n",
        )
        .unwrap();
        t.conflicts.push(ConflictDeclaration::new("jurisdiction_level", 2));
        let gt = ground_theory(&t).unwrap();
        let r = Reasoner::new(&gt);
        let goal = Conclusion::new(
            Tag::PlusPartial,
            parse_literal("jurisdiction_level(o1, higher)").unwrap(),
        );
        build_graph([&r.trace(&goal).unwrap()])
    }

    #[test]
    fn minor_scenario_graph() {
        let g = minor_graph();
        let ids: Vec<_> = g.nodes.iter().map(|n| n.id.as_str()).collect();
        assert_eq!(
            ids,
            [
                "pred:is_minor(d1)",
                "pred:jurisdiction_level(o1, higher)",
                "pred:max_imprisonment(o1, 8)",
                "rule:r1#0",
                "rule:r3#0",
            ]
        );
        assert!(g.node("rule:r1#0").unwrap().defeated);
        assert!(!g.node("rule:r3#0").unwrap().defeated);
        assert_eq!(g.node("rule:r3#0").unwrap().source.as_deref(), Some("r3"));
        let edges: BTreeSet<_> = g
            .edges
            .iter()
            .map(|e| (e.from.as_str(), e.to.as_str(), e.kind))
            .collect();
        let expected: BTreeSet<_> = [
            ("pred:is_minor(d1)", "rule:r3#0", EdgeKind::PremiseOf),
            ("rule:r3#0", "pred:jurisdiction_level(o1, higher)", EdgeKind::Concludes),
            ("rule:r3#0", "rule:r1#0", EdgeKind::Defeats),
            ("pred:max_imprisonment(o1, 8)", "rule:r1#0", EdgeKind::PremiseOf),
        ]
        .into_iter()
        .collect();
        assert_eq!(edges, expected);
    }

    #[test]
    fn exports() {
        let empty = ArgumentGraph::default();
        assert_eq!(export_dot(&empty), "digraph argument {}\n");
        assert_eq!(export_json(&empty), r#"{"nodes":[],"edges":[]}"#);
        assert!(build_graph([]).is_empty());

        let g = minor_graph();
        let dot = export_dot(&g);
        assert_eq!(dot.matches("style=dashed").count(), 1);
        assert!(dot.contains(r#""rule:r1#0" [shape=circle, style=dashed, label="r1#0"];"#));
        assert_eq!(dot.matches(r#"[label="defeats""#).count(), 1);
        assert_eq!(parse_json(&export_json(&g)).unwrap(), g);
        assert_eq!(export_json(&g), export_json(&minor_graph()));
    }
}
