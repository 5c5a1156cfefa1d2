//! Interview sessions. Every mutation reruns the full pipeline (answers →
//! atoms → grounding → proof → exported entries → render → traces → graph), so
//! a snapshot is a pure function of the config and the answer map.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{InterviewStep, LoadedConfig};
use crate::facts::{answers_to_atoms, conclusions_to_entries, FactDocument, FactEntry, FactValue, ValueKind};
use crate::graph::{build_graph, ArgumentGraph};
use crate::logic::{ground_theory, Conclusion, ConclusionSet, Decimal, Reasoner, Tag};
use crate::template::{render_with, Envelope, RenderMode, TemplateError};

/// A raw answer as received over JSON: a boolean, a number or a string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnswerInput {
    Boolean(bool),
    Number(serde_json::Number),
    Text(String),
}

impl From<&FactValue> for AnswerInput {
    fn from(value: &FactValue) -> Self {
        match value {
            FactValue::Boolean(b) => AnswerInput::Boolean(*b),
            other => AnswerInput::Text(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("step {step} expects a {expected}: {message}")]
    Validation {
        expected: ValueKind,
        step: u32,
        message: String,
    },
    #[error("the interview is complete")]
    Complete,
    #[error("step {0} has not been answered")]
    NotAnswered(u32),
    #[error("no step {0}")]
    UnknownStep(u32),
    #[error("assembly failed: {0}")]
    Pipeline(String),
}

/// Checks `input` against the step's kind and bounds.
pub fn coerce_answer(step: &InterviewStep, input: &AnswerInput) -> Result<FactValue, SessionError> {
    let fail = |message: String| SessionError::Validation {
        expected: step.kind,
        step: step.order,
        message,
    };
    let value = match (step.kind, input) {
        (ValueKind::Boolean, AnswerInput::Boolean(b)) => FactValue::Boolean(*b),
        (ValueKind::Number, AnswerInput::Number(n)) => {
            let n: Decimal = n.to_string().parse().map_err(|e| fail(format!("{e}")))?;
            FactValue::Number(n)
        }
        (ValueKind::Text, AnswerInput::Text(t)) if t.trim().is_empty() => return Err(fail("empty text".into())),
        (kind, AnswerInput::Text(t)) => kind.parse_value(t).map_err(|e| fail(e.to_string()))?,
        (_, other) => return Err(fail(format!("got {other:?}"))),
    };
    if let FactValue::Number(n) = &value {
        if step.min.is_some_and(|min| *n < min) || step.max.is_some_and(|max| *n > max) {
            let bound = |b: Option<Decimal>| b.map_or("∞".to_string(), |d| d.to_string());
            return Err(fail(format!(
                "{n} is outside [{}, {}]",
                bound(step.min),
                bound(step.max)
            )));
        }
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    InProgress,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProgressItem {
    pub order: u32,
    pub entry: String,
    pub question: String,
    pub kind: ValueKind,
    pub answered: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer: Option<FactValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurrentQuestion {
    pub order: u32,
    pub total: u32,
    pub entry: String,
    pub question: String,
    pub kind: ValueKind,
    pub explanation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<Decimal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<Decimal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Snapshot {
    pub status: Status,
    pub progress: Vec<ProgressItem>,
    pub current: Option<CurrentQuestion>,
    pub conclusions: ConclusionSet,
    /// Entries handed to the template: answers followed by exported conclusions.
    pub facts: FactDocument,
    pub document: String,
    pub mode: RenderMode,
    pub unresolved: Vec<String>,
    pub graph: ArgumentGraph,
}

/// Computes the snapshot for an answer map.
pub fn assemble(loaded: &LoadedConfig, answers: &BTreeMap<u32, FactValue>) -> Result<Snapshot, SessionError> {
    let config = &loaded.config;
    let pipeline = |e: &dyn std::fmt::Display| SessionError::Pipeline(e.to_string());

    let answered: FactDocument = config
        .steps
        .iter()
        .filter_map(|s| {
            answers
                .get(&s.order)
                .map(|v| FactEntry::new(s.entry.clone(), v.clone()))
        })
        .collect();
    let atoms = answers_to_atoms(config, &answered).map_err(|e| pipeline(&e))?;

    let mut theory = loaded.theory.clone();
    for atom in atoms {
        if !theory.facts.contains(&atom) {
            theory.facts.push(atom);
        }
    }
    theory.conflicts.extend(config.conflicts.iter().cloned());
    let ground = ground_theory(&theory).map_err(|e| pipeline(&e))?;
    let reasoner = Reasoner::new(&ground);
    let conclusions = reasoner.conclusions();

    let mut facts = answered;
    for entry in conclusions_to_entries(&conclusions, config) {
        facts.insert(entry);
    }

    let complete = config.steps.iter().all(|s| answers.contains_key(&s.order));
    let envelope = Envelope {
        document_type: config.id.clone(),
        title: config.title.clone(),
        configuration: config.id.clone(),
        generated: None,
    };
    let rendered = if complete {
        match render_with(&loaded.template, &facts, RenderMode::Final, &envelope) {
            // A derived entry can stay unproven even with every answer given.
            Err(TemplateError::MissingEntry(_)) => render_with(&loaded.template, &facts, RenderMode::Draft, &envelope),
            other => other,
        }
    } else {
        render_with(&loaded.template, &facts, RenderMode::Draft, &envelope)
    }
    .map_err(|e| pipeline(&e))?;

    let traces = conclusions
        .with_tag(Tag::PlusPartial)
        .filter(|l| !l.negated && config.exports.iter().any(|x| x.predicate == l.atom.predicate))
        .map(|l| reasoner.trace(&Conclusion::new(Tag::PlusPartial, l.clone())))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| pipeline(&e))?;
    let graph = build_graph(&traces);

    let total = config.steps.len() as u32;
    let progress = config
        .steps
        .iter()
        .map(|s| ProgressItem {
            order: s.order,
            entry: s.entry.clone(),
            question: s.question.clone(),
            kind: s.kind,
            answered: answers.contains_key(&s.order),
            answer: answers.get(&s.order).cloned(),
        })
        .collect();
    let current = config
        .steps
        .iter()
        .find(|s| !answers.contains_key(&s.order))
        .map(|s| CurrentQuestion {
            order: s.order,
            total,
            entry: s.entry.clone(),
            question: s.question.clone(),
            kind: s.kind,
            explanation: s.explanation.clone(),
            min: s.min,
            max: s.max,
        });

    Ok(Snapshot {
        status: if complete { Status::Complete } else { Status::InProgress },
        progress,
        current,
        conclusions,
        facts,
        document: rendered.xml,
        mode: rendered.mode,
        unresolved: rendered.unresolved,
        graph,
    })
}

/// One interview. Mutations must be serialized by the caller; reads of the
/// stored snapshot are free.
#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    loaded: Arc<LoadedConfig>,
    answers: BTreeMap<u32, FactValue>,
    snapshot: Snapshot,
}

impl Session {
    pub fn start(loaded: Arc<LoadedConfig>) -> Result<Self, SessionError> {
        Self::restore(uuid::Uuid::new_v4().to_string(), loaded, BTreeMap::new())
    }

    /// Rebuilds a session from persisted answers, re-checking each one.
    pub fn restore(
        id: impl Into<String>,
        loaded: Arc<LoadedConfig>,
        answers: BTreeMap<u32, FactValue>,
    ) -> Result<Self, SessionError> {
        for (order, value) in &answers {
            let step = loaded.config.step(*order).ok_or(SessionError::UnknownStep(*order))?;
            coerce_answer(step, &AnswerInput::from(value))?;
        }
        let snapshot = assemble(&loaded, &answers)?;
        Ok(Session {
            id: id.into(),
            loaded,
            answers,
            snapshot,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &Arc<LoadedConfig> {
        &self.loaded
    }

    pub fn answers(&self) -> &BTreeMap<u32, FactValue> {
        &self.answers
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.snapshot
    }

    pub fn is_complete(&self) -> bool {
        self.snapshot.status == Status::Complete
    }

    /// The lowest-ordered unanswered step.
    pub fn current_step(&self) -> Option<&InterviewStep> {
        self.loaded
            .config
            .steps
            .iter()
            .find(|s| !self.answers.contains_key(&s.order))
    }

    /// Answers the current step. On error the session is unchanged.
    pub fn submit(&mut self, input: &AnswerInput) -> Result<&Snapshot, SessionError> {
        let step = self.current_step().ok_or(SessionError::Complete)?;
        let value = coerce_answer(step, input)?;
        let order = step.order;
        self.apply(order, value)
    }

    /// Replaces an earlier answer, keeping all others.
    pub fn revise(&mut self, order: u32, input: &AnswerInput) -> Result<&Snapshot, SessionError> {
        let step = self.loaded.config.step(order).ok_or(SessionError::UnknownStep(order))?;
        if !self.answers.contains_key(&order) {
            return Err(SessionError::NotAnswered(order));
        }
        let value = coerce_answer(step, input)?;
        self.apply(order, value)
    }

    fn apply(&mut self, order: u32, value: FactValue) -> Result<&Snapshot, SessionError> {
        let mut answers = self.answers.clone();
        answers.insert(order, value);
        let snapshot = assemble(&self.loaded, &answers)?;
        tracing::debug!(session = %self.id, step = order, status = ?snapshot.status, "reassembled");
        self.answers = answers;
        self.snapshot = snapshot;
        Ok(&self.snapshot)
    }
}
