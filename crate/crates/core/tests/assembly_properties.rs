use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use chrono::NaiveDate;
use docasm_core::config::{collect_dependencies, parse_config, serialize_config, InterviewConfig};
use docasm_core::facts::{
    answers_to_atoms, parse_fact_document, serialize_fact_document, FactDocument, FactEntry, FactValue,
};
use docasm_core::graph::{EdgeKind, NodeKind};
use docasm_core::logic::notation::parse_theory;
use docasm_core::logic::{Decimal, Tag};
use docasm_core::session::{AnswerInput, Session};
use docasm_core::template::{render, validate_output, RenderMode};
use docasm_testkit::load_config;
use proptest::prelude::*;

fn value() -> impl Strategy<Value = FactValue> {
    prop_oneof![
        "[^\\x00-\\x1f\\x7f\\u{fffe}\\u{ffff}]{0,12}".prop_map(FactValue::Text),
        (-1_000_000_000i64..1_000_000_000, 0u32..4).prop_map(|(n, scale)| {
            let text = format!("{}", n as f64 / 10f64.powi(scale as i32));
            FactValue::Number(text.parse::<Decimal>().unwrap_or(Decimal::from_integer(n)))
        }),
        any::<bool>().prop_map(FactValue::Boolean),
        (1i32..9999, 1u32..13, 1u32..29)
            .prop_map(|(y, m, d)| FactValue::Date(NaiveDate::from_ymd_opt(y, m, d).unwrap())),
    ]
}

fn entries() -> impl Strategy<Value = Vec<FactEntry>> {
    prop::collection::vec(
        ("[a-z][a-z_]{0,7}", value()).prop_map(|(n, v)| FactEntry::new(n, v)),
        0..8,
    )
}

fn jurisdiction() -> Arc<docasm_core::config::LoadedConfig> {
    Arc::new(load_config("jurisdiction/config.xml"))
}

fn indictment() -> Arc<docasm_core::config::LoadedConfig> {
    Arc::new(load_config("indictment/config.xml"))
}

fn indictment_answers() -> impl Strategy<Value = BTreeMap<u32, FactValue>> {
    let names = "[A-Z][a-z]{1,6}( [A-Z][a-z]{1,6})?".prop_map(FactValue::Text);
    let dates = (1950i32..2020, 1u32..13, 1u32..29)
        .prop_map(|(y, m, d)| FactValue::Date(NaiveDate::from_ymd_opt(y, m, d).unwrap()));
    let years = (0i64..=40).prop_map(|n| FactValue::Number(Decimal::from_integer(n)));
    (
        prop::option::of(names),
        prop::option::of(dates),
        prop::option::of(years),
        prop::option::of(any::<bool>().prop_map(FactValue::Boolean)),
    )
        .prop_map(|(a, b, c, d)| {
            [a, b, c, d]
                .into_iter()
                .enumerate()
                .filter_map(|(i, v)| v.map(|v| (i as u32 + 1, v)))
                .collect()
        })
}

fn entry_doc(config: &InterviewConfig, answers: &BTreeMap<u32, FactValue>) -> FactDocument {
    config
        .steps
        .iter()
        .filter_map(|s| {
            answers
                .get(&s.order)
                .map(|v| FactEntry::new(s.entry.clone(), v.clone()))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fact_documents_round_trip(entries in entries()) {
        let doc: FactDocument = entries.into_iter().collect();
        let xml = serialize_fact_document(&doc);
        prop_assert_eq!(parse_fact_document(&xml).unwrap(), doc);
    }

    #[test]
    fn answering_more_never_drops_atoms(answers in indictment_answers(), extra in 1u32..=4, v in any::<bool>()) {
        let loaded = indictment();
        let config = &loaded.config;
        let before = answers_to_atoms(config, &entry_doc(config, &answers)).unwrap();
        let mut more = answers.clone();
        more.entry(extra).or_insert_with(|| match extra {
            1 => FactValue::Text("Jane Roe".into()),
            2 => FactValue::Date(NaiveDate::from_ymd_opt(2001, 2, 3).unwrap()),
            3 => FactValue::Number(Decimal::from_integer(11)),
            _ => FactValue::Boolean(v),
        });
        let after: BTreeSet<_> = answers_to_atoms(config, &entry_doc(config, &more)).unwrap().into_iter().collect();
        prop_assert!(before.iter().all(|a| after.contains(a)));
    }

    #[test]
    fn dependency_closure_is_a_fixpoint(edges in prop::collection::vec((0usize..6, prop::collection::vec(0usize..6, 1..3)), 1..8)) {
        let text: String = edges
            .iter()
            .enumerate()
            .map(|(i, (head, body))| {
                let body: Vec<_> = body.iter().map(|b| format!("p{b}")).collect();
                format!("r{i}: {} => p{head}\n", body.join(", "))
            })
            .collect();
        let theory = parse_theory(&text).unwrap();
        let goal = format!("p{}", edges[0].0);
        let deps: BTreeSet<String> = collect_dependencies(&theory, &goal).unwrap().into_iter().collect();
        for p in &deps {
            let again = collect_dependencies(&theory, p).unwrap();
            prop_assert!(again.iter().all(|q| deps.contains(q)), "{} reaches outside {:?}", p, deps);
        }
    }

    #[test]
    fn draft_renders_are_deterministic_and_monotone(answers in indictment_answers(), extra in 1u32..=4) {
        let loaded = indictment();
        let a = Session::restore("a", loaded.clone(), answers.clone()).unwrap();
        let b = Session::restore("b", loaded.clone(), answers.clone()).unwrap();
        prop_assert_eq!(a.snapshot(), b.snapshot());
        prop_assert!(validate_output(a.snapshot().document.as_bytes()).is_valid());

        let direct = render(&loaded.template, &a.snapshot().facts, RenderMode::Draft).unwrap();
        prop_assert_eq!(direct.unresolved.clone(), a.snapshot().unresolved.clone());

        let mut more = answers.clone();
        more.entry(extra).or_insert_with(|| match extra {
            1 => FactValue::Text("Jane Roe".into()),
            2 => FactValue::Date(NaiveDate::from_ymd_opt(2001, 2, 3).unwrap()),
            3 => FactValue::Number(Decimal::from_integer(11)),
            _ => FactValue::Boolean(false),
        });
        let c = Session::restore("c", loaded, more).unwrap();
        let before: BTreeSet<_> = a.snapshot().unresolved.iter().collect();
        prop_assert!(c.snapshot().unresolved.iter().all(|n| before.contains(n)));
        if c.is_complete() {
            prop_assert!(!c.snapshot().document.contains("<placeholder"));
        }
    }

    #[test]
    fn revision_matches_fresh_session(max in 0i64..30, minor in any::<bool>(), revised_max in 0i64..30, step in 1u32..=2) {
        let loaded = jurisdiction();
        let mut s = Session::start(loaded.clone()).unwrap();
        s.submit(&AnswerInput::Number(max.into())).unwrap();
        s.submit(&AnswerInput::Boolean(minor)).unwrap();
        let input = if step == 1 { AnswerInput::Number(revised_max.into()) } else { AnswerInput::Boolean(!minor) };
        let revised = s.revise(step, &input).unwrap().clone();
        let fresh = Session::restore("fresh", loaded, s.answers().clone()).unwrap();
        prop_assert_eq!(&revised, fresh.snapshot());
    }

    #[test]
    fn graphs_are_sound_and_connected(answers in indictment_answers()) {
        let s = Session::restore("g", indictment(), answers).unwrap();
        let snap = s.snapshot();
        let g = &snap.graph;
        let ids: BTreeSet<_> = g.nodes.iter().map(|n| n.id.as_str()).collect();
        prop_assert_eq!(ids.len(), g.nodes.len());
        for e in &g.edges {
            prop_assert!(ids.contains(e.from.as_str()) && ids.contains(e.to.as_str()));
            let (from, to) = (g.node(&e.from).unwrap().kind, g.node(&e.to).unwrap().kind);
            let expected = match e.kind {
                EdgeKind::PremiseOf => (NodeKind::Predicate, NodeKind::Rule),
                EdgeKind::Concludes => (NodeKind::Rule, NodeKind::Predicate),
                EdgeKind::Defeats => (NodeKind::Rule, NodeKind::Rule),
            };
            prop_assert_eq!((from, to), expected);
        }
        let proven: BTreeSet<String> = snap
            .conclusions
            .iter()
            .filter(|c| matches!(c.tag, Tag::PlusDelta | Tag::PlusPartial))
            .map(|c| c.literal.to_string())
            .collect();
        for n in &g.nodes {
            match n.kind {
                NodeKind::Predicate => {
                    prop_assert!(proven.contains(&n.label));
                    let concluded = g.edges.iter().any(|e| e.to == n.id && e.kind == EdgeKind::Concludes);
                    let definite = snap.conclusions.iter().any(|c| c.tag == Tag::PlusDelta && c.literal.to_string() == n.label);
                    prop_assert!(concluded || definite, "{} lacks a concluding rule", n.id);
                }
                NodeKind::Rule => {
                    prop_assert!(g.edges.iter().any(|e| e.from == n.id || e.to == n.id));
                    if !n.defeated {
                        let head = g.edges.iter().find(|e| e.from == n.id && e.kind == EdgeKind::Concludes);
                        let sound = head.is_some_and(|e| {
                            let label = &g.node(&e.to).unwrap().label;
                            snap.conclusions.iter().any(|c| c.tag == Tag::PlusPartial && &c.literal.to_string() == label)
                        });
                        prop_assert!(sound, "{} concludes nothing proven", n.id);
                    }
                }
            }
        }
    }
}

#[test]
fn config_xml_round_trips_with_awkward_text() {
    let loaded = jurisdiction();
    let mut config = loaded.config.clone();
    config.steps[0].question = "Penalty < 10 & \"quoted\" 'apostrophes'?".into();
    config.steps[1].explanation = None;
    config.title = "A & B".into();
    let xml = serialize_config(&config);
    assert_eq!(parse_config(&xml).unwrap(), config);
}
