use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use docasm_core::facts::FactValue;
use docasm_core::graph::{export_dot, export_json};
use docasm_core::session::{AnswerInput, Session};
use docasm_testkit::{fixture, load_config, read_fixture};

fn docasm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_docasm"))
        .args(args)
        .env_remove("DOCASM_LOG")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate_recognises_each_input_kind() {
    for (file, expected) in [
        (
            "jurisdiction/config.xml",
            "ok: config `jurisdiction` with 2 steps over 3 rules",
        ),
        ("templates/listing5.xml", "ok: template naming"),
        ("listings/listings.lrml.xml", "ok: 3 rules, 1 superiorities"),
        ("theories/jurisdiction.dl", "ok: "),
    ] {
        let out = docasm(&["validate", path(&fixture(file))]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{file}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(stdout(&out).starts_with(expected), "{file}: {}", stdout(&out));
    }
}

#[test]
fn exit_codes_separate_bad_input_from_invalid_content() {
    let dir = tempfile::tempdir().unwrap();
    let missing = docasm(&["validate", path(&dir.path().join("absent.xml"))]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error: reading"));

    let bad_template = dir.path().join("t.xml");
    fs::write(&bad_template, "<element name=\"a\">loose text</element>").unwrap();
    assert_eq!(docasm(&["validate", path(&bad_template)]).status.code(), Some(1));

    let unknown_goal = docasm(&["deps", path(&fixture("listings/listings.lrml.xml")), "nope"]);
    assert_eq!(unknown_goal.status.code(), Some(1));

    assert_eq!(docasm(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn prove_prints_ground_theory_conclusions_and_proof() {
    let out = docasm(&[
        "prove",
        path(&fixture("listings/listings.lrml.xml")),
        path(&fixture("jurisdiction/facts-minor.xml")),
        "--conflicts",
        "jurisdiction_level@2",
        "--positive",
        "--explain",
        "jurisdiction_level(o1, higher)",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("loc_art22para1#0 < loc_art23para1point3#0\n"));
    assert!(text.contains("+∂ jurisdiction_level(o1, higher)\n"));
    assert!(!text.contains("+∂ jurisdiction_level(o1, basic)"));
    assert!(!text.contains("-∂"));
    assert!(text.ends_with(
        "# proof\n\
         +∂ jurisdiction_level(o1, higher) via loc_art23para1point3#0 (loc_art23para1point3)\n  \
         +∂ defendant_is_minor(d1) fact\n  \
         defeated loc_art22para1#0 by loc_art23para1point3#0\n"
    ));

    let unprovable = docasm(&[
        "prove",
        path(&fixture("listings/listings.lrml.xml")),
        path(&fixture("jurisdiction/facts-minor.xml")),
        "--conflicts",
        "jurisdiction_level@2",
        "--explain",
        "jurisdiction_level(o1, basic)",
    ]);
    assert_eq!(unprovable.status.code(), Some(1));
}

#[test]
fn deps_lists_dependencies() {
    let rb = fixture("listings/listings.lrml.xml");
    let out = docasm(&["deps", path(&rb), "jurisdiction_level", "--askable"]);
    assert_eq!(stdout(&out), "defendant_is_minor\nmax_imprisonment\n");
}

#[test]
fn build_config_reproduces_the_fixture() {
    let out = docasm(&["build-config", path(&fixture("jurisdiction/assignments.toml"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out), read_fixture("jurisdiction/config.xml"));

    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("config.xml");
    let out = docasm(&[
        "build-config",
        path(&fixture("jurisdiction/assignments.toml")),
        "-o",
        path(&target),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(target).unwrap(),
        read_fixture("jurisdiction/config.xml")
    );
}

#[test]
fn assemble_matches_an_interactive_session() {
    let dir = tempfile::tempdir().unwrap();
    let out = docasm(&[
        "assemble",
        path(&fixture("jurisdiction/config.xml")),
        path(&fixture("jurisdiction/answers-minor.xml")),
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 3);

    let mut session = Session::start(Arc::new(load_config("jurisdiction/config.xml"))).unwrap();
    session.submit(&AnswerInput::from(&FactValue::infer("8"))).unwrap();
    session.submit(&AnswerInput::from(&FactValue::Boolean(true))).unwrap();
    let snap = session.snapshot();
    assert_eq!(
        fs::read_to_string(dir.path().join("jurisdiction.xml")).unwrap(),
        snap.document
    );
    assert_eq!(
        fs::read_to_string(dir.path().join("jurisdiction.graph.dot")).unwrap(),
        export_dot(&snap.graph)
    );
    assert_eq!(
        fs::read_to_string(dir.path().join("jurisdiction.graph.json")).unwrap(),
        export_json(&snap.graph)
    );
}

#[test]
fn assemble_refuses_incomplete_answers_unless_drafting() {
    let dir = tempfile::tempdir().unwrap();
    let answers = dir.path().join("partial.xml");
    fs::write(
        &answers,
        "<fact_list><fact><name>offence_max_imprisonment</name><value>8</value></fact></fact_list>",
    )
    .unwrap();
    let config = fixture("jurisdiction/config.xml");
    let refused = docasm(&["assemble", path(&config), path(&answers), "--out-dir", path(dir.path())]);
    assert_eq!(refused.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("defendant_is_minor"));

    let draft = docasm(&[
        "assemble",
        path(&config),
        path(&answers),
        "--out-dir",
        path(dir.path()),
        "--graph",
        "json",
        "--allow-draft",
    ]);
    assert_eq!(draft.status.code(), Some(0));
    let doc = fs::read_to_string(dir.path().join("jurisdiction.xml")).unwrap();
    assert!(doc.contains(">basic</value>"));
    assert!(doc.contains(">draft<"));
    assert!(!dir.path().join("jurisdiction.graph.dot").exists());

    let wrong_kind = dir.path().join("wrong.xml");
    fs::write(
        &wrong_kind,
        "<fact_list><fact><name>defendant_is_minor</name><value>7</value></fact></fact_list>",
    )
    .unwrap();
    let out = docasm(&[
        "assemble",
        path(&config),
        path(&wrong_kind),
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
