mod common;

use std::collections::BTreeSet;
use std::fs;

use axum::http::StatusCode;
use common::{app, call};
use docasm_testkit::fixtures_dir;
use serde_json::json;

async fn start(app: &axum::Router, config: &str) -> String {
    let reply = call(app, "POST", "/sessions", Some(json!({ "config_id": config }))).await;
    assert_eq!(reply.status, StatusCode::CREATED, "{}", reply.text());
    reply.json()["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn lists_fixture_configs() {
    let store = tempfile::tempdir().unwrap();
    let app = app(&fixtures_dir(), store.path());
    let reply = call(&app, "GET", "/configs", None).await;
    assert_eq!(reply.status, StatusCode::OK);
    let ids: Vec<_> = reply
        .json()
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids, ["indictment", "jurisdiction"]);
    assert_eq!(reply.json()[1]["goal"], "jurisdiction_level");
}

#[tokio::test]
async fn jurisdiction_interview_over_http() {
    let store = tempfile::tempdir().unwrap();
    let app = app(&fixtures_dir(), store.path());
    let reply = call(&app, "POST", "/sessions", Some(json!({ "config_id": "jurisdiction" }))).await;
    assert_eq!(reply.status, StatusCode::CREATED);
    let body = reply.json();
    let id = body["id"].as_str().unwrap();
    assert_eq!(body["snapshot"]["current"]["order"], 1);
    assert_eq!(body["snapshot"]["current"]["total"], 2);
    assert_eq!(body["snapshot"]["status"], "in-progress");

    let bad = call(
        &app,
        "POST",
        &format!("/sessions/{id}/answers"),
        Some(json!({ "value": "abc" })),
    )
    .await;
    assert_eq!(bad.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(bad.json()["expected"], "number");
    assert_eq!(bad.json()["step"], 1);

    let first = call(
        &app,
        "POST",
        &format!("/sessions/{id}/answers"),
        Some(json!({ "value": 8 })),
    )
    .await;
    assert_eq!(first.status, StatusCode::OK);
    assert!(first.json()["snapshot"]["document"]
        .as_str()
        .unwrap()
        .contains(">basic</value>"));

    let explanation = call(&app, "GET", &format!("/sessions/{id}/explanation"), None)
        .await
        .json();
    assert_eq!(explanation["step"], 2);
    assert!(explanation["explanation"].as_str().unwrap().contains("juveniles"));

    let second = call(
        &app,
        "POST",
        &format!("/sessions/{id}/answers"),
        Some(json!({ "value": true })),
    )
    .await;
    let snap = &second.json()["snapshot"];
    assert_eq!(snap["status"], "complete");
    assert_eq!(snap["mode"], "final");

    let doc = call(&app, "GET", &format!("/sessions/{id}/document"), None).await;
    assert_eq!(doc.content_type.as_deref(), Some("application/xml"));
    assert_eq!(doc.text(), snap["document"].as_str().unwrap());
    assert!(doc.text().contains(r#"<value name="court_level">higher</value>"#));

    let dot = call(&app, "GET", &format!("/sessions/{id}/graph?format=dot"), None).await;
    assert!(dot
        .text()
        .contains(r#""rule:loc_art22para1#0" [shape=circle, style=dashed"#));
    let graph = call(&app, "GET", &format!("/sessions/{id}/graph"), None).await;
    assert_eq!(graph.json(), snap["graph"]);
    let bad_format = call(&app, "GET", &format!("/sessions/{id}/graph?format=svg"), None).await;
    assert_eq!(bad_format.status, StatusCode::BAD_REQUEST);

    let done = call(
        &app,
        "POST",
        &format!("/sessions/{id}/answers"),
        Some(json!({ "value": 1 })),
    )
    .await;
    assert_eq!(done.status, StatusCode::CONFLICT);

    let revised = call(
        &app,
        "PUT",
        &format!("/sessions/{id}/answers/2"),
        Some(json!({ "value": false })),
    )
    .await;
    assert_eq!(revised.status, StatusCode::OK);
    assert!(revised.json()["snapshot"]["document"]
        .as_str()
        .unwrap()
        .contains(">basic</value>"));
    let wrong = call(
        &app,
        "PUT",
        &format!("/sessions/{id}/answers/2"),
        Some(json!({ "value": "maybe" })),
    )
    .await;
    assert_eq!(wrong.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(wrong.json()["expected"], "boolean");
}

#[tokio::test]
async fn error_statuses() {
    let store = tempfile::tempdir().unwrap();
    let app = app(&fixtures_dir(), store.path());
    assert_eq!(
        call(&app, "GET", "/sessions/nope", None).await.status,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        call(&app, "GET", "/sessions/..%2Fx", None).await.status,
        StatusCode::NOT_FOUND
    );
    let unknown = call(&app, "POST", "/sessions", Some(json!({ "config_id": "nope" }))).await;
    assert_eq!(unknown.status, StatusCode::NOT_FOUND);
    let malformed = call(&app, "POST", "/sessions", Some(json!({ "config": "x" }))).await;
    assert_eq!(malformed.status, StatusCode::BAD_REQUEST);

    let id = start(&app, "jurisdiction").await;
    let early = call(
        &app,
        "PUT",
        &format!("/sessions/{id}/answers/1"),
        Some(json!({ "value": 3 })),
    )
    .await;
    assert_eq!(early.status, StatusCode::CONFLICT);
    let no_step = call(
        &app,
        "PUT",
        &format!("/sessions/{id}/answers/7"),
        Some(json!({ "value": 3 })),
    )
    .await;
    assert_eq!(no_step.status, StatusCode::NOT_FOUND);
    let no_value = call(&app, "POST", &format!("/sessions/{id}/answers"), Some(json!({}))).await;
    assert_eq!(no_value.status, StatusCode::UNPROCESSABLE_ENTITY);
    let negative = call(
        &app,
        "POST",
        &format!("/sessions/{id}/answers"),
        Some(json!({ "value": -2 })),
    )
    .await;
    assert_eq!(negative.status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn internal_faults_carry_an_opaque_id() {
    let configs = tempfile::tempdir().unwrap();
    fs::write(configs.path().join("rules.dl"), "r: age(P, X), X > 17 => adult(P)\n").unwrap();
    fs::write(
        configs.path().join("template.xml"),
        r#"<element name="p"><tox-sample path="[fact_list/fact]" where="EQ([name],'age')"><tox-expr value="[value]"/></tox-sample></element>"#,
    )
    .unwrap();
    fs::write(
        configs.path().join("config.xml"),
        r#"<assembly_config id="age" title="Age"><rulebase>rules.dl</rulebase><template>template.xml</template><goal>adult</goal>
<fixed_constants><constant name="person" value="p1"/></fixed_constants>
<interview><step order="1" entry="age" kind="text"><question>Age?</question><pattern>age(person, ?)</pattern></step></interview></assembly_config>"#,
    )
    .unwrap();
    let store = tempfile::tempdir().unwrap();
    let app = app(configs.path(), store.path());
    let id = start(&app, "age").await;
    let reply = call(
        &app,
        "POST",
        &format!("/sessions/{id}/answers"),
        Some(json!({ "value": "old" })),
    )
    .await;
    assert_eq!(reply.status, StatusCode::INTERNAL_SERVER_ERROR);
    let body = reply.json();
    assert_eq!(body["error"], "internal error");
    assert_eq!(body["id"].as_str().unwrap().len(), 36);
    let after = call(&app, "GET", &format!("/sessions/{id}"), None).await.json();
    assert_eq!(after["snapshot"]["status"], "in-progress");
}

#[tokio::test]
async fn restart_restores_identical_snapshots() {
    let store = tempfile::tempdir().unwrap();
    let first = app(&fixtures_dir(), store.path());
    let id = start(&first, "jurisdiction").await;
    call(
        &first,
        "POST",
        &format!("/sessions/{id}/answers"),
        Some(json!({ "value": 8 })),
    )
    .await;
    let before = call(&first, "GET", &format!("/sessions/{id}"), None).await;
    let doc_before = call(&first, "GET", &format!("/sessions/{id}/document"), None).await;
    drop(first);

    let second = app(&fixtures_dir(), store.path());
    let after = call(&second, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(after.body, before.body);
    assert_eq!(
        call(&second, "GET", &format!("/sessions/{id}/document"), None)
            .await
            .body,
        doc_before.body
    );
    let next = call(
        &second,
        "POST",
        &format!("/sessions/{id}/answers"),
        Some(json!({ "value": true })),
    )
    .await;
    assert_eq!(next.json()["snapshot"]["status"], "complete");
}

#[tokio::test]
async fn corrupt_records_are_quarantined() {
    let store = tempfile::tempdir().unwrap();
    let app = app(&fixtures_dir(), store.path());
    let id = start(&app, "jurisdiction").await;
    fs::write(store.path().join("feedbeef.json"), "{\"id\": \"feedb").unwrap();
    assert_eq!(
        call(&app, "GET", "/sessions/feedbeef", None).await.status,
        StatusCode::NOT_FOUND
    );
    let health = call(&app, "GET", "/health", None).await.json();
    assert_eq!(health["quarantined"], json!(["feedbeef"]));
    assert_eq!(
        call(&app, "GET", &format!("/sessions/{id}"), None).await.status,
        StatusCode::OK
    );
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_answers_serialize() {
    let store = tempfile::tempdir().unwrap();
    let app = app(&fixtures_dir(), store.path());
    for _ in 0..10 {
        let id = start(&app, "indictment").await;
        let uri = format!("/sessions/{id}/answers");
        let (a, b) = tokio::join!(
            call(&app, "POST", &uri, Some(json!({ "value": "Jane Roe" }))),
            call(&app, "POST", &uri, Some(json!({ "value": "2001-02-03" }))),
        );
        let statuses: BTreeSet<_> = [a.status, b.status].into_iter().collect();
        let progress = call(&app, "GET", &format!("/sessions/{id}"), None).await.json()["snapshot"]["progress"].clone();
        let answers: Vec<_> = progress
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p["answer"].clone())
            .collect();
        // name first: both land; date first: the name is rejected by the date step
        let name_first = vec![
            json!({"kind": "text", "value": "Jane Roe"}),
            json!({"kind": "date", "value": "2001-02-03"}),
            json!(null),
            json!(null),
        ];
        let date_first = vec![
            json!({"kind": "text", "value": "2001-02-03"}),
            json!(null),
            json!(null),
            json!(null),
        ];
        if statuses.len() == 1 {
            assert_eq!(answers, name_first);
        } else {
            assert_eq!(
                statuses,
                [StatusCode::OK, StatusCode::UNPROCESSABLE_ENTITY].into_iter().collect()
            );
            assert_eq!(answers, date_first);
        }
    }
}
