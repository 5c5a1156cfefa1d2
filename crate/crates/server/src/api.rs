//! HTTP facade over configs and sessions.
//!
//! Requests touching one session are serialized by a per-session mutex; a
//! mutation is persisted before it becomes visible.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use docasm_core::facts::ValueKind;
use docasm_core::graph::{export_dot, export_json};
use docasm_core::session::{AnswerInput, Session, SessionError, Snapshot};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex as AsyncMutex;

use crate::catalog::Catalog;
use crate::store::{PersistedSession, SessionStore, StoreError};

pub struct AppState {
    catalog: Catalog,
    store: SessionStore,
    sessions: Mutex<HashMap<String, Arc<AsyncMutex<Session>>>>,
}

impl AppState {
    pub fn new(catalog: Catalog, store: SessionStore) -> Self {
        AppState {
            catalog,
            store,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    /// Returns the live session, restoring it from the store if needed.
    fn session(&self, id: &str) -> Result<Arc<AsyncMutex<Session>>, ApiError> {
        if let Some(s) = self.sessions.lock().unwrap().get(id) {
            return Ok(s.clone());
        }
        let record = self
            .store
            .load(id)?
            .ok_or_else(|| ApiError::NotFound(format!("session `{id}`")))?;
        let loaded = self
            .catalog
            .get(&record.config_id)
            .ok_or_else(|| ApiError::Internal(format!("session `{id}` uses unknown config `{}`", record.config_id)))?;
        let session = match Session::restore(record.id, loaded.clone(), record.answers) {
            Ok(s) => s,
            Err(e) => {
                self.store.quarantine(id, e.to_string());
                return Err(ApiError::NotFound(format!("session `{id}`")));
            }
        };
        let mut sessions = self.sessions.lock().unwrap();
        Ok(sessions
            .entry(id.to_string())
            .or_insert_with(|| Arc::new(AsyncMutex::new(session)))
            .clone())
    }

    fn persist(&self, session: &Session) -> Result<(), ApiError> {
        self.store.save(&PersistedSession {
            id: session.id().to_string(),
            config_id: session.config().config.id.clone(),
            answers: session.answers().clone(),
        })?;
        Ok(())
    }
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    Conflict(String),
    BadRequest(String),
    Validation {
        expected: ValueKind,
        step: u32,
        message: String,
    },
    Internal(String),
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Validation {
                expected,
                step,
                message,
            } => ApiError::Validation {
                expected,
                step,
                message,
            },
            SessionError::Complete | SessionError::NotAnswered(_) => ApiError::Conflict(e.to_string()),
            SessionError::UnknownStep(_) => ApiError::NotFound(e.to_string()),
            SessionError::Pipeline(_) => ApiError::Internal(e.to_string()),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::BadId(_) | StoreError::Corrupt { .. } => ApiError::NotFound(e.to_string()),
            StoreError::Io { .. } => ApiError::Internal(e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, json!({ "error": m })),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, json!({ "error": m })),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, json!({ "error": m })),
            ApiError::Validation {
                expected,
                step,
                message,
            } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({ "expected": expected, "step": step, "error": message }),
            ),
            ApiError::Internal(m) => {
                let id = uuid::Uuid::new_v4().to_string();
                tracing::error!(error_id = %id, "{m}");
                (
                    StatusCode::INTERNAL_SERVER_ERROR,
                    json!({ "error": "internal error", "id": id }),
                )
            }
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Serialize)]
pub struct SessionView<'a> {
    pub id: &'a str,
    pub config_id: &'a str,
    pub snapshot: &'a Snapshot,
}

fn view(session: &Session) -> Json<Value> {
    Json(
        serde_json::to_value(SessionView {
            id: session.id(),
            config_id: &session.config().config.id,
            snapshot: session.snapshot(),
        })
        .expect("snapshots serialize"),
    )
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/configs", get(list_configs))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/answers", post(submit_answer))
        .route("/sessions/{id}/answers/{step}", put(revise_answer))
        .route("/sessions/{id}/document", get(document))
        .route("/sessions/{id}/graph", get(graph))
        .route("/sessions/{id}/explanation", get(explanation))
        .with_state(state)
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Value> {
    let live = state.sessions.lock().unwrap().len();
    Json(json!({
        "status": "ok",
        "configs": state.catalog.summaries().len(),
        "live_sessions": live,
        "quarantined": state.store.quarantined(),
        "config_errors": state.catalog.errors(),
    }))
}

async fn list_configs(State(state): State<Arc<AppState>>) -> Json<Value> {
    Json(serde_json::to_value(state.catalog.summaries()).expect("summaries serialize"))
}

#[derive(Deserialize)]
struct CreateSession {
    #[serde(alias = "config-id", alias = "configId")]
    config_id: String,
}

fn json_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(format!("invalid JSON body: {e}")))
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let request: CreateSession = json_body(&body)?;
    let loaded = state
        .catalog
        .get(&request.config_id)
        .ok_or_else(|| ApiError::NotFound(format!("config `{}`", request.config_id)))?;
    let session = Session::start(loaded.clone())?;
    state.persist(&session)?;
    let response = (StatusCode::CREATED, view(&session)).into_response();
    tracing::info!(session = session.id(), config = %request.config_id, "session started");
    state
        .sessions
        .lock()
        .unwrap()
        .insert(session.id().to_string(), Arc::new(AsyncMutex::new(session)));
    Ok(response)
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let session = state.session(&id)?;
    let session = session.lock().await;
    Ok(view(&session))
}

/// Reads `{"value": …}`; anything else is reported against `step`.
fn answer_value(body: &Bytes, expected: ValueKind, step: u32) -> Result<AnswerInput, ApiError> {
    let body: Value = json_body(body)?;
    let invalid = |message: &str| ApiError::Validation {
        expected,
        step,
        message: message.to_string(),
    };
    let value = body.get("value").ok_or_else(|| invalid("missing `value`"))?;
    serde_json::from_value(value.clone()).map_err(|_| invalid("value must be a string, number or boolean"))
}

async fn submit_answer(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let handle = state.session(&id)?;
    let mut session = handle.lock().await;
    let step = session.current_step().ok_or(SessionError::Complete)?;
    let input = answer_value(&body, step.kind, step.order)?;
    let mut next = session.clone();
    next.submit(&input)?;
    state.persist(&next)?;
    *session = next;
    Ok(view(&session))
}

async fn revise_answer(
    State(state): State<Arc<AppState>>,
    Path((id, order)): Path<(String, u32)>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let handle = state.session(&id)?;
    let mut session = handle.lock().await;
    let step = session
        .config()
        .config
        .step(order)
        .ok_or(SessionError::UnknownStep(order))?;
    let input = answer_value(&body, step.kind, step.order)?;
    let mut next = session.clone();
    next.revise(order, &input)?;
    state.persist(&next)?;
    *session = next;
    Ok(view(&session))
}

async fn document(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let session = session.lock().await;
    Ok((
        [(header::CONTENT_TYPE, "application/xml")],
        session.snapshot().document.clone(),
    )
        .into_response())
}

#[derive(Deserialize)]
struct GraphQuery {
    format: Option<String>,
}

async fn graph(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<GraphQuery>,
) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let session = session.lock().await;
    let graph = &session.snapshot().graph;
    match query.format.as_deref().unwrap_or("json") {
        "json" => Ok(([(header::CONTENT_TYPE, "application/json")], export_json(graph)).into_response()),
        "dot" => Ok(([(header::CONTENT_TYPE, "text/vnd.graphviz")], export_dot(graph)).into_response()),
        other => Err(ApiError::BadRequest(format!("unknown graph format `{other}`"))),
    }
}

async fn explanation(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let session = state.session(&id)?;
    let session = session.lock().await;
    Ok(Json(match &session.snapshot().current {
        Some(q) => json!({ "step": q.order, "question": q.question, "explanation": q.explanation }),
        None => json!({ "step": null, "question": null, "explanation": null }),
    }))
}
