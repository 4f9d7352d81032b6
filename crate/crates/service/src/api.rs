//! HTTP routes under `/v1`.

use std::collections::HashMap;
use std::convert::Infallible;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, Mutex};

use canrt_core::{Injection, Policy};

use crate::session::{FeedEvent, SessionCore, SessionError, SessionState};

pub const MAX_STEPS_PER_REQUEST: u64 = 100_000;
const FEED_CAPACITY: usize = 4096;

pub const API_SCHEMA: &str = include_str!("../api/v1.json");
const DASHBOARD: &str = include_str!("../assets/dashboard.html");

struct Session {
    core: Mutex<SessionCore>,
    feed: broadcast::Sender<FeedEvent>,
}

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Session>>>>,
    journal_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new() -> Self {
        AppState::default()
    }

    /// Journal every session to `<dir>/<id>.jsonl`.
    pub fn with_journal_dir(dir: impl Into<PathBuf>) -> Self {
        AppState {
            journal_dir: Some(dir.into()),
            ..AppState::default()
        }
    }

    /// Registers a new session and returns its id with the initial state.
    pub fn create_session(&self, source: &str, policy: Policy) -> Result<(String, SessionState), SessionError> {
        let mut core = SessionCore::new(source, policy)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        if let Some(dir) = &self.journal_dir {
            core.attach_journal(&dir.join(format!("{id}.jsonl")), source)?;
        }
        let state = core.state(&id)?;
        let (feed, _) = broadcast::channel(FEED_CAPACITY);
        let session = Arc::new(Session {
            core: Mutex::new(core),
            feed,
        });
        self.sessions.write().expect("session table lock").insert(id.clone(), session);
        Ok((id, state))
    }

    fn session(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.sessions
            .read()
            .expect("session table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_owned()))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/", get(|| async { Html(DASHBOARD) }))
        .route("/v1/schema", get(schema))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}/state", get(get_state))
        .route("/v1/sessions/{id}/step", post(step))
        .route("/v1/sessions/{id}/inject", post(inject))
        .route("/v1/sessions/{id}/stream", get(stream_feed))
        .with_state(state)
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    Conflict(String),
    Unprocessable(String),
    Internal(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (code, error, message) = match self {
            ApiError::NotFound(id) => (StatusCode::NOT_FOUND, "not-found", format!("no session `{id}`")),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, "conflict", m),
            ApiError::Unprocessable(m) => (StatusCode::UNPROCESSABLE_ENTITY, "malformed", m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", m),
        };
        (code, Json(ErrorBody { error, message })).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Inject(e) => ApiError::Conflict(e.to_string()),
            SessionError::Agent(e) => ApiError::Unprocessable(e.render("agent")),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::Unprocessable(e.body_text())
    }
}

async fn schema() -> impl IntoResponse {
    ([(axum::http::header::CONTENT_TYPE, "application/json")], API_SCHEMA)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    /// Agent program text.
    pub source: Option<String>,
    /// Path of an agent file on the server.
    pub agent_file: Option<PathBuf>,
    /// `fifo` or `random`; `random(N)` also accepted.
    pub policy: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub state: SessionState,
}

async fn create_session(
    State(app): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    let Json(req) = body?;
    let source = match (req.source, req.agent_file) {
        (Some(s), None) => s,
        (None, Some(path)) => std::fs::read_to_string(&path)
            .map_err(|e| ApiError::Unprocessable(format!("{}: {e}", path.display())))?,
        _ => return Err(ApiError::Unprocessable("give exactly one of `source` and `agent_file`".into())),
    };
    let mut policy: Policy = match req.policy.as_deref() {
        None => Policy::Fifo,
        Some(p) => p.parse().map_err(|e: canrt_core::run::PolicyError| ApiError::Unprocessable(e.to_string()))?,
    };
    if let (Policy::Random(_), Some(seed)) = (policy, req.seed) {
        policy = Policy::Random(seed);
    }
    let (id, state) = app.create_session(&source, policy)?;
    Ok((StatusCode::CREATED, Json(Created { id, state })))
}

async fn get_state(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionState>, ApiError> {
    let session = app.session(&id)?;
    let core = session.core.lock().await;
    Ok(Json(core.state(&id)?))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRequest {
    #[serde(default = "one")]
    pub count: u64,
}

fn one() -> u64 {
    1
}

async fn step(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<StepRequest>, JsonRejection>,
) -> Result<Json<SessionState>, ApiError> {
    let session = app.session(&id)?;
    let Json(req) = body?;
    if req.count > MAX_STEPS_PER_REQUEST {
        return Err(ApiError::Unprocessable(format!("count exceeds {MAX_STEPS_PER_REQUEST}")));
    }
    let mut core = session.core.lock().await;
    for event in core.step(req.count)? {
        let _ = session.feed.send(event);
    }
    Ok(Json(core.state(&id)?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Accepted {
    pub accepted: Injection,
    /// Injections waiting for the next step request.
    pub pending: usize,
}

async fn inject(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<Injection>, JsonRejection>,
) -> Result<(StatusCode, Json<Accepted>), ApiError> {
    let session = app.session(&id)?;
    let Json(injection) = body?;
    let mut core = session.core.lock().await;
    core.inject(injection.clone())?;
    Ok((
        StatusCode::ACCEPTED,
        Json(Accepted {
            accepted: injection,
            pending: core.pending().len(),
        }),
    ))
}

#[derive(Debug, Deserialize)]
pub struct StreamQuery {
    /// First feed index to send.
    pub from: Option<u64>,
}

fn sse_event(e: &FeedEvent) -> Event {
    Event::default()
        .id(e.id.to_string())
        .event(e.payload.kind())
        .json_data(e)
        .expect("feed events serialize")
}

async fn stream_feed(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<StreamQuery>,
    headers: HeaderMap,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let session = app.session(&id)?;
    let resume = headers
        .get("last-event-id")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<u64>().ok())
        .map(|last| last + 1);
    let start = resume.or(query.from).unwrap_or(0);

    // Subscribe under the lock so nothing slips between backlog and live feed.
    let (backlog, rx) = {
        let core = session.core.lock().await;
        let feed = core.feed();
        let from = (start as usize).min(feed.len());
        (feed[from..].to_vec(), session.feed.subscribe())
    };
    let next = backlog.last().map_or(start, |e| e.id + 1);
    let live = stream::unfold((rx, next), |(mut rx, next)| async move {
        loop {
            match rx.recv().await {
                Ok(e) if e.id < next => continue,
                Ok(e) => {
                    let n = e.id + 1;
                    return Some((e, (rx, n)));
                }
                // A lagging client is cut off and resumes from its last id.
                Err(_) => return None,
            }
        }
    });
    let events = stream::iter(backlog).chain(live).map(|e| Ok(sse_event(&e)));
    Ok(Sse::new(events).keep_alive(KeepAlive::default()))
}
