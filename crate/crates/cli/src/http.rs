//! JSON API over a shared [`Workspace`].
//!
//! Queries that are feasible on the current abstraction are answered under a
//! shared read lock. Infeasible ones take the writer turn, because guided
//! rollouts extend the abstraction. A rebuild samples a fresh abstraction in
//! the background; while it runs, queries get `409 Conflict`.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use marx_core::abstraction::summarize_plan;
use marx_core::service::{answer_if_feasible, ServiceError, Workspace};

use crate::render::plan_document;

struct Shared {
    workspace: RwLock<Workspace>,
    rebuilding: AtomicBool,
}

#[derive(Clone)]
pub struct AppState(Arc<Shared>);

impl AppState {
    pub fn new(workspace: Workspace) -> Self {
        AppState(Arc::new(Shared {
            workspace: RwLock::new(workspace),
            rebuilding: AtomicBool::new(false),
        }))
    }

    pub fn is_rebuilding(&self) -> bool {
        self.0.rebuilding.load(Ordering::SeqCst)
    }

    /// Marks a rebuild as running (or finished). Returns the previous value.
    pub fn set_rebuilding(&self, on: bool) -> bool {
        self.0.rebuilding.swap(on, Ordering::SeqCst)
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, Workspace> {
        self.0.workspace.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, Workspace> {
        self.0.workspace.write().unwrap_or_else(|e| e.into_inner())
    }
}

pub struct ApiError {
    status: StatusCode,
    error: String,
    detail: String,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, detail: impl Into<String>) -> Self {
        ApiError {
            status,
            error: error.to_string(),
            detail: detail.into(),
        }
    }

    fn rebuilding() -> Self {
        Self::new(
            StatusCode::CONFLICT,
            "Rebuilding",
            "the abstraction is being rebuilt; retry shortly",
        )
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let status = if e.is_user_error() {
            StatusCode::BAD_REQUEST
        } else {
            StatusCode::INTERNAL_SERVER_ERROR
        };
        ApiError::new(status, e.kind(), format!("{}: {e}", e.module()))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({ "error": self.error, "detail": self.detail })),
        )
            .into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/env", get(get_env))
        .route("/api/plan", get(get_plan))
        .route("/api/mmdp/summary", get(get_summary))
        .route("/api/query", post(post_query))
        .route("/api/rebuild", post(post_rebuild))
        .with_state(state)
}

async fn get_env(State(state): State<AppState>) -> ApiResult {
    let ws = state.read();
    let domain = ws.domain();
    let agents: Vec<Value> = domain
        .agents
        .iter()
        .map(|a| json!({ "id": a.id, "display": a.display }))
        .collect();
    let tasks: Vec<Value> = domain
        .tasks
        .iter()
        .map(|t| json!({ "name": t.name, "verb": t.verb, "gerund": t.gerund }))
        .collect();
    Ok(Json(json!({
        "agents": agents,
        "tasks": tasks,
        "agentNoun": domain.agent_noun,
        "grammar": "task:agent,agent -> task:agent ...",
    })))
}

async fn get_plan(State(state): State<AppState>) -> ApiResult {
    let ws = state.read();
    let plan = summarize_plan(&ws.mmdp).map_err(|e| {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "NoCompletePath",
            e.to_string(),
        )
    })?;
    Ok(Json(plan_document(&plan, &ws.domain())))
}

async fn get_summary(State(state): State<AppState>) -> ApiResult {
    let ws = state.read();
    let m = &ws.mmdp;
    Ok(Json(json!({
        "numStates": m.num_states(),
        "numTransitions": m.num_transitions(),
        "numAgents": m.num_agents(),
        "tasks": m.tasks(),
        "episodes": ws.config.episodes,
        "abstractionMs": ws.abstraction_ms,
        "rebuilding": state.is_rebuilding(),
    })))
}

#[derive(Deserialize)]
struct QueryRequest {
    query: String,
}

async fn post_query(State(state): State<AppState>, body: Bytes) -> ApiResult {
    if state.is_rebuilding() {
        return Err(ApiError::rebuilding());
    }
    let request: QueryRequest = serde_json::from_slice(&body).map_err(|e| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "BadRequest",
            format!("expected {{\"query\": string}}: {e}"),
        )
    })?;
    let worker = state.clone();
    tokio::task::spawn_blocking(move || answer(&worker, &request.query))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
}

fn answer(state: &AppState, text: &str) -> ApiResult {
    {
        let ws = state.read();
        let query = ws.parse(text)?;
        if let Some(mut answer) = answer_if_feasible(&ws.mmdp, &query) {
            answer.timings.abstraction_ms = ws.abstraction_ms;
            return Ok(Json(answer.to_document(&ws.mmdp, &ws.domain())));
        }
    }
    if state.is_rebuilding() {
        return Err(ApiError::rebuilding());
    }
    let mut ws = state.write();
    let query = ws.parse(text)?;
    let answer = ws.answer(&query)?;
    Ok(Json(answer.to_document(&ws.mmdp, &ws.domain())))
}

async fn post_rebuild(
    State(state): State<AppState>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    if state.set_rebuilding(true) {
        return Err(ApiError::rebuilding());
    }
    let worker = state.clone();
    tokio::task::spawn_blocking(move || {
        let built = worker.read().build();
        match built {
            Ok((mmdp, ms)) => {
                if let Err(e) = worker.write().install(mmdp, ms) {
                    tracing::error!("installing rebuilt abstraction failed: {e}");
                }
            }
            Err(e) => tracing::error!("rebuild failed: {e}"),
        }
        worker.set_rebuilding(false);
    });
    Ok((
        StatusCode::ACCEPTED,
        Json(json!({ "status": "rebuilding" })),
    ))
}
