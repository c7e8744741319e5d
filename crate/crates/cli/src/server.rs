//! JSON HTTP API over the recommendation pipeline and the project store.

use std::collections::BTreeMap;
use std::sync::Arc;

use apr_core::input_model::validate_spec;
use apr_core::{
    check_nfr_conflicts, recommend, AprError, KnowledgeBase, NfrItem, PipelineConfig,
    RequirementsSpec,
};
use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::store::{ProjectRecord, ProjectStore, StoreError};

pub struct AppState {
    pub kb: KnowledgeBase,
    pub config: PipelineConfig,
    pub store: ProjectStore,
}

pub type SharedState = Arc<AppState>;

#[derive(Debug)]
pub enum ApiError {
    Core(AprError),
    Store(StoreError),
    BadRequest(String),
    Internal(String),
}

impl From<AprError> for ApiError {
    fn from(e: AprError) -> Self {
        ApiError::Core(e)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::Store(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match &self {
            ApiError::Core(e) => {
                let status = match e {
                    AprError::Validation(_) | AprError::Taxonomy(_) | AprError::Vocabulary(_) => {
                        StatusCode::UNPROCESSABLE_ENTITY
                    }
                    AprError::ResolutionRequired { .. } => StatusCode::CONFLICT,
                    AprError::Format { .. } | AprError::InvalidInput(_) => StatusCode::BAD_REQUEST,
                    AprError::Config(_) => StatusCode::SERVICE_UNAVAILABLE,
                    AprError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
                };
                let mut body = json!({"error": e.category(), "message": e.to_string()});
                match e {
                    AprError::Validation(fields) => body["fields"] = json!(fields),
                    AprError::ResolutionRequired { pairs } => body["pairs"] = json!(pairs),
                    _ => {}
                }
                (status, body)
            }
            ApiError::Store(e @ StoreError::NotFound(_)) => (
                StatusCode::NOT_FOUND,
                json!({"error": "not_found", "message": e.to_string()}),
            ),
            ApiError::Store(e) => (
                StatusCode::INTERNAL_SERVER_ERROR,
                json!({"error": "store", "message": e.to_string()}),
            ),
            ApiError::BadRequest(m) => (
                StatusCode::BAD_REQUEST,
                json!({"error": "bad_request", "message": m}),
            ),
            ApiError::Internal(m) => (
                StatusCode::INTERNAL_SERVER_ERROR,
                json!({"error": "internal", "message": m}),
            ),
        };
        (status, Json(body)).into_response()
    }
}

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/api/projects", post(create_project))
        .route("/api/projects/{id}", get(get_project))
        .route("/api/projects/{id}/spec", put(update_spec))
        .route("/api/projects/{id}/recommend", post(recommend_project))
        .route("/api/nfr-check", post(nfr_check))
        .route("/api/taxonomy", get(taxonomy))
        .route("/api/patterns", get(patterns))
        .with_state(state)
}

/// A stored spec must validate and use only known NFR labels.
fn checked(state: &AppState, spec: RequirementsSpec) -> Result<RequirementsSpec, AprError> {
    let validated = validate_spec(&spec, &state.kb.taxonomy).map_err(AprError::Validation)?;
    check_nfr_conflicts(&validated.nfrs, &state.kb.conflicts)?;
    Ok(validated.into_inner())
}

async fn create_project(
    State(state): State<SharedState>,
    body: Result<Json<RequirementsSpec>, JsonRejection>,
) -> Result<(StatusCode, Json<ProjectRecord>), ApiError> {
    let Json(spec) = body?;
    let spec = checked(&state, spec)?;
    let record = state.store.create(spec)?;
    Ok((StatusCode::CREATED, Json(record)))
}

async fn get_project(
    State(state): State<SharedState>,
    Path(id): Path<String>,
) -> Result<Json<ProjectRecord>, ApiError> {
    Ok(Json(state.store.get(&id)?))
}

async fn update_spec(
    State(state): State<SharedState>,
    Path(id): Path<String>,
    body: Result<Json<RequirementsSpec>, JsonRejection>,
) -> Result<Json<ProjectRecord>, ApiError> {
    let Json(spec) = body?;
    let spec = checked(&state, spec)?;
    let record = state.store.update(&id, |r| {
        r.spec = spec;
        r.last_recommendation = None;
    })?;
    Ok(Json(record))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecommendRequest {
    #[serde(default)]
    priorities: BTreeMap<String, i64>,
}

async fn recommend_project(
    State(state): State<SharedState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let request: RecommendRequest = if body.iter().all(u8::is_ascii_whitespace) {
        RecommendRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(e.to_string()))?
    };
    let spec = state.store.get(&id)?.spec;
    let worker = state.clone();
    let set = tokio::task::spawn_blocking(move || {
        recommend(&spec, &worker.kb, &worker.config, &request.priorities)
    })
    .await
    .map_err(|e| ApiError::Internal(format!("recommendation task failed: {e}")))??;
    let saved = set.clone();
    state
        .store
        .update(&id, move |r| r.last_recommendation = Some(saved))?;
    Ok(Json(set).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NfrEntry {
    Name(String),
    Item(NfrItem),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NfrCheckRequest {
    nfrs: Vec<NfrEntry>,
}

#[derive(Debug, Serialize)]
struct NfrCheckResponse {
    conflicts: Vec<(String, String)>,
}

async fn nfr_check(
    State(state): State<SharedState>,
    body: Result<Json<NfrCheckRequest>, JsonRejection>,
) -> Result<Json<NfrCheckResponse>, ApiError> {
    let Json(request) = body?;
    let items: Vec<NfrItem> = request
        .nfrs
        .into_iter()
        .map(|e| match e {
            NfrEntry::Name(name) => NfrItem {
                name,
                priority: None,
                free_text: None,
            },
            NfrEntry::Item(item) => item,
        })
        .collect();
    let conflicts = check_nfr_conflicts(&items, &state.kb.conflicts)?;
    Ok(Json(NfrCheckResponse { conflicts }))
}

async fn taxonomy(State(state): State<SharedState>) -> Response {
    Json(&state.kb.taxonomy).into_response()
}

#[derive(Debug, Serialize)]
struct PatternSummary<'a> {
    pattern_name: &'a str,
    basic_definition: &'a str,
    known_applications: &'a str,
}

async fn patterns(State(state): State<SharedState>) -> Response {
    let summaries: Vec<PatternSummary<'_>> = state
        .kb
        .catalog
        .iter()
        .map(|r| PatternSummary {
            pattern_name: &r.pattern_name,
            basic_definition: &r.basic_definition,
            known_applications: &r.known_applications,
        })
        .collect();
    Json(summaries).into_response()
}

pub async fn serve(state: SharedState, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
