//! HTTP teaching service: one memory per session, with endpoints to observe
//! scenes, preview classifications, annotate categories and tune thresholds.
//!
//! Mutating requests on a session are serialized by a per-session lock; a
//! request arriving while another one holds it gets `409 Conflict` instead of
//! queueing.

mod error;
mod session;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fsit_core::io::{from_json, load_memory, memory_to_dot, save_memory, DotOptions};
use fsit_core::model::{InputInterface, ReificationMode};
use fsit_core::sit::{CategoryId, MemoryGraph, SitParams};
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;

pub use error::ApiError;
pub use session::{
    ClassificationView, LogEntry, Session, SessionInfo, StepReport, WhatIfReport, API_VERSION,
};

/// Parameters used when a new session does not state its own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceDefaults {
    pub params: SitParams,
    pub mode: ReificationMode,
}

impl Default for ServiceDefaults {
    fn default() -> Self {
        Self {
            params: SitParams::default(),
            mode: ReificationMode::Simplified,
        }
    }
}

type Shared = Arc<RwLock<Session>>;

#[derive(Clone, Default)]
pub struct AppState {
    defaults: ServiceDefaults,
    sessions: Arc<RwLock<BTreeMap<String, Shared>>>,
}

impl AppState {
    pub fn new(defaults: ServiceDefaults) -> Self {
        Self {
            defaults,
            sessions: Arc::default(),
        }
    }

    /// The lock guarding session `id`.
    pub async fn session(&self, id: &str) -> Result<Shared, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_session(id))
    }

    async fn writable(
        &self,
        id: &str,
    ) -> Result<tokio::sync::OwnedRwLockWriteGuard<Session>, ApiError> {
        self.session(id)
            .await?
            .try_write_owned()
            .map_err(|_| ApiError::busy())
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/scenes", post(post_scene))
        .route("/sessions/{id}/what-if", post(what_if))
        .route("/sessions/{id}/memory", get(get_memory))
        .route("/sessions/{id}/annotations", post(annotate))
        .route("/sessions/{id}/params", axum::routing::patch(set_params))
        .with_state(state)
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "teaching service listening");
    axum::serve(listener, router(state)).await
}

/// Reads a JSON body, reporting the path of the first offending member.
fn body<T: serde::de::DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ApiError::invalid(".", e))?;
    let text = if text.trim().is_empty() { "{}" } else { text };
    from_json(text).map_err(|e| ApiError::format("", e))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    fuzziness: Option<f64>,
    th_membership: Option<f64>,
    th_similarity: Option<f64>,
    mode: Option<ReificationMode>,
    interface: Option<InputInterface>,
    /// A memory snapshot to resume from.
    memory: Option<serde_json::Value>,
}

#[derive(Serialize)]
struct Created {
    api_version: u32,
    id: String,
}

async fn create_session(State(state): State<AppState>, bytes: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = body(&bytes)?;
    let d = state.defaults;
    let memory = match req.memory {
        Some(snapshot) => {
            load_memory(&snapshot.to_string()).map_err(|e| ApiError::format("memory", e))?
        }
        None => {
            let iface = match (req.interface, req.mode) {
                (Some(i), Some(m)) => i.with_mode(m),
                (Some(i), None) => i,
                (None, m) => InputInterface::tabletop(m.unwrap_or(d.mode)),
            };
            let a = req.fuzziness.unwrap_or(d.params.fuzziness);
            MemoryGraph::new(iface, a).map_err(|e| ApiError::sit("fuzziness", e))?
        }
    };
    let params = SitParams {
        fuzziness: req.fuzziness.unwrap_or(memory.fuzziness()),
        th_membership: req.th_membership.unwrap_or(d.params.th_membership),
        th_similarity: req.th_similarity.unwrap_or(d.params.th_similarity),
    };
    let id = uuid::Uuid::new_v4().to_string();
    let session = Session::new(id.clone(), memory, params)?;
    state
        .sessions
        .write()
        .await
        .insert(id.clone(), Arc::new(RwLock::new(session)));
    tracing::info!(%id, "session created");
    let created = Created {
        api_version: API_VERSION,
        id,
    };
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn get_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionInfo>, ApiError> {
    let shared = state.session(&id).await?;
    let info = shared.read().await.info();
    Ok(Json(info))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PostScene {
    scene: serde_json::Value,
    #[serde(default)]
    force_learn: bool,
}

async fn post_scene(
    State(state): State<AppState>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Json<StepReport>, ApiError> {
    let mut session = state.writable(&id).await?;
    let req: PostScene = body(&bytes)?;
    let scene = session.scene("scene", &req.scene)?;
    let report = session.post_scene(&scene, req.force_learn)?;
    tracing::debug!(%id, learned = report.learned, "scene observed");
    Ok(Json(report))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WhatIf {
    scene: serde_json::Value,
    fuzziness: Option<f64>,
}

async fn what_if(
    State(state): State<AppState>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Json<WhatIfReport>, ApiError> {
    let shared = state.session(&id).await?;
    let session = shared.read().await;
    let req: WhatIf = body(&bytes)?;
    let scene = session.scene("scene", &req.scene)?;
    Ok(Json(session.what_if(&scene, req.fuzziness)?))
}

#[derive(Debug, Default, Deserialize)]
struct MemoryQuery {
    format: Option<String>,
    #[serde(default)]
    reduce: bool,
}

async fn get_memory(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<MemoryQuery>,
) -> Result<Response, ApiError> {
    let shared = state.session(&id).await?;
    let session = shared.read().await;
    match q.format.as_deref() {
        None | Some("json") => {
            let text = save_memory(session.memory());
            Ok(([(header::CONTENT_TYPE, "application/json")], text).into_response())
        }
        Some("dot") => {
            let opts = DotOptions {
                reduce: q.reduce,
                classification: None,
            };
            let text = memory_to_dot(session.memory(), opts);
            Ok(([(header::CONTENT_TYPE, "text/vnd.graphviz")], text).into_response())
        }
        Some(other) => Err(ApiError::invalid(
            "format",
            format!("expected json or dot, got `{other}`"),
        )),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Annotate {
    category: CategoryId,
    label: Option<String>,
}

#[derive(Serialize)]
struct Done {
    api_version: u32,
    ok: bool,
}

async fn annotate(
    State(state): State<AppState>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Response, ApiError> {
    let mut session = state.writable(&id).await?;
    let req: Annotate = body(&bytes)?;
    session.annotate(req.category, req.label)?;
    let done = Done {
        api_version: API_VERSION,
        ok: true,
    };
    Ok(Json(done).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SetParams {
    fuzziness: Option<f64>,
    th_membership: Option<f64>,
    th_similarity: Option<f64>,
}

#[derive(Serialize)]
struct ParamsReply {
    api_version: u32,
    params: SitParams,
}

async fn set_params(
    State(state): State<AppState>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Json<ParamsReply>, ApiError> {
    let mut session = state.writable(&id).await?;
    let req: SetParams = body(&bytes)?;
    let params = session.set_params(req.fuzziness, req.th_membership, req.th_similarity)?;
    Ok(Json(ParamsReply {
        api_version: API_VERSION,
        params,
    }))
}
