use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use wave_core::browse::{union_neighborhood, BrowseParams, BrowseSession, Neighborhood, NeighborhoodJson, Seed, SessionState};
use wave_core::classify::RegisteredScale;
use wave_core::composition::{nest, NestedJson};
use wave_core::layout::{layout_lattice, layout_nested, DiagramLayout};
use wave_core::lattice::LatticeJson;
use wave_core::FormalContext;

use crate::error::{ApiError, ApiResult};
use crate::{AppState, Loaded};

const INDEX: &str = "<!doctype html><title>wave</title><p>wave API: see <code>/api/lattice</code>.</p>\n";

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/api/context", get(context))
        .route("/api/lattice", get(lattice))
        .route("/api/nested", get(nested))
        .route("/api/scales", get(scales))
        .route("/api/session", post(open_session))
        .route("/api/session/{id}/seed", post(reseed))
        .route("/api/neighborhood", get(neighborhood))
        .route("/api/union", get(union))
        .route("/api/rebuild", post(rebuild));
    let api = match &state.config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(INDEX) })),
    };
    api.with_state(state)
}

async fn context(State(st): State<Arc<AppState>>) -> ApiResult<Json<FormalContext>> {
    let view = st.view();
    Ok(Json(view.workspace.view.built()?.context().clone()))
}

#[derive(Serialize)]
struct LatticeResponse {
    lattice: LatticeJson,
    layout: DiagramLayout,
}

async fn lattice(State(st): State<Arc<AppState>>) -> ApiResult<Json<LatticeResponse>> {
    let view = st.view();
    Ok(Json(LatticeResponse {
        lattice: view.workspace.view.built()?.lattice.to_json(),
        layout: view.layout.clone(),
    }))
}

#[derive(Deserialize)]
struct NestedQuery {
    outer: Option<String>,
    inner: Option<String>,
}

#[derive(Serialize)]
struct NestedResponse {
    #[serde(flatten)]
    nested: NestedJson,
    layout: DiagramLayout,
}

/// Defaults to the first two scales of the view.
async fn nested(State(st): State<Arc<AppState>>, Query(q): Query<NestedQuery>) -> ApiResult<Json<NestedResponse>> {
    let view = st.view();
    let ws = &view.workspace;
    let pick = |given: Option<String>, i: usize| {
        given
            .or_else(|| ws.view.scales.get(i).cloned())
            .ok_or_else(|| ApiError::bad_request("the view has fewer than two scales; pass `outer` and `inner`"))
    };
    let (outer, inner) = (pick(q.outer, 0)?, pick(q.inner, 1)?);
    let docs = &ws.dataset.records;
    let nd = nest(&ws.registry.apply(&outer, docs)?, &ws.registry.apply(&inner, docs)?)?;
    Ok(Json(NestedResponse {
        nested: nd.to_json(),
        layout: layout_nested(&nd),
    }))
}

#[derive(Serialize)]
struct ScaleInfo<'a> {
    #[serde(flatten)]
    scale: &'a RegisteredScale,
    in_view: bool,
}

async fn scales(State(st): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let view = st.view();
    let ws = &view.workspace;
    let list: Vec<ScaleInfo> = ws
        .registry
        .iter()
        .map(|scale| ScaleInfo {
            scale,
            in_view: ws.view.scales.contains(&scale.scale.name),
        })
        .collect();
    Json(serde_json::json!({ "view": ws.view.scales, "scales": list }))
}

/// A seed as `{kind, id}` or a bare id (objects win over attributes).
#[derive(Deserialize)]
#[serde(untagged)]
enum SeedArg {
    Tagged(Seed),
    Bare(String),
}

impl SeedArg {
    fn resolve(self, ctx: &FormalContext) -> ApiResult<Seed> {
        match self {
            SeedArg::Tagged(s) => Ok(s),
            SeedArg::Bare(id) => Ok(Seed::resolve(ctx, &id)?),
        }
    }
}

#[derive(Deserialize)]
struct SessionRequest {
    seed: Option<SeedArg>,
    threshold: Option<usize>,
    top_k: Option<usize>,
    radius: Option<f64>,
    auto_simplify: Option<bool>,
}

impl SessionRequest {
    fn params(&self, base: &BrowseParams) -> BrowseParams {
        BrowseParams {
            threshold: self.threshold.unwrap_or(base.threshold),
            top_k: self.top_k.or(base.top_k),
            radius: self.radius.or(base.radius),
            auto_simplify: self.auto_simplify.unwrap_or(base.auto_simplify),
        }
    }
}

#[derive(Serialize)]
struct SessionResponse {
    session_id: String,
    state: SessionState,
    global_concepts: usize,
}

async fn open_session(
    State(st): State<Arc<AppState>>,
    Json(req): Json<SessionRequest>,
) -> ApiResult<(StatusCode, Json<SessionResponse>)> {
    let view = st.view();
    let built = view.workspace.view.built()?;
    let params = req.params(&st.config.defaults);
    let seed = req
        .seed
        .ok_or_else(|| ApiError::bad_request("`seed` is required"))?
        .resolve(built.context())?;
    let session = BrowseSession::new(built, seed, params)?;
    let state = session.state();
    let global_concepts = session.global_concept_count();
    let session_id = st.open_session(session);
    Ok((
        StatusCode::CREATED,
        Json(SessionResponse {
            session_id,
            state,
            global_concepts,
        }),
    ))
}

#[derive(Serialize)]
struct NeighborhoodResponse {
    session_id: String,
    state: SessionState,
    #[serde(flatten)]
    neighborhood: NeighborhoodJson,
    layout: DiagramLayout,
}

fn respond(session_id: &str, session: &BrowseSession, n: Neighborhood) -> NeighborhoodResponse {
    NeighborhoodResponse {
        session_id: session_id.to_owned(),
        state: session.state(),
        layout: layout_lattice(&n.lattice),
        neighborhood: n.to_json(),
    }
}

#[derive(Deserialize)]
struct SessionQuery {
    session: String,
    prev: Option<String>,
}

async fn neighborhood(
    State(st): State<Arc<AppState>>,
    Query(q): Query<SessionQuery>,
) -> ApiResult<Json<NeighborhoodResponse>> {
    let session = st.with_session(&q.session, |s| Ok(s.inner.clone()))?;
    let n = session.neighborhood();
    Ok(Json(respond(&q.session, &session, n)))
}

/// Moves the session to a new seed and/or parameters and returns the new
/// neighborhood.
async fn reseed(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<SessionRequest>,
) -> ApiResult<Json<NeighborhoodResponse>> {
    let session = st.with_session(&id, |s| {
        let mut next = s.inner.with_params(req.params(&s.inner.params))?;
        if let Some(seed) = req.seed {
            next = next.reseed(seed.resolve(next.global().context())?)?;
        }
        s.inner = next.clone();
        Ok(next)
    })?;
    let n = session.neighborhood();
    Ok(Json(respond(&id, &session, n)))
}

/// `prev` names an earlier seed of the session; it defaults to the most
/// recent one.
async fn union(State(st): State<Arc<AppState>>, Query(q): Query<SessionQuery>) -> ApiResult<Json<NeighborhoodResponse>> {
    let session = st.with_session(&q.session, |s| Ok(s.inner.clone()))?;
    let previous = match &q.prev {
        Some(p) => session
            .history
            .iter()
            .rev()
            .find(|s| s.id() == p)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UnknownSeed", format!("`{p}` is not in the session history")))?,
        None => session
            .history
            .last()
            .cloned()
            .ok_or_else(|| ApiError::bad_request("the session has not been reseeded yet"))?,
    };
    let mut old = session.clone();
    old.seed = previous;
    let n = union_neighborhood(&old.neighborhood(), &session.neighborhood())?;
    Ok(Json(respond(&q.session, &session, n)))
}

#[derive(Deserialize, Default)]
struct RebuildRequest {
    scales: Option<Vec<String>>,
}

#[derive(Serialize)]
struct RebuildResponse {
    scales: Vec<String>,
    objects: usize,
    attributes: usize,
    concepts: usize,
}

/// Rebuilds the view (optionally over a new scale list) off the request
/// thread and swaps it in. Existing sessions keep the view they started on.
async fn rebuild(
    State(st): State<Arc<AppState>>,
    body: Option<Json<RebuildRequest>>,
) -> ApiResult<impl IntoResponse> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let current = st.view();
    let loaded = tokio::task::spawn_blocking(move || -> wave_core::Result<Loaded> {
        let scales = req.scales.unwrap_or_else(|| current.workspace.view.scales.clone());
        Loaded::new(current.workspace.with_view(scales)?)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))??;
    let built = loaded.workspace.view.built()?;
    let resp = RebuildResponse {
        scales: loaded.workspace.view.scales.clone(),
        objects: built.context().num_objects(),
        attributes: built.context().num_attributes(),
        concepts: built.lattice.len(),
    };
    st.swap_view(loaded);
    log::info!("view rebuilt over {:?}: {} concepts", resp.scales, resp.concepts);
    Ok(Json(resp))
}
