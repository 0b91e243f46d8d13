//! HTTP API over a built wave view.
//!
//! ## Endpoints
//!
//! - `GET /api/context` - the view's apposed formal context
//! - `GET /api/lattice` - concept lattice plus layout
//! - `GET /api/nested?outer=A&inner=B` - nested diagram of two scales
//! - `GET /api/scales` - registered scales
//! - `POST /api/session` - open a browse session at a seed
//! - `GET /api/neighborhood?session=S` - current neighborhood of a session
//! - `POST /api/session/{id}/seed` - reseed and/or change parameters
//! - `GET /api/union?session=S&prev=P` - union with an earlier seed's neighborhood
//! - `POST /api/rebuild` - rebuild the view and swap it in
//!
//! Anything else is served from the static directory, if one is configured.

mod error;
mod routes;

pub use error::{ApiError, ApiResult};
pub use routes::router;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use wave_core::browse::{BrowseParams, BrowseSession};
use wave_core::fixtures::Workspace;
use wave_core::layout::{layout_lattice, DiagramLayout};

pub const DEFAULT_IDLE: Duration = Duration::from_secs(30 * 60);

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub port: u16,
    pub static_dir: Option<PathBuf>,
    /// Sessions untouched for this long are dropped.
    pub idle_timeout: Duration,
    /// Parameters for sessions that do not set their own.
    pub defaults: BrowseParams,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            port: 8080,
            static_dir: None,
            idle_timeout: DEFAULT_IDLE,
            defaults: BrowseParams::default(),
        }
    }
}

/// A built workspace together with its precomputed global layout.
#[derive(Debug)]
pub struct Loaded {
    pub workspace: Workspace,
    pub layout: DiagramLayout,
}

impl Loaded {
    pub fn new(workspace: Workspace) -> wave_core::Result<Self> {
        let layout = layout_lattice(&workspace.view.built()?.lattice);
        Ok(Self { workspace, layout })
    }
}

pub struct ApiSession {
    pub inner: BrowseSession,
    pub created_at: Instant,
    pub last_used: Instant,
}

pub struct AppState {
    view: RwLock<Arc<Loaded>>,
    sessions: Mutex<HashMap<String, ApiSession>>,
    pub config: ServerConfig,
}

impl AppState {
    pub fn new(workspace: Workspace, config: ServerConfig) -> wave_core::Result<Arc<Self>> {
        Ok(Arc::new(Self {
            view: RwLock::new(Arc::new(Loaded::new(workspace)?)),
            sessions: Mutex::new(HashMap::new()),
            config,
        }))
    }

    /// The current view; requests keep the snapshot they started with.
    pub fn view(&self) -> Arc<Loaded> {
        self.view.read().unwrap().clone()
    }

    pub fn swap_view(&self, loaded: Loaded) {
        *self.view.write().unwrap() = Arc::new(loaded);
    }

    /// Runs `f` on a live session under the session table lock, refreshing
    /// its idle clock and dropping expired sessions first.
    pub fn with_session<T>(&self, id: &str, f: impl FnOnce(&mut ApiSession) -> ApiResult<T>) -> ApiResult<T> {
        let mut sessions = self.sessions.lock().unwrap();
        let now = Instant::now();
        let idle = self.config.idle_timeout;
        sessions.retain(|_, s| now.duration_since(s.last_used) < idle);
        let s = sessions.get_mut(id).ok_or_else(|| ApiError::unknown_session(id))?;
        s.last_used = now;
        f(s)
    }

    pub fn open_session(&self, inner: BrowseSession) -> String {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let now = Instant::now();
        let mut sessions = self.sessions.lock().unwrap();
        let idle = self.config.idle_timeout;
        sessions.retain(|_, s| now.duration_since(s.last_used) < idle);
        sessions.insert(
            id.clone(),
            ApiSession {
                inner,
                created_at: now,
                last_used: now,
            },
        );
        id
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }
}

pub async fn serve(workspace: Workspace, config: ServerConfig) -> std::io::Result<()> {
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let state = AppState::new(workspace, config).map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
