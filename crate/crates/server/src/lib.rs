//! JSON search API, OpenSearch description and optional static UI.

mod api;
mod error;
mod opensearch;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::http::{header, HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use formulary_core::index::IndexSnapshot;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::{ServeDir, ServeFile};

pub use error::ApiError;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Public base URL used in the OpenSearch description.
    pub base_url: String,
    /// Built UI assets served at `/` when the directory exists.
    pub ui_dir: Option<PathBuf>,
    /// Allowed CORS origins; `None` allows any.
    pub cors_origins: Option<Vec<String>>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            base_url: "http://localhost:8080".to_string(),
            ui_dir: None,
            cors_origins: None,
        }
    }
}

/// Shared state: the current snapshot, replaced atomically on reload.
pub struct AppState {
    index: RwLock<Arc<IndexSnapshot>>,
    config: ServerConfig,
}

impl AppState {
    pub fn new(index: IndexSnapshot, config: ServerConfig) -> Arc<Self> {
        Arc::new(AppState {
            index: RwLock::new(Arc::new(index)),
            config,
        })
    }

    /// The snapshot requests started now will see.
    pub fn snapshot(&self) -> Arc<IndexSnapshot> {
        self.index.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Installs a new snapshot; in-flight requests keep the old one.
    pub fn swap(&self, index: IndexSnapshot) {
        *self.index.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(index);
    }

    pub fn config(&self) -> &ServerConfig {
        &self.config
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let cors = match &state.config.cors_origins {
        None => CorsLayer::new().allow_origin(AllowOrigin::any()),
        Some(origins) => CorsLayer::new().allow_origin(AllowOrigin::list(
            origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()),
        )),
    }
    .allow_methods([Method::GET, Method::POST])
    .allow_headers([header::CONTENT_TYPE]);

    let ui = state
        .config
        .ui_dir
        .clone()
        .filter(|dir| dir.join("index.html").is_file());

    let mut app = Router::new()
        .route("/api/search", get(api::search))
        .route("/api/suggest", get(api::suggest))
        .route("/api/preview", post(api::preview))
        .route("/api/explain", get(api::explain))
        .route("/api/doc/{id}", get(api::document))
        .route("/opensearch.xml", get(opensearch::description))
        .fallback(error::not_found);
    app = match ui {
        Some(dir) => app
            .route_service("/search", ServeFile::new(dir.join("index.html")))
            .fallback_service(ServeDir::new(dir)),
        None => app.route("/search", get(api::search_page)),
    };
    app.layer(cors).with_state(state)
}

/// Serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
