//! HTTP front end for the sonification pipeline.
//!
//! | route | |
//! |---|---|
//! | `GET /v1/histogram?min_lon&min_lat&max_lon&max_lat&bins` | histogram document |
//! | `POST /v1/sonify` | [`SonifyResult`]; body carries `bbox` or `geojson` |
//! | `GET /v1/loop/{id}.wav` | rendered loop |
//! | `GET /healthz` | liveness, cache and loop store counters |
//!
//! Errors are JSON objects `{"code": "...", "message": "..."}`.

mod api;
mod error;
mod handlers;
mod store;

use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::DefaultBodyLimit;
use axum::http::{HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use xenakis_core::ingest::{CacheHandle, FetcherConfig, RegionFetcher, CACHE_DIR_ENV, DEFAULT_TTL, PROVIDER_URL_ENV};

pub use api::{BboxInput, SonifyRequest, SonifyResult};
pub use error::ApiError;
pub use store::{LoopStore, StoredLoop};

pub const LOOP_CAPACITY_ENV: &str = "XENAKIS_LOOP_CAPACITY";
pub const CORS_ORIGINS_ENV: &str = "XENAKIS_CORS_ORIGINS";
pub const DEFAULT_PROVIDER_URL: &str = "https://overpass-api.de/api/interpreter";
pub const DEFAULT_LOOP_CAPACITY: usize = 128;
/// 20 MB.
pub const DEFAULT_MAX_BODY_BYTES: usize = 20 * 1024 * 1024;
pub const MAX_BINS: usize = 360;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub provider_url: String,
    pub cache_dir: PathBuf,
    pub cache_ttl: Duration,
    pub loop_capacity: usize,
    pub max_body_bytes: usize,
    /// Allowed browser origins; empty allows any origin.
    pub cors_origins: Vec<String>,
    pub fetcher: FetcherConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            provider_url: DEFAULT_PROVIDER_URL.to_string(),
            cache_dir: CacheHandle::default_dir(),
            cache_ttl: DEFAULT_TTL,
            loop_capacity: DEFAULT_LOOP_CAPACITY,
            max_body_bytes: DEFAULT_MAX_BODY_BYTES,
            cors_origins: Vec::new(),
            fetcher: FetcherConfig::default(),
        }
    }
}

impl ServiceConfig {
    /// Defaults overridden by the `XENAKIS_*` environment variables.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Ok(url) = std::env::var(PROVIDER_URL_ENV) {
            if !url.trim().is_empty() {
                cfg.provider_url = url.trim().to_string();
            }
        }
        if let Some(dir) = std::env::var_os(CACHE_DIR_ENV) {
            cfg.cache_dir = dir.into();
        }
        if let Some(n) = std::env::var(LOOP_CAPACITY_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            cfg.loop_capacity = n;
        }
        if let Ok(origins) = std::env::var(CORS_ORIGINS_ENV) {
            cfg.cors_origins = origins
                .split(',')
                .map(str::trim)
                .filter(|o| !o.is_empty())
                .map(String::from)
                .collect();
        }
        cfg
    }
}

/// Shared state behind every handler.
#[derive(Debug)]
pub struct AppState {
    pub config: ServiceConfig,
    pub fetcher: RegionFetcher,
    pub loops: LoopStore,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> io::Result<Self> {
        let cache = CacheHandle::open(&config.cache_dir, config.cache_ttl)?;
        Ok(Self {
            fetcher: RegionFetcher::new(cache, config.fetcher.clone()),
            loops: LoopStore::new(config.loop_capacity),
            config,
        })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let cors = cors_layer(&state.config.cors_origins);
    let limit = state.config.max_body_bytes;
    Router::new()
        .route("/v1/histogram", get(handlers::histogram))
        .route("/v1/sonify", post(handlers::sonify))
        .route("/v1/loop/{file}", get(handlers::loop_wav))
        .route("/healthz", get(handlers::healthz))
        .fallback(handlers::not_found)
        .layer(DefaultBodyLimit::max(limit))
        .layer(cors)
        .with_state(state)
}

fn cors_layer(origins: &[String]) -> CorsLayer {
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST, Method::OPTIONS])
        .allow_headers(Any);
    if origins.is_empty() {
        return layer.allow_origin(Any);
    }
    let list: Vec<HeaderValue> = origins.iter().filter_map(|o| o.parse().ok()).collect();
    layer.allow_origin(AllowOrigin::list(list))
}

/// Serves until Ctrl-C.
pub async fn serve(listener: tokio::net::TcpListener, config: ServiceConfig) -> io::Result<()> {
    let app = router(Arc::new(AppState::new(config)?));
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Binds `addr` and serves on a fresh multi-threaded runtime. `on_ready`
/// receives the bound address, which differs from `addr` for port 0.
pub fn run_blocking(addr: SocketAddr, config: ServiceConfig, on_ready: impl FnOnce(SocketAddr)) -> io::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        on_ready(listener.local_addr()?);
        serve(listener, config).await
    })
}
