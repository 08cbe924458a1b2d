use std::collections::HashMap;
use std::io;
use std::net::TcpStream;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use thiserror::Error;
use url::Url;

use super::cache::{Lookup, DEFAULT_TTL};
use super::overpass::overpass_to_geojson;
use super::{BoundingBox, CacheHandle, GeoError};

/// Overpass QL for every way tagged `highway`; `{{bbox}}` becomes `south,west,north,east`.
pub const DEFAULT_QUERY_TEMPLATE: &str = "[out:json][timeout:25];way[\"highway\"]({{bbox}});out geom;";

#[derive(Debug, Error)]
pub enum FetchError {
    #[error(transparent)]
    InvalidBoundingBox(#[from] GeoError),
    #[error("invalid provider endpoint {0:?}")]
    InvalidEndpoint(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("provider returned status {status}: {body}")]
    Provider { status: u16, body: String },
    #[error("provider rate limited the request{}", retry_hint(.retry_after))]
    RateLimited { retry_after: Option<Duration> },
    #[error("cache entry {key} was corrupt ({reason}) and the refetch failed: {refetch}")]
    CacheCorrupt {
        key: String,
        reason: String,
        refetch: Box<FetchError>,
    },
    #[error("cache I/O: {0}")]
    Io(#[from] io::Error),
}

fn retry_hint(retry_after: &Option<Duration>) -> String {
    match retry_after {
        Some(d) => format!(", retry after {}s", d.as_secs()),
        None => String::new(),
    }
}

#[derive(Debug, Clone)]
pub struct FetcherConfig {
    pub query_template: String,
    pub timeout: Duration,
    pub max_concurrent_per_endpoint: usize,
    pub max_body_bytes: u64,
}

impl Default for FetcherConfig {
    fn default() -> Self {
        Self {
            query_template: DEFAULT_QUERY_TEMPLATE.to_string(),
            timeout: Duration::from_secs(60),
            max_concurrent_per_endpoint: 2,
            max_body_bytes: 256 * 1024 * 1024,
        }
    }
}

/// Counting semaphore bounding outbound requests per endpoint.
#[derive(Debug)]
struct Permits {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Permits {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> PermitGuard<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        PermitGuard(self)
    }
}

struct PermitGuard<'a>(&'a Permits);

impl Drop for PermitGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

/// Cached, rate-bounded client for an Overpass-style provider.
///
/// Writes to one cache key are serialized; lookups that hit never wait.
#[derive(Debug)]
pub struct RegionFetcher {
    cache: CacheHandle,
    config: FetcherConfig,
    agent: ureq::Agent,
    key_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    permits: Mutex<HashMap<String, Arc<Permits>>>,
    network_requests: AtomicU64,
}

impl RegionFetcher {
    pub fn new(cache: CacheHandle, config: FetcherConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            cache,
            config,
            agent,
            key_locks: Mutex::new(HashMap::new()),
            permits: Mutex::new(HashMap::new()),
            network_requests: AtomicU64::new(0),
        }
    }

    pub fn cache(&self) -> &CacheHandle {
        &self.cache
    }

    pub fn config(&self) -> &FetcherConfig {
        &self.config
    }

    /// Outbound requests issued so far.
    pub fn network_requests(&self) -> u64 {
        self.network_requests.load(Ordering::Relaxed)
    }

    pub fn cache_key(&self, bbox: &BoundingBox, endpoint: &str) -> String {
        CacheHandle::key(bbox, endpoint, &self.config.query_template)
    }

    /// Returns the GeoJSON document for `bbox`, from cache when fresh.
    pub fn fetch(&self, bbox: &BoundingBox, endpoint: &str) -> Result<String, FetchError> {
        bbox.validate()?;
        let url = Url::parse(endpoint).map_err(|_| FetchError::InvalidEndpoint(endpoint.to_string()))?;
        if !matches!(url.scheme(), "http" | "https") {
            return Err(FetchError::InvalidEndpoint(endpoint.to_string()));
        }
        let key = self.cache_key(bbox, endpoint);
        if let Lookup::Hit(doc) = self.cache.lookup(&key) {
            return Ok(doc);
        }

        let lock = self.key_lock(&key);
        let _writer = lock.lock().unwrap();
        match self.cache.lookup(&key) {
            Lookup::Hit(doc) => Ok(doc),
            Lookup::Miss | Lookup::Expired => {
                let doc = self.download(bbox, &url)?;
                self.cache.store(&key, endpoint, bbox, &doc)?;
                Ok(doc)
            }
            Lookup::Corrupt(reason) => {
                self.cache.remove(&key);
                match self.download(bbox, &url) {
                    Ok(doc) => {
                        self.cache.store(&key, endpoint, bbox, &doc)?;
                        Ok(doc)
                    }
                    Err(e) => Err(FetchError::CacheCorrupt {
                        key,
                        reason,
                        refetch: Box::new(e),
                    }),
                }
            }
        }
    }

    fn key_lock(&self, key: &str) -> Arc<Mutex<()>> {
        self.key_locks
            .lock()
            .unwrap()
            .entry(key.to_string())
            .or_default()
            .clone()
    }

    fn endpoint_permits(&self, url: &Url) -> Arc<Permits> {
        let origin = url.origin().ascii_serialization();
        self.permits
            .lock()
            .unwrap()
            .entry(origin)
            .or_insert_with(|| Arc::new(Permits::new(self.config.max_concurrent_per_endpoint)))
            .clone()
    }

    fn query_for(&self, bbox: &BoundingBox) -> String {
        let overpass_bbox = format!(
            "{:.5},{:.5},{:.5},{:.5}",
            bbox.min_lat, bbox.min_lon, bbox.max_lat, bbox.max_lon
        );
        self.config.query_template.replace("{{bbox}}", &overpass_bbox)
    }

    fn download(&self, bbox: &BoundingBox, endpoint: &Url) -> Result<String, FetchError> {
        let mut url = endpoint.clone();
        url.query_pairs_mut().append_pair("data", &self.query_for(bbox));

        let permits = self.endpoint_permits(endpoint);
        let _permit = permits.acquire();
        self.network_requests.fetch_add(1, Ordering::Relaxed);
        let mut resp = self
            .agent
            .get(url.as_str())
            .call()
            .map_err(|e| FetchError::Network(e.to_string()))?;
        let status = resp.status().as_u16();
        let retry_after = resp
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let body = resp
            .body_mut()
            .with_config()
            .limit(self.config.max_body_bytes)
            .read_to_string()
            .map_err(|e| FetchError::Network(e.to_string()))?;
        match status {
            200..=299 => normalize_document(body),
            429 => Err(FetchError::RateLimited { retry_after }),
            _ => Err(FetchError::Provider { status, body }),
        }
    }
}

/// GeoJSON passes through untouched; Overpass JSON is converted.
fn normalize_document(body: String) -> Result<String, FetchError> {
    let value: serde_json::Value = serde_json::from_str(&body).map_err(|e| FetchError::Provider {
        status: 200,
        body: format!("response is not JSON ({e})"),
    })?;
    if let Some(converted) = overpass_to_geojson(&value) {
        return Ok(converted.to_string());
    }
    if value.get("type").and_then(|t| t.as_str()).is_some() {
        return Ok(body);
    }
    Err(FetchError::Provider {
        status: 200,
        body: "response is neither GeoJSON nor Overpass JSON".into(),
    })
}

/// One-shot fetch with default settings through `cache`.
pub fn fetch_region(bbox: &BoundingBox, endpoint: &str, cache: &CacheHandle) -> Result<String, FetchError> {
    RegionFetcher::new(cache.clone(), FetcherConfig::default()).fetch(bbox, endpoint)
}

/// True when a TCP connection to the endpoint's host succeeds within `timeout`.
pub fn provider_reachable(endpoint: &str, timeout: Duration) -> bool {
    let Ok(url) = Url::parse(endpoint) else {
        return false;
    };
    let Ok(addrs) = url.socket_addrs(|| None) else {
        return false;
    };
    addrs
        .iter()
        .any(|addr| TcpStream::connect_timeout(addr, timeout).is_ok())
}

impl Default for RegionFetcher {
    fn default() -> Self {
        let cache = CacheHandle::open(CacheHandle::default_dir(), DEFAULT_TTL)
            .unwrap_or_else(|_| CacheHandle::open(std::env::temp_dir().join("xenakis"), DEFAULT_TTL).unwrap());
        Self::new(cache, FetcherConfig::default())
    }
}
