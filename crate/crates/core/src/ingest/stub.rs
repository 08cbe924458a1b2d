//! A tiny blocking HTTP server that impersonates an Overpass-style provider.
//!
//! It answers `GET <any path>?data=<query>` by extracting the
//! `(south,west,north,east)` box from the query and returning every loaded
//! feature whose extent intersects it, as a GeoJSON FeatureCollection. Used
//! by the test suites and for offline demos.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use serde_json::{json, Value};

use super::BoundingBox;

/// How the stub answers requests.
#[derive(Debug, Clone, PartialEq)]
pub enum StubMode {
    /// GeoJSON FeatureCollection.
    GeoJson,
    /// Overpass `out geom` JSON.
    Overpass,
    /// 429 with a `Retry-After` header.
    RateLimited { retry_after_secs: u64 },
    /// Fixed status with a plain-text body.
    Status(u16),
}

struct Shared {
    features: Vec<Value>,
    mode: Mutex<StubMode>,
    requests: AtomicUsize,
    shutdown: AtomicBool,
}

pub struct StubProvider {
    addr: SocketAddr,
    shared: Arc<Shared>,
    handle: Option<JoinHandle<()>>,
}

impl StubProvider {
    /// Serves the features of the given GeoJSON documents on an ephemeral local port.
    pub fn start(documents: &[&str]) -> io::Result<Self> {
        Self::bind("127.0.0.1:0", documents)
    }

    pub fn bind(addr: &str, documents: &[&str]) -> io::Result<Self> {
        let mut features = Vec::new();
        for doc in documents {
            let v: Value = serde_json::from_str(doc).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
            match v.get("features").and_then(Value::as_array) {
                Some(fs) => features.extend(fs.iter().cloned()),
                None => features.push(v),
            }
        }
        let listener = TcpListener::bind(addr)?;
        let addr = listener.local_addr()?;
        let shared = Arc::new(Shared {
            features,
            mode: Mutex::new(StubMode::GeoJson),
            requests: AtomicUsize::new(0),
            shutdown: AtomicBool::new(false),
        });
        let accept_shared = shared.clone();
        let handle = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if accept_shared.shutdown.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let shared = accept_shared.clone();
                std::thread::spawn(move || {
                    let _ = handle_connection(stream, &shared);
                });
            }
        });
        Ok(Self {
            addr,
            shared,
            handle: Some(handle),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Endpoint URL to hand to a fetcher.
    pub fn url(&self) -> String {
        format!("http://{}/api/interpreter", self.addr)
    }

    /// Number of requests served so far.
    pub fn requests(&self) -> usize {
        self.shared.requests.load(Ordering::SeqCst)
    }

    pub fn set_mode(&self, mode: StubMode) {
        *self.shared.mode.lock().unwrap() = mode;
    }
}

impl Drop for StubProvider {
    fn drop(&mut self) {
        self.shared.shutdown.store(true, Ordering::SeqCst);
        // wake the accept loop
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn handle_connection(stream: TcpStream, shared: &Shared) -> io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    loop {
        let mut header = String::new();
        if reader.read_line(&mut header)? == 0 || header == "\r\n" || header == "\n" {
            break;
        }
    }
    if shared.shutdown.load(Ordering::SeqCst) || request_line.is_empty() {
        return Ok(());
    }
    shared.requests.fetch_add(1, Ordering::SeqCst);

    let target = request_line.split_whitespace().nth(1).unwrap_or("/");
    let query = url::Url::parse(&format!("http://stub{target}"))
        .ok()
        .and_then(|u| u.query_pairs().find(|(k, _)| k == "data").map(|(_, v)| v.into_owned()));
    let mode = shared.mode.lock().unwrap().clone();
    let (status, extra, body) = match (&mode, query.as_deref().and_then(query_bbox)) {
        (StubMode::RateLimited { retry_after_secs }, _) => (
            429,
            format!("Retry-After: {retry_after_secs}\r\n"),
            "rate limited".to_string(),
        ),
        (StubMode::Status(code), _) => (*code, String::new(), format!("stub status {code}")),
        (_, None) => (400, String::new(), "missing or unreadable data=(s,w,n,e) query".to_string()),
        (StubMode::GeoJson, Some(bbox)) => (200, String::new(), geojson_response(shared, &bbox)),
        (StubMode::Overpass, Some(bbox)) => (200, String::new(), overpass_response(shared, &bbox)),
    };
    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 {status} {}\r\nContent-Type: application/json\r\nContent-Length: {}\r\n{extra}Connection: close\r\n\r\n{body}",
        reason(status),
        body.len()
    )?;
    stream.flush()
}

fn reason(status: u16) -> &'static str {
    match status {
        200 => "OK",
        400 => "Bad Request",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        503 => "Service Unavailable",
        _ => "Status",
    }
}

/// Pulls `(south,west,north,east)` out of an Overpass query.
fn query_bbox(query: &str) -> Option<BoundingBox> {
    let open = query.rfind('(')?;
    let close = open + query[open..].find(')')?;
    let nums: Vec<f64> = query[open + 1..close]
        .split(',')
        .map(|s| s.trim().parse().ok())
        .collect::<Option<_>>()?;
    match nums.as_slice() {
        &[s, w, n, e] => BoundingBox::new(w, s, e, n).ok(),
        _ => None,
    }
}

fn selected<'a>(shared: &'a Shared, bbox: &BoundingBox) -> impl Iterator<Item = &'a Value> {
    let bbox = *bbox;
    shared
        .features
        .iter()
        .filter(move |f| extent(f).is_some_and(|e| e.intersects(&bbox)))
}

fn geojson_response(shared: &Shared, bbox: &BoundingBox) -> String {
    let features: Vec<&Value> = selected(shared, bbox).collect();
    json!({"type": "FeatureCollection", "features": features}).to_string()
}

fn overpass_response(shared: &Shared, bbox: &BoundingBox) -> String {
    let mut elements = Vec::new();
    for (i, f) in selected(shared, bbox).enumerate() {
        let geom = &f["geometry"];
        let lines: Vec<&Value> = match geom["type"].as_str() {
            Some("LineString") => vec![&geom["coordinates"]],
            Some("MultiLineString") => geom["coordinates"].as_array().map(|a| a.iter().collect()).unwrap_or_default(),
            _ => continue,
        };
        for line in lines {
            let pts: Vec<Value> = line
                .as_array()
                .into_iter()
                .flatten()
                .map(|p| json!({"lat": p[1], "lon": p[0]}))
                .collect();
            elements.push(json!({
                "type": "way",
                "id": 1000 + i,
                "tags": f.get("properties").cloned().unwrap_or(Value::Null),
                "geometry": pts,
            }));
        }
    }
    json!({"version": 0.6, "generator": "xenakis stub", "elements": elements}).to_string()
}

fn extent(feature: &Value) -> Option<BoundingBox> {
    fn walk(v: &Value, acc: &mut Option<(f64, f64, f64, f64)>) {
        let Some(items) = v.as_array() else { return };
        if let (Some(lon), Some(lat)) = (items.first().and_then(Value::as_f64), items.get(1).and_then(Value::as_f64)) {
            let e = acc.get_or_insert((lon, lat, lon, lat));
            *e = (e.0.min(lon), e.1.min(lat), e.2.max(lon), e.3.max(lat));
            return;
        }
        for item in items {
            walk(item, acc);
        }
    }
    let geom = feature.get("geometry").unwrap_or(feature);
    let mut acc = None;
    walk(geom.get("coordinates")?, &mut acc);
    let (a, b, c, d) = acc?;
    Some(BoundingBox {
        min_lon: a,
        min_lat: b,
        max_lon: c,
        max_lat: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bbox_from_query() {
        let b = query_bbox("[out:json];way[\"highway\"](48.2,16.3,48.3,16.4);out geom;").unwrap();
        assert_eq!(b, BoundingBox::new(16.3, 48.2, 16.4, 48.3).unwrap());
        assert!(query_bbox("no box").is_none());
    }
}
