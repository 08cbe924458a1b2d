//! On-disk region cache.
//!
//! Each entry is two files named after the cache key: `<key>.geojson` holds
//! the raw document bytes and `<key>.meta` a line-oriented `key=value`
//! sidecar:
//!
//! ```text
//! version=1
//! fetched_at=1760000000
//! endpoint=https://overpass.example/api/interpreter
//! bbox=16.30000,48.20000,16.40000,48.30000
//! bytes=5120
//! sha256=9f86d081884c7d65...
//! ```
//!
//! `fetched_at` is seconds since the Unix epoch. Lines starting with `#` and
//! unknown keys are ignored.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use super::{BoundingBox, CACHE_DIR_ENV};

/// Seven days.
pub const DEFAULT_TTL: Duration = Duration::from_secs(7 * 24 * 3600);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntryMeta {
    pub fetched_at: u64,
    pub endpoint: String,
    pub bbox: String,
    pub bytes: usize,
    pub sha256: String,
}

impl CacheEntryMeta {
    pub fn to_text(&self) -> String {
        format!(
            "version=1\nfetched_at={}\nendpoint={}\nbbox={}\nbytes={}\nsha256={}\n",
            self.fetched_at, self.endpoint, self.bbox, self.bytes, self.sha256
        )
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut version = None;
        let (mut fetched_at, mut endpoint, mut bbox, mut bytes, mut sha256) = (None, None, None, None, None);
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line without '=': {line:?}"))?;
            match k {
                "version" => version = Some(v.to_string()),
                "fetched_at" => fetched_at = Some(v.parse::<u64>().map_err(|e| format!("fetched_at: {e}"))?),
                "endpoint" => endpoint = Some(v.to_string()),
                "bbox" => bbox = Some(v.to_string()),
                "bytes" => bytes = Some(v.parse::<usize>().map_err(|e| format!("bytes: {e}"))?),
                "sha256" => sha256 = Some(v.to_string()),
                _ => {}
            }
        }
        if version.as_deref() != Some("1") {
            return Err(format!("unsupported version {version:?}"));
        }
        Ok(Self {
            fetched_at: fetched_at.ok_or("missing fetched_at")?,
            endpoint: endpoint.ok_or("missing endpoint")?,
            bbox: bbox.ok_or("missing bbox")?,
            bytes: bytes.ok_or("missing bytes")?,
            sha256: sha256.ok_or("missing sha256")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Lookup {
    Hit(String),
    Miss,
    Expired,
    Corrupt(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct CacheStats {
    pub entries: usize,
    pub bytes: u64,
}

/// A cache directory plus its freshness policy.
#[derive(Debug, Clone)]
pub struct CacheHandle {
    dir: PathBuf,
    ttl: Duration,
}

impl CacheHandle {
    pub fn open(dir: impl Into<PathBuf>, ttl: Duration) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir, ttl })
    }

    /// `$XENAKIS_CACHE_DIR`, else the platform cache directory plus `xenakis`.
    pub fn default_dir() -> PathBuf {
        if let Some(dir) = std::env::var_os(CACHE_DIR_ENV) {
            return PathBuf::from(dir);
        }
        dirs::cache_dir()
            .unwrap_or_else(std::env::temp_dir)
            .join("xenakis")
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    /// Stable key for a request: hex SHA-256 over the rounded box, endpoint and query template.
    pub fn key(bbox: &BoundingBox, endpoint: &str, template: &str) -> String {
        let mut h = Sha256::new();
        h.update(b"xenakis-region-v1\n");
        h.update(bbox.rounded_key().as_bytes());
        h.update(b"\n");
        h.update(endpoint.as_bytes());
        h.update(b"\n");
        h.update(template.as_bytes());
        hex::encode(h.finalize())
    }

    pub fn data_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.geojson"))
    }

    pub fn meta_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.meta"))
    }

    pub(crate) fn lookup(&self, key: &str) -> Lookup {
        let meta_text = match fs::read_to_string(self.meta_path(key)) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return if self.data_path(key).exists() {
                    Lookup::Corrupt("data without metadata".into())
                } else {
                    Lookup::Miss
                };
            }
            Err(e) => return Lookup::Corrupt(e.to_string()),
        };
        let meta = match CacheEntryMeta::parse(&meta_text) {
            Ok(m) => m,
            Err(e) => return Lookup::Corrupt(e),
        };
        let data = match fs::read(self.data_path(key)) {
            Ok(d) => d,
            Err(e) => return Lookup::Corrupt(format!("data file: {e}")),
        };
        if data.len() != meta.bytes || sha256_hex(&data) != meta.sha256 {
            return Lookup::Corrupt("checksum mismatch".into());
        }
        let text = match String::from_utf8(data) {
            Ok(t) => t,
            Err(_) => return Lookup::Corrupt("data is not UTF-8".into()),
        };
        let age = unix_now().saturating_sub(meta.fetched_at);
        if Duration::from_secs(age) >= self.ttl {
            return Lookup::Expired;
        }
        Lookup::Hit(text)
    }

    pub(crate) fn store(&self, key: &str, endpoint: &str, bbox: &BoundingBox, body: &str) -> io::Result<()> {
        let meta = CacheEntryMeta {
            fetched_at: unix_now(),
            endpoint: endpoint.to_string(),
            bbox: bbox.rounded_key(),
            bytes: body.len(),
            sha256: sha256_hex(body.as_bytes()),
        };
        // data first: a crash in between leaves data without metadata, read as corrupt
        write_atomic(&self.data_path(key), body.as_bytes())?;
        write_atomic(&self.meta_path(key), meta.to_text().as_bytes())
    }

    pub fn remove(&self, key: &str) {
        let _ = fs::remove_file(self.meta_path(key));
        let _ = fs::remove_file(self.data_path(key));
    }

    pub fn read_meta(&self, key: &str) -> Option<CacheEntryMeta> {
        CacheEntryMeta::parse(&fs::read_to_string(self.meta_path(key)).ok()?).ok()
    }

    pub fn stats(&self) -> CacheStats {
        let mut stats = CacheStats::default();
        let Ok(entries) = fs::read_dir(&self.dir) else {
            return stats;
        };
        for entry in entries.flatten() {
            let path = entry.path();
            if path.extension().is_some_and(|e| e == "geojson") {
                stats.entries += 1;
                stats.bytes += entry.metadata().map(|m| m.len()).unwrap_or(0);
            }
        }
        stats
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bbox() -> BoundingBox {
        BoundingBox::new(16.3, 48.2, 16.4, 48.3).unwrap()
    }

    #[test]
    fn key_is_stable_and_format_invariant() {
        let a = CacheHandle::key(&bbox(), "http://x", "t");
        let b = CacheHandle::key(
            &BoundingBox::new(16.300000001, 48.2, 16.399999999, 48.3).unwrap(),
            "http://x",
            "t",
        );
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        assert_ne!(a, CacheHandle::key(&bbox(), "http://y", "t"));
        assert_ne!(a, CacheHandle::key(&bbox(), "http://x", "u"));
    }

    #[test]
    fn store_then_hit() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CacheHandle::open(dir.path(), DEFAULT_TTL).unwrap();
        let key = CacheHandle::key(&bbox(), "http://x", "t");
        assert_eq!(cache.lookup(&key), Lookup::Miss);
        cache.store(&key, "http://x", &bbox(), "{\"a\":1}").unwrap();
        assert_eq!(cache.lookup(&key), Lookup::Hit("{\"a\":1}".into()));
        let meta = cache.read_meta(&key).unwrap();
        assert_eq!(meta.bbox, "16.30000,48.20000,16.40000,48.30000");
        assert_eq!(meta.bytes, 7);
        assert_eq!(cache.stats().entries, 1);
    }

    #[test]
    fn zero_ttl_expires() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CacheHandle::open(dir.path(), Duration::ZERO).unwrap();
        let key = "k";
        cache.store(key, "e", &bbox(), "{}").unwrap();
        assert_eq!(cache.lookup(key), Lookup::Expired);
    }

    #[test]
    fn tampering_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CacheHandle::open(dir.path(), DEFAULT_TTL).unwrap();
        cache.store("k", "e", &bbox(), "{}").unwrap();
        fs::write(cache.data_path("k"), "{ }").unwrap();
        assert!(matches!(cache.lookup("k"), Lookup::Corrupt(_)));
        fs::write(cache.meta_path("k"), "garbage").unwrap();
        assert!(matches!(cache.lookup("k"), Lookup::Corrupt(_)));
        fs::remove_file(cache.meta_path("k")).unwrap();
        assert!(matches!(cache.lookup("k"), Lookup::Corrupt(_)));
    }

    #[test]
    fn meta_round_trip_ignores_comments() {
        let m = CacheEntryMeta {
            fetched_at: 12,
            endpoint: "http://a/b?c=d".into(),
            bbox: "1,2,3,4".into(),
            bytes: 3,
            sha256: "ab".into(),
        };
        let text = format!("# header\n{}extra=ignored\n", m.to_text());
        assert_eq!(CacheEntryMeta::parse(&text).unwrap(), m);
    }
}
