//! Street data ingestion: GeoJSON parsing, segment explosion and the
//! region fetcher with its on-disk cache.
//!
//! Only `LineString` and `MultiLineString` geometries become streets today.
//! Every other geometry is still walked and validated by the parser and is
//! tallied in [`ParseReport::skipped_by_type`], which is the hook for
//! sonifying other feature classes later.

mod cache;
mod fetch;
mod geojson;
mod overpass;
mod segments;
pub mod stub;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{CacheEntryMeta, CacheHandle, CacheStats, DEFAULT_TTL};
pub use fetch::{fetch_region, provider_reachable, FetchError, FetcherConfig, RegionFetcher, DEFAULT_QUERY_TEMPLATE};
pub use geojson::{parse_feature_collection, parse_feature_collection_bytes, ParseError, ParseReport};
pub use overpass::overpass_to_geojson;
pub use segments::{explode_segments, explode_segments_with, NOISE_FLOOR_M};

/// Environment variable naming the map data provider endpoint.
pub const PROVIDER_URL_ENV: &str = "XENAKIS_PROVIDER_URL";
/// Environment variable overriding the region cache directory.
pub const CACHE_DIR_ENV: &str = "XENAKIS_CACHE_DIR";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    LatitudeOutOfRange(f64),
    #[error("coordinate is not finite")]
    NonFinite,
    #[error("bounding box invalid: {0}")]
    BadBoundingBox(String),
}

/// A position on the sphere in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    /// Builds a point, folding the longitude into `[-180, 180]`.
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        if !lat.is_finite() || !lon.is_finite() {
            return Err(GeoError::NonFinite);
        }
        if !(-90.0..=90.0).contains(&lat) {
            return Err(GeoError::LatitudeOutOfRange(lat));
        }
        Ok(Self {
            lat,
            lon: normalize_lon(lon),
        })
    }
}

fn normalize_lon(mut lon: f64) -> f64 {
    while lon > 180.0 {
        lon -= 360.0;
    }
    while lon < -180.0 {
        lon += 360.0;
    }
    lon
}

/// Axis-aligned geographic box. Boxes crossing the antimeridian are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl BoundingBox {
    pub fn new(min_lon: f64, min_lat: f64, max_lon: f64, max_lat: f64) -> Result<Self, GeoError> {
        let bbox = Self {
            min_lon,
            min_lat,
            max_lon,
            max_lat,
        };
        bbox.validate()?;
        Ok(bbox)
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        let all = [self.min_lon, self.min_lat, self.max_lon, self.max_lat];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(GeoError::NonFinite);
        }
        if self.min_lat < -90.0 || self.max_lat > 90.0 {
            return Err(GeoError::BadBoundingBox("latitude outside [-90, 90]".into()));
        }
        if self.min_lon < -180.0 || self.max_lon > 180.0 {
            return Err(GeoError::BadBoundingBox("longitude outside [-180, 180]".into()));
        }
        if self.min_lat >= self.max_lat {
            return Err(GeoError::BadBoundingBox(format!(
                "min_lat {} must be below max_lat {}",
                self.min_lat, self.max_lat
            )));
        }
        if self.min_lon >= self.max_lon {
            return Err(GeoError::BadBoundingBox(format!(
                "min_lon {} must be below max_lon {} (antimeridian-crossing boxes are not supported)",
                self.min_lon, self.max_lon
            )));
        }
        Ok(())
    }

    /// Parses `min_lon,min_lat,max_lon,max_lat`.
    pub fn parse_csv(s: &str) -> Result<Self, GeoError> {
        let parts = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| GeoError::BadBoundingBox(format!("{s:?}: {e}")))?;
        match parts.as_slice() {
            &[a, b, c, d] => Self::new(a, b, c, d),
            _ => Err(GeoError::BadBoundingBox(format!(
                "expected min_lon,min_lat,max_lon,max_lat, got {s:?}"
            ))),
        }
    }

    /// Coordinates rounded to 5 decimals, in `min_lon,min_lat,max_lon,max_lat` order.
    pub fn rounded_key(&self) -> String {
        format!(
            "{:.5},{:.5},{:.5},{:.5}",
            round5(self.min_lon),
            round5(self.min_lat),
            round5(self.max_lon),
            round5(self.max_lat)
        )
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        (self.min_lat..=self.max_lat).contains(&p.lat) && (self.min_lon..=self.max_lon).contains(&p.lon)
    }

    pub fn intersects(&self, other: &BoundingBox) -> bool {
        self.min_lon <= other.max_lon
            && other.min_lon <= self.max_lon
            && self.min_lat <= other.max_lat
            && other.min_lat <= self.max_lat
    }
}

fn round5(v: f64) -> f64 {
    let r = (v * 1e5).round() / 1e5;
    // avoid "-0.00000" keys
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

impl fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.min_lon, self.min_lat, self.max_lon, self.max_lat)
    }
}

/// A street polyline from the source document.
#[derive(Debug, Clone, PartialEq)]
pub struct StreetFeature {
    pub id: String,
    /// Value of the source `highway` property, or `"unknown"`.
    pub kind: String,
    pub path: Vec<GeoPoint>,
}

/// One straight edge of a street.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreetSegment {
    pub a: GeoPoint,
    pub b: GeoPoint,
    pub length_m: f64,
    /// Bearing folded into `[0, 180)`.
    pub bearing_deg: f64,
}

impl StreetSegment {
    /// The edge from `a` to `b`, or `None` below the noise floor.
    pub fn between(a: GeoPoint, b: GeoPoint) -> Option<Self> {
        let length_m = crate::orientation::haversine_m(a, b);
        if length_m < NOISE_FLOOR_M {
            return None;
        }
        let bearing_deg = crate::orientation::undirected_bearing(a, b).ok()?;
        Some(Self {
            a,
            b,
            length_m,
            bearing_deg,
        })
    }

    /// Same edge walked the other way.
    pub fn reversed(&self) -> Option<Self> {
        Self::between(self.b, self.a)
    }
}

/// Which street kinds survive segment explosion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StreetFilter {
    AcceptAll,
    Kinds(BTreeSet<String>),
}

const DEFAULT_KINDS: [&str; 8] = [
    "motorway",
    "trunk",
    "primary",
    "secondary",
    "tertiary",
    "residential",
    "unclassified",
    "living_street",
];

impl Default for StreetFilter {
    /// Drivable street classes and their `_link` variants.
    fn default() -> Self {
        let mut kinds = BTreeSet::new();
        for k in DEFAULT_KINDS {
            kinds.insert(k.to_string());
            kinds.insert(format!("{k}_link"));
        }
        StreetFilter::Kinds(kinds)
    }
}

impl StreetFilter {
    pub fn kinds<I, S>(kinds: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        StreetFilter::Kinds(kinds.into_iter().map(Into::into).collect())
    }

    /// Parses `all` or a comma separated kind list.
    pub fn parse(s: &str) -> Self {
        if s.trim().eq_ignore_ascii_case("all") {
            StreetFilter::AcceptAll
        } else {
            Self::kinds(s.split(',').map(str::trim).filter(|k| !k.is_empty()))
        }
    }

    pub fn accepts(&self, kind: &str) -> bool {
        match self {
            StreetFilter::AcceptAll => true,
            StreetFilter::Kinds(kinds) => kinds.contains(kind),
        }
    }
}
