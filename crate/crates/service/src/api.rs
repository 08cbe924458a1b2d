use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};
use xenakis_core::ingest::BoundingBox;
use xenakis_core::orientation::{HistogramDocument, DEFAULT_BIN_COUNT};
use xenakis_core::pipeline::{IngestSummary, PipelineConfig, Timing};
use xenakis_core::rhythm::{MappingConfig, RhythmPattern};
use xenakis_core::synth::{DEFAULT_BPM, MAX_BPM, MIN_BPM};

use crate::error::ApiError;
use crate::MAX_BINS;

/// A box as `{min_lon, min_lat, max_lon, max_lat}` or `[min_lon, min_lat, max_lon, max_lat]`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum BboxInput {
    Object(BoundingBox),
    Array([f64; 4]),
}

impl BboxInput {
    pub fn to_bbox(self) -> Result<BoundingBox, ApiError> {
        let b = match self {
            BboxInput::Object(b) => b,
            BboxInput::Array([a, b, c, d]) => BoundingBox {
                min_lon: a,
                min_lat: b,
                max_lon: c,
                max_lat: d,
            },
        };
        b.validate().map_err(|e| ApiError::bad_bbox(e.to_string()))?;
        Ok(b)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SonifyRequest {
    #[serde(default)]
    pub bbox: Option<BboxInput>,
    /// Inline GeoJSON, either as a JSON value or as a string holding one.
    #[serde(default)]
    pub geojson: Option<Box<RawValue>>,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_bpm")]
    pub bpm: f64,
    #[serde(default)]
    pub mapping: MappingConfig,
}

fn default_bins() -> usize {
    DEFAULT_BIN_COUNT
}

fn default_bpm() -> f64 {
    DEFAULT_BPM
}

pub(crate) fn check_bins(bins: usize) -> Result<(), ApiError> {
    if bins < 4 || !bins.is_multiple_of(2) || bins > MAX_BINS {
        return Err(ApiError::bad_params(format!(
            "bins must be even and between 4 and {MAX_BINS}, got {bins}"
        )));
    }
    Ok(())
}

impl SonifyRequest {
    /// Checks everything that does not need the document.
    pub fn pipeline_config(&self) -> Result<PipelineConfig, ApiError> {
        check_bins(self.bins)?;
        if !(MIN_BPM..=MAX_BPM).contains(&self.bpm) {
            return Err(ApiError::bad_params(format!(
                "bpm must lie in [{MIN_BPM}, {MAX_BPM}], got {}",
                self.bpm
            )));
        }
        self.mapping
            .validate()
            .map_err(|e| ApiError::bad_params(e.to_string()))?;
        let cfg = PipelineConfig {
            bins: self.bins,
            bpm: self.bpm,
            mapping: self.mapping.clone(),
            ..PipelineConfig::default()
        };
        let steps = match cfg.mapping.sweep {
            xenakis_core::rhythm::Sweep::FullCircle => cfg.bins,
            xenakis_core::rhythm::Sweep::HalfCircle => cfg.bins / 2,
        };
        if steps < 4 {
            return Err(ApiError::bad_params("a half-circle sweep needs at least 8 bins"));
        }
        Ok(cfg)
    }

    /// The inline document text, if any.
    pub fn inline_document(&self) -> Result<Option<String>, ApiError> {
        let Some(raw) = &self.geojson else {
            return Ok(None);
        };
        let text = raw.get();
        if text.starts_with('"') {
            let s: String = serde_json::from_str(text).map_err(|e| ApiError::bad_params(e.to_string()))?;
            Ok(Some(s))
        } else {
            Ok(Some(text.to_string()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SonifyResult {
    pub histogram: HistogramDocument,
    pub pattern: RhythmPattern,
    pub pattern_text: String,
    pub loop_id: String,
    pub loop_url: String,
    pub timing: Timing,
    pub summary: IngestSummary,
}

/// Content hash of everything that shapes the rendered loop.
pub(crate) fn loop_id(cfg: &PipelineConfig, document: &str) -> String {
    #[derive(Serialize)]
    struct Params<'a> {
        bins: usize,
        bpm: f64,
        sample_rate: u32,
        seed: u64,
        mapping: &'a MappingConfig,
    }
    let params = serde_json::to_string(&Params {
        bins: cfg.bins,
        bpm: cfg.bpm,
        sample_rate: cfg.sample_rate,
        seed: cfg.render.seed,
        mapping: &cfg.mapping,
    })
    .expect("params serialize");
    let mut h = Sha256::new();
    h.update(b"xenakis-loop-v1\n");
    h.update(params.as_bytes());
    h.update(b"\n");
    h.update(document.as_bytes());
    hex::encode(&h.finalize()[..16])
}

pub(crate) fn loop_url(id: &str) -> String {
    format!("/v1/loop/{id}.wav")
}
