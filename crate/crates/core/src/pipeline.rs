//! End-to-end path from a GeoJSON document to a rendered loop, shared by
//! the CLI and the HTTP service.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Strategy;
use crate::ingest::{explode_segments_with, parse_feature_collection, ParseError, StreetFilter};
use crate::orientation::{
    build_histogram_with, normalize, HistogramError, NormalizedHistogram, OrientationHistogram, Weighting,
    DEFAULT_BIN_COUNT,
};
use crate::rhythm::{histogram_to_pattern, MappingConfig, RhythmError, RhythmPattern};
use crate::synth::{
    render_loop_with, step_seconds, AudioLoop, RenderOptions, SynthError, DEFAULT_BPM, DEFAULT_SAMPLE_RATE,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Histogram(#[from] HistogramError),
    #[error(transparent)]
    Rhythm(#[from] RhythmError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub bins: usize,
    pub bpm: f64,
    pub sample_rate: u32,
    pub filter: StreetFilter,
    pub weighting: Weighting,
    pub mapping: MappingConfig,
    pub render: RenderOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BIN_COUNT,
            bpm: DEFAULT_BPM,
            sample_rate: DEFAULT_SAMPLE_RATE,
            filter: StreetFilter::default(),
            weighting: Weighting::Length,
            mapping: MappingConfig::default(),
            render: RenderOptions::default(),
        }
    }
}

impl PipelineConfig {
    pub fn strategy(&self) -> Strategy {
        self.render.strategy
    }
}

/// Counts describing what went into a histogram.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub features: usize,
    pub skipped_features: usize,
    pub segments: usize,
}

/// The clock shared by audio playback and the compass sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub bpm: f64,
    pub steps: usize,
    pub step_seconds: f64,
    pub loop_seconds: f64,
    /// Compass bin sounding at each step, in playback order.
    pub step_bins: Vec<usize>,
}

impl Timing {
    pub fn new(steps: usize, bpm: f64) -> Self {
        let step_s = step_seconds(bpm);
        Self {
            bpm,
            steps,
            step_seconds: step_s,
            loop_seconds: steps as f64 * step_s,
            step_bins: (0..steps).collect(),
        }
    }
}

pub fn histogram_from_geojson(
    text: &str,
    cfg: &PipelineConfig,
) -> Result<(OrientationHistogram, IngestSummary), PipelineError> {
    let report = parse_feature_collection(text)?;
    let segments = explode_segments_with(&report.features, &cfg.filter, cfg.strategy());
    let hist = build_histogram_with(&segments, cfg.bins, cfg.weighting, cfg.strategy())?;
    let summary = IngestSummary {
        features: report.features.len(),
        skipped_features: report.skipped,
        segments: segments.len(),
    };
    Ok((hist, summary))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sonification {
    pub summary: IngestSummary,
    pub histogram: OrientationHistogram,
    pub normalized: NormalizedHistogram,
    pub pattern: RhythmPattern,
    pub audio: AudioLoop,
    pub timing: Timing,
}

/// Pattern only, without rendering audio.
pub fn pattern_from_histogram(
    hist: &OrientationHistogram,
    cfg: &PipelineConfig,
) -> Result<(NormalizedHistogram, RhythmPattern), PipelineError> {
    cfg.mapping.validate()?;
    let normalized = normalize(hist);
    let pattern = histogram_to_pattern(&normalized, &cfg.mapping);
    Ok((normalized, pattern))
}

pub fn sonify_histogram(
    histogram: OrientationHistogram,
    summary: IngestSummary,
    cfg: &PipelineConfig,
) -> Result<Sonification, PipelineError> {
    let (normalized, pattern) = pattern_from_histogram(&histogram, cfg)?;
    let audio = render_loop_with(&pattern, cfg.bpm, cfg.sample_rate, &cfg.mapping, &cfg.render)?;
    let timing = Timing::new(pattern.len(), cfg.bpm);
    Ok(Sonification {
        summary,
        histogram,
        normalized,
        pattern,
        audio,
        timing,
    })
}

pub fn sonify_geojson(text: &str, cfg: &PipelineConfig) -> Result<Sonification, PipelineError> {
    let (hist, summary) = histogram_from_geojson(text, cfg)?;
    sonify_histogram(hist, summary, cfg)
}
