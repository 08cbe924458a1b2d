use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Strategy;
use crate::ingest::StreetSegment;

pub const DEFAULT_BIN_COUNT: usize = 16;

/// Segments per accumulation chunk. Chunks are summed in order, which keeps
/// the parallel and sequential results bit-identical.
const CHUNK: usize = 4096;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum HistogramError {
    #[error("bin count must be even and at least 4, got {0}")]
    InvalidBinCount(usize),
}

/// What a segment contributes to its bin.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Segment length in meters.
    #[default]
    Length,
    /// One per segment.
    Count,
}

/// Full-circle orientation histogram; `bins[i] == bins[i + N/2]` always.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationHistogram {
    bins: Vec<f64>,
    total_length_m: f64,
}

impl OrientationHistogram {
    pub fn zeros(bin_count: usize) -> Result<Self, HistogramError> {
        check_bin_count(bin_count)?;
        Ok(Self {
            bins: vec![0.0; bin_count],
            total_length_m: 0.0,
        })
    }

    /// Builds a histogram from the first half circle, mirroring it.
    pub fn from_half(half: &[f64], total_length_m: f64) -> Result<Self, HistogramError> {
        check_bin_count(half.len() * 2)?;
        let mut bins = half.to_vec();
        bins.extend_from_slice(half);
        Ok(Self { bins, total_length_m })
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn bin_width_deg(&self) -> f64 {
        360.0 / self.bins.len() as f64
    }

    /// Bin `i` is centered on `i * bin_width` degrees clockwise from north.
    pub fn center_deg(&self, i: usize) -> f64 {
        i as f64 * self.bin_width_deg()
    }

    /// Summed length of the contributing segments.
    pub fn total_length_m(&self) -> f64 {
        self.total_length_m
    }

    /// Same histogram with every weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            bins: self.bins.iter().map(|b| b * c).collect(),
            total_length_m: self.total_length_m * c,
        }
    }
}

fn check_bin_count(n: usize) -> Result<(), HistogramError> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(HistogramError::InvalidBinCount(n));
    }
    Ok(())
}

/// Half-circle bin for a folded bearing; bin 0 is centered on north.
pub fn bin_index(bearing_deg: f64, bin_count: usize) -> usize {
    let half = bin_count / 2;
    let width = 180.0 / half as f64;
    let idx = ((bearing_deg + width / 2.0).rem_euclid(180.0) / width).floor() as usize;
    if idx >= half {
        0
    } else {
        idx
    }
}

/// Length-weighted histogram using the default execution strategy.
pub fn build_histogram(
    segments: &[StreetSegment],
    bin_count: usize,
) -> Result<OrientationHistogram, HistogramError> {
    build_histogram_with(segments, bin_count, Weighting::Length, Strategy::default())
}

pub fn build_histogram_with(
    segments: &[StreetSegment],
    bin_count: usize,
    weighting: Weighting,
    strategy: Strategy,
) -> Result<OrientationHistogram, HistogramError> {
    check_bin_count(bin_count)?;
    let half = bin_count / 2;
    let partials = strategy.map_chunks(segments, CHUNK, |chunk| {
        let mut acc = vec![0.0; half];
        let mut total = 0.0;
        for s in chunk {
            let w = match weighting {
                Weighting::Length => s.length_m,
                Weighting::Count => 1.0,
            };
            acc[bin_index(s.bearing_deg, bin_count)] += w;
            total += s.length_m;
        }
        (acc, total)
    });
    let mut acc = vec![0.0; half];
    let mut total = 0.0;
    for (part, t) in partials {
        for (a, p) in acc.iter_mut().zip(part) {
            *a += p;
        }
        total += t;
    }
    OrientationHistogram::from_half(&acc, total)
}

/// Histogram rescaled so that its largest bin is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedHistogram {
    pub values: Vec<f64>,
    pub source_total_m: f64,
}

impl NormalizedHistogram {
    pub fn bin_count(&self) -> usize {
        self.values.len()
    }

    pub fn is_silent(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

pub fn normalize(h: &OrientationHistogram) -> NormalizedHistogram {
    let max = h.bins.iter().copied().fold(0.0_f64, f64::max);
    let values = if max > 0.0 {
        h.bins.iter().map(|b| b / max).collect()
    } else {
        vec![0.0; h.bins.len()]
    };
    NormalizedHistogram {
        values,
        source_total_m: h.total_length_m,
    }
}

/// Wire form of a histogram, shared by the CLI and the HTTP service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramDocument {
    pub bin_count: usize,
    pub bin_width_deg: f64,
    pub bins: Vec<f64>,
    pub values: Vec<f64>,
    pub source_total_m: f64,
}

impl HistogramDocument {
    pub fn new(h: &OrientationHistogram) -> Self {
        let n = normalize(h);
        Self {
            bin_count: h.bin_count(),
            bin_width_deg: h.bin_width_deg(),
            bins: h.bins.clone(),
            values: n.values,
            source_total_m: n.source_total_m,
        }
    }

    /// Compact JSON followed by a newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("histogram serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_index,center_deg,weight_m,normalized\n");
        for (i, (w, v)) in self.bins.iter().zip(&self.values).enumerate() {
            let center = i as f64 * self.bin_width_deg;
            let _ = writeln!(out, "{i},{center},{w},{v}");
        }
        out
    }
}
