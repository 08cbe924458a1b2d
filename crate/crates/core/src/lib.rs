//! Street networks rendered as drum-and-bass loops.
//!
//! The pipeline reads street polylines from GeoJSON ([`ingest`]), builds a
//! symmetric circular histogram of their orientations ([`orientation`]),
//! turns each bin into one step of a sequencer pattern ([`rhythm`]) and
//! renders that pattern into a seamless audio loop ([`synth`]).
//!
//! ```
//! use xenakis_core::pipeline::{sonify_geojson, PipelineConfig};
//!
//! let doc = r#"{"type":"FeatureCollection","features":[
//!   {"type":"Feature","properties":{"highway":"residential"},
//!    "geometry":{"type":"LineString","coordinates":[[16.37,48.2],[16.37,48.201]]}}]}"#;
//! let s = sonify_geojson(doc, &PipelineConfig::default()).unwrap();
//! assert_eq!(s.pattern.text(), "X.......X.......");
//! assert_eq!(s.audio.samples.len(), 88_200);
//! ```

pub mod exec;
pub mod ingest;
pub mod orientation;
pub mod pipeline;
pub mod rhythm;
pub mod synth;

pub use exec::Strategy;
