//! Spherical geometry and the symmetric circular histogram of street
//! orientations (the "musical compass").

mod geodesy;
mod histogram;

pub use geodesy::{
    fold_bearing, forward_azimuth, haversine_m, undirected_bearing, DegenerateSegment, EARTH_RADIUS_M,
};
pub use histogram::{
    bin_index, build_histogram, build_histogram_with, normalize, HistogramDocument, HistogramError,
    NormalizedHistogram, OrientationHistogram, Weighting, DEFAULT_BIN_COUNT,
};
