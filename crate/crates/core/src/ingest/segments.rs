use crate::exec::Strategy;

use super::{StreetFeature, StreetFilter, StreetSegment};

/// Edges shorter than this carry no reliable bearing and are dropped.
pub const NOISE_FLOOR_M: f64 = 0.5;

pub fn explode_segments(features: &[StreetFeature], filter: &StreetFilter) -> Vec<StreetSegment> {
    explode_segments_with(features, filter, Strategy::default())
}

/// One segment per consecutive point pair of every accepted feature, in input order.
pub fn explode_segments_with(
    features: &[StreetFeature],
    filter: &StreetFilter,
    strategy: Strategy,
) -> Vec<StreetSegment> {
    strategy
        .map(features, |f| {
            if !filter.accepts(&f.kind) {
                return Vec::new();
            }
            f.path
                .windows(2)
                .filter_map(|w| StreetSegment::between(w[0], w[1]))
                .collect()
        })
        .into_iter()
        .flatten()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::GeoPoint;

    fn feature(kind: &str, pts: &[(f64, f64)]) -> StreetFeature {
        StreetFeature {
            id: "f".into(),
            kind: kind.into(),
            path: pts.iter().map(|&(lat, lon)| GeoPoint::new(lat, lon).unwrap()).collect(),
        }
    }

    /// Textbook initial-bearing formula, written out independently.
    fn oracle_bearing(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
        let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
        let dl = (lon2 - lon1).to_radians();
        let theta = (dl.sin() * p2.cos()).atan2(p1.cos() * p2.sin() - p1.sin() * p2.cos() * dl.cos());
        (theta.to_degrees() + 360.0) % 360.0 % 180.0
    }

    #[test]
    fn three_points_two_segments() {
        // lat, lon: (0,0) -> (0,0.001) -> (0.001,0.001)
        let f = feature("residential", &[(0.0, 0.0), (0.0, 0.001), (0.001, 0.001)]);
        let segs = explode_segments(&[f], &StreetFilter::default());
        assert_eq!(segs.len(), 2);
        let expected = [oracle_bearing(0.0, 0.0, 0.0, 0.001), oracle_bearing(0.0, 0.001, 0.001, 0.001)];
        assert!((expected[0] - 90.0).abs() < 0.01);
        assert!(expected[1].abs() < 0.01);
        for (s, e) in segs.iter().zip(expected) {
            assert!((s.bearing_deg - e).abs() < 0.01, "{} vs {e}", s.bearing_deg);
        }
    }

    #[test]
    fn filter_excludes() {
        let f = feature("footway", &[(0.0, 0.0), (0.0, 0.001), (0.001, 0.001)]);
        let filter = StreetFilter::kinds(["residential", "primary"]);
        assert!(explode_segments(std::slice::from_ref(&f), &filter).is_empty());
        assert_eq!(explode_segments(&[f], &StreetFilter::AcceptAll).len(), 2);
    }

    #[test]
    fn short_edges_dropped() {
        // ~0.11 m step, then ~111 m
        let f = feature("residential", &[(0.0, 0.0), (0.000001, 0.0), (0.001001, 0.0)]);
        let segs = explode_segments(&[f], &StreetFilter::default());
        assert_eq!(segs.len(), 1);
        assert!(segs[0].length_m > 100.0);
    }
}
