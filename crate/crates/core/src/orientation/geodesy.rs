use thiserror::Error;

use crate::ingest::GeoPoint;

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("bearing undefined for coincident points ({lat}, {lon})")]
pub struct DegenerateSegment {
    pub lat: f64,
    pub lon: f64,
}

/// Initial great-circle bearing from `a` to `b`, degrees clockwise from north in `[0, 360)`.
pub fn forward_azimuth(a: GeoPoint, b: GeoPoint) -> Result<f64, DegenerateSegment> {
    if a == b {
        return Err(DegenerateSegment { lat: a.lat, lon: a.lon });
    }
    let (phi_a, phi_b) = (a.lat.to_radians(), b.lat.to_radians());
    let d_lambda = (b.lon - a.lon).to_radians();
    let y = d_lambda.sin() * phi_b.cos();
    let x = phi_a.cos() * phi_b.sin() - phi_a.sin() * phi_b.cos() * d_lambda.cos();
    let deg = y.atan2(x).to_degrees().rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    Ok(if deg >= 360.0 { 0.0 } else { deg })
}

/// Identifies opposite directions: `az mod 180` in `[0, 180)`.
pub fn fold_bearing(az: f64) -> f64 {
    let folded = az.rem_euclid(180.0);
    if folded >= 180.0 {
        0.0
    } else {
        folded
    }
}

/// Great-circle distance on a sphere of radius [`EARTH_RADIUS_M`].
pub fn haversine_m(a: GeoPoint, b: GeoPoint) -> f64 {
    let (phi_a, phi_b) = (a.lat.to_radians(), b.lat.to_radians());
    let d_phi = phi_b - phi_a;
    let d_lambda = (b.lon - a.lon).to_radians();
    let h = (d_phi / 2.0).sin().powi(2) + phi_a.cos() * phi_b.cos() * (d_lambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Undirected orientation of the edge between `a` and `b` in `[0, 180)`.
///
/// On a sphere the bearing from `b` back to `a` is not exactly the forward
/// bearing plus 180, so this takes the circular mean of both folded bearings.
/// The result is symmetric in its arguments bit for bit.
pub fn undirected_bearing(a: GeoPoint, b: GeoPoint) -> Result<f64, DegenerateSegment> {
    let f1 = fold_bearing(forward_azimuth(a, b)?);
    let f2 = fold_bearing(forward_azimuth(b, a)?);
    let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
    let lo = if hi - lo > 90.0 { lo + 180.0 } else { lo };
    Ok(fold_bearing((lo + hi) / 2.0))
}
