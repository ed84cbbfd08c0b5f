//! Geodesy primitives and the equirectangular approximations shared by the
//! mesh, the crossing solvers and route evaluation.
//!
//! Everything inside the solvers works in metres, seconds and m/s. Degrees
//! appear only at I/O boundaries and on [`GeoPoint`].

use serde::{Deserialize, Serialize};

/// Mean Earth radius in metres.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
/// One international knot in m/s (1.852 km/h).
pub const KNOTS_TO_MPS: f64 = 1852.0 / 3600.0;
pub const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub earth_radius: f64,
    pub knots_to_mps: f64,
    pub seconds_per_day: f64,
}

impl Default for Units {
    fn default() -> Self {
        Units {
            earth_radius: EARTH_RADIUS_M,
            knots_to_mps: KNOTS_TO_MPS,
            seconds_per_day: SECONDS_PER_DAY,
        }
    }
}

impl Units {
    pub fn with_radius(earth_radius: f64) -> Self {
        Units {
            earth_radius,
            ..Units::default()
        }
    }

    /// Metres spanned by `deg` degrees of arc on a great circle.
    pub fn deg_to_m(&self, deg: f64) -> f64 {
        deg.to_radians() * self.earth_radius
    }

    pub fn m_to_deg(&self, m: f64) -> f64 {
        (m / self.earth_radius).to_degrees()
    }

    pub fn knots(&self, mps: f64) -> f64 {
        mps / self.knots_to_mps
    }

    pub fn mps(&self, knots: f64) -> f64 {
        knots * self.knots_to_mps
    }
}

/// A position in degrees, longitude east and latitude north.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lon: f64,
    pub lat: f64,
}

impl GeoPoint {
    /// Builds a point with the longitude wrapped into [-180, 180) and the
    /// latitude clamped to [-90, 90].
    pub fn new(lon: f64, lat: f64) -> Self {
        GeoPoint {
            lon: normalise_lon(lon),
            lat: lat.clamp(-90.0, 90.0),
        }
    }

    /// Builds a point without wrapping; used for mesh-internal coordinates
    /// that may run past the antimeridian.
    pub const fn raw(lon: f64, lat: f64) -> Self {
        GeoPoint { lon, lat }
    }

    pub fn is_valid(&self) -> bool {
        self.lon.is_finite() && self.lat.is_finite() && (-90.0..=90.0).contains(&self.lat)
    }

    pub fn normalised(&self) -> Self {
        GeoPoint::new(self.lon, self.lat)
    }
}

/// Wraps a longitude into [-180, 180).
pub fn normalise_lon(lon: f64) -> f64 {
    if (-180.0..180.0).contains(&lon) {
        return lon;
    }
    let wrapped = (lon + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can return exactly 360.0 for tiny negative inputs
    if wrapped >= 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}

/// Signed longitude difference `to - from`, wrapped into (-180, 180].
pub fn lon_diff(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// Latitude correction factor: the cosine of the latitude.
pub fn lat_scale(lat_deg: f64) -> f64 {
    if lat_deg.abs() >= 90.0 {
        return 0.0;
    }
    lat_deg.to_radians().cos()
}

/// East/north displacement in metres from `a` to `b`, with the longitudinal
/// component scaled by the cosine of `ref_lat`.
pub fn equirect_offset(a: GeoPoint, b: GeoPoint, ref_lat: f64, units: &Units) -> (f64, f64) {
    let east = units.deg_to_m(lon_diff(a.lon, b.lon)) * lat_scale(ref_lat);
    let north = units.deg_to_m(b.lat - a.lat);
    (east, north)
}

/// Pythagorean distance on the equirectangular plane at `ref_lat`.
pub fn equirect_distance(a: GeoPoint, b: GeoPoint, ref_lat: f64, units: &Units) -> f64 {
    let (e, n) = equirect_offset(a, b, ref_lat, units);
    e.hypot(n)
}

/// Equirectangular distance with the mean latitude of the two points as the
/// reference.
pub fn midlat_distance(a: GeoPoint, b: GeoPoint, units: &Units) -> f64 {
    equirect_distance(a, b, 0.5 * (a.lat + b.lat), units)
}

/// Moves `from` by an east/north displacement in metres, with the east
/// component interpreted at `ref_lat`.
pub fn offset_point(from: GeoPoint, east_m: f64, north_m: f64, ref_lat: f64, units: &Units) -> GeoPoint {
    let scale = lat_scale(ref_lat);
    let dlon = if scale > 0.0 {
        units.m_to_deg(east_m / scale)
    } else {
        0.0
    };
    GeoPoint::raw(from.lon + dlon, from.lat + units.m_to_deg(north_m))
}
