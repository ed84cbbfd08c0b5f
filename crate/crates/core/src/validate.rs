//! Checking finished routes against unaveraged ice data.
//!
//! Each route is resampled at a fixed spacing. At every sample the raw SIC
//! nodes within a radius of influence are averaged, using the time step the
//! vessel would actually meet given the departure date and the elapsed
//! time. A sample whose mean exceeds the vessel's threshold is a violation.

use chrono::{NaiveDate, TimeDelta};
use serde::{Deserialize, Serialize};

use crate::geo::{midlat_distance, GeoPoint, Units};
use crate::mesh::grid::RawSic;
use crate::route::RouteTrack;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationConfig {
    /// metres between samples
    pub spacing_m: f64,
    /// metres
    pub radius_m: f64,
    /// SIC percent above which a sample is a violation
    pub threshold: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            spacing_m: 10_000.0,
            radius_m: 15_000.0,
            threshold: 80.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub point: GeoPoint,
    /// seconds since departure
    pub elapsed_s: f64,
}

/// Samples at `k * spacing` along the polyline, plus the final point when
/// it does not fall on the spacing. Elapsed time is interpolated within
/// each leg; without leg times it stays zero.
pub fn resample(points: &[GeoPoint], times_s: &[f64], spacing: f64, units: &Units) -> Vec<Sample> {
    let mut out = Vec::new();
    let Some(&first) = points.first() else {
        return out;
    };
    let lengths: Vec<f64> = points.windows(2).map(|w| midlat_distance(w[0], w[1], units)).collect();
    let total: f64 = lengths.iter().sum();

    let mut leg = 0;
    let mut leg_start = 0.0;
    let mut time_start = 0.0;
    let mut k = 0usize;
    loop {
        let s = k as f64 * spacing;
        if s > total + 1e-9 * total.max(1.0) {
            break;
        }
        while leg + 1 < lengths.len() && leg_start + lengths[leg] < s {
            leg_start += lengths[leg];
            time_start += times_s.get(leg).copied().unwrap_or(0.0);
            leg += 1;
        }
        let sample = if lengths.is_empty() {
            Sample {
                point: first,
                elapsed_s: 0.0,
            }
        } else {
            let len = lengths[leg];
            let f = if len > 0.0 { ((s - leg_start) / len).clamp(0.0, 1.0) } else { 0.0 };
            let (a, b) = (points[leg], points[leg + 1]);
            Sample {
                point: GeoPoint::raw(a.lon + f * (b.lon - a.lon), a.lat + f * (b.lat - a.lat)),
                elapsed_s: time_start + f * times_s.get(leg).copied().unwrap_or(0.0),
            }
        };
        out.push(sample);
        k += 1;
    }
    let last_s = (k - 1) as f64 * spacing;
    if total - last_s > 1e-6 {
        out.push(Sample {
            point: *points.last().unwrap(),
            elapsed_s: times_s.iter().sum(),
        });
    }
    out
}

/// Mean of valid raw SIC nodes within `radius` metres of `p` at time step
/// `step`; `None` when no node is in range.
pub fn mean_sic_within(raw: &RawSic, step: usize, p: GeoPoint, radius: f64, units: &Units) -> Option<f64> {
    let b = &raw.block;
    let dlat = units.m_to_deg(radius);
    let cos = crate::geo::lat_scale(p.lat.abs() + dlat).max(1e-6);
    let dlon = dlat / cos;
    let j0 = b.lats.partition_point(|&v| v < p.lat - dlat);
    let j1 = b.lats.partition_point(|&v| v <= p.lat + dlat);
    let i0 = b.lons.partition_point(|&v| v < p.lon - dlon);
    let i1 = b.lons.partition_point(|&v| v <= p.lon + dlon);
    let mut sum = 0.0;
    let mut n = 0usize;
    for j in j0..j1 {
        for i in i0..i1 {
            let node = GeoPoint::raw(b.lons[i], b.lats[j]);
            if midlat_distance(p, node, units) <= radius {
                if let Some(v) = b.value(step, j, i) {
                    sum += v;
                    n += 1;
                }
            }
        }
    }
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub name: String,
    pub samples: usize,
    /// Samples with at least one raw node in range.
    pub evaluated: usize,
    pub violations: usize,
    pub violation_pct: f64,
}

pub fn validate_track(
    track: &RouteTrack,
    raw: &RawSic,
    departure: Option<NaiveDate>,
    cfg: &ValidationConfig,
    units: &Units,
) -> ValidationReport {
    let samples = resample(&track.points, &track.times_s, cfg.spacing_m, units);
    let mut evaluated = 0;
    let mut violations = 0;
    for s in &samples {
        let step = match departure {
            Some(d) => {
                let when = d.and_hms_opt(0, 0, 0).expect("midnight exists")
                    + TimeDelta::milliseconds((s.elapsed_s * 1000.0).round() as i64);
                raw.step_for(when.date())
            }
            None => 0,
        };
        if let Some(m) = mean_sic_within(raw, step, s.point, cfg.radius_m, units) {
            evaluated += 1;
            if m > cfg.threshold {
                violations += 1;
            }
        }
    }
    ValidationReport {
        name: track.name.clone(),
        samples: samples.len(),
        evaluated,
        violations,
        violation_pct: if evaluated > 0 {
            100.0 * violations as f64 / evaluated as f64
        } else {
            0.0
        },
    }
}
