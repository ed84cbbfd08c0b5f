//! Routes as polylines of in-cell legs, and their GeoJSON form.
//!
//! Every leg lies inside one cell and is timed against that cell's speed
//! and current on the equirectangular plane at the leg's mean latitude.
//! Mesh paths and smoothed paths are both costed this way so their totals
//! compare like for like.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::crossing::{travel_time, Degenerate};
use crate::error::{Error, Result};
use crate::geo::{equirect_offset, midlat_distance, GeoPoint, Units};
use crate::mesh::Environment;

/// Time in seconds to sail from `a` to `b` at `speed` m/s in `current` m/s.
pub fn leg_time(a: GeoPoint, b: GeoPoint, speed: f64, current: (f64, f64), units: &Units) -> Result<f64, Degenerate> {
    let d = equirect_offset(a, b, 0.5 * (a.lat + b.lat), units);
    travel_time(d, current, speed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub from: GeoPoint,
    pub to: GeoPoint,
    pub cell: usize,
    pub time_s: f64,
    pub distance_m: f64,
    pub fuel_t: f64,
}

/// Costs one leg inside `cell`.
pub fn evaluate_leg(env: &Environment, cell: usize, a: GeoPoint, b: GeoPoint) -> Result<Leg, Degenerate> {
    let p = &env.perf[cell];
    let c = env.cell(cell);
    let time_s = leg_time(a, b, p.speed_mps(), c.agg_current, &env.units)?;
    Ok(Leg {
        from: a,
        to: b,
        cell,
        time_s,
        distance_m: midlat_distance(a, b, &env.units),
        fuel_t: time_s * p.fuel_rate / env.units.seconds_per_day,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteKind {
    Dijkstra,
    Smoothed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub kind: RouteKind,
    pub from: String,
    pub to: String,
    pub points: Vec<GeoPoint>,
    pub legs: Vec<Leg>,
}

impl Route {
    /// Builds a route from consecutive points and the cell holding each leg.
    pub fn from_points(
        env: &Environment,
        kind: RouteKind,
        points: Vec<GeoPoint>,
        cells: &[usize],
    ) -> Result<Route, Degenerate> {
        assert_eq!(points.len(), cells.len() + 1, "one cell per leg");
        let legs = points
            .windows(2)
            .zip(cells)
            .map(|(w, &c)| evaluate_leg(env, c, w[0], w[1]))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Route {
            kind,
            from: String::new(),
            to: String::new(),
            points,
            legs,
        })
    }

    pub fn named(mut self, from: &str, to: &str) -> Self {
        self.from = from.to_string();
        self.to = to.to_string();
        self
    }

    pub fn total_time(&self) -> f64 {
        self.legs.iter().fold(0.0, |acc, l| acc + l.time_s)
    }

    pub fn total_fuel(&self) -> f64 {
        self.legs.iter().fold(0.0, |acc, l| acc + l.fuel_t)
    }

    pub fn total_distance(&self) -> f64 {
        self.legs.iter().fold(0.0, |acc, l| acc + l.distance_m)
    }

    pub fn total_days(&self) -> f64 {
        self.total_time() / crate::geo::SECONDS_PER_DAY
    }

    /// GeoJSON Feature with a LineString geometry. Zero-length legs are kept
    /// so coordinates and leg arrays line up.
    pub fn to_feature(&self, extra: &[(&str, Value)]) -> Value {
        let coords: Vec<[f64; 2]> = self
            .points
            .iter()
            .map(|p| [crate::geo::normalise_lon(p.lon), p.lat])
            .collect();
        let mut props = json!({
            "kind": self.kind,
            "from": self.from,
            "to": self.to,
            "cells": self.legs.iter().map(|l| l.cell).collect::<Vec<_>>(),
            "times_s": self.legs.iter().map(|l| l.time_s).collect::<Vec<_>>(),
            "fuel_t": self.legs.iter().map(|l| l.fuel_t).collect::<Vec<_>>(),
            "distance_m": self.legs.iter().map(|l| l.distance_m).collect::<Vec<_>>(),
            "total_time_s": self.total_time(),
            "total_time_days": self.total_days(),
            "total_fuel_t": self.total_fuel(),
            "total_distance_m": self.total_distance(),
        });
        for (k, v) in extra {
            props[*k] = v.clone();
        }
        json!({
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": coords },
            "properties": props,
        })
    }
}

/// A route read back from GeoJSON: coordinates and per-leg times.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteTrack {
    pub name: String,
    pub points: Vec<GeoPoint>,
    pub times_s: Vec<f64>,
}

pub fn feature_collection(features: Vec<Value>, summary: Value) -> Value {
    json!({
        "type": "FeatureCollection",
        "features": features,
        "summary": summary,
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json serialises");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads every LineString feature from a GeoJSON FeatureCollection.
pub fn read_tracks(path: &Path) -> Result<Vec<RouteTrack>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::parse("geojson", e.to_string()))?;
    let features = doc["features"]
        .as_array()
        .ok_or_else(|| Error::parse("features", format!("{}: not a FeatureCollection", path.display())))?;
    let mut out = Vec::new();
    for (k, f) in features.iter().enumerate() {
        if f["geometry"]["type"] != "LineString" {
            continue;
        }
        let coords = f["geometry"]["coordinates"]
            .as_array()
            .ok_or_else(|| Error::parse("coordinates", format!("feature {k} has no coordinates")))?;
        let points = coords
            .iter()
            .map(|c| match (c[0].as_f64(), c[1].as_f64()) {
                (Some(lon), Some(lat)) => Ok(GeoPoint::raw(lon, lat)),
                _ => Err(Error::parse("coordinates", format!("feature {k}: bad position"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let times_s: Vec<f64> = match f["properties"]["times_s"].as_array() {
            Some(ts) => ts.iter().filter_map(Value::as_f64).collect(),
            None => Vec::new(),
        };
        if !times_s.is_empty() && times_s.len() + 1 != points.len() {
            return Err(Error::parse("times_s", format!("feature {k}: one time per leg expected")));
        }
        let name = format!(
            "{}:{}-{}",
            f["properties"]["kind"].as_str().unwrap_or("route"),
            f["properties"]["from"].as_str().unwrap_or("?"),
            f["properties"]["to"].as_str().unwrap_or("?"),
        );
        out.push(RouteTrack { name, points, times_s });
    }
    Ok(out)
}
