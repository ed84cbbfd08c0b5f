//! The run configuration document.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::GeoPoint;
use crate::mesh::grid::resolve;
use crate::mesh::{Region, SplitConfig, Window};
use crate::planner::Objective;
use crate::smoother::SmoothingConfig;
use crate::validate::ValidationConfig;
use crate::vessel::VesselConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub name: String,
    pub lat: f64,
    pub lon: f64,
}

impl Waypoint {
    pub fn point(&self) -> GeoPoint {
        GeoPoint::raw(self.lon, self.lat)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WaypointTable {
    pub entries: Vec<Waypoint>,
}

impl WaypointTable {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for w in &self.entries {
            if !seen.insert(w.name.as_str()) {
                return Err(Error::Config(format!("waypoint `{}` is defined twice", w.name)));
            }
            if !(w.lat.is_finite() && (-90.0..=90.0).contains(&w.lat) && w.lon.is_finite()) {
                return Err(Error::Config(format!("waypoint `{}` has invalid coordinates", w.name)));
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Waypoint> {
        self.entries
            .iter()
            .find(|w| w.name == name)
            .ok_or_else(|| Error::Config(format!("unknown waypoint `{name}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: chrono::NaiveDate,
    pub end: chrono::NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid_files: Vec<PathBuf>,
    #[serde(default)]
    pub raw_grid_files: Vec<PathBuf>,
    pub region: Region,
    #[serde(default)]
    pub time_window: Option<TimeWindow>,
    pub initial_cell_size: f64,
    #[serde(default)]
    pub split: Option<SplitConfig>,
    #[serde(default)]
    pub vessel: VesselConfig,
    #[serde(default)]
    pub smoothing: SmoothingConfig,
    #[serde(default)]
    pub validation: Option<ValidationConfig>,
    #[serde(default)]
    pub objective: Objective,
    #[serde(default)]
    pub waypoints: WaypointTable,
    #[serde(default)]
    pub pairs: Vec<(String, String)>,
    #[serde(default)]
    pub earth_radius: Option<f64>,
    /// Directory holding the config; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_files.is_empty() {
            return Err(Error::Config("grid_files must list at least one file".into()));
        }
        self.vessel.validate()?;
        self.split_config().validate()?;
        self.smoothing.validate()?;
        self.waypoints.validate()?;
        for (a, b) in &self.pairs {
            self.waypoints.get(a)?;
            self.waypoints.get(b)?;
        }
        if let Some(r) = self.earth_radius {
            if !(r > 0.0) {
                return Err(Error::Config("earth_radius must be positive".into()));
            }
        }
        Ok(())
    }

    /// The split settings, with the land threshold following the vessel's
    /// minimum depth unless given explicitly.
    pub fn split_config(&self) -> SplitConfig {
        self.split.unwrap_or(SplitConfig {
            land_depth_threshold: -self.vessel.min_depth,
            ..SplitConfig::default()
        })
    }

    pub fn validation_config(&self) -> ValidationConfig {
        self.validation.unwrap_or(ValidationConfig {
            threshold: self.vessel.max_ice_conc,
            ..ValidationConfig::default()
        })
    }

    pub fn units(&self) -> crate::geo::Units {
        match self.earth_radius {
            Some(r) => crate::geo::Units::with_radius(r),
            None => crate::geo::Units::default(),
        }
    }

    pub fn window(&self) -> Window {
        Window {
            lon_min: self.region.lon_min,
            lon_max: self.region.lon_max,
            lat_min: self.region.lat_min,
            lat_max: self.region.lat_max,
            start: self.time_window.map(|t| t.start),
            end: self.time_window.map(|t| t.end),
        }
    }

    pub fn grid_paths(&self) -> Vec<PathBuf> {
        self.grid_files.iter().map(|p| resolve(&self.base_dir, p)).collect()
    }

    pub fn raw_grid_paths(&self) -> Vec<PathBuf> {
        self.raw_grid_files.iter().map(|p| resolve(&self.base_dir, p)).collect()
    }
}
