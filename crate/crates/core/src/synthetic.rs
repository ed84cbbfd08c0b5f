//! Synthetic gridded scenarios: open water, ice ramps, blobs and walls.
//!
//! Handy for experiments and for exercising the planner without real data.

use crate::error::Result;
use crate::geo::GeoPoint;
use crate::mesh::{build_mesh, EnvGrid, Environment, Region, SplitConfig};
use crate::vessel::VesselConfig;
use crate::Units;

/// Nodes `lo, lo + step, ..., hi` (inclusive, within rounding).
pub fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

/// Samples `f(point)` at every node in row-major order (south to north,
/// west to east within a row).
pub fn sample(lons: &[f64], lats: &[f64], f: impl Fn(GeoPoint) -> Option<f64>) -> Vec<Option<f64>> {
    lats.iter()
        .flat_map(|&lat| lons.iter().map(move |&lon| GeoPoint::raw(lon, lat)))
        .map(f)
        .collect()
}

/// A gridded scenario over a region at a fixed node spacing.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub region: Region,
    pub lons: Vec<f64>,
    pub lats: Vec<f64>,
    grid: EnvGrid,
}

impl Scenario {
    /// SIC from `f` at nodes spaced `step` degrees over the region.
    pub fn new(region: Region, step: f64, f: impl Fn(GeoPoint) -> Option<f64>) -> Result<Self> {
        let lons = axis(region.lon_min, region.lon_max, step);
        let lats = axis(region.lat_min, region.lat_max, step);
        let sic = sample(&lons, &lats, f);
        let grid = EnvGrid::from_fields(lons.clone(), lats.clone(), sic)?;
        Ok(Scenario {
            region,
            lons,
            lats,
            grid,
        })
    }

    pub fn open_water(region: Region, step: f64) -> Result<Self> {
        Self::new(region, step, |_| Some(0.0))
    }

    /// Seabed depth in metres (negative below sea level).
    pub fn with_depth(mut self, f: impl Fn(GeoPoint) -> Option<f64>) -> Result<Self> {
        let d = sample(&self.lons, &self.lats, f);
        self.grid = self.grid.with_depth(d)?;
        Ok(self)
    }

    /// Current `(east, north)` in m/s.
    pub fn with_currents(mut self, f: impl Fn(GeoPoint) -> (f64, f64)) -> Result<Self> {
        let u = sample(&self.lons, &self.lats, |p| Some(f(p).0));
        let v = sample(&self.lons, &self.lats, |p| Some(f(p).1));
        self.grid = self.grid.with_currents(u, v)?;
        Ok(self)
    }

    pub fn with_thickness(mut self, f: impl Fn(GeoPoint) -> Option<f64>) -> Result<Self> {
        let h = sample(&self.lons, &self.lats, f);
        self.grid = self.grid.with_thickness(h)?;
        Ok(self)
    }

    pub fn grid(&self) -> &EnvGrid {
        &self.grid
    }

    pub fn environment(
        &self,
        split: &SplitConfig,
        initial_cell_size: f64,
        vessel: VesselConfig,
        units: Units,
    ) -> Result<Environment> {
        let mesh = build_mesh(&self.grid, split, self.region, initial_cell_size)?;
        Environment::new(mesh, vessel, units)
    }
}
