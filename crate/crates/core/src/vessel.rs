//! Ice resistance, safe speed and fuel burn per cell.
//!
//! Resistance follows the level-ice model
//! `R = 0.5 k_c Fr^b rho B h V^2 C^n` with the ice Froude number
//! `Fr = V / sqrt(g h C)`. The vessel slows down only where resistance at
//! full speed would exceed the force needed to break the reference ice
//! (3 kn through 1 m of level ice by default).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::KNOTS_TO_MPS;
use crate::mesh::CellBox;

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hull {
    Slender,
    Blunt,
}

impl Hull {
    /// `(k_c, b, n)`.
    pub fn constants(self) -> (f64, f64, f64) {
        match self {
            Hull::Slender => (4.4, -0.8267, 2.0),
            Hull::Blunt => (16.1, -1.7937, 3.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakingSpec {
    /// knots
    pub speed: f64,
    /// metres
    pub thickness: f64,
    /// fraction in (0, 1]
    pub concentration: f64,
}

/// `a2 V^2 + a1 V + r2 R^2 + r1 R + base` in tons/day with V in knots and R
/// in kN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuelCoeffs {
    pub a2: f64,
    pub a1: f64,
    pub r2: f64,
    pub r1: f64,
    pub base: f64,
}

impl Default for FuelCoeffs {
    fn default() -> Self {
        FuelCoeffs {
            a2: 0.113,
            a1: -0.132,
            r2: 0.003,
            r1: 0.042,
            base: 6.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VesselConfig {
    /// knots
    pub max_speed: f64,
    /// metres
    pub beam: f64,
    /// kg/m^3
    pub ice_density: f64,
    pub hull: Hull,
    /// percent
    pub max_ice_conc: f64,
    /// metres; used where the grid carries no thickness field
    pub ice_thickness: f64,
    pub breaking_spec: BreakingSpec,
    pub fuel_coeffs: FuelCoeffs,
    /// metres of water the vessel needs under the keel
    pub min_depth: f64,
}

impl Default for VesselConfig {
    fn default() -> Self {
        VesselConfig {
            max_speed: 13.0,
            beam: 24.0,
            ice_density: 900.0,
            hull: Hull::Slender,
            max_ice_conc: 80.0,
            ice_thickness: 0.8,
            breaking_spec: BreakingSpec {
                speed: 3.0,
                thickness: 1.0,
                concentration: 1.0,
            },
            fuel_coeffs: FuelCoeffs::default(),
            min_depth: 10.0,
        }
    }
}

impl VesselConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("vessel.max_speed", self.max_speed),
            ("vessel.beam", self.beam),
            ("vessel.ice_density", self.ice_density),
            ("vessel.breaking_spec.speed", self.breaking_spec.speed),
            ("vessel.breaking_spec.thickness", self.breaking_spec.thickness),
            ("vessel.breaking_spec.concentration", self.breaking_spec.concentration),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.max_ice_conc > 0.0 && self.max_ice_conc <= 100.0) {
            return Err(Error::Config(format!(
                "vessel.max_ice_conc must be in (0, 100], got {}",
                self.max_ice_conc
            )));
        }
        if self.breaking_spec.concentration > 1.0 {
            return Err(Error::Config("vessel.breaking_spec.concentration is a fraction in (0, 1]".into()));
        }
        if !(self.ice_thickness >= 0.0) {
            return Err(Error::Config("vessel.ice_thickness must be non-negative".into()));
        }
        Ok(())
    }

    /// Inaccessible cells: too much ice, any land, or no ice data at all.
    pub fn is_blocked(&self, cell: &CellBox) -> bool {
        match cell.agg_sic {
            Some(sic) => sic > self.max_ice_conc || cell.land_fraction > 0.0,
            None => true,
        }
    }

    /// Resistance at the breaking specification, in kN.
    pub fn force_limit(&self) -> f64 {
        let b = self.breaking_spec;
        ice_resistance(b.speed, b.thickness, b.concentration, self).expect("validated breaking spec")
    }
}

/// `V / sqrt(g h C)` with `V` in m/s.
pub fn ice_froude(v_mps: f64, h: f64, c: f64) -> Result<f64> {
    if !(h > 0.0 && c > 0.0) {
        return Err(Error::Domain(format!("ice Froude number needs h > 0 and C > 0 (h={h}, C={c})")));
    }
    Ok(v_mps / (GRAVITY * h * c).sqrt())
}

/// Ice resistance in kN for speed `v` in knots, thickness `h` in metres and
/// concentration `c` as a fraction.
pub fn ice_resistance(v: f64, h: f64, c: f64, cfg: &VesselConfig) -> Result<f64> {
    if v < 0.0 || h < 0.0 || !(0.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!("resistance inputs out of range (V={v}, h={h}, C={c})")));
    }
    if c == 0.0 || h == 0.0 || v == 0.0 {
        return Ok(0.0);
    }
    let (k_c, b, n) = cfg.hull.constants();
    let v_mps = v * KNOTS_TO_MPS;
    let fr = ice_froude(v_mps, h, c)?;
    let newtons = 0.5 * k_c * fr.powf(b) * cfg.ice_density * cfg.beam * h * v_mps * v_mps * c.powf(n);
    Ok(newtons / 1000.0)
}

/// Speed in knots at which resistance equals `r_limit` kN, capped at the
/// vessel's maximum speed.
pub fn speed_from_resistance(r_limit: f64, h: f64, c: f64, cfg: &VesselConfig) -> Result<f64> {
    if !(r_limit > 0.0 && h > 0.0 && c > 0.0) {
        return Err(Error::Domain(format!(
            "speed inversion needs R > 0, h > 0, C > 0 (R={r_limit}, h={h}, C={c})"
        )));
    }
    let (k_c, b, n) = cfg.hull.constants();
    let rhs = 2.0 * r_limit * 1000.0
        / (k_c * cfg.ice_density * cfg.beam * h * c.powf(n) * (GRAVITY * h * c).powf(-b / 2.0));
    let v_mps = rhs.powf(1.0 / (2.0 + b));
    Ok((v_mps / KNOTS_TO_MPS).min(cfg.max_speed))
}

/// Fuel burn in tons/day at speed `v` knots against resistance `r` kN.
pub fn fuel_rate(v: f64, r: f64, cfg: &VesselConfig) -> f64 {
    let f = &cfg.fuel_coeffs;
    f.a2 * v * v + f.a1 * v + f.r2 * r * r + f.r1 * r + f.base
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellPerformance {
    /// kN at the safe speed
    pub resistance: f64,
    /// knots
    pub safe_speed: f64,
    /// tons/day
    pub fuel_rate: f64,
    pub accessible: bool,
}

impl CellPerformance {
    pub const BLOCKED: CellPerformance = CellPerformance {
        resistance: 0.0,
        safe_speed: 0.0,
        fuel_rate: 0.0,
        accessible: false,
    };

    pub fn speed_mps(&self) -> f64 {
        self.safe_speed * KNOTS_TO_MPS
    }
}

/// Performance of one cell.
pub fn cell_performance(cell: &CellBox, cfg: &VesselConfig, r_limit: f64) -> CellPerformance {
    if cfg.is_blocked(cell) {
        return CellPerformance::BLOCKED;
    }
    let c = cell.agg_sic.unwrap_or(0.0) / 100.0;
    let h = cell.agg_thickness.unwrap_or(cfg.ice_thickness);
    let r_max = ice_resistance(cfg.max_speed, h, c, cfg).unwrap_or(0.0);
    let (speed, resistance) = if r_max > r_limit {
        // r_max > 0 implies h > 0 and c > 0
        let v = speed_from_resistance(r_limit, h, c, cfg).expect("positive ice inputs");
        (v, r_limit)
    } else {
        (cfg.max_speed, r_max)
    };
    CellPerformance {
        resistance,
        safe_speed: speed,
        fuel_rate: fuel_rate(speed, resistance, cfg),
        accessible: true,
    }
}

/// Performance for every cell, indexed by cell id.
pub fn augment_mesh(cells: &[CellBox], cfg: &VesselConfig) -> Vec<CellPerformance> {
    let r_limit = cfg.force_limit();
    cells.par_iter().map(|c| cell_performance(c, cfg, r_limit)).collect()
}
