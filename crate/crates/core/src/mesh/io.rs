//! Mesh JSON documents.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::graph::{CaseCode, Edge};
use super::quadtree::{CellBox, Mesh, Region};
use super::Environment;
use crate::error::{Error, Result};
use crate::geo::{GeoPoint, Units};
use crate::vessel::{CellPerformance, VesselConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub id: usize,
    pub centre: GeoPoint,
    pub half_width: f64,
    pub half_height: f64,
    pub depth_level: u32,
    pub agg_sic: Option<f64>,
    pub agg_current: (f64, f64),
    pub land_fraction: f64,
    pub data_count: usize,
    #[serde(default)]
    pub agg_thickness: Option<f64>,
    #[serde(default)]
    pub closed_east: bool,
    #[serde(default)]
    pub closed_north: bool,
    pub blocked: bool,
    pub resistance: f64,
    pub safe_speed: f64,
    pub fuel_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub src: usize,
    pub dst: usize,
    pub code: CaseCode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshDocument {
    pub mesh_id: String,
    pub region: Region,
    pub initial_cell_size: f64,
    pub earth_radius: f64,
    pub vessel: VesselConfig,
    pub cells: Vec<CellRecord>,
    pub edges: Vec<EdgeRecord>,
}

/// Hex prefix of the SHA-256 of the cell list, identifying a mesh in route
/// summaries.
pub fn mesh_id(cells: &[CellRecord]) -> String {
    let bytes = serde_json::to_vec(cells).expect("cell records serialise");
    let digest = Sha256::digest(&bytes);
    hex::encode(&digest[..8])
}

impl MeshDocument {
    pub fn from_environment(env: &Environment) -> Self {
        let cells: Vec<CellRecord> = env
            .mesh
            .cells
            .iter()
            .map(|c| {
                let p = &env.perf[c.id];
                CellRecord {
                    id: c.id,
                    centre: c.centre,
                    half_width: c.half_width,
                    half_height: c.half_height,
                    depth_level: c.depth_level,
                    agg_sic: c.agg_sic,
                    agg_current: c.agg_current,
                    land_fraction: c.land_fraction,
                    data_count: c.data_count,
                    agg_thickness: c.agg_thickness,
                    closed_east: c.closed_east,
                    closed_north: c.closed_north,
                    blocked: !p.accessible,
                    resistance: p.resistance,
                    safe_speed: p.safe_speed,
                    fuel_rate: p.fuel_rate,
                }
            })
            .collect();
        let edges = env
            .graph
            .edges()
            .into_iter()
            .map(|Edge { src, dst, code }| EdgeRecord { src, dst, code })
            .collect();
        MeshDocument {
            mesh_id: mesh_id(&cells),
            region: env.mesh.region,
            initial_cell_size: env.mesh.initial_cell_size,
            earth_radius: env.units.earth_radius,
            vessel: env.vessel,
            cells,
            edges,
        }
    }

    /// Rebuilds the environment. Performance values are taken from the
    /// document; the graph is rebuilt and must match the stored edges.
    pub fn into_environment(self) -> Result<Environment> {
        let cells: Vec<CellBox> = self
            .cells
            .iter()
            .map(|r| CellBox {
                id: r.id,
                centre: r.centre,
                half_width: r.half_width,
                half_height: r.half_height,
                depth_level: r.depth_level,
                agg_sic: r.agg_sic,
                agg_current: r.agg_current,
                land_fraction: r.land_fraction,
                data_count: r.data_count,
                agg_thickness: r.agg_thickness,
                closed_east: r.closed_east,
                closed_north: r.closed_north,
            })
            .collect();
        let perf: Vec<CellPerformance> = self
            .cells
            .iter()
            .map(|r| CellPerformance {
                resistance: r.resistance,
                safe_speed: r.safe_speed,
                fuel_rate: r.fuel_rate,
                accessible: !r.blocked,
            })
            .collect();
        let mesh = Mesh::from_cells(self.region, self.initial_cell_size, cells)?;
        let graph = super::build_neighbour_graph(&mesh.cells, |c| !perf[c.id].accessible)?;
        let rebuilt: Vec<EdgeRecord> = graph
            .edges()
            .into_iter()
            .map(|Edge { src, dst, code }| EdgeRecord { src, dst, code })
            .collect();
        if rebuilt != self.edges {
            return Err(Error::Structural("stored edges do not match the cell geometry".into()));
        }
        Ok(Environment {
            mesh,
            perf,
            graph,
            vessel: self.vessel,
            units: Units::with_radius(self.earth_radius),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("mesh document serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("mesh", e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn blocked_fraction(&self) -> f64 {
        if self.cells.is_empty() {
            return 0.0;
        }
        self.cells.iter().filter(|c| c.blocked).count() as f64 / self.cells.len() as f64
    }
}
