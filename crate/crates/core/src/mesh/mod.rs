//! Environmental mesh: grid input, quadtree construction and the neighbour
//! graph.

pub mod graph;
pub mod grid;
pub mod io;
pub mod quadtree;

pub use graph::{build_neighbour_graph, CaseCode, Edge, NeighbourGraph};
pub use grid::{load_grid, EnvGrid, Window};
pub use quadtree::{aggregate, build_mesh, Aggregate, CellBox, Extent, Mesh, Region, SplitConfig};

use crate::error::Result;
use crate::vessel::{augment_mesh, CellPerformance, VesselConfig};

/// A mesh with vessel performance and the pruned graph, ready for planning.
#[derive(Debug, Clone)]
pub struct Environment {
    pub mesh: Mesh,
    pub perf: Vec<CellPerformance>,
    pub graph: NeighbourGraph,
    pub vessel: VesselConfig,
    pub units: crate::geo::Units,
}

impl Environment {
    pub fn new(mesh: Mesh, vessel: VesselConfig, units: crate::geo::Units) -> Result<Self> {
        vessel.validate()?;
        let perf = augment_mesh(&mesh.cells, &vessel);
        let graph = build_neighbour_graph(&mesh.cells, |c| !perf[c.id].accessible)?;
        Ok(Environment {
            mesh,
            perf,
            graph,
            vessel,
            units,
        })
    }

    pub fn cell(&self, id: usize) -> &CellBox {
        self.mesh.cell(id)
    }

    pub fn is_blocked(&self, id: usize) -> bool {
        !self.perf[id].accessible
    }
}
