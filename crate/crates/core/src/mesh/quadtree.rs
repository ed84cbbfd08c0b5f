//! Quadtree splitting and per-cell aggregation.

use serde::{Deserialize, Serialize};

use super::grid::EnvGrid;
use crate::error::{Error, Result};
use crate::geo::{lat_scale, GeoPoint, Units};

/// Tolerance, in degrees, for coordinate comparisons on cell edges.
pub const EDGE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lon_min: f64,
    pub lon_max: f64,
    pub lat_min: f64,
    pub lat_max: f64,
}

impl Region {
    pub fn new(lon_min: f64, lon_max: f64, lat_min: f64, lat_max: f64) -> Self {
        Region {
            lon_min,
            lon_max,
            lat_min,
            lat_max,
        }
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        p.lon >= self.lon_min - EDGE_EPS
            && p.lon <= self.lon_max + EDGE_EPS
            && p.lat >= self.lat_min - EDGE_EPS
            && p.lat <= self.lat_max + EDGE_EPS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub max_depth: u32,
    pub min_data_points: usize,
    /// Population variance of SIC (percent squared) above which a cell splits.
    pub sic_variance_threshold: f64,
    /// A cell holding SIC values at or below the first bound and at or above
    /// the second one straddles the accessibility threshold and splits.
    pub sic_bounds_split: (f64, f64),
    /// Nodes with depth above this value (metres, negative below sea level)
    /// count as land. Defaults to minus the vessel's minimum depth.
    pub land_depth_threshold: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            max_depth: 4,
            min_data_points: 4,
            sic_variance_threshold: 200.0,
            sic_bounds_split: (70.0, 90.0),
            land_depth_threshold: -10.0,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_data_points < 1 {
            return Err(Error::Config("split.min_data_points must be at least 1".into()));
        }
        if !(self.sic_bounds_split.0 <= self.sic_bounds_split.1) {
            return Err(Error::Config("split.sic_bounds_split must be (lower, upper) with lower <= upper".into()));
        }
        if !(self.sic_variance_threshold >= 0.0) {
            return Err(Error::Config("split.sic_variance_threshold must be non-negative".into()));
        }
        Ok(())
    }
}

/// A lat/lon rectangle. Node containment is half-open `[lo, hi)` except on
/// the region's north and east edges, which are closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extent {
    pub lon_lo: f64,
    pub lon_hi: f64,
    pub lat_lo: f64,
    pub lat_hi: f64,
    #[serde(default)]
    pub closed_east: bool,
    #[serde(default)]
    pub closed_north: bool,
}

impl Extent {
    pub fn quarters(&self) -> [Extent; 4] {
        let lon_mid = 0.5 * (self.lon_lo + self.lon_hi);
        let lat_mid = 0.5 * (self.lat_lo + self.lat_hi);
        let q = |lon_lo, lon_hi, lat_lo, lat_hi, ce, cn| Extent {
            lon_lo,
            lon_hi,
            lat_lo,
            lat_hi,
            closed_east: ce,
            closed_north: cn,
        };
        [
            q(self.lon_lo, lon_mid, self.lat_lo, lat_mid, false, false),
            q(lon_mid, self.lon_hi, self.lat_lo, lat_mid, self.closed_east, false),
            q(self.lon_lo, lon_mid, lat_mid, self.lat_hi, false, self.closed_north),
            q(lon_mid, self.lon_hi, lat_mid, self.lat_hi, self.closed_east, self.closed_north),
        ]
    }

    fn index_range(axis: &[f64], lo: f64, hi: f64, closed: bool) -> std::ops::Range<usize> {
        let start = axis.partition_point(|&v| v < lo - EDGE_EPS);
        let end = if closed {
            axis.partition_point(|&v| v <= hi + EDGE_EPS)
        } else {
            axis.partition_point(|&v| v < hi - EDGE_EPS)
        };
        start..end.max(start)
    }

    fn lon_indices(&self, grid: &EnvGrid) -> std::ops::Range<usize> {
        Self::index_range(&grid.lons, self.lon_lo, self.lon_hi, self.closed_east)
    }

    fn lat_indices(&self, grid: &EnvGrid) -> std::ops::Range<usize> {
        Self::index_range(&grid.lats, self.lat_lo, self.lat_hi, self.closed_north)
    }
}

/// Aggregated environment of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    /// Mean SIC over valid nodes; `None` when every node is missing.
    pub agg_sic: Option<f64>,
    pub agg_current: (f64, f64),
    pub land_fraction: f64,
    /// Number of nodes with a valid SIC value.
    pub data_count: usize,
    pub agg_thickness: Option<f64>,
    pub sic_min: Option<f64>,
    pub sic_max: Option<f64>,
    /// Population variance of valid SIC values.
    pub sic_variance: f64,
}

/// The extent contains no grid nodes at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmptyCell;

/// Means of the grid fields over the nodes inside `extent`. Land fraction
/// counts nodes whose depth exceeds `land_depth_threshold`, out of the nodes
/// with a valid depth.
pub fn aggregate(extent: &Extent, grid: &EnvGrid, land_depth_threshold: f64) -> std::result::Result<Aggregate, EmptyCell> {
    let ii = extent.lon_indices(grid);
    let jj = extent.lat_indices(grid);
    if ii.is_empty() || jj.is_empty() {
        return Err(EmptyCell);
    }

    let mut sic = Mean::default();
    let mut sq = 0.0;
    let mut sic_min = f64::INFINITY;
    let mut sic_max = f64::NEG_INFINITY;
    let mut cu = Mean::default();
    let mut cv = Mean::default();
    let mut thick = Mean::default();
    let (mut land, mut depth_nodes) = (0usize, 0usize);

    for j in jj {
        for i in ii.clone() {
            let k = grid.index(j, i);
            if let Some(s) = grid.sic[k] {
                sic.add(s);
                sq += s * s;
                sic_min = sic_min.min(s);
                sic_max = sic_max.max(s);
            }
            if let Some(d) = grid.depth.as_ref().and_then(|f| f[k]) {
                depth_nodes += 1;
                if d > land_depth_threshold {
                    land += 1;
                }
            }
            if let (Some(u), Some(v)) = (
                grid.current_u.as_ref().and_then(|f| f[k]),
                grid.current_v.as_ref().and_then(|f| f[k]),
            ) {
                cu.add(u);
                cv.add(v);
            }
            if let Some(h) = grid.thickness.as_ref().and_then(|f| f[k]) {
                thick.add(h);
            }
        }
    }

    let agg_sic = sic.value();
    let sic_variance = match agg_sic {
        Some(m) => (sq / sic.n as f64 - m * m).max(0.0),
        None => 0.0,
    };
    Ok(Aggregate {
        agg_sic,
        agg_current: (cu.value().unwrap_or(0.0), cv.value().unwrap_or(0.0)),
        land_fraction: if depth_nodes > 0 {
            land as f64 / depth_nodes as f64
        } else {
            0.0
        },
        data_count: sic.n,
        agg_thickness: thick.value(),
        sic_min: (sic.n > 0).then_some(sic_min),
        sic_max: (sic.n > 0).then_some(sic_max),
        sic_variance,
    })
}

#[derive(Default)]
struct Mean {
    sum: f64,
    n: usize,
}

impl Mean {
    fn add(&mut self, v: f64) {
        self.sum += v;
        self.n += 1;
    }

    fn value(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / self.n as f64)
    }
}

/// One leaf of the quadtree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellBox {
    pub id: usize,
    pub centre: GeoPoint,
    /// Half-width in degrees of longitude.
    pub half_width: f64,
    /// Half-height in degrees of latitude.
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
}

impl CellBox {
    fn from_extent(id: usize, e: &Extent, depth_level: u32, agg: Option<Aggregate>) -> Self {
        let agg = agg.unwrap_or(Aggregate {
            agg_sic: None,
            agg_current: (0.0, 0.0),
            land_fraction: 0.0,
            data_count: 0,
            agg_thickness: None,
            sic_min: None,
            sic_max: None,
            sic_variance: 0.0,
        });
        CellBox {
            id,
            centre: GeoPoint::raw(0.5 * (e.lon_lo + e.lon_hi), 0.5 * (e.lat_lo + e.lat_hi)),
            half_width: 0.5 * (e.lon_hi - e.lon_lo),
            half_height: 0.5 * (e.lat_hi - e.lat_lo),
            depth_level,
            agg_sic: agg.agg_sic,
            agg_current: agg.agg_current,
            land_fraction: agg.land_fraction,
            data_count: agg.data_count,
            agg_thickness: agg.agg_thickness,
            closed_east: e.closed_east,
            closed_north: e.closed_north,
        }
    }

    pub fn lon_lo(&self) -> f64 {
        self.centre.lon - self.half_width
    }
    pub fn lon_hi(&self) -> f64 {
        self.centre.lon + self.half_width
    }
    pub fn lat_lo(&self) -> f64 {
        self.centre.lat - self.half_height
    }
    pub fn lat_hi(&self) -> f64 {
        self.centre.lat + self.half_height
    }

    pub fn extent(&self) -> Extent {
        Extent {
            lon_lo: self.lon_lo(),
            lon_hi: self.lon_hi(),
            lat_lo: self.lat_lo(),
            lat_hi: self.lat_hi(),
            closed_east: self.closed_east,
            closed_north: self.closed_north,
        }
    }

    /// Physical half-width in metres at the cell's centre latitude.
    pub fn half_width_m(&self, units: &Units) -> f64 {
        units.deg_to_m(self.half_width) * lat_scale(self.centre.lat)
    }

    pub fn half_height_m(&self, units: &Units) -> f64 {
        units.deg_to_m(self.half_height)
    }

    /// Point containment with the same half-open rule as node aggregation.
    pub fn contains(&self, p: GeoPoint) -> bool {
        let lon_ok = p.lon >= self.lon_lo() - EDGE_EPS
            && (p.lon < self.lon_hi() - EDGE_EPS || (self.closed_east && p.lon <= self.lon_hi() + EDGE_EPS));
        let lat_ok = p.lat >= self.lat_lo() - EDGE_EPS
            && (p.lat < self.lat_hi() - EDGE_EPS || (self.closed_north && p.lat <= self.lat_hi() + EDGE_EPS));
        lon_ok && lat_ok
    }

    /// Containment including every edge.
    pub fn contains_closed(&self, p: GeoPoint) -> bool {
        p.lon >= self.lon_lo() - EDGE_EPS
            && p.lon <= self.lon_hi() + EDGE_EPS
            && p.lat >= self.lat_lo() - EDGE_EPS
            && p.lat <= self.lat_hi() + EDGE_EPS
    }

    pub fn area_deg2(&self) -> f64 {
        4.0 * self.half_width * self.half_height
    }
}

/// A quadtree leaf cover of a region.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub region: Region,
    pub initial_cell_size: f64,
    pub cells: Vec<CellBox>,
    /// Leaf ids under each initial cell, row-major south to north.
    buckets: Vec<Vec<usize>>,
    cols: usize,
    rows: usize,
}

impl Mesh {
    /// Wraps an existing leaf list, e.g. one read back from JSON.
    pub fn from_cells(region: Region, initial_cell_size: f64, cells: Vec<CellBox>) -> Result<Self> {
        let (cols, rows) = grid_dims(&region, initial_cell_size)?;
        let mut buckets = vec![Vec::new(); cols * rows];
        for (k, c) in cells.iter().enumerate() {
            if c.id != k {
                return Err(Error::Structural(format!("cell at position {k} has id {}", c.id)));
            }
            let col = ((c.centre.lon - region.lon_min) / initial_cell_size).floor();
            let row = ((c.centre.lat - region.lat_min) / initial_cell_size).floor();
            if col < 0.0 || row < 0.0 || col as usize >= cols || row as usize >= rows {
                return Err(Error::Structural(format!("cell {k} lies outside the region")));
            }
            buckets[row as usize * cols + col as usize].push(k);
        }
        Ok(Mesh {
            region,
            initial_cell_size,
            cells,
            buckets,
            cols,
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, id: usize) -> &CellBox {
        &self.cells[id]
    }

    /// The leaf containing `p`, or `None` outside the region.
    pub fn cell_at(&self, p: GeoPoint) -> Option<usize> {
        if !self.region.contains(p) {
            return None;
        }
        let col = (((p.lon - self.region.lon_min) / self.initial_cell_size).floor().max(0.0) as usize).min(self.cols - 1);
        let row = (((p.lat - self.region.lat_min) / self.initial_cell_size).floor().max(0.0) as usize).min(self.rows - 1);
        // Points on a bucket edge may belong to the neighbouring bucket.
        let mut fallback = None;
        for dr in [0isize, -1, 1] {
            for dc in [0isize, -1, 1] {
                let (r, c) = (row as isize + dr, col as isize + dc);
                if r < 0 || c < 0 || r as usize >= self.rows || c as usize >= self.cols {
                    continue;
                }
                for &id in &self.buckets[r as usize * self.cols + c as usize] {
                    let cell = &self.cells[id];
                    if cell.contains(p) {
                        return Some(id);
                    }
                    if fallback.is_none() && cell.contains_closed(p) {
                        fallback = Some(id);
                    }
                }
            }
        }
        fallback
    }

    pub fn max_depth_level(&self) -> u32 {
        self.cells.iter().map(|c| c.depth_level).max().unwrap_or(0)
    }
}

fn grid_dims(region: &Region, size: f64) -> Result<(usize, usize)> {
    if !(size > 0.0) || !size.is_finite() {
        return Err(Error::Domain(format!("initial cell size {size} must be positive")));
    }
    if !(region.lon_max > region.lon_min && region.lat_max > region.lat_min) {
        return Err(Error::Domain("region is empty".into()));
    }
    let count = |span: f64, what: &str| -> Result<usize> {
        let n = (span / size).round();
        if n < 1.0 || (n * size - span).abs() > 1e-9 * span.max(1.0) {
            return Err(Error::Domain(format!(
                "region {what} span {span} is not a whole multiple of the initial cell size {size}"
            )));
        }
        Ok(n as usize)
    };
    Ok((
        count(region.lon_max - region.lon_min, "longitude")?,
        count(region.lat_max - region.lat_min, "latitude")?,
    ))
}

fn should_split(agg: &Aggregate, cfg: &SplitConfig) -> bool {
    let straddles = match (agg.sic_min, agg.sic_max) {
        (Some(lo), Some(hi)) => lo <= cfg.sic_bounds_split.0 && hi >= cfg.sic_bounds_split.1,
        _ => false,
    };
    let partial_land = agg.land_fraction > 0.0 && agg.land_fraction < 1.0;
    straddles || agg.sic_variance > cfg.sic_variance_threshold || partial_land
}

/// Splits each initial cell of `region` recursively and returns the leaves,
/// ordered south-to-north then west-to-east over the initial cells and
/// depth-first (SW, SE, NW, NE) within each.
pub fn build_mesh(grid: &EnvGrid, cfg: &SplitConfig, region: Region, initial_cell_size: f64) -> Result<Mesh> {
    cfg.validate()?;
    let (cols, rows) = grid_dims(&region, initial_cell_size)?;
    let (glon_lo, glon_hi) = grid.lon_range();
    let (glat_lo, glat_hi) = grid.lat_range();
    if region.lon_min < glon_lo - EDGE_EPS
        || region.lon_max > glon_hi + EDGE_EPS
        || region.lat_min < glat_lo - EDGE_EPS
        || region.lat_max > glat_hi + EDGE_EPS
    {
        return Err(Error::Domain(format!(
            "region lon [{}, {}] lat [{}, {}] extends past the grid lon [{glon_lo}, {glon_hi}] lat [{glat_lo}, {glat_hi}]",
            region.lon_min, region.lon_max, region.lat_min, region.lat_max
        )));
    }

    let mut cells = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let e = Extent {
                lon_lo: region.lon_min + c as f64 * initial_cell_size,
                lon_hi: if c + 1 == cols {
                    region.lon_max
                } else {
                    region.lon_min + (c + 1) as f64 * initial_cell_size
                },
                lat_lo: region.lat_min + r as f64 * initial_cell_size,
                lat_hi: if r + 1 == rows {
                    region.lat_max
                } else {
                    region.lat_min + (r + 1) as f64 * initial_cell_size
                },
                closed_east: c + 1 == cols,
                closed_north: r + 1 == rows,
            };
            let agg = aggregate(&e, grid, cfg.land_depth_threshold).ok();
            split_into(&e, agg, 0, grid, cfg, &mut cells);
        }
    }
    log::debug!("built mesh with {} leaves", cells.len());
    Mesh::from_cells(region, initial_cell_size, cells)
}

fn split_into(e: &Extent, agg: Option<Aggregate>, depth: u32, grid: &EnvGrid, cfg: &SplitConfig, out: &mut Vec<CellBox>) {
    if agg.is_some_and(|a| depth < cfg.max_depth && should_split(&a, cfg)) {
        let quarters = e.quarters();
        let kids: Vec<Option<Aggregate>> = quarters
            .iter()
            .map(|q| aggregate(q, grid, cfg.land_depth_threshold).ok())
            .collect();
        let enough = kids
            .iter()
            .all(|k| k.is_some_and(|k| k.data_count >= cfg.min_data_points));
        if enough {
            for (q, k) in quarters.iter().zip(kids) {
                split_into(q, k, depth + 1, grid, cfg, out);
            }
            return;
        }
    }
    let id = out.len();
    out.push(CellBox::from_extent(id, e, depth, agg));
}
