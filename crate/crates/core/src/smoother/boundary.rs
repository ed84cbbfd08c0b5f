//! Shared boundary segments between orthogonal neighbours and the
//! latitude-corrected crossing problem posed on them.

use crate::crossing::{CellTraversal, CrossingProblem};
use crate::geo::{lat_scale, lon_diff, GeoPoint, Units};
use crate::mesh::graph::relation;
use crate::mesh::{CaseCode, CellBox, Environment};

/// The segment two orthogonal neighbours share. `line` is the fixed
/// coordinate (a longitude for east/west pairs, a latitude for north/south
/// ones) and `[lo, hi]` the extent along it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    /// Direction from the first cell to the second.
    pub code: CaseCode,
    pub line: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Tolerance in degrees for "lies on the boundary line".
pub const ON_LINE_EPS: f64 = 1e-9;

impl Boundary {
    pub fn between(a: &CellBox, b: &CellBox) -> Option<Boundary> {
        let code = relation(a, b).ok().flatten()?;
        let (line, lo, hi) = match code {
            CaseCode::East => (a.lon_hi(), a.lat_lo().max(b.lat_lo()), a.lat_hi().min(b.lat_hi())),
            CaseCode::West => (a.lon_lo(), a.lat_lo().max(b.lat_lo()), a.lat_hi().min(b.lat_hi())),
            CaseCode::North => (a.lat_hi(), a.lon_lo().max(b.lon_lo()), a.lon_hi().min(b.lon_hi())),
            CaseCode::South => (a.lat_lo(), a.lon_lo().max(b.lon_lo()), a.lon_hi().min(b.lon_hi())),
            _ => return None,
        };
        Some(Boundary { code, line, lo, hi })
    }

    /// East/west pairs cross a meridian.
    pub fn is_meridian(&self) -> bool {
        self.code.is_horizontal()
    }

    /// +1 when travel across the line increases the fixed coordinate.
    pub fn direction(&self) -> f64 {
        match self.code {
            CaseCode::East | CaseCode::North => 1.0,
            _ => -1.0,
        }
    }

    pub fn along(&self, p: GeoPoint) -> f64 {
        if self.is_meridian() {
            p.lat
        } else {
            self.unwrap_lon(p.lon)
        }
    }

    /// Coordinate of `p` across the line, longitudes unwrapped next to it.
    pub fn across(&self, p: GeoPoint) -> f64 {
        if self.is_meridian() {
            self.line + lon_diff(self.line, p.lon)
        } else {
            p.lat
        }
    }

    fn unwrap_lon(&self, lon: f64) -> f64 {
        let mid = 0.5 * (self.lo + self.hi);
        mid + lon_diff(mid, lon)
    }

    pub fn point(&self, along: f64) -> GeoPoint {
        if self.is_meridian() {
            GeoPoint::raw(self.line, along)
        } else {
            GeoPoint::raw(along, self.line)
        }
    }

    pub fn clamp(&self, along: f64) -> f64 {
        along.clamp(self.lo, self.hi)
    }

    /// Clamp with the ends pulled in by `frac` of the segment length.
    pub fn clamp_inset(&self, along: f64, frac: f64) -> f64 {
        let d = frac * (self.hi - self.lo);
        along.clamp(self.lo + d, self.hi - d)
    }

    pub fn contains(&self, along: f64) -> bool {
        along >= self.lo - ON_LINE_EPS && along <= self.hi + ON_LINE_EPS
    }

    pub fn on_line(&self, p: GeoPoint) -> bool {
        (self.across(p) - self.line).abs() <= ON_LINE_EPS
    }

    pub fn midpoint(&self) -> GeoPoint {
        self.point(0.5 * (self.lo + self.hi))
    }

    /// Where the straight segment `p -> q` (in lon/lat) meets the line, if
    /// it does so inside the shared segment.
    pub fn intersect(&self, p: GeoPoint, q: GeoPoint) -> Option<f64> {
        let (pa, qa) = (self.across(p), self.across(q));
        if (pa - self.line) * (qa - self.line) > 0.0 || pa == qa {
            return None;
        }
        let t = (self.line - pa) / (qa - pa);
        let (pl, ql) = (self.along(p), self.along(q));
        let along = pl + t * (ql - pl);
        self.contains(along).then_some(along)
    }
}

/// Maps an offset along the boundary in metres, measured from the entry
/// point, to the boundary coordinate in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetMap {
    origin: f64,
    deg_per_m: f64,
}

impl OffsetMap {
    pub fn along(&self, y: f64) -> f64 {
        self.origin + y * self.deg_per_m
    }

    pub fn offset(&self, along: f64) -> f64 {
        (along - self.origin) / self.deg_per_m
    }
}

/// The smoothed crossing problem for the pair `a -> b` between `entry` and
/// `exit`. Horizontal pairs use the latitude-corrected solver with y
/// northwards; vertical pairs use the cos-ratio solver with y eastwards.
pub fn pair_problem(
    env: &Environment,
    a: usize,
    b: usize,
    bd: &Boundary,
    entry: GeoPoint,
    exit: GeoPoint,
) -> (CrossingProblem, OffsetMap) {
    let units: &Units = &env.units;
    let dir = bd.direction();
    let (ca, cb) = (env.cell(a), env.cell(b));
    let (pa, pb) = (&env.perf[a], &env.perf[b]);
    let r = units.earth_radius;
    let x = (units.deg_to_m(dir * (bd.line - bd.across(entry)))).max(0.0);
    let a_span = (units.deg_to_m(dir * (bd.across(exit) - bd.line))).max(0.0);

    if bd.is_meridian() {
        let cur = |c: &CellBox| (dir * c.agg_current.0, c.agg_current.1);
        let sep = units.deg_to_m(exit.lat - entry.lat);
        let problem = CrossingProblem::smoothed_horizontal(
            CellTraversal::new(pa.speed_mps(), cur(ca), x),
            CellTraversal::new(pb.speed_mps(), cur(cb), a_span),
            sep,
            entry.lat,
            exit.lat,
            r,
        );
        let map = OffsetMap {
            origin: entry.lat,
            deg_per_m: units.m_to_deg(1.0),
        };
        (problem, map)
    } else {
        let scale = lat_scale(bd.line);
        let cur = |c: &CellBox| (dir * c.agg_current.1, c.agg_current.0);
        let entry_lon = bd.along(entry);
        let exit_lon = bd.along(exit);
        let sep = units.deg_to_m(exit_lon - entry_lon) * scale;
        let problem = CrossingProblem::smoothed_vertical(
            CellTraversal::new(pa.speed_mps(), cur(ca), x),
            CellTraversal::new(pb.speed_mps(), cur(cb), a_span),
            sep,
            entry.lat,
            exit.lat,
            bd.line,
            r,
        );
        let map = OffsetMap {
            origin: entry_lon,
            deg_per_m: units.m_to_deg(1.0) / scale,
        };
        (problem, map)
    }
}
