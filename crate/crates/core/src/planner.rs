//! Mesh-optimal paths: crossing points for every adjacent cell pair and
//! Dijkstra between waypoints.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossing::{solve_flat, CellTraversal, CrossingProblem, CrossingSolution, SolverConfig};
use crate::error::{Error, Result};
use crate::geo::{lat_scale, lon_diff, GeoPoint};
use crate::mesh::{graph::touching_pairs, CaseCode, CellBox, Environment};
use crate::route::{evaluate_leg, Leg, Route, RouteKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    #[serde(alias = "time")]
    TravelTime,
    Fuel,
    Distance,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::TravelTime, Objective::Fuel, Objective::Distance];

    pub fn leg_cost(self, leg: &Leg) -> f64 {
        match self {
            Objective::TravelTime => leg.time_s,
            Objective::Fuel => leg.fuel_t,
            Objective::Distance => leg.distance_m,
        }
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" | "travel_time" => Ok(Objective::TravelTime),
            "fuel" => Ok(Objective::Fuel),
            "distance" => Ok(Objective::Distance),
            other => Err(Error::Config(format!(
                "unknown objective `{other}` (expected time, fuel or distance)"
            ))),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::TravelTime => "travel_time",
            Objective::Fuel => "fuel",
            Objective::Distance => "distance",
        })
    }
}

/// Unit vectors `(across, along)` of the canonical crossing frame for an
/// orthogonal case code, in (east, north) components. `across` points from
/// source to target.
pub fn frame(code: CaseCode) -> Option<((f64, f64), (f64, f64))> {
    match code {
        CaseCode::East => Some(((1.0, 0.0), (0.0, 1.0))),
        CaseCode::West => Some(((-1.0, 0.0), (0.0, -1.0))),
        CaseCode::South => Some(((0.0, -1.0), (1.0, 0.0))),
        CaseCode::North => Some(((0.0, 1.0), (-1.0, 0.0))),
        _ => None,
    }
}

fn project(v: (f64, f64), axis: (f64, f64)) -> f64 {
    v.0 * axis.0 + v.1 * axis.1
}

/// Point shared by two diagonal neighbours.
pub fn shared_corner(a: &CellBox, code: CaseCode) -> GeoPoint {
    let (e, n) = code.step();
    GeoPoint::raw(
        a.centre.lon + f64::from(e) * a.half_width,
        a.centre.lat + f64::from(n) * a.half_height,
    )
}

/// The flat crossing problem between the centres of `a` and `b`, with the
/// function mapping a solution offset back to a boundary point.
pub fn centre_problem(env: &Environment, a: usize, b: usize, code: CaseCode) -> Option<(CrossingProblem, BoundaryMap)> {
    let (across, along) = frame(code)?;
    let (ca, cb) = (env.cell(a), env.cell(b));
    let units = &env.units;
    let (pa, pb) = (&env.perf[a], &env.perf[b]);
    let traversal = |cell: &CellBox, speed: f64, half: f64| {
        CellTraversal::new(
            speed,
            (project(cell.agg_current, across), project(cell.agg_current, along)),
            half,
        )
    };
    let (x, a_span, sep, map) = if code.is_horizontal() {
        let boundary_lon = if code == CaseCode::East { ca.lon_hi() } else { ca.lon_lo() };
        let sep = units.deg_to_m(cb.centre.lat - ca.centre.lat) * along.1;
        (
            ca.half_width_m(units),
            cb.half_width_m(units),
            sep,
            BoundaryMap::Meridian {
                lon: boundary_lon,
                origin_lat: ca.centre.lat,
                sign: along.1,
                lo: ca.lat_lo().max(cb.lat_lo()),
                hi: ca.lat_hi().min(cb.lat_hi()),
            },
        )
    } else {
        let boundary_lat = if code == CaseCode::South { ca.lat_lo() } else { ca.lat_hi() };
        let scale = lat_scale(boundary_lat);
        let sep = units.deg_to_m(lon_diff(ca.centre.lon, cb.centre.lon)) * scale * along.0;
        (
            ca.half_height_m(units),
            cb.half_height_m(units),
            sep,
            BoundaryMap::Parallel {
                lat: boundary_lat,
                origin_lon: ca.centre.lon,
                sign: along.0,
                scale,
                lo: ca.lon_lo().max(cb.lon_lo()),
                hi: ca.lon_hi().min(cb.lon_hi()),
            },
        )
    };
    let problem = CrossingProblem {
        left: traversal(ca, pa.speed_mps(), x),
        right: traversal(cb, pb.speed_mps(), a_span),
        separation: sep,
        orientation: crate::crossing::Orientation::FlatHorizontal,
        earth_radius: units.earth_radius,
    };
    Some((problem, map))
}

/// Maps an along-boundary offset in metres to a point on the shared
/// segment, clamped to its ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryMap {
    Meridian {
        lon: f64,
        origin_lat: f64,
        sign: f64,
        lo: f64,
        hi: f64,
    },
    Parallel {
        lat: f64,
        origin_lon: f64,
        sign: f64,
        scale: f64,
        lo: f64,
        hi: f64,
    },
}

impl BoundaryMap {
    pub fn point(&self, y: f64, units: &crate::geo::Units) -> GeoPoint {
        match *self {
            BoundaryMap::Meridian {
                lon,
                origin_lat,
                sign,
                lo,
                hi,
            } => GeoPoint::raw(lon, (origin_lat + sign * units.m_to_deg(y)).clamp(lo, hi)),
            BoundaryMap::Parallel {
                lat,
                origin_lon,
                sign,
                scale,
                lo,
                hi,
            } => GeoPoint::raw((origin_lon + sign * units.m_to_deg(y) / scale).clamp(lo, hi), lat),
        }
    }
}

/// One directed edge of the planning graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacentCellPair {
    pub src: usize,
    pub dst: usize,
    pub code: CaseCode,
    pub crossing_point: GeoPoint,
    /// Flat solver output; `None` for diagonal pairs.
    pub crossing: Option<CrossingSolution>,
    /// Centre of `src` to the crossing point.
    pub src_leg: Leg,
    /// Crossing point to the centre of `dst`.
    pub dst_leg: Leg,
    pub leg_time: f64,
    pub leg_distance: f64,
    pub leg_fuel: f64,
}

impl AdjacentCellPair {
    pub fn cost(&self, objective: Objective) -> f64 {
        match objective {
            Objective::TravelTime => self.leg_time,
            Objective::Fuel => self.leg_fuel,
            Objective::Distance => self.leg_distance,
        }
    }
}

/// All feasible directed edges, grouped by source cell.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSet {
    pub pairs: Vec<AdjacentCellPair>,
    outgoing: Vec<Vec<usize>>,
}

impl EdgeSet {
    pub fn outgoing(&self, src: usize) -> impl Iterator<Item = &AdjacentCellPair> {
        self.outgoing[src].iter().map(move |&k| &self.pairs[k])
    }

    pub fn get(&self, src: usize, dst: usize) -> Option<&AdjacentCellPair> {
        self.outgoing(src).find(|p| p.dst == dst)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn build_pair(env: &Environment, src: usize, dst: usize, code: CaseCode, cfg: &SolverConfig) -> Option<AdjacentCellPair> {
    let (crossing_point, crossing) = if code.is_diagonal() {
        (shared_corner(env.cell(src), code), None)
    } else {
        let (problem, map) = centre_problem(env, src, dst, code)?;
        let sol = match solve_flat(&problem, None, cfg) {
            Ok(s) => s,
            Err(e) => {
                log::debug!("edge {src}->{dst} omitted: {e}");
                return None;
            }
        };
        if !sol.converged {
            log::warn!("crossing {src}->{dst} did not converge; using best iterate");
        }
        (map.point(sol.yval, &env.units), Some(sol))
    };
    let src_leg = evaluate_leg(env, src, env.cell(src).centre, crossing_point).ok()?;
    let dst_leg = evaluate_leg(env, dst, crossing_point, env.cell(dst).centre).ok()?;
    Some(AdjacentCellPair {
        src,
        dst,
        code,
        crossing_point,
        crossing,
        leg_time: src_leg.time_s + dst_leg.time_s,
        leg_distance: src_leg.distance_m + dst_leg.distance_m,
        leg_fuel: src_leg.fuel_t + dst_leg.fuel_t,
        src_leg,
        dst_leg,
    })
}

/// Solves the crossing for every directed edge of the neighbour graph.
/// Edges whose crossing is infeasible are left out.
pub fn build_edges(env: &Environment, cfg: &SolverConfig) -> EdgeSet {
    let edges = env.graph.edges();
    let pairs: Vec<AdjacentCellPair> = edges
        .par_iter()
        .filter_map(|e| build_pair(env, e.src, e.dst, e.code, cfg))
        .collect();
    let mut outgoing = vec![Vec::new(); env.mesh.len()];
    for (k, p) in pairs.iter().enumerate() {
        outgoing[p.src].push(k);
    }
    EdgeSet { pairs, outgoing }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DijkstraPath {
    pub start: GeoPoint,
    pub end: GeoPoint,
    pub objective: Objective,
    pub cells: Vec<usize>,
    /// Start, centres and crossing points alternating, end.
    pub nodes: Vec<GeoPoint>,
    /// Crossing point between `cells[k]` and `cells[k + 1]`.
    pub crossings: Vec<GeoPoint>,
    /// One leg per consecutive node pair.
    pub legs: Vec<Leg>,
    pub cost: f64,
}

impl DijkstraPath {
    pub fn to_route(&self) -> Route {
        Route {
            kind: RouteKind::Dijkstra,
            from: String::new(),
            to: String::new(),
            points: self.nodes.clone(),
            legs: self.legs.clone(),
        }
    }

    pub fn total_time(&self) -> f64 {
        self.legs.iter().fold(0.0, |acc, l| acc + l.time_s)
    }
}

/// Cell holding a waypoint, which must be accessible.
pub fn locate(env: &Environment, p: GeoPoint, role: &str) -> Result<usize> {
    let id = env
        .mesh
        .cell_at(p)
        .ok_or_else(|| Error::Placement(format!("{role} ({}, {}) lies outside the mesh", p.lon, p.lat)))?;
    if env.is_blocked(id) {
        return Err(Error::Placement(format!(
            "{role} ({}, {}) lies in blocked cell {id}",
            p.lon, p.lat
        )));
    }
    Ok(id)
}

fn attach(env: &Environment, cell: usize, a: GeoPoint, b: GeoPoint) -> Result<Leg> {
    evaluate_leg(env, cell, a, b).map_err(Error::from)
}

/// Leg from a start waypoint to the centre of its cell.
pub fn start_leg(env: &Environment, cell: usize, start: GeoPoint) -> Result<Leg> {
    attach(env, cell, start, env.cell(cell).centre)
}

/// Leg from the centre of the final cell to the end waypoint.
pub fn end_leg(env: &Environment, cell: usize, end: GeoPoint) -> Result<Leg> {
    attach(env, cell, env.cell(cell).centre, end)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-cost path from `start` to `end` over the edge set. Equal
/// costs settle the smaller cell id first.
pub fn plan(env: &Environment, edges: &EdgeSet, start: GeoPoint, end: GeoPoint, objective: Objective) -> Result<DijkstraPath> {
    let s = locate(env, start, "start")?;
    let e = locate(env, end, "end")?;

    if s == e {
        let leg = attach(env, s, start, end)?;
        return Ok(DijkstraPath {
            start,
            end,
            objective,
            cells: vec![s],
            nodes: vec![start, end],
            crossings: Vec::new(),
            cost: objective.leg_cost(&leg),
            legs: vec![leg],
        });
    }

    let first = start_leg(env, s, start)?;
    let last = end_leg(env, e, end)?;

    let n = env.mesh.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[s] = objective.leg_cost(&first);
    heap.push(Reverse(Key(dist[s], s)));

    while let Some(Reverse(Key(d, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if u == e {
            break;
        }
        for (k, pair) in edges.outgoing[u].iter().map(|&k| (k, &edges.pairs[k])) {
            let nd = d + pair.cost(objective);
            if nd < dist[pair.dst] {
                dist[pair.dst] = nd;
                prev[pair.dst] = Some(k);
                heap.push(Reverse(Key(nd, pair.dst)));
            }
        }
    }

    if !done[e] {
        return Err(no_route(env, s, e, &done));
    }

    let mut chain = Vec::new();
    let mut at = e;
    while let Some(k) = prev[at] {
        chain.push(&edges.pairs[k]);
        at = edges.pairs[k].src;
    }
    chain.reverse();

    let mut cells = vec![s];
    let mut nodes = vec![start, env.cell(s).centre];
    let mut crossings = Vec::new();
    let mut legs = vec![first];
    for p in chain {
        cells.push(p.dst);
        crossings.push(p.crossing_point);
        nodes.push(p.crossing_point);
        nodes.push(env.cell(p.dst).centre);
        legs.push(p.src_leg);
        legs.push(p.dst_leg);
    }
    nodes.push(end);
    legs.push(last);

    Ok(DijkstraPath {
        start,
        end,
        objective,
        cells,
        nodes,
        crossings,
        legs,
        cost: dist[e] + objective.leg_cost(&last),
    })
}

fn no_route(env: &Environment, s: usize, e: usize, reached: &[bool]) -> Error {
    let mut frontier: Vec<usize> = match touching_pairs(&env.mesh.cells) {
        Ok(pairs) => pairs
            .into_iter()
            .filter_map(|(a, b, _)| {
                if reached[a] && env.is_blocked(b) {
                    Some(b)
                } else if reached[b] && env.is_blocked(a) {
                    Some(a)
                } else {
                    None
                }
            })
            .collect(),
        Err(_) => Vec::new(),
    };
    frontier.sort_unstable();
    frontier.dedup();
    let reachable = reached.iter().filter(|r| **r).count();
    let shown: Vec<String> = frontier.iter().take(12).map(|c| c.to_string()).collect();
    let more = if frontier.len() > shown.len() {
        format!(" and {} more", frontier.len() - shown.len())
    } else {
        String::new()
    };
    Error::NoRoute {
        from: s,
        to: e,
        frontier: format!(
            "{reachable} reachable cells are enclosed by blocked cells [{}]{more}",
            shown.join(", ")
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_table_is_right_handed_and_points_at_target() {
        for code in [CaseCode::East, CaseCode::West, CaseCode::South, CaseCode::North] {
            let (d, y) = frame(code).unwrap();
            let (e, n) = code.step();
            assert_eq!((d.0, d.1), (f64::from(e), f64::from(n)));
            assert_eq!(d.0 * y.1 - d.1 * y.0, 1.0);
        }
        assert!(frame(CaseCode::NorthEast).is_none());
    }

    #[test]
    fn objective_names() {
        assert_eq!("time".parse::<Objective>().unwrap(), Objective::TravelTime);
        assert_eq!("fuel".parse::<Objective>().unwrap(), Objective::Fuel);
        assert!("speed".parse::<Objective>().is_err());
        let o: Objective = serde_json::from_str("\"distance\"").unwrap();
        assert_eq!(o, Objective::Distance);
    }

    #[test]
    fn heap_key_breaks_ties_by_id() {
        let mut h = BinaryHeap::new();
        h.push(Reverse(Key(1.0, 5)));
        h.push(Reverse(Key(1.0, 2)));
        h.push(Reverse(Key(0.5, 9)));
        let order: Vec<usize> = std::iter::from_fn(|| h.pop().map(|Reverse(Key(_, id))| id)).collect();
        assert_eq!(order, vec![9, 2, 5]);
    }
}
