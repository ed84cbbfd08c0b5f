//! Smoothing a mesh path off the cell centres.
//!
//! The state is a cell sequence `c0..cn` with one crossing point on each
//! shared boundary. A sweep visits the crossings left to right and
//! re-solves each one between its neighbours (the entry and exit points).
//! When the optimum falls beyond the shared segment the path is rerouted
//! through the cells on that side (a horseshoe); diagonal steps through a
//! corner are replaced by a step through one of the two cells beside the
//! corner. Sweeps repeat until the total time settles.

pub mod boundary;

use serde::{Deserialize, Serialize};

use crate::crossing::SolverConfig;
use crate::geo::GeoPoint;
use crate::mesh::graph::relation;
use crate::mesh::{CellBox, Environment};
use crate::planner::DijkstraPath;
use crate::route::{evaluate_leg, Route, RouteKind};

pub use boundary::{pair_problem, Boundary, OffsetMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothingConfig {
    /// Metres. Entry and exit closer than this snap the crossing instead of
    /// solving.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Days.
    pub convergence_tol: f64,
    /// Percentage points of SIC a rerouted cell may exceed the original pair.
    pub ice_step_limit: f64,
    pub allow_horseshoe: bool,
    pub allow_diagonal: bool,
    pub remove_reversing: bool,
    /// Alternating solves used to compare the two diagonal candidates.
    pub diagonal_rounds: usize,
    pub solver: SolverConfig,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            epsilon: 1000.0,
            max_iterations: 1000,
            convergence_tol: 1e-3,
            ice_step_limit: 10.0,
            allow_horseshoe: true,
            allow_diagonal: true,
            remove_reversing: true,
            diagonal_rounds: 20,
            solver: SolverConfig::default(),
        }
    }
}

impl SmoothingConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(crate::Error::Config("smoothing.epsilon must be positive".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(crate::Error::Config("smoothing.convergence_tol must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(crate::Error::Config("smoothing.max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingStatus {
    /// Carried over from the mesh path and not yet moved.
    Initial,
    /// Placed by a crossing solver inside the shared segment.
    Optimised,
    /// Held at a segment end or corner because rerouting was refused.
    Clipped,
    /// Placed by a special case rather than by a solver.
    Snapped,
    /// Left in place because the solver's move would lengthen the route
    /// under the route time model.
    Held,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingState {
    pub start: GeoPoint,
    pub end: GeoPoint,
    pub cells: Vec<usize>,
    /// `crossings[k]` lies between `cells[k]` and `cells[k + 1]`.
    pub crossings: Vec<GeoPoint>,
    pub status: Vec<CrossingStatus>,
    pub iteration: usize,
    pub last_total_time: f64,
    /// Index of the crossing being processed.
    pub cursor: usize,
}

impl SmoothingState {
    pub fn from_path(path: &DijkstraPath) -> Self {
        SmoothingState {
            start: path.start,
            end: path.end,
            cells: path.cells.clone(),
            crossings: path.crossings.clone(),
            status: vec![CrossingStatus::Initial; path.crossings.len()],
            iteration: 0,
            last_total_time: path.total_time(),
            cursor: 0,
        }
    }

    /// Route nodes: start, crossings, end.
    pub fn points(&self) -> Vec<GeoPoint> {
        let mut pts = Vec::with_capacity(self.crossings.len() + 2);
        pts.push(self.start);
        pts.extend_from_slice(&self.crossings);
        pts.push(self.end);
        pts
    }

    /// Entry point of crossing `k`.
    pub fn entry(&self, k: usize) -> GeoPoint {
        if k == 0 {
            self.start
        } else {
            self.crossings[k - 1]
        }
    }

    /// Exit point of crossing `k`.
    pub fn exit(&self, k: usize) -> GeoPoint {
        self.crossings.get(k + 1).copied().unwrap_or(self.end)
    }

    /// First, mid and last tracking points as node indices.
    pub fn tracking_points(&self) -> (usize, usize, usize) {
        (self.cursor, self.cursor + 1, self.cursor + 2)
    }

    pub fn node_count(&self) -> usize {
        self.crossings.len() + 2
    }

    pub fn route(&self, env: &Environment) -> Option<Route> {
        Route::from_points(env, RouteKind::Smoothed, self.points(), &self.cells).ok()
    }

    pub fn total_time(&self, env: &Environment) -> f64 {
        self.route(env).map_or(f64::INFINITY, |r| r.total_time())
    }

    fn splice(&mut self, k: usize, new_cells: &[usize], new_crossings: &[GeoPoint], status: CrossingStatus) {
        // replaces crossing k (and nothing else) by the inserted chain
        self.cells.splice(k + 1..k + 1, new_cells.iter().copied());
        self.crossings.splice(k..=k, new_crossings.iter().copied());
        self.status.splice(k..=k, std::iter::repeat_n(status, new_crossings.len()));
    }
}

/// Where a step leaves crossing `k`.
#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Moved(GeoPoint, CrossingStatus),
    /// Replace the crossing by a chain through `cells`, with one crossing
    /// per new boundary.
    Reroute {
        cells: Vec<usize>,
        crossings: Vec<GeoPoint>,
    },
    Unchanged,
}

/// Special placements that bypass the solver: an entry or exit already on
/// the boundary, or entry and exit closer than epsilon.
pub fn apply_special_cases(
    env: &Environment,
    bd: &Boundary,
    entry: GeoPoint,
    exit: GeoPoint,
    cfg: &SmoothingConfig,
) -> Option<GeoPoint> {
    if bd.on_line(entry) {
        return Some(bd.point(bd.clamp(bd.along(entry))));
    }
    if bd.on_line(exit) {
        return Some(bd.point(bd.clamp(bd.along(exit))));
    }
    if crate::geo::midlat_distance(entry, exit, &env.units) < cfg.epsilon {
        return Some(bd.point(bd.clamp(bd.along(exit))));
    }
    None
}

/// Refusal reasons for a rerouted cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardDecision {
    Allow,
    Clip,
}

/// Rejects candidates that are blocked or carry much more ice than the
/// pair they replace.
pub fn ice_step_guard(env: &Environment, pair: (usize, usize), candidates: &[usize], cfg: &SmoothingConfig) -> GuardDecision {
    let sic = |c: usize| env.cell(c).agg_sic;
    let base = match (sic(pair.0), sic(pair.1)) {
        (Some(a), Some(b)) => a.max(b),
        _ => return GuardDecision::Clip,
    };
    for &c in candidates {
        if env.is_blocked(c) {
            return GuardDecision::Clip;
        }
        match sic(c) {
            Some(s) if s <= base + cfg.ice_step_limit => {}
            _ => return GuardDecision::Clip,
        }
    }
    GuardDecision::Allow
}

fn orthogonal(a: &CellBox, b: &CellBox) -> bool {
    matches!(relation(a, b), Ok(Some(c)) if !c.is_diagonal())
}

const PROBE: f64 = 1e-7;

/// Route-model time of `entry -> x` in `a` plus `x -> exit` in `b`.
fn pair_time(env: &Environment, a: usize, b: usize, entry: GeoPoint, x: GeoPoint, exit: GeoPoint) -> f64 {
    match (evaluate_leg(env, a, entry, x), evaluate_leg(env, b, x, exit)) {
        (Ok(l1), Ok(l2)) => l1.time_s + l2.time_s,
        _ => f64::INFINITY,
    }
}

/// Route-model time of `entry` through `cells`, crossing at `crossings`, to `exit`.
fn chain_time(env: &Environment, entry: GeoPoint, cells: &[usize], crossings: &[GeoPoint], exit: GeoPoint) -> f64 {
    let points: Vec<GeoPoint> = std::iter::once(entry)
        .chain(crossings.iter().copied())
        .chain(std::iter::once(exit))
        .collect();
    Route::from_points(env, RouteKind::Smoothed, points, cells).map_or(f64::INFINITY, |r| r.total_time())
}

/// Keeps a move only when it does not lengthen the two legs it touches
/// under the route time model.
fn accept_move(
    env: &Environment,
    (a, b): (usize, usize),
    entry: GeoPoint,
    exit: GeoPoint,
    current: GeoPoint,
    outcome: StepOutcome,
) -> StepOutcome {
    match outcome {
        StepOutcome::Moved(p, status) => {
            if pair_time(env, a, b, entry, p, exit) <= pair_time(env, a, b, entry, current, exit) {
                StepOutcome::Moved(p, status)
            } else {
                StepOutcome::Moved(current, CrossingStatus::Held)
            }
        }
        other => other,
    }
}

/// Solves an orthogonal pair and decides where its crossing goes.
pub fn smooth_step(
    env: &Environment,
    a: usize,
    b: usize,
    entry: GeoPoint,
    exit: GeoPoint,
    current: GeoPoint,
    cfg: &SmoothingConfig,
) -> StepOutcome {
    let Some(bd) = Boundary::between(env.cell(a), env.cell(b)) else {
        return StepOutcome::Unchanged;
    };
    if let Some(p) = apply_special_cases(env, &bd, entry, exit, cfg) {
        return StepOutcome::Moved(p, CrossingStatus::Snapped);
    }
    let (problem, map) = pair_problem(env, a, b, &bd, entry, exit);
    let warm = map.offset(bd.along(current));
    let sol = match problem.solve(Some(warm), &cfg.solver) {
        Ok(s) if s.converged => s,
        _ => return StepOutcome::Unchanged,
    };
    let along = map.along(sol.yval);
    if bd.contains(along) {
        return StepOutcome::Moved(bd.point(bd.clamp(along)), CrossingStatus::Optimised);
    }
    if cfg.allow_horseshoe {
        if let Some((cells, crossings)) = horseshoe(env, a, b, &bd, along, entry, exit, cfg) {
            return StepOutcome::Reroute { cells, crossings };
        }
    }
    StepOutcome::Moved(bd.point(bd.clamp(along)), CrossingStatus::Clipped)
}

/// East/west pair step.
pub fn smooth_step_horizontal(
    env: &Environment,
    a: usize,
    b: usize,
    entry: GeoPoint,
    exit: GeoPoint,
    current: GeoPoint,
    cfg: &SmoothingConfig,
) -> StepOutcome {
    debug_assert!(Boundary::between(env.cell(a), env.cell(b)).is_some_and(|b| b.is_meridian()));
    smooth_step(env, a, b, entry, exit, current, cfg)
}

/// North/south pair step.
pub fn smooth_step_vertical(
    env: &Environment,
    a: usize,
    b: usize,
    entry: GeoPoint,
    exit: GeoPoint,
    current: GeoPoint,
    cfg: &SmoothingConfig,
) -> StepOutcome {
    debug_assert!(Boundary::between(env.cell(a), env.cell(b)).is_some_and(|b| !b.is_meridian()));
    smooth_step(env, a, b, entry, exit, current, cfg)
}

/// Cells to route `a -> b` around the end of their shared segment on the
/// side where `along` fell. Returns the interior cells to insert and one
/// initial crossing per boundary of the new chain.
#[allow(clippy::too_many_arguments)]
fn horseshoe(
    env: &Environment,
    a: usize,
    b: usize,
    bd: &Boundary,
    along: f64,
    entry: GeoPoint,
    exit: GeoPoint,
    cfg: &SmoothingConfig,
) -> Option<(Vec<usize>, Vec<GeoPoint>)> {
    let dirn = if along < bd.lo { -1.0 } else { 1.0 };
    let side_a = -bd.direction();
    let pick = |id: usize, side: f64| -> Option<usize> {
        let c = env.cell(id);
        let (lo, hi) = if bd.is_meridian() {
            (c.lat_lo(), c.lat_hi())
        } else {
            (c.lon_lo(), c.lon_hi())
        };
        if along > lo && along < hi {
            return Some(id);
        }
        let edge = if dirn < 0.0 { lo - PROBE } else { hi + PROBE };
        let across = bd.line + side * PROBE;
        let probe = if bd.is_meridian() {
            GeoPoint::raw(across, edge)
        } else {
            GeoPoint::raw(edge, across)
        };
        env.mesh.cell_at(probe)
    };
    let l = pick(a, side_a)?;
    let r = pick(b, -side_a)?;

    let mut chain = vec![a];
    for c in [l, r, b] {
        if *chain.last().unwrap() != c {
            chain.push(c);
        }
    }
    let inserted: Vec<usize> = chain[1..chain.len() - 1].to_vec();
    if inserted.is_empty() {
        return None;
    }
    let fresh: Vec<usize> = inserted.iter().copied().filter(|&c| c != a && c != b).collect();
    if ice_step_guard(env, (a, b), &fresh, cfg) == GuardDecision::Clip {
        return None;
    }
    if chain.windows(2).any(|w| !orthogonal(env.cell(w[0]), env.cell(w[1]))) {
        return None;
    }

    // Initial crossings along entry -> (line, along) -> exit.
    let pivot = bd.point(along);
    let mut crossings = Vec::with_capacity(chain.len() - 1);
    for w in chain.windows(2) {
        let nb = Boundary::between(env.cell(w[0]), env.cell(w[1]))?;
        let hit = nb.intersect(entry, pivot).or_else(|| nb.intersect(pivot, exit));
        let at = match hit {
            Some(v) => nb.clamp_inset(v, 1e-3),
            None => nb.clamp_inset(nb.along(pivot), 1e-3),
        };
        crossings.push(nb.point(at));
    }
    Some((inserted, crossings))
}

/// Replacement for a diagonal step `a -> b` through their shared corner:
/// the better of the two cells beside the corner with its two crossings.
pub fn smooth_step_diagonal(
    env: &Environment,
    a: usize,
    b: usize,
    entry: GeoPoint,
    exit: GeoPoint,
    cfg: &SmoothingConfig,
) -> Option<(usize, [GeoPoint; 2])> {
    let code = relation(env.cell(a), env.cell(b)).ok().flatten()?;
    if !code.is_diagonal() {
        return None;
    }
    let corner = crate::planner::shared_corner(env.cell(a), code);
    let (e, n) = code.step();
    let (e, n) = (f64::from(e), f64::from(n));
    let probes = [
        GeoPoint::raw(corner.lon + e * PROBE, corner.lat - n * PROBE),
        GeoPoint::raw(corner.lon - e * PROBE, corner.lat + n * PROBE),
    ];

    let mut best: Option<(f64, usize, [GeoPoint; 2])> = None;
    for probe in probes {
        let Some(c) = env.mesh.cell_at(probe) else { continue };
        if c == a || c == b || ice_step_guard(env, (a, b), &[c], cfg) == GuardDecision::Clip {
            continue;
        }
        let (Some(b1), Some(b2)) = (
            Boundary::between(env.cell(a), env.cell(c)),
            Boundary::between(env.cell(c), env.cell(b)),
        ) else {
            continue;
        };
        let mut x1 = b1.midpoint();
        let mut x2 = b2.midpoint();
        for _ in 0..cfg.diagonal_rounds {
            let step = local_step(env, a, c, &b1, entry, x2, x1, cfg);
            if let StepOutcome::Moved(p, _) = accept_move(env, (a, c), entry, x2, x1, step) {
                x1 = p;
            }
            let step = local_step(env, c, b, &b2, x1, exit, x2, cfg);
            if let StepOutcome::Moved(p, _) = accept_move(env, (c, b), x1, exit, x2, step) {
                x2 = p;
            }
        }
        let time = Route::from_points(env, RouteKind::Smoothed, vec![entry, x1, x2, exit], &[a, c, b])
            .map(|r| r.total_time())
            .unwrap_or(f64::INFINITY);
        if !time.is_finite() {
            continue;
        }
        let better = match best {
            None => true,
            Some((bt, bc, _)) => time < bt || (time == bt && c < bc),
        };
        if better {
            best = Some((time, c, [x1, x2]));
        }
    }
    best.map(|(_, c, x)| (c, x))
}

/// Solve without rerouting, clamped to the segment.
#[allow(clippy::too_many_arguments)]
fn local_step(
    env: &Environment,
    a: usize,
    b: usize,
    bd: &Boundary,
    entry: GeoPoint,
    exit: GeoPoint,
    current: GeoPoint,
    cfg: &SmoothingConfig,
) -> StepOutcome {
    if let Some(p) = apply_special_cases(env, bd, entry, exit, cfg) {
        return StepOutcome::Moved(p, CrossingStatus::Snapped);
    }
    let (problem, map) = pair_problem(env, a, b, bd, entry, exit);
    match problem.solve(Some(map.offset(bd.along(current))), &cfg.solver) {
        Ok(s) if s.converged => StepOutcome::Moved(bd.point(bd.clamp(map.along(s.yval))), CrossingStatus::Optimised),
        _ => StepOutcome::Unchanged,
    }
}

/// Cuts every loop that revisits a cell, keeping the outermost visit.
/// Returns the number of cells removed.
pub fn remove_reversing_edges(state: &mut SmoothingState) -> usize {
    let mut removed = 0;
    let mut i = 0;
    while i < state.cells.len() {
        let c = state.cells[i];
        if let Some(j) = state.cells.iter().rposition(|&x| x == c).filter(|&j| j > i) {
            state.cells.drain(i + 1..=j);
            state.crossings.drain(i..j);
            state.status.drain(i..j);
            removed += j - i;
        }
        i += 1;
    }
    removed
}

/// One left-to-right pass over the crossings.
pub fn sweep(env: &Environment, state: &mut SmoothingState, cfg: &SmoothingConfig) {
    let mut k = 0;
    while k < state.crossings.len() {
        state.cursor = k;
        let (a, b) = (state.cells[k], state.cells[k + 1]);
        let entry = state.entry(k);
        let exit = state.exit(k);
        let diagonal = relation(env.cell(a), env.cell(b))
            .ok()
            .flatten()
            .is_some_and(|c| c.is_diagonal());
        if diagonal {
            if cfg.allow_diagonal {
                if let Some((c, xs)) = smooth_step_diagonal(env, a, b, entry, exit, cfg) {
                    let corner = state.crossings[k];
                    if chain_time(env, entry, &[a, c, b], &xs, exit) <= pair_time(env, a, b, entry, corner, exit) {
                        state.splice(k, &[c], &xs, CrossingStatus::Optimised);
                        k += 2;
                    } else {
                        state.status[k] = CrossingStatus::Held;
                        k += 1;
                    }
                    continue;
                }
            }
            state.status[k] = CrossingStatus::Clipped;
            k += 1;
            continue;
        }
        let current = state.crossings[k];
        let step = smooth_step(env, a, b, entry, exit, current, cfg);
        match accept_move(env, (a, b), entry, exit, current, step) {
            StepOutcome::Moved(p, status) => {
                state.crossings[k] = p;
                state.status[k] = status;
                k += 1;
            }
            StepOutcome::Reroute { cells, crossings }
                if chain_time(env, entry, &[&[a], &cells[..], &[b]].concat(), &crossings, exit)
                    > pair_time(env, a, b, entry, current, exit) =>
            {
                state.status[k] = CrossingStatus::Held;
                k += 1;
            }
            StepOutcome::Reroute { cells, crossings } => {
                let n = crossings.len();
                state.splice(k, &cells, &crossings, CrossingStatus::Initial);
                k += n;
            }
            StepOutcome::Unchanged => k += 1,
        }
    }
    if cfg.remove_reversing {
        remove_reversing_edges(state);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub total_time_s: f64,
    pub node_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedRoute {
    pub route: Route,
    pub cells: Vec<usize>,
    pub status: Vec<CrossingStatus>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

impl SmoothedRoute {
    pub fn total_time(&self) -> f64 {
        self.route.total_time()
    }

    pub fn crossings(&self) -> &[GeoPoint] {
        let n = self.route.points.len();
        &self.route.points[1..n - 1]
    }
}

/// Smooths a mesh path until successive sweeps change the total time by
/// less than the tolerance, or the iteration cap is reached.
pub fn smooth(env: &Environment, path: &DijkstraPath, cfg: &SmoothingConfig) -> SmoothedRoute {
    let mut state = SmoothingState::from_path(path);
    let mut trace = vec![TraceRow {
        iteration: 0,
        total_time_s: state.last_total_time,
        node_count: state.node_count(),
    }];
    let tol_s = cfg.convergence_tol * env.units.seconds_per_day;
    let mut converged = false;
    let mut best: Option<(f64, SmoothingState)> = None;

    while state.iteration < cfg.max_iterations {
        sweep(env, &mut state, cfg);
        state.iteration += 1;
        let total = state.total_time(env);
        trace.push(TraceRow {
            iteration: state.iteration,
            total_time_s: total,
            node_count: state.node_count(),
        });
        if best.as_ref().is_none_or(|(t, _)| total < *t) {
            best = Some((total, state.clone()));
        }
        let delta = (total - state.last_total_time).abs();
        state.last_total_time = total;
        if delta < tol_s {
            converged = true;
            break;
        }
    }

    let final_state = if converged {
        state
    } else {
        best.map(|(_, s)| s).unwrap_or(state)
    };
    let mut route = final_state.route(env).unwrap_or_else(|| path.to_route());
    route.kind = RouteKind::Smoothed;
    SmoothedRoute {
        route,
        cells: final_state.cells,
        status: final_state.status,
        iterations: final_state.iteration,
        converged,
        trace,
    }
}
