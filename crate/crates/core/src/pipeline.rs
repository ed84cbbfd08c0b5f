//! The command implementations behind the `polar-route` binary.
//!
//! Each `cmd_*` function takes the parsed config plus its own options,
//! writes its files, and prints a short human summary to `out`.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::mesh::grid::RawSic;
use crate::mesh::io::MeshDocument;
use crate::mesh::{build_mesh, load_grid, Environment};
use crate::planner::{build_edges, centre_problem, plan, EdgeSet, Objective};
use crate::route::{feature_collection, read_tracks, write_json, Route};
use crate::smoother::{smooth, SmoothedRoute, TraceRow};
use crate::validate::{validate_track, ValidationReport};

fn emit(out: &mut dyn Write, line: std::fmt::Arguments<'_>) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Loads the gridded inputs named by the config and builds the augmented
/// mesh.
pub fn build_environment(cfg: &RunConfig) -> Result<Environment> {
    let paths = cfg.grid_paths();
    for p in &paths {
        if !p.is_file() {
            return Err(Error::io(p, std::io::Error::new(std::io::ErrorKind::NotFound, "grid file not found")));
        }
    }
    let grid = load_grid(&paths, &cfg.window())?;
    let mesh = build_mesh(&grid, &cfg.split_config(), cfg.region, cfg.initial_cell_size)?;
    log::info!("mesh built: {} cells", mesh.len());
    Environment::new(mesh, cfg.vessel, cfg.units())
}

/// The environment from a stored mesh document when given, else built from
/// the config.
pub fn load_environment(cfg: &RunConfig, mesh: Option<&Path>) -> Result<(Environment, String)> {
    match mesh {
        Some(path) => {
            let doc = MeshDocument::read(path)?;
            let id = doc.mesh_id.clone();
            Ok((doc.into_environment()?, id))
        }
        None => {
            let env = build_environment(cfg)?;
            let id = MeshDocument::from_environment(&env).mesh_id;
            Ok((env, id))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshSummary {
    pub mesh_id: String,
    pub cells: usize,
    pub blocked_fraction: f64,
    pub max_depth: u32,
}

pub fn cmd_mesh_build(cfg: &RunConfig, out_path: &Path, out: &mut dyn Write) -> Result<MeshSummary> {
    let env = build_environment(cfg)?;
    let doc = MeshDocument::from_environment(&env);
    doc.write(out_path)?;
    let summary = MeshSummary {
        mesh_id: doc.mesh_id.clone(),
        cells: doc.cells.len(),
        blocked_fraction: doc.blocked_fraction(),
        max_depth: env.mesh.max_depth_level(),
    };
    emit(out, format_args!("mesh {} written to {}", summary.mesh_id, out_path.display()))?;
    emit(out, format_args!("cells: {}", summary.cells))?;
    emit(out, format_args!("blocked fraction: {:.4}", summary.blocked_fraction))?;
    emit(out, format_args!("max depth: {}", summary.max_depth))?;
    Ok(summary)
}

#[derive(Debug, Clone, Default)]
pub struct RouteOptions {
    pub from: String,
    pub to: String,
    pub objective: Option<Objective>,
    pub smooth: bool,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RouteOutcome {
    pub mesh_id: String,
    pub objective: Objective,
    pub dijkstra: Route,
    pub smoothed: Option<SmoothedRoute>,
}

/// Percentage by which `smoothed` undercuts `base`; zero for a zero base.
pub fn improvement_pct(base: f64, smoothed: f64) -> f64 {
    if base > 0.0 {
        100.0 * (base - smoothed) / base
    } else {
        0.0
    }
}

impl RouteOutcome {
    pub fn improvement_pct(&self) -> Option<f64> {
        self.smoothed
            .as_ref()
            .map(|s| improvement_pct(self.dijkstra.total_time(), s.total_time()))
    }

    pub fn summary(&self) -> Value {
        let stats = |r: &Route| {
            json!({
                "time_days": r.total_days(),
                "fuel_t": r.total_fuel(),
                "distance_km": r.total_distance() / 1000.0,
            })
        };
        let mut v = json!({
            "from": self.dijkstra.from,
            "to": self.dijkstra.to,
            "objective": self.objective.to_string(),
            "mesh_id": self.mesh_id,
            "dijkstra": stats(&self.dijkstra),
        });
        if let Some(s) = &self.smoothed {
            v["smoothed"] = stats(&s.route);
            v["smoothed"]["iterations"] = json!(s.iterations);
            v["smoothed"]["converged"] = json!(s.converged);
            v["improvement_pct"] = json!(self.improvement_pct());
        }
        v
    }

    pub fn to_geojson(&self) -> Value {
        let mut features = vec![self.dijkstra.to_feature(&[("mesh_id", json!(self.mesh_id))])];
        if let Some(s) = &self.smoothed {
            features.push(s.route.to_feature(&[
                ("mesh_id", json!(self.mesh_id)),
                ("iterations", json!(s.iterations)),
                ("converged", json!(s.converged)),
                ("crossing_status", json!(s.status)),
            ]));
        }
        feature_collection(features, self.summary())
    }
}

/// Plans (and optionally smooths) one waypoint pair on a ready environment.
pub fn route_pair(
    cfg: &RunConfig,
    env: &Environment,
    edges: &EdgeSet,
    from: &str,
    to: &str,
    objective: Objective,
    smooth_it: bool,
) -> Result<(Route, Option<SmoothedRoute>)> {
    let a = cfg.waypoints.get(from)?;
    let b = cfg.waypoints.get(to)?;
    let path = plan(env, edges, a.point(), b.point(), objective)?;
    let dijkstra = path.to_route().named(from, to);
    let smoothed = smooth_it.then(|| {
        let mut s = smooth(env, &path, &cfg.smoothing);
        s.route = s.route.named(from, to);
        s
    });
    Ok((dijkstra, smoothed))
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut s = String::from("iteration,total_time_s,node_count\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.iteration, r.total_time_s, r.node_count));
    }
    s
}

/// Plans between two named waypoints and writes the GeoJSON. An
/// unconverged smoothing still writes its best route before failing with
/// [`Error::NotConverged`].
pub fn cmd_route(cfg: &RunConfig, opts: &RouteOptions, out: &mut dyn Write) -> Result<RouteOutcome> {
    let objective = opts.objective.unwrap_or(cfg.objective);
    let (env, mesh_id) = load_environment(cfg, opts.mesh.as_deref())?;
    let edges = build_edges(&env, &cfg.smoothing.solver);
    let (dijkstra, smoothed) = route_pair(cfg, &env, &edges, &opts.from, &opts.to, objective, opts.smooth)?;
    let outcome = RouteOutcome {
        mesh_id,
        objective,
        dijkstra,
        smoothed,
    };

    let out_path = opts
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}_{}.geojson", opts.from, opts.to)));
    write_json(&out_path, &outcome.to_geojson())?;
    if let (Some(trace), Some(s)) = (&opts.trace, &outcome.smoothed) {
        write_text(trace, &trace_csv(&s.trace))?;
    }

    let line = |label: &str, r: &Route| {
        format!(
            "{label}: {:.4} days, {:.3} t fuel, {:.2} km",
            r.total_days(),
            r.total_fuel(),
            r.total_distance() / 1000.0
        )
    };
    emit(out, format_args!("{} -> {} ({objective})", opts.from, opts.to))?;
    emit(out, format_args!("{}", line("dijkstra", &outcome.dijkstra)))?;
    if let Some(s) = &outcome.smoothed {
        emit(out, format_args!("{}", line("smoothed", &s.route)))?;
        emit(out, format_args!("improvement: {:.3}%", outcome.improvement_pct().unwrap_or(0.0)))?;
        if !s.converged {
            return Err(Error::NotConverged { iterations: s.iterations });
        }
    }
    Ok(outcome)
}

/// Reads every `*.geojson` in `routes_dir` (sorted by name) and checks each
/// route against the raw SIC series. `raw` overrides the config's
/// `raw_grid_files`.
pub fn cmd_validate(
    cfg: &RunConfig,
    routes_dir: &Path,
    raw: Option<&[PathBuf]>,
    out_csv: Option<&Path>,
    out: &mut dyn Write,
) -> Result<Vec<ValidationReport>> {
    let raw_paths = match raw {
        Some(p) => p.to_vec(),
        None => cfg.raw_grid_paths(),
    };
    if raw_paths.is_empty() {
        return Err(Error::Config(
            "no raw grid data: pass --raw or set raw_grid_files in the config".into(),
        ));
    }
    let raw = RawSic::load(&raw_paths)?;

    let entries = std::fs::read_dir(routes_dir).map_err(|e| Error::io(routes_dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "geojson"))
        .collect();
    files.sort();

    let vcfg = cfg.validation_config();
    let departure = cfg.time_window.map(|t| t.start);
    let units = cfg.units();
    let mut reports = Vec::new();
    for f in &files {
        for track in read_tracks(f)? {
            let mut r = validate_track(&track, &raw, departure, &vcfg, &units);
            let stem = f.file_stem().and_then(|s| s.to_str()).unwrap_or("route");
            r.name = format!("{stem}/{}", r.name);
            reports.push(r);
        }
    }

    let mut csv = String::from("route,samples,evaluated,violations,violation_pct\n");
    for r in &reports {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.name, r.samples, r.evaluated, r.violations, r.violation_pct
        ));
    }
    match out_csv {
        Some(p) => write_text(p, &csv)?,
        None => out.write_all(csv.as_bytes()).map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub from: String,
    pub to: String,
    pub dijkstra_days: Option<f64>,
    pub smoothed_days: Option<f64>,
    pub improvement_pct: Option<f64>,
    /// `ok`, `not_converged`, or the error kind that stopped the pair.
    pub status: String,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Mean and population standard deviation of the present values.
pub fn mean_std(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return None;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut s = String::from("from,to,dijkstra_days,smoothed_days,improvement_pct,status\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.from,
            r.to,
            opt(r.dijkstra_days),
            opt(r.smoothed_days),
            opt(r.improvement_pct),
            r.status
        ));
    }
    let stat = |f: fn(&CompareRow) -> Option<f64>| mean_std(rows.iter().filter_map(f));
    let cols = [
        stat(|r| r.dijkstra_days),
        stat(|r| r.smoothed_days),
        stat(|r| r.improvement_pct),
    ];
    for (label, pick) in [("mean", 0usize), ("std", 1)] {
        let vals: Vec<String> = cols
            .iter()
            .map(|c| c.map(|ms| if pick == 0 { ms.0 } else { ms.1 }).map(|x| x.to_string()).unwrap_or_default())
            .collect();
        s.push_str(&format!("{label},,{},{},{},\n", vals[0], vals[1], vals[2]));
    }
    s
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::NoRoute { .. } => "no_route",
        Error::Placement(_) => "placement",
        Error::Infeasible(_) => "infeasible",
        _ => "error",
    }
}

/// Plans and smooths every pair in parallel over the shared environment.
/// Pairs that cannot be routed are recorded and the run continues.
pub fn compare_pairs(cfg: &RunConfig, env: &Environment, pairs: &[(String, String)]) -> Vec<CompareRow> {
    let edges = build_edges(env, &cfg.smoothing.solver);
    let day = env.units.seconds_per_day;
    pairs
        .par_iter()
        .map(|(from, to)| match route_pair(cfg, env, &edges, from, to, cfg.objective, true) {
            Ok((d, Some(s))) => CompareRow {
                from: from.clone(),
                to: to.clone(),
                dijkstra_days: Some(d.total_time() / day),
                smoothed_days: Some(s.total_time() / day),
                improvement_pct: Some(improvement_pct(d.total_time(), s.total_time())),
                status: if s.converged { "ok" } else { "not_converged" }.into(),
            },
            Ok((_, None)) => unreachable!("smoothing requested"),
            Err(e) => {
                log::warn!("{from} -> {to}: {e}");
                CompareRow {
                    from: from.clone(),
                    to: to.clone(),
                    dijkstra_days: None,
                    smoothed_days: None,
                    improvement_pct: None,
                    status: error_kind(&e).into(),
                }
            }
        })
        .collect()
}

/// Reads a pairs file: a JSON array of `[from, to]` name pairs.
pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse("pairs", e.to_string()))
}

pub fn cmd_compare(
    cfg: &RunConfig,
    pairs_file: Option<&Path>,
    mesh: Option<&Path>,
    out_csv: Option<&Path>,
    out: &mut dyn Write,
) -> Result<Vec<CompareRow>> {
    let pairs = match pairs_file {
        Some(p) => read_pairs(p)?,
        None => cfg.pairs.clone(),
    };
    if pairs.is_empty() {
        return Err(Error::Config("compare needs at least one waypoint pair".into()));
    }
    for (a, b) in &pairs {
        cfg.waypoints.get(a)?;
        cfg.waypoints.get(b)?;
    }
    let (env, _) = load_environment(cfg, mesh)?;
    let rows = compare_pairs(cfg, &env, &pairs);
    let csv = compare_csv(&rows);
    match out_csv {
        Some(p) => write_text(p, &csv)?,
        None => out.write_all(csv.as_bytes()).map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(rows)
}

/// Samples `(y, F(y), objective(y))` for the centre-to-centre crossing
/// between two touching cells, as CSV.
pub fn cmd_crossing_table(
    cfg: &RunConfig,
    mesh: Option<&Path>,
    src: usize,
    dst: usize,
    samples: usize,
    out: &mut dyn Write,
) -> Result<()> {
    let (env, _) = load_environment(cfg, mesh)?;
    if src >= env.mesh.len() || dst >= env.mesh.len() {
        return Err(Error::Config(format!("cell ids must be below {}", env.mesh.len())));
    }
    let code = crate::mesh::graph::relation(env.cell(src), env.cell(dst))?
        .ok_or_else(|| Error::Config(format!("cells {src} and {dst} do not touch")))?;
    let (problem, _) = centre_problem(&env, src, dst, code)
        .ok_or_else(|| Error::Config(format!("cells {src} and {dst} meet only at a corner")))?;
    let (lo, hi) = if problem.separation >= 0.0 {
        (0.0, problem.separation)
    } else {
        (problem.separation, 0.0)
    };
    let pad = (problem.left.half_span + problem.right.half_span).max(hi - lo);
    let mut csv = String::from("y_m,f,objective_s\n");
    for (y, f, t) in crate::crossing::residual_table(&problem, lo - pad, hi + pad, samples) {
        csv.push_str(&format!("{y},{f},{t}\n"));
    }
    out.write_all(csv.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}
