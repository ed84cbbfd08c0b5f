//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use polar_route::crossing::{CellTraversal, CrossingProblem, Orientation};
use polar_route::geo::GeoPoint;
use polar_route::mesh::{Environment, Region, SplitConfig};
use polar_route::planner::{end_leg, locate, start_leg, EdgeSet, Objective};
use polar_route::synthetic::Scenario;
use polar_route::vessel::VesselConfig;
use polar_route::Units;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

// ---------------------------------------------------------------- crossing

/// Closed-form time to cover displacement `d` at water speed `s` in current
/// `u`, written out independently of the library.
pub fn oracle_leg_time(d: (f64, f64), u: (f64, f64), s: f64) -> f64 {
    let dd = d.0 * d.0 + d.1 * d.1;
    let dot = u.0 * d.0 + u.1 * d.1;
    let c = s * s - u.0 * u.0 - u.1 * u.1;
    assert!(c > 0.0, "oracle only handles feasible legs");
    ((dot * dot + c * dd).sqrt() - dot) / c
}

/// Travel-time sum at offset `y`, rebuilt from the problem's raw fields.
pub fn oracle_objective(p: &CrossingProblem, y: f64) -> f64 {
    let (x, a, big_y) = (p.left.half_span, p.right.half_span, p.separation);
    let (d1, d2) = match p.orientation {
        Orientation::FlatHorizontal => ((x, y), (a, big_y - y)),
        Orientation::SmoothedHorizontal { entry_lat, exit_lat } => {
            let theta = entry_lat.to_radians() + y / p.earth_radius;
            let psi = exit_lat.to_radians() - (big_y - y) / p.earth_radius;
            ((x * theta.cos(), y), (a * psi.cos(), big_y - y))
        }
        Orientation::SmoothedVertical {
            entry_lat,
            exit_lat,
            boundary_lat,
        } => {
            let cb = boundary_lat.to_radians().cos();
            let r1 = entry_lat.to_radians().cos() / cb;
            let r2 = exit_lat.to_radians().cos() / cb;
            ((x, r1 * y), (a, r2 * (big_y - y)))
        }
    };
    oracle_leg_time(d1, p.left.current, p.left.speed) + oracle_leg_time(d2, p.right.current, p.right.speed)
}

/// Dense grid search: the best of `n` evenly spaced samples on `[lo, hi]`.
pub fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> (f64, f64) {
    let mut best = (lo, f(lo));
    for i in 1..n {
        let y = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let v = f(y);
        if v < best.1 {
            best = (y, v);
        }
    }
    best
}

/// Search window around both endpoints, two total spans wide on each side;
/// currents in the random instances stay below 60% of the water speed.
pub fn search_window(p: &CrossingProblem) -> (f64, f64) {
    let span = p.left.half_span + p.right.half_span + p.separation.abs();
    let lo = p.separation.min(0.0) - 2.0 * span;
    let hi = p.separation.max(0.0) + 2.0 * span;
    (lo, hi)
}

fn traversal(rng: &mut impl Rng, speed: f64, max_current_frac: f64) -> CellTraversal {
    let s = speed * rng.gen_range(0.5..1.0);
    let mag = s * rng.gen_range(0.0..max_current_frac);
    let ang = rng.gen_range(0.0..std::f64::consts::TAU);
    CellTraversal::new(s, (mag * ang.cos(), mag * ang.sin()), rng.gen_range(5_000.0..60_000.0))
}

pub fn random_flat(rng: &mut impl Rng) -> CrossingProblem {
    let l = traversal(rng, 6.7, 0.6);
    let r = traversal(rng, 6.7, 0.6);
    CrossingProblem::flat(l, r, rng.gen_range(-80_000.0..80_000.0))
}

pub fn random_horizontal(rng: &mut impl Rng) -> CrossingProblem {
    let l = traversal(rng, 6.7, 0.6);
    let r = traversal(rng, 6.7, 0.6);
    let lat = rng.gen_range(-75.0..75.0);
    let sep = rng.gen_range(-80_000.0..80_000.0);
    let exit = lat + sep / polar_route::geo::EARTH_RADIUS_M * 57.295_779_513_082_32;
    CrossingProblem::smoothed_horizontal(l, r, sep, lat, exit, polar_route::geo::EARTH_RADIUS_M)
}

pub fn random_vertical(rng: &mut impl Rng) -> CrossingProblem {
    let l = traversal(rng, 6.7, 0.6);
    let r = traversal(rng, 6.7, 0.6);
    let boundary: f64 = rng.gen_range(-78.0..78.0);
    let entry = boundary - rng.gen_range(0.05..0.6);
    let exit = boundary + rng.gen_range(0.05..0.6);
    CrossingProblem::smoothed_vertical(
        l,
        r,
        rng.gen_range(-80_000.0..80_000.0),
        entry,
        exit,
        boundary,
        polar_route::geo::EARTH_RADIUS_M,
    )
}

// ---------------------------------------------------------------- planner

/// Cheapest cost over every simple cell sequence from the start cell to
/// the end cell, summed in the same order as the planner.
pub fn brute_force_cost(env: &Environment, edges: &EdgeSet, start: GeoPoint, end: GeoPoint, obj: Objective) -> Option<f64> {
    let s = locate(env, start, "start").ok()?;
    let e = locate(env, end, "end").ok()?;
    if s == e {
        let leg = polar_route::route::evaluate_leg(env, s, start, end).ok()?;
        return Some(obj.leg_cost(&leg));
    }
    let first = obj.leg_cost(&start_leg(env, s, start).ok()?);
    let last = obj.leg_cost(&end_leg(env, e, end).ok()?);
    let mut visited = vec![false; env.mesh.len()];
    let mut best = f64::INFINITY;
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        u: usize,
        cost: f64,
        e: usize,
        edges: &EdgeSet,
        obj: Objective,
        visited: &mut [bool],
        best: &mut f64,
        last: f64,
    ) {
        if u == e {
            *best = best.min(cost + last);
            return;
        }
        for pair in edges.outgoing(u) {
            if !visited[pair.dst] {
                visited[pair.dst] = true;
                dfs(pair.dst, cost + pair.cost(obj), e, edges, obj, visited, best, last);
                visited[pair.dst] = false;
            }
        }
    }
    visited[s] = true;
    dfs(s, first, e, edges, obj, &mut visited, &mut best, last);
    best.is_finite().then_some(best)
}

// ---------------------------------------------------------------- fixtures

pub fn env_of(sc: &Scenario, cell: f64) -> Environment {
    sc.environment(&SplitConfig::default(), cell, VesselConfig::default(), Units::default())
        .expect("fixture environment")
}

/// Small meshes (at most 12 cells) covering open water, a gap in a wall,
/// currents, an ice ramp and a split mesh.
pub fn small_mesh_suite() -> Vec<(&'static str, Environment)> {
    let r = Region::new(0.0, 3.0, -70.0, -67.0);
    let open = Scenario::open_water(r, 0.125).unwrap();
    let wall = Scenario::new(r, 0.125, |_| Some(0.0))
        .unwrap()
        .with_depth(|p| Some(if p.lon >= 1.0 && p.lon < 2.0 && p.lat >= -69.0 { 50.0 } else { -500.0 }))
        .unwrap();
    let currents = Scenario::open_water(r, 0.125)
        .unwrap()
        .with_currents(|p| (0.8 * (p.lat + 68.5), -0.6 * (p.lon - 1.5)))
        .unwrap();
    let ramp = Scenario::new(r, 0.125, |p| Some((25.0 * (p.lon.floor() + (p.lat + 70.0).floor())).min(95.0))).unwrap();
    let split = Scenario::new(Region::new(0.0, 2.0, -70.0, -68.0), 0.125, |p| {
        Some(if p.lon >= 0.5 && p.lon < 1.0 && p.lat < -69.5 { 95.0 } else { 5.0 })
    })
    .unwrap();
    let suite = vec![
        ("open", env_of(&open, 1.0)),
        ("wall", env_of(&wall, 1.0)),
        ("currents", env_of(&currents, 1.0)),
        ("ramp", env_of(&ramp, 1.0)),
        ("split", env_of(&split, 1.0)),
    ];
    for (name, env) in &suite {
        assert!(env.mesh.len() <= 12, "{name} has {} cells", env.mesh.len());
    }
    suite
}

/// A random open-water mesh (zero current, SIC low enough that every cell
/// runs at full speed) and two waypoints inside it. SIC patches make some
/// meshes non-uniform.
pub fn random_open_water(rng: &mut impl Rng) -> (Environment, GeoPoint, GeoPoint) {
    let size = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
    let nx = rng.gen_range(3..8);
    let ny = rng.gen_range(3..8);
    let lat0 = rng.gen_range(-78.0..60.0f64).round();
    let lon0 = rng.gen_range(-180.0..170.0f64).round();
    let region = Region::new(lon0, lon0 + nx as f64 * size, lat0, lat0 + ny as f64 * size);
    let patchy = rng.gen_bool(0.5);
    let phase: f64 = rng.gen_range(0.0..100.0);
    let sc = Scenario::new(region, size / 8.0, |p| {
        if !patchy {
            return Some(0.0);
        }
        let h = ((p.lon * 7.3 + p.lat * 3.1 + phase).sin() * 43_758.545_3).fract().abs();
        Some((h * 60.0).floor())
    })
    .unwrap();
    let env = env_of(&sc, size);
    let pick = |rng: &mut dyn rand::RngCore| {
        GeoPoint::raw(
            rng.gen_range(region.lon_min + 0.01..region.lon_max - 0.01),
            rng.gen_range(region.lat_min + 0.01..region.lat_max - 0.01),
        )
    };
    let a = pick(rng);
    let b = pick(rng);
    (env, a, b)
}

pub struct SmoothingFixture {
    pub env: Environment,
    pub start: GeoPoint,
    pub end: GeoPoint,
    /// Cell ids by position name.
    pub ids: std::collections::HashMap<&'static str, usize>,
}

fn ids_at(env: &Environment, named: &[(&'static str, GeoPoint)]) -> std::collections::HashMap<&'static str, usize> {
    named
        .iter()
        .map(|(n, p)| (*n, env.mesh.cell_at(*p).expect("named point inside the mesh")))
        .collect()
}

/// Two rows of 10-degree cells at high southern latitude. Start and end sit
/// just above the shared southern edge of the top pair, so the poleward
/// bulge of the corrected crossing falls below that pair's boundary
/// segment. With `land_south`, the cells below are land.
pub fn horizontal_horseshoe(land_south: bool) -> SmoothingFixture {
    let region = Region::new(0.0, 20.0, -85.0, -65.0);
    let sc = Scenario::open_water(region, 1.25)
        .unwrap()
        .with_depth(|p| Some(if land_south && p.lat < -75.0 { 100.0 } else { -3000.0 }))
        .unwrap();
    let env = env_of(&sc, 10.0);
    let ids = ids_at(
        &env,
        &[
            ("a", GeoPoint::raw(5.0, -70.0)),
            ("b", GeoPoint::raw(15.0, -70.0)),
            ("a_south", GeoPoint::raw(5.0, -80.0)),
            ("b_south", GeoPoint::raw(15.0, -80.0)),
        ],
    );
    SmoothingFixture {
        env,
        start: GeoPoint::raw(1.0, -74.95),
        end: GeoPoint::raw(19.0, -74.95),
        ids,
    }
}

/// A south/north pair with a strong eastward current in the southern row
/// only. Start and end sit near the eastern edge, so the crossing is pushed
/// east beyond the shared segment.
pub fn vertical_horseshoe() -> SmoothingFixture {
    let region = Region::new(0.0, 2.0, -62.0, -60.0);
    let sc = Scenario::open_water(region, 0.125)
        .unwrap()
        .with_currents(|p| (if p.lat < -61.0 { 5.5 } else { 0.0 }, 0.0))
        .unwrap();
    let env = env_of(&sc, 1.0);
    let ids = ids_at(
        &env,
        &[
            ("a", GeoPoint::raw(0.5, -61.5)),
            ("b", GeoPoint::raw(0.5, -60.5)),
            ("a_east", GeoPoint::raw(1.5, -61.5)),
            ("b_east", GeoPoint::raw(1.5, -60.5)),
        ],
    );
    SmoothingFixture {
        env,
        start: GeoPoint::raw(0.9, -61.9),
        end: GeoPoint::raw(0.9, -60.1),
        ids,
    }
}

/// A 2x2 block where the mesh path steps diagonally from the south-west to
/// the north-east cell. `ice` gives the SIC of the south-east and north-west
/// cells.
pub fn diagonal(ice_se: f64, ice_nw: f64) -> SmoothingFixture {
    let region = Region::new(0.0, 2.0, -66.0, -64.0);
    let sc = Scenario::new(region, 0.125, |p| {
        Some(match (p.lon >= 1.0, p.lat >= -65.0) {
            (true, false) => ice_se,
            (false, true) => ice_nw,
            _ => 0.0,
        })
    })
    .unwrap();
    let env = env_of(&sc, 1.0);
    let ids = ids_at(
        &env,
        &[
            ("sw", GeoPoint::raw(0.5, -65.5)),
            ("se", GeoPoint::raw(1.5, -65.5)),
            ("nw", GeoPoint::raw(0.5, -64.5)),
            ("ne", GeoPoint::raw(1.5, -64.5)),
        ],
    );
    SmoothingFixture {
        env,
        start: GeoPoint::raw(0.3, -65.7),
        end: GeoPoint::raw(1.7, -64.3),
        ids,
    }
}

// ---------------------------------------------------------------- validation

pub struct BlobCase {
    pub dir: tempfile::TempDir,
    pub config: polar_route::config::RunConfig,
    pub routes: PathBuf,
    pub raw_nodes: Vec<(GeoPoint, f64)>,
    pub route: Vec<GeoPoint>,
}

/// Raw SIC on a 0.05 degree grid with a solid blob of ice (100%) inside an
/// ellipse about 40 km across, and a route that runs through it.
pub fn blob_case() -> BlobCase {
    use polar_route::mesh::grid::write_block;
    use polar_route::synthetic::{axis, sample};

    let dir = tempfile::tempdir().unwrap();
    let lons = axis(0.0, 4.0, 0.05);
    let lats = axis(-70.0, -68.0, 0.05);
    let centre = GeoPoint::raw(2.0, -69.0);
    let inside = |p: GeoPoint| {
        let dx = (p.lon - centre.lon) * (-69.0f64).to_radians().cos() * 111.195;
        let dy = (p.lat - centre.lat) * 111.195;
        (dx / 40.0).powi(2) + (dy / 25.0).powi(2) <= 1.0
    };
    let values = sample(&lons, &lats, |p| Some(if inside(p) { 100.0 } else { 0.0 }));
    let mut raw_nodes = Vec::new();
    for (j, &lat) in lats.iter().enumerate() {
        for (i, &lon) in lons.iter().enumerate() {
            raw_nodes.push((GeoPoint::raw(lon, lat), values[j * lons.len() + i].unwrap()));
        }
    }
    let mut text = String::new();
    write_block(&mut text, "sic", "percent", &lons, &lats, &values);
    std::fs::write(dir.path().join("raw.txt"), text).unwrap();

    let route = vec![
        GeoPoint::raw(0.3, -69.3),
        GeoPoint::raw(1.2, -69.1),
        GeoPoint::raw(2.4, -68.95),
        GeoPoint::raw(3.7, -68.6),
    ];
    let routes = dir.path().join("routes");
    std::fs::create_dir(&routes).unwrap();
    let coords: Vec<[f64; 2]> = route.iter().map(|p| [p.lon, p.lat]).collect();
    let doc = serde_json::json!({
        "type": "FeatureCollection",
        "features": [{
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": coords },
            "properties": { "kind": "smoothed", "from": "w", "to": "e" },
        }],
    });
    std::fs::write(routes.join("blob.geojson"), doc.to_string()).unwrap();

    let cfg = serde_json::json!({
        "grid_files": ["raw.txt"],
        "raw_grid_files": ["raw.txt"],
        "region": { "lon_min": 0, "lon_max": 4, "lat_min": -70, "lat_max": -68 },
        "initial_cell_size": 1.0,
        "waypoints": [],
    });
    let config = polar_route::config::RunConfig::from_json(&cfg.to_string(), dir.path()).unwrap();
    BlobCase {
        dir,
        config,
        routes,
        raw_nodes,
        route,
    }
}

/// Brute-force violation count: samples every 10 km along the polyline
/// (plus the end point), averages every raw node within 15 km, and flags
/// means above 80%. Returns (samples, evaluated, violations).
pub fn oracle_violations(route: &[GeoPoint], nodes: &[(GeoPoint, f64)]) -> (usize, usize, usize) {
    const R: f64 = 6_371_000.0;
    let dist = |a: GeoPoint, b: GeoPoint| {
        let mid = (0.5 * (a.lat + b.lat)).to_radians();
        let dx = (b.lon - a.lon).to_radians() * mid.cos() * R;
        let dy = (b.lat - a.lat).to_radians() * R;
        dx.hypot(dy)
    };
    let mut samples = Vec::new();
    let mut walked = 0.0;
    let mut next = 0.0;
    for w in route.windows(2) {
        let len = dist(w[0], w[1]);
        while next <= walked + len + 1e-9 {
            let f = ((next - walked) / len).clamp(0.0, 1.0);
            samples.push(GeoPoint::raw(
                w[0].lon + f * (w[1].lon - w[0].lon),
                w[0].lat + f * (w[1].lat - w[0].lat),
            ));
            next += 10_000.0;
        }
        walked += len;
    }
    if walked - (next - 10_000.0) > 1e-6 {
        samples.push(*route.last().unwrap());
    }
    let mut evaluated = 0;
    let mut violations = 0;
    for s in &samples {
        let near: Vec<f64> = nodes.iter().filter(|(p, _)| dist(*s, *p) <= 15_000.0).map(|(_, v)| *v).collect();
        if near.is_empty() {
            continue;
        }
        evaluated += 1;
        if near.iter().sum::<f64>() / near.len() as f64 > 80.0 {
            violations += 1;
        }
    }
    (samples.len(), evaluated, violations)
}
