// Smooth a mesh path and follow the total time per iteration.

use std::path::PathBuf;

use polar_route::config::RunConfig;
use polar_route::pipeline::build_environment;
use polar_route::planner::{build_edges, plan, Objective};
use polar_route::smoother::smooth;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/suite/config.json");
    let cfg = RunConfig::read(&path)?;
    let env = build_environment(&cfg)?;
    let edges = build_edges(&env, &cfg.smoothing.solver);

    let from = cfg.waypoints.get("alpha")?.point();
    let to = cfg.waypoints.get("delta")?.point();
    let mesh_path = plan(&env, &edges, from, to, Objective::TravelTime)?;
    let smoothed = smooth(&env, &mesh_path, &cfg.smoothing);

    println!("mesh path: {:.4} days through {} cells", mesh_path.total_time() / 86_400.0, mesh_path.cells.len());
    for row in &smoothed.trace {
        println!("  iteration {:>2}: {:.4} days, {} points", row.iteration, row.total_time_s / 86_400.0, row.node_count);
    }
    let gain = 100.0 * (mesh_path.total_time() - smoothed.total_time()) / mesh_path.total_time();
    println!(
        "smoothed: {:.4} days through {} cells ({gain:.2}% faster, converged: {})",
        smoothed.route.total_days(),
        smoothed.cells.len(),
        smoothed.converged
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
