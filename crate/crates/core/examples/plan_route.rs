// Plan the same voyage for travel time, fuel and distance.

use std::path::PathBuf;

use polar_route::config::RunConfig;
use polar_route::pipeline::build_environment;
use polar_route::planner::{build_edges, plan, Objective};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/suite/config.json");
    let cfg = RunConfig::read(&path)?;
    let env = build_environment(&cfg)?;
    let edges = build_edges(&env, &cfg.smoothing.solver);
    println!("{} cells, {} directed cell pairs", env.mesh.len(), edges.len());

    let from = cfg.waypoints.get("charlie")?.point();
    let to = cfg.waypoints.get("delta")?.point();
    for objective in Objective::ALL {
        let route = plan(&env, &edges, from, to, objective)?.to_route();
        println!(
            "{objective:>11}: {:>2} cells, {:.3} days, {:.1} t fuel, {:.0} km",
            route.legs.len() / 2 + 1,
            route.total_days(),
            route.total_fuel(),
            route.total_distance() / 1000.0
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
