// Mesh-path and smoothed times for every waypoint pair in a config.

use std::path::PathBuf;

use polar_route::config::RunConfig;
use polar_route::pipeline::{build_environment, compare_csv, compare_pairs};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/suite/config.json");
    let cfg = RunConfig::read(&path)?;
    let env = build_environment(&cfg)?;
    let rows = compare_pairs(&cfg, &env, &cfg.pairs);
    print!("{}", compare_csv(&rows));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
