// Build a quadtree mesh over a synthetic ice field and look at how it split.

use polar_route::mesh::{Region, SplitConfig};
use polar_route::synthetic::Scenario;
use polar_route::vessel::VesselConfig;
use polar_route::{GeoPoint, Units};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    // open water in the north, a sharp ice edge along 66.5 S, and a shoal
    let region = Region::new(-10.0, 0.0, -70.0, -64.0);
    let scenario = Scenario::new(region, 0.125, |p| Some(if p.lat < -66.5 { 90.0 } else { 10.0 }))?
        .with_depth(|p| Some(if (p.lon + 3.0).hypot(p.lat + 65.0) < 0.4 { 5.0 } else { -2000.0 }))?;

    let env = scenario.environment(&SplitConfig::default(), 2.0, VesselConfig::default(), Units::default())?;
    println!("{} cells, deepest split level {}", env.mesh.len(), env.mesh.max_depth_level());

    let mut by_level = std::collections::BTreeMap::new();
    for c in &env.mesh.cells {
        *by_level.entry(c.depth_level).or_insert(0) += 1;
    }
    for (level, n) in by_level {
        println!("  level {level}: {n} cells");
    }

    let blocked = env.mesh.cells.iter().filter(|c| env.is_blocked(c.id)).count();
    println!("{blocked} cells blocked by ice or land");

    let probe = GeoPoint::raw(-3.0, -65.0);
    let id = env.mesh.cell_at(probe).expect("inside the region");
    let cell = env.cell(id);
    println!(
        "cell {id} at ({:.3}, {:.3}): land fraction {:.2}, {} neighbours",
        cell.centre.lon,
        cell.centre.lat,
        cell.land_fraction,
        env.graph.neighbours(id).len()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
