// Where a route should cross the boundary between two cells, with and
// without the latitude correction.

use polar_route::crossing::{travel_time, CellTraversal, CrossingProblem, SolverConfig};
use polar_route::geo::EARTH_RADIUS_M;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SolverConfig::default();

    // 10 km at 5 m/s with a 3 m/s cross current takes 2500 s
    println!("single leg: {:.1} s", travel_time((10_000.0, 0.0), (0.0, 3.0), 5.0).map_err(polar_route::Error::from)?);

    // slow ice on the left, open water on the right: the route bends so it
    // spends less time in the ice
    let ice = CellTraversal::new(2.0, (0.0, 0.0), 20_000.0);
    let open = CellTraversal::new(6.5, (0.0, 0.0), 20_000.0);
    let flat = CrossingProblem::flat(ice, open, 30_000.0).solve(None, &cfg)?;
    println!(
        "flat: cross {:.0} m along the boundary, {:.0} s + {:.0} s in {} iterations",
        flat.yval, flat.t1, flat.t2, flat.iterations
    );

    // a northward current in the right cell pulls the crossing south
    let drift = CellTraversal::new(6.5, (0.0, 2.0), 20_000.0);
    let pushed = CrossingProblem::flat(open, drift, 0.0).solve(None, &cfg)?;
    println!("with current: {:.0} m", pushed.yval);

    // two identical cells side by side at 70 S: the east-west crossing moves
    // poleward, where the meridians are closer together
    let cell = CellTraversal::new(6.0, (0.0, 0.0), 40_000.0);
    let curved = CrossingProblem::smoothed_horizontal(cell, cell, 0.0, -70.0, -70.0, EARTH_RADIUS_M).solve(None, &cfg)?;
    println!("curved at 70 S: {:.0} m (negative is south)", curved.yval);

    // a north-south pair with the entry and exit at different latitudes
    let vertical = CrossingProblem::smoothed_vertical(cell, cell, 15_000.0, -70.3, -69.7, -70.0, EARTH_RADIUS_M)
        .solve(None, &cfg)?;
    println!("vertical: {:.0} m", vertical.yval);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
