// Resistance, safe speed and fuel burn across a range of ice concentrations.

use polar_route::vessel::{fuel_rate, ice_resistance, speed_from_resistance, VesselConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let vessel = VesselConfig::default();
    let limit = vessel.force_limit();
    println!("resistance limit at the breaking specification: {limit:.1} kN");
    println!("{:>6} {:>10} {:>9} {:>10}", "SIC %", "R(max) kN", "speed kn", "fuel t/d");
    for sic in (0..=80).step_by(10) {
        let c = f64::from(sic) / 100.0;
        let h = vessel.ice_thickness;
        let at_max = ice_resistance(vessel.max_speed, h, c, &vessel)?;
        let (speed, r) = if at_max > limit {
            (speed_from_resistance(limit, h, c, &vessel)?, limit)
        } else {
            (vessel.max_speed, at_max)
        };
        println!("{sic:>6} {at_max:>10.1} {speed:>9.2} {:>10.2}", fuel_rate(speed, r, &vessel));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
