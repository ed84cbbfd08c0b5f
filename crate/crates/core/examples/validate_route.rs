// Route a pair, write the GeoJSON, then check it against the raw ice data.

use std::path::PathBuf;

use polar_route::config::RunConfig;
use polar_route::pipeline::{cmd_route, cmd_validate, RouteOptions};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/suite/config.json");
    let cfg = RunConfig::read(&path)?;

    let dir = std::env::temp_dir().join(format!("polar-route-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let opts = RouteOptions {
        from: "golf".into(),
        to: "bravo".into(),
        smooth: true,
        out: Some(dir.join("golf_bravo.geojson")),
        ..RouteOptions::default()
    };
    cmd_route(&cfg, &opts, &mut std::io::stdout())?;

    let reports = cmd_validate(&cfg, &dir, None, None, &mut std::io::sink())?;
    for r in &reports {
        println!(
            "{}: {} of {} samples over {}% ice ({:.1}%)",
            r.name,
            r.violations,
            r.evaluated,
            cfg.vessel.max_ice_conc,
            r.violation_pct
        );
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
