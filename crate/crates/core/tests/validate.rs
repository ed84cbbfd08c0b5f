mod common;

use common::{blob_case, oracle_violations};
use polar_route::geo::{GeoPoint, Units};
use polar_route::mesh::grid::{parse_blocks, RawSic};
use polar_route::pipeline::cmd_validate;
use polar_route::route::RouteTrack;
use polar_route::validate::{resample, validate_track, ValidationConfig};

#[test]
fn blob_violations_match_brute_force_count() {
    let case = blob_case();
    let mut out = Vec::new();
    let reports = cmd_validate(&case.config, &case.routes, None, None, &mut out).unwrap();
    assert_eq!(reports.len(), 1);
    let r = &reports[0];
    let (samples, evaluated, violations) = oracle_violations(&case.route, &case.raw_nodes);
    assert_eq!(r.samples, samples);
    assert_eq!(r.evaluated, evaluated);
    assert!(violations > 0);
    assert!(r.violations.abs_diff(violations) <= 1, "{} vs {violations}", r.violations);
    let csv = String::from_utf8(out).unwrap();
    assert!(csv.starts_with("route,samples,evaluated,violations,violation_pct\n"));
    assert!(csv.contains("blob/smoothed:w-e,"));
}

#[test]
fn open_water_route_has_no_violations() {
    let case = blob_case();
    let track = RouteTrack {
        name: "south".into(),
        points: vec![GeoPoint::raw(0.3, -69.9), GeoPoint::raw(3.7, -69.8)],
        times_s: vec![],
    };
    let raw = RawSic::load(&[case.dir.path().join("raw.txt")]).unwrap();
    let r = validate_track(&track, &raw, None, &ValidationConfig::default(), &Units::default());
    assert_eq!(r.violations, 0);
    assert_eq!(r.violation_pct, 0.0);
    assert_eq!(r.evaluated, r.samples);
}

#[test]
fn samples_far_from_raw_data_are_not_evaluated() {
    let case = blob_case();
    let raw = RawSic::load(&[case.dir.path().join("raw.txt")]).unwrap();
    let track = RouteTrack {
        name: "away".into(),
        points: vec![GeoPoint::raw(10.0, -60.0), GeoPoint::raw(10.5, -60.0)],
        times_s: vec![],
    };
    let r = validate_track(&track, &raw, None, &ValidationConfig::default(), &Units::default());
    assert_eq!(r.evaluated, 0);
    assert_eq!(r.violation_pct, 0.0);
}

#[test]
fn a_95_km_leg_gives_eleven_samples() {
    let u = Units::default();
    let a = GeoPoint::raw(0.0, -60.0);
    let b = GeoPoint::raw(0.0, -60.0 + u.m_to_deg(95_000.0));
    let s = resample(&[a, b], &[], 10_000.0, &u);
    assert_eq!(s.len(), 11);
    let interior = s.iter().filter(|x| x.point != a && x.point != b).count();
    assert_eq!(interior, 9);
}

#[test]
fn elapsed_time_selects_the_later_ice_field() {
    let text = "\
variable sic
units percent
lons 0 0.1 0.2
lats 0 0.1 0.2
times 2021-01-01 2021-01-02
values
0 0 0
0 0 0
0 0 0
95 95 95
95 95 95
95 95 95
end
";
    let raw = RawSic::from_blocks(parse_blocks(text, "t").unwrap()).unwrap();
    let departure = chrono::NaiveDate::from_ymd_opt(2021, 1, 1);
    let pts = vec![GeoPoint::raw(0.0, 0.1), GeoPoint::raw(0.2, 0.1)];
    let cfg = ValidationConfig::default();
    let u = Units::default();
    // a slow leg that takes two days: the far end is in the second field
    let slow = RouteTrack { name: "slow".into(), points: pts.clone(), times_s: vec![2.0 * 86_400.0] };
    let fast = RouteTrack { name: "fast".into(), points: pts, times_s: vec![600.0] };
    let rs = validate_track(&slow, &raw, departure, &cfg, &u);
    let rf = validate_track(&fast, &raw, departure, &cfg, &u);
    assert_eq!(rf.violations, 0);
    assert!(rs.violations > 0 && rs.violations < rs.samples);
}
