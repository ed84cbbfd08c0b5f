mod common;

use common::{grid_argmin, oracle_leg_time, oracle_objective, random_flat, random_horizontal, random_vertical, search_window};
use polar_route::crossing::{travel_time, CellTraversal, CrossingProblem, Degenerate, Orientation, SolverConfig};
use polar_route::geo::EARTH_RADIUS_M;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn travel_time_hand_cases() {
    assert!(close(travel_time((1000.0, 0.0), (0.0, 0.0), 5.0).unwrap(), 200.0, 1e-9));
    assert!(close(travel_time((1000.0, 0.0), (1.0, 0.0), 5.0).unwrap(), 1000.0 / 6.0, 1e-9));
    assert!(close(travel_time((1000.0, 0.0), (0.0, 3.0), 5.0).unwrap(), 250.0, 1e-9));
}

#[test]
fn travel_time_is_continuous_into_the_degenerate_branch() {
    // current exactly as fast as the ship, pushing along d
    let at = travel_time((1000.0, 0.0), (5.0, 0.0), 5.0).unwrap();
    assert!(close(at, 100.0, 1e-12));
    let near = travel_time((1000.0, 0.0), (5.0 - 1e-9, 0.0), 5.0).unwrap();
    assert!(close(at, near, 1e-8));
    // and against it the leg cannot be made
    assert_eq!(travel_time((1000.0, 0.0), (-5.0, 0.0), 5.0), Err(Degenerate::Infeasible));
    assert_eq!(travel_time((1000.0, 0.0), (0.0, 5.0), 5.0), Err(Degenerate::Undefined));
    assert_eq!(travel_time((0.0, 0.0), (0.0, 0.0), 5.0), Ok(0.0));
}

#[test]
fn library_objective_matches_the_closed_form_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..300 {
        let p = match i % 3 {
            0 => random_flat(&mut rng),
            1 => random_horizontal(&mut rng),
            _ => random_vertical(&mut rng),
        };
        let (lo, hi) = search_window(&p);
        for k in 0..=10 {
            let y = lo + (hi - lo) * k as f64 / 10.0;
            let lib = p.objective(y).unwrap();
            assert!(close(lib, oracle_objective(&p, y), 1e-12), "instance {i} at {y}");
        }
    }
}

fn check_against_grid(p: &CrossingProblem) {
    let (lo, hi) = search_window(p);
    let n = 20_001;
    let spacing = (hi - lo) / (n - 1) as f64;
    let (gy, gf) = grid_argmin(|y| oracle_objective(p, y), lo, hi, n);
    let sol = p.solve(None, &SolverConfig::default()).unwrap();
    assert!(sol.converged);
    assert!((sol.yval - gy).abs() <= 2.0 * spacing, "yval {} grid {}", sol.yval, gy);
    assert!(oracle_objective(p, sol.yval) <= gf * (1.0 + 1e-9));
}

#[test]
fn solvers_agree_with_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        check_against_grid(&random_flat(&mut rng));
        check_against_grid(&random_horizontal(&mut rng));
        check_against_grid(&random_vertical(&mut rng));
    }
}

#[test]
fn zero_current_crossing_obeys_snell() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    use rand::Rng;
    for _ in 0..200 {
        let (sl, sr) = (rng.gen_range(1.0..8.0), rng.gen_range(1.0..8.0));
        let (x, a) = (rng.gen_range(5e3..5e4), rng.gen_range(5e3..5e4));
        let big_y = rng.gen_range(-5e4..5e4);
        let p = CrossingProblem::flat(
            CellTraversal::new(sl, (0.0, 0.0), x),
            CellTraversal::new(sr, (0.0, 0.0), a),
            big_y,
        );
        let y = p.solve(None, &SolverConfig::default()).unwrap().yval;
        let sin1 = y / (x * x + y * y).sqrt();
        let sin2 = (big_y - y) / (a * a + (big_y - y).powi(2)).sqrt();
        assert!((sin1 / sl - sin2 / sr).abs() < 1e-6, "{} vs {}", sin1 / sl, sin2 / sr);
    }
}

#[test]
fn huge_radius_recovers_the_flat_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..100 {
        let h = random_horizontal(&mut rng);
        let Orientation::SmoothedHorizontal { entry_lat, exit_lat } = h.orientation else { unreachable!() };
        let scaled = CrossingProblem::smoothed_horizontal(
            h.left,
            h.right,
            h.separation,
            entry_lat,
            exit_lat,
            EARTH_RADIUS_M * 1e6,
        );
        let flat = CrossingProblem::flat(
            CellTraversal::new(h.left.speed, h.left.current, h.left.half_span * entry_lat.to_radians().cos()),
            CellTraversal::new(h.right.speed, h.right.current, h.right.half_span * exit_lat.to_radians().cos()),
            h.separation,
        );
        let ys = scaled.solve(None, &SolverConfig::default()).unwrap().yval;
        let yf = flat.solve(None, &SolverConfig::default()).unwrap().yval;
        assert!(close(ys, yf, 1e-6) || (ys - yf).abs() < 1e-6, "{ys} vs {yf}");
    }
}

#[test]
fn symmetric_east_west_crossing_bulges_poleward() {
    let cell = CellTraversal::new(6.0, (0.0, 0.0), 40_000.0);
    for lat in [-75.0, -60.0, 60.0, 75.0] {
        let p = CrossingProblem::smoothed_horizontal(cell, cell, 0.0, lat, lat, EARTH_RADIUS_M);
        let y = p.solve(None, &SolverConfig::default()).unwrap().yval;
        assert!(y.signum() == f64::signum(lat) && y.abs() > 1.0, "lat {lat}: {y}");
        let (gy, _) = grid_argmin(|v| oracle_objective(&p, v), -20_000.0, 20_000.0, 40_001);
        assert!((y - gy).abs() <= 2.0);
    }
}

#[test]
fn reflected_problem_has_reflected_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..200 {
        let p = random_flat(&mut rng);
        let flip = |c: CellTraversal| CellTraversal::new(c.speed, (c.current.0, -c.current.1), c.half_span);
        let q = CrossingProblem::flat(flip(p.left), flip(p.right), -p.separation);
        let yp = p.solve(None, &SolverConfig::default()).unwrap().yval;
        let yq = q.solve(None, &SolverConfig::default()).unwrap().yval;
        assert!((yp + yq).abs() <= 1e-6 * (1.0 + yp.abs()), "{yp} vs {yq}");
    }
}

#[test]
fn solution_is_stationary_under_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for i in 0..300 {
        let p = match i % 3 {
            0 => random_flat(&mut rng),
            1 => random_horizontal(&mut rng),
            _ => random_vertical(&mut rng),
        };
        let y = p.solve(None, &SolverConfig::default()).unwrap().yval;
        let h = 1.0;
        let slope = (oracle_objective(&p, y + h) - oracle_objective(&p, y - h)) / (2.0 * h);
        let curvature = (oracle_objective(&p, y + h) - 2.0 * oracle_objective(&p, y) + oracle_objective(&p, y - h)) / (h * h);
        assert!(slope.abs() < 1e-6 * (1.0 + curvature.abs() * h), "instance {i}: slope {slope}");
        assert!(curvature > 0.0);
    }
}

#[test]
fn infeasible_current_is_rejected() {
    let fast = CellTraversal::new(3.0, (4.0, 0.0), 10_000.0);
    let ok = CellTraversal::new(5.0, (0.0, 0.0), 10_000.0);
    assert!(!fast.is_feasible());
    assert!(CrossingProblem::flat(fast, ok, 0.0).solve(None, &SolverConfig::default()).is_err());
}

proptest! {
    #[test]
    fn leg_time_oracle_matches_library(
        dx in -1e5f64..1e5, dy in -1e5f64..1e5,
        ux in -3.0f64..3.0, uy in -3.0f64..3.0,
        s in 4.5f64..10.0,
    ) {
        prop_assume!(dx.abs() + dy.abs() > 1.0);
        let lib = travel_time((dx, dy), (ux, uy), s).unwrap();
        prop_assert!(close(lib, oracle_leg_time((dx, dy), (ux, uy), s), 1e-12));
    }

    #[test]
    fn leg_time_scales_linearly_with_distance(
        dx in -1e5f64..1e5, dy in -1e5f64..1e5, k in 0.1f64..10.0,
        ux in -3.0f64..3.0, uy in -3.0f64..3.0,
    ) {
        prop_assume!(dx.abs() + dy.abs() > 1.0);
        let t = travel_time((dx, dy), (ux, uy), 6.0).unwrap();
        let tk = travel_time((k * dx, k * dy), (ux, uy), 6.0).unwrap();
        prop_assert!(close(tk, k * t, 1e-12));
    }

    #[test]
    fn warm_start_does_not_change_the_answer(seed in any::<u64>(), warm in -2e5f64..2e5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_vertical(&mut rng);
        let cold = p.solve(None, &SolverConfig::default()).unwrap();
        let hot = p.solve(Some(warm), &SolverConfig::default()).unwrap();
        prop_assert!((cold.yval - hot.yval).abs() < 1e-3);
    }
}
