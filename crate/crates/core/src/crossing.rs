//! The two-cell crossing problem.
//!
//! A vessel leaves a point in the left cell, crosses the shared boundary at
//! an offset `y` and ends at a point in the right cell. Each cell carries a
//! constant current and a constant vessel speed. The crossing offset is
//! chosen to minimise the summed travel time by driving
//!
//! ```text
//! F(y) = X2 * N1(y) + X1 * N2(y)        (= X1 X2 (t1' + t2'))
//! ```
//!
//! to zero with a safeguarded Newton iteration. Three geometries share the
//! machinery: the flat pair used while building the mesh graph, the
//! latitude-corrected horizontal pair and the cos-ratio vertical pair used
//! while smoothing.
//!
//! Frame convention: `x` runs across the boundary in the direction of
//! travel, `y` runs along it. Currents are given in the same frame.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Why a single-cell travel time has no solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degenerate {
    /// The current is at least as fast as the vessel and points away from
    /// the target.
    Infeasible,
    /// The current matches the vessel speed and is orthogonal to the target.
    Undefined,
}

impl From<Degenerate> for Error {
    fn from(d: Degenerate) -> Self {
        match d {
            Degenerate::Infeasible => Error::Infeasible("vessel cannot overcome the current".into()),
            Degenerate::Undefined => {
                Error::Infeasible("current matches vessel speed orthogonal to the leg".into())
            }
        }
    }
}

/// Time to cover displacement `d` (metres) at water speed `speed` (m/s) in
/// a constant current `u` (m/s).
///
/// Solves `|d - t u| = s t` for the smallest positive `t`. The root is
/// computed as `|d|^2 / (X + D)` which equals `(X - D) / C` whenever
/// `C = s^2 - |u|^2` is non-zero and reduces to `|d|^2 / (2D)` at `C = 0`.
pub fn travel_time(d: (f64, f64), u: (f64, f64), speed: f64) -> Result<f64, Degenerate> {
    let dd = d.0 * d.0 + d.1 * d.1;
    if dd == 0.0 {
        return Ok(0.0);
    }
    let dot = u.0 * d.0 + u.1 * d.1;
    let c = speed * speed - (u.0 * u.0 + u.1 * u.1);
    if c <= 0.0 {
        if dot == 0.0 && c == 0.0 {
            return Err(Degenerate::Undefined);
        }
        if dot <= 0.0 {
            return Err(Degenerate::Infeasible);
        }
    }
    let disc = dot * dot + c * dd;
    if disc < 0.0 {
        return Err(Degenerate::Infeasible);
    }
    let denom = disc.sqrt() + dot;
    if denom <= 0.0 {
        return Err(Degenerate::Infeasible);
    }
    Ok(dd / denom)
}

/// Vessel speed, current and half-span for one side of a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellTraversal {
    /// Water speed in m/s.
    pub speed: f64,
    /// Current (along-travel, along-boundary) in m/s.
    pub current: (f64, f64),
    /// Distance in metres from the start (or end) point to the boundary,
    /// measured across it.
    pub half_span: f64,
}

impl CellTraversal {
    pub fn new(speed: f64, current: (f64, f64), half_span: f64) -> Self {
        CellTraversal {
            speed,
            current,
            half_span,
        }
    }

    fn c(&self) -> f64 {
        self.speed * self.speed - self.current.0 * self.current.0 - self.current.1 * self.current.1
    }

    pub fn is_feasible(&self) -> bool {
        self.speed > 0.0 && self.c() > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Orientation {
    /// Constant-width cells; widths already scaled by cell latitude.
    FlatHorizontal,
    /// Horizontal pair with widths corrected at the crossing latitude.
    /// Latitudes in degrees; `x` and `a` are equatorial distances.
    SmoothedHorizontal { entry_lat: f64, exit_lat: f64 },
    /// Vertical pair crossing a fixed-latitude boundary. `y` is measured
    /// along the boundary at `boundary_lat`.
    SmoothedVertical {
        entry_lat: f64,
        exit_lat: f64,
        boundary_lat: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingProblem {
    pub left: CellTraversal,
    pub right: CellTraversal,
    /// Signed along-boundary separation of the start and end points, metres.
    pub separation: f64,
    pub orientation: Orientation,
    pub earth_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingSolution {
    /// Crossing offset along the boundary from the start point, metres.
    pub yval: f64,
    /// Travel time in the left cell, seconds.
    pub t1: f64,
    /// Travel time in the right cell, seconds.
    pub t2: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl CrossingSolution {
    pub fn total(&self) -> f64 {
        self.t1 + self.t2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Convergence threshold on `|t1' + t2'| * max(s_l, s_r)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial bracket half-width as a multiple of `x + a + |Y|`.
    pub bracket_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-9,
            max_iter: 100,
            bracket_factor: 4.0,
        }
    }
}

/// Displacement across one cell as a function of `y`, with first and second
/// derivatives.
#[derive(Debug, Clone, Copy)]
struct LegGeometry {
    p: f64,
    dp: f64,
    ddp: f64,
    q: f64,
    dq: f64,
    ddq: f64,
}

#[derive(Debug, Clone, Copy)]
struct LegTerms {
    t: f64,
    big_x: f64,
    d_big_x: f64,
    n: f64,
    d_n: f64,
}

fn leg_terms(g: &LegGeometry, cell: &CellTraversal) -> Result<LegTerms, Degenerate> {
    let (u, v) = cell.current;
    let t = travel_time((g.p, g.q), cell.current, cell.speed)?;
    let c = cell.c();
    let d = u * g.p + v * g.q;
    let dd_prime = u * g.dp + v * g.dq;
    let big_x = (d * d + c * (g.p * g.p + g.q * g.q)).max(0.0).sqrt();
    if big_x == 0.0 {
        // Start point sits on the boundary and y is at it: the travel-time
        // kink. Report a zero-length leg with a neutral derivative.
        return Ok(LegTerms {
            t,
            big_x: 0.0,
            d_big_x: 0.0,
            n: 0.0,
            d_n: 0.0,
        });
    }
    let d_big_x = (d * dd_prime + c * (g.p * g.dp + g.q * g.dq)) / big_x;
    let rx = g.p - t * u;
    let ry = g.q - t * v;
    let n = g.dp * rx + g.dq * ry;
    let dt = n / big_x;
    let d_n = g.ddp * rx + g.dp * (g.dp - u * dt) + g.ddq * ry + g.dq * (g.dq - v * dt);
    Ok(LegTerms {
        t,
        big_x,
        d_big_x,
        n,
        d_n,
    })
}

/// Residual of the stationarity condition at `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    /// `F(y)`.
    pub f: f64,
    /// `dF/dy`.
    pub df: f64,
    /// `t1'(y) + t2'(y)`, the gradient of the travel-time sum.
    pub gradient: f64,
    pub t1: f64,
    pub t2: f64,
}

impl CrossingProblem {
    pub fn flat(left: CellTraversal, right: CellTraversal, separation: f64) -> Self {
        CrossingProblem {
            left,
            right,
            separation,
            orientation: Orientation::FlatHorizontal,
            earth_radius: crate::geo::EARTH_RADIUS_M,
        }
    }

    pub fn smoothed_horizontal(
        left: CellTraversal,
        right: CellTraversal,
        separation: f64,
        entry_lat: f64,
        exit_lat: f64,
        earth_radius: f64,
    ) -> Self {
        CrossingProblem {
            left,
            right,
            separation,
            orientation: Orientation::SmoothedHorizontal { entry_lat, exit_lat },
            earth_radius,
        }
    }

    pub fn smoothed_vertical(
        left: CellTraversal,
        right: CellTraversal,
        separation: f64,
        entry_lat: f64,
        exit_lat: f64,
        boundary_lat: f64,
        earth_radius: f64,
    ) -> Self {
        CrossingProblem {
            left,
            right,
            separation,
            orientation: Orientation::SmoothedVertical {
                entry_lat,
                exit_lat,
                boundary_lat,
            },
            earth_radius,
        }
    }

    fn geometry(&self, y: f64) -> (LegGeometry, LegGeometry) {
        let x = self.left.half_span;
        let a = self.right.half_span;
        let big_y = self.separation;
        match self.orientation {
            Orientation::FlatHorizontal => (
                LegGeometry {
                    p: x,
                    dp: 0.0,
                    ddp: 0.0,
                    q: y,
                    dq: 1.0,
                    ddq: 0.0,
                },
                LegGeometry {
                    p: a,
                    dp: 0.0,
                    ddp: 0.0,
                    q: big_y - y,
                    dq: -1.0,
                    ddq: 0.0,
                },
            ),
            Orientation::SmoothedHorizontal { entry_lat, exit_lat } => {
                let r = self.earth_radius;
                // latitude of the crossing seen from the entry and the exit
                let theta = entry_lat.to_radians() + y / r;
                let psi = exit_lat.to_radians() - (big_y - y) / r;
                let zl = x * theta.cos();
                let zr = a * psi.cos();
                (
                    LegGeometry {
                        p: zl,
                        dp: -x * theta.sin() / r,
                        ddp: -zl / (r * r),
                        q: y,
                        dq: 1.0,
                        ddq: 0.0,
                    },
                    LegGeometry {
                        p: zr,
                        dp: -a * psi.sin() / r,
                        ddp: -zr / (r * r),
                        q: big_y - y,
                        dq: -1.0,
                        ddq: 0.0,
                    },
                )
            }
            Orientation::SmoothedVertical {
                entry_lat,
                exit_lat,
                boundary_lat,
            } => {
                let cb = boundary_lat.to_radians().cos();
                let r1 = entry_lat.to_radians().cos() / cb;
                let r2 = exit_lat.to_radians().cos() / cb;
                (
                    LegGeometry {
                        p: x,
                        dp: 0.0,
                        ddp: 0.0,
                        q: r1 * y,
                        dq: r1,
                        ddq: 0.0,
                    },
                    LegGeometry {
                        p: a,
                        dp: 0.0,
                        ddp: 0.0,
                        q: r2 * (big_y - y),
                        dq: -r2,
                        ddq: 0.0,
                    },
                )
            }
        }
    }

    /// Travel times `(t1, t2)` for a crossing at `y`.
    pub fn travel_times(&self, y: f64) -> Result<(f64, f64), Degenerate> {
        let (gl, gr) = self.geometry(y);
        let t1 = travel_time((gl.p, gl.q), self.left.current, self.left.speed)?;
        let t2 = travel_time((gr.p, gr.q), self.right.current, self.right.speed)?;
        Ok((t1, t2))
    }

    /// Summed travel time for a crossing at `y`.
    pub fn objective(&self, y: f64) -> Result<f64, Degenerate> {
        self.travel_times(y).map(|(a, b)| a + b)
    }

    pub fn residual(&self, y: f64) -> Result<Residual, Degenerate> {
        let (gl, gr) = self.geometry(y);
        let l = leg_terms(&gl, &self.left)?;
        let r = leg_terms(&gr, &self.right)?;
        let f = l.n * r.big_x + r.n * l.big_x;
        let df = l.d_n * r.big_x + l.n * r.d_big_x + r.d_n * l.big_x + r.n * l.d_big_x;
        let g1 = if l.big_x > 0.0 { l.n / l.big_x } else { 0.0 };
        let g2 = if r.big_x > 0.0 { r.n / r.big_x } else { 0.0 };
        Ok(Residual {
            f,
            df,
            gradient: g1 + g2,
            t1: l.t,
            t2: r.t,
        })
    }

    /// Straight-line crossing `Y x / (x + a)`.
    pub fn straight_line_guess(&self) -> f64 {
        let span = self.left.half_span + self.right.half_span;
        if span > 0.0 {
            self.separation * self.left.half_span / span
        } else {
            0.5 * self.separation
        }
    }

    fn check_feasible(&self) -> Result<(), Error> {
        if !self.left.is_feasible() || !self.right.is_feasible() {
            return Err(Error::Infeasible(format!(
                "current exceeds vessel speed (left s={}, right s={})",
                self.left.speed, self.right.speed
            )));
        }
        if self.left.half_span < 0.0 || self.right.half_span < 0.0 {
            return Err(Error::Domain("negative cell half-span".into()));
        }
        Ok(())
    }

    /// Safeguarded Newton on `F(y)`. Falls back to bisection whenever a step
    /// leaves the current sign-change bracket or `F'` is not positive.
    pub fn solve(&self, init_y: Option<f64>, cfg: &SolverConfig) -> Result<CrossingSolution, Error> {
        self.check_feasible()?;

        // Start or end point on the boundary: the crossing sits over it and
        // that side contributes no travel time.
        if self.left.half_span == 0.0 {
            return self.fixed(0.0);
        }
        if self.right.half_span == 0.0 {
            return self.fixed(self.separation);
        }

        let speed_ref = self.left.speed.max(self.right.speed);
        let scale = self.left.half_span + self.right.half_span + self.separation.abs();
        let mut y = init_y.unwrap_or_else(|| self.straight_line_guess());
        if !y.is_finite() {
            y = self.straight_line_guess();
        }

        let (mut lo, mut hi) = self.bracket(y, cfg.bracket_factor * scale)?;
        if !(lo..=hi).contains(&y) {
            y = 0.5 * (lo + hi);
        }

        let mut best = (f64::INFINITY, y);
        for iter in 0..cfg.max_iter {
            let r = self.residual(y)?;
            let g = r.gradient.abs() * speed_ref;
            if g < best.0 {
                best = (g, y);
            }
            if g < cfg.tol || (hi - lo) <= 1e-12 * scale {
                return Ok(CrossingSolution {
                    yval: y,
                    t1: r.t1,
                    t2: r.t2,
                    converged: true,
                    iterations: iter + 1,
                });
            }
            if r.gradient < 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            let newton = y - r.f / r.df;
            y = if r.df > 0.0 && newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }

        let (t1, t2) = self.travel_times(best.1)?;
        Ok(CrossingSolution {
            yval: best.1,
            t1,
            t2,
            converged: false,
            iterations: cfg.max_iter,
        })
    }

    fn fixed(&self, y: f64) -> Result<CrossingSolution, Error> {
        let (t1, t2) = self.travel_times(y)?;
        Ok(CrossingSolution {
            yval: y,
            t1,
            t2,
            converged: true,
            iterations: 0,
        })
    }

    /// Finds `lo < hi` with a non-positive gradient at `lo` and a
    /// non-negative one at `hi`, starting from `center +- half_width` and
    /// doubling outwards.
    fn bracket(&self, center: f64, half_width: f64) -> Result<(f64, f64), Error> {
        let half_width = if half_width > 0.0 { half_width } else { 1.0 };
        let mut lo = center - half_width;
        let mut hi = center + half_width;
        let mut step = half_width;
        for _ in 0..64 {
            if self.residual(lo)?.gradient <= 0.0 {
                break;
            }
            step *= 2.0;
            lo = center - step;
        }
        step = half_width;
        for _ in 0..64 {
            if self.residual(hi)?.gradient >= 0.0 {
                break;
            }
            step *= 2.0;
            hi = center + step;
        }
        let glo = self.residual(lo)?.gradient;
        let ghi = self.residual(hi)?.gradient;
        if glo > 0.0 || ghi < 0.0 {
            return Err(Error::Domain("could not bracket the crossing optimum".into()));
        }
        Ok((lo, hi))
    }
}

/// Flat crossing between two cells whose widths are already latitude-scaled.
pub fn solve_flat(problem: &CrossingProblem, init_y: Option<f64>, cfg: &SolverConfig) -> Result<CrossingSolution, Error> {
    debug_assert!(matches!(problem.orientation, Orientation::FlatHorizontal));
    problem.solve(init_y, cfg)
}

/// Horizontal crossing with the latitude correction `z = x cos(lat)`.
pub fn solve_smoothed_horizontal(
    problem: &CrossingProblem,
    init_y: Option<f64>,
    cfg: &SolverConfig,
) -> Result<CrossingSolution, Error> {
    debug_assert!(matches!(problem.orientation, Orientation::SmoothedHorizontal { .. }));
    problem.solve(init_y, cfg)
}

/// Vertical crossing using the cos ratios of the entry and exit latitudes
/// against the boundary latitude.
pub fn solve_smoothed_vertical(
    problem: &CrossingProblem,
    init_y: Option<f64>,
    cfg: &SolverConfig,
) -> Result<CrossingSolution, Error> {
    debug_assert!(matches!(problem.orientation, Orientation::SmoothedVertical { .. }));
    problem.solve(init_y, cfg)
}

/// Samples `(y, F(y), objective(y))` over `[lo, hi]` for plotting.
pub fn residual_table(problem: &CrossingProblem, lo: f64, hi: f64, samples: usize) -> Vec<(f64, f64, f64)> {
    let n = samples.max(2);
    (0..n)
        .filter_map(|i| {
            let y = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let r = problem.residual(y).ok()?;
            Some((y, r.f, r.t1 + r.t2))
        })
        .collect()
}
