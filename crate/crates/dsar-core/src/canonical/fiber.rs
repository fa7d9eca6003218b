//! Injectivity analysis: numerical preimages of the left projection and the
//! brute-force collision search for the circular path.

use serde::Serialize;

use crate::canonical::coords::rddot_uv;
use crate::error::{DsarError, Result};
use crate::forward::ScenarioParams;
use crate::geometry::{range_state, GroundPoint, Trajectory};

/// Axis-aligned search region on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundRect {
    pub x1_min: f64,
    pub x1_max: f64,
    pub x2_min: f64,
    pub x2_max: f64,
}

impl GroundRect {
    pub fn new(x1_min: f64, x1_max: f64, x2_min: f64, x2_max: f64) -> Result<Self> {
        if !(x1_min < x1_max && x2_min < x2_max) {
            return Err(DsarError::invalid(format!(
                "empty ground region [{x1_min}, {x1_max}] x [{x2_min}, {x2_max}]"
            )));
        }
        Ok(GroundRect { x1_min, x1_max, x2_min, x2_max })
    }

    pub fn contains(&self, x: GroundPoint, margin: f64) -> bool {
        x.x1 >= self.x1_min - margin
            && x.x1 <= self.x1_max + margin
            && x.x2 >= self.x2_min - margin
            && x.x2 <= self.x2_max + margin
    }
}

/// All ground points in `region` whose start-stop lift matches `(omega,
/// sigma)` at the given `(s, tau)`: the numerical preimage of the left
/// projection, used to locate artifact partners.
///
/// Matching a lift means matching `(Rdot, Rddot)`; candidates come from a
/// coarse grid scan at `resolution` and are polished by damped Newton on the
/// closed-form gradients.
#[allow(clippy::too_many_arguments)]
pub fn left_fiber_search(
    traj: &Trajectory,
    s: f64,
    omega: f64,
    sigma: f64,
    tau: f64,
    region: GroundRect,
    resolution: f64,
    params: &ScenarioParams,
) -> Result<Vec<GroundPoint>> {
    if tau == 0.0 || !tau.is_finite() {
        return Err(DsarError::invalid("tau must be nonzero"));
    }
    if !(resolution > 0.0) {
        return Err(DsarError::invalid("grid resolution must be positive"));
    }
    params.validate_for(traj)?;

    // Invert the lift: omega = w0 (1 - 2 Rdot / c0), sigma = 2 w0 tau Rddot / c0.
    let r_dot_target = (params.omega0 - omega) * params.c0 / (2.0 * params.omega0);
    let r_ddot_target = sigma * params.c0 / (2.0 * params.omega0 * tau);

    let speed = traj.speed();
    let scale_dot = speed;
    let scale_ddot = speed * speed / traj.altitude() + r_ddot_target.abs();

    let residual = |x: GroundPoint| -> (f64, f64) {
        let st = range_state(traj, x, s);
        ((st.r_dot - r_dot_target) / scale_dot, (st.r_ddot - r_ddot_target) / scale_ddot)
    };
    let cost = |x: GroundPoint| -> f64 {
        let (a, b) = residual(x);
        a * a + b * b
    };

    let n1 = (((region.x1_max - region.x1_min) / resolution).ceil() as usize + 1).max(2);
    let n2 = (((region.x2_max - region.x2_min) / resolution).ceil() as usize + 1).max(2);
    if n1 * n2 > 16_000_000 {
        return Err(DsarError::invalid("search grid exceeds 16e6 cells; coarsen the resolution"));
    }
    let d1 = (region.x1_max - region.x1_min) / (n1 - 1) as f64;
    let d2 = (region.x2_max - region.x2_min) / (n2 - 1) as f64;

    let mut grid = vec![0.0f64; n1 * n2];
    for i in 0..n1 {
        for j in 0..n2 {
            let x = GroundPoint::new(region.x1_min + i as f64 * d1, region.x2_min + j as f64 * d2);
            grid[i * n2 + j] = cost(x);
        }
    }

    // Local minima of the sampled cost are the Newton seeds.
    let mut seeds = Vec::new();
    for i in 0..n1 {
        for j in 0..n2 {
            let c = grid[i * n2 + j];
            let mut min_nb = f64::INFINITY;
            for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (ii, jj) = (i as i64 + di, j as i64 + dj);
                if ii >= 0 && jj >= 0 && (ii as usize) < n1 && (jj as usize) < n2 {
                    min_nb = min_nb.min(grid[ii as usize * n2 + jj as usize]);
                }
            }
            if c <= min_nb && c < 0.25 {
                seeds.push(GroundPoint::new(
                    region.x1_min + i as f64 * d1,
                    region.x2_min + j as f64 * d2,
                ));
            }
        }
    }

    let tol = 1e-11;
    let mut found: Vec<GroundPoint> = Vec::new();
    'seed: for seed in seeds {
        let mut x = seed;
        let mut c = cost(x);
        for _ in 0..60 {
            if c <= tol * tol {
                break;
            }
            let st = range_state(traj, x, s);
            let (f1, f2) = residual(x);
            // Jacobian of the scaled residual from the closed-form gradients.
            let j11 = st.grad_r_dot.x / scale_dot;
            let j12 = st.grad_r_dot.y / scale_dot;
            let j21 = st.grad_r_ddot.x / scale_ddot;
            let j22 = st.grad_r_ddot.y / scale_ddot;
            let det = j11 * j22 - j12 * j21;
            let (mut dx1, mut dx2) = if det.abs() > 1e-14 {
                ((-f1 * j22 + f2 * j12) / det, (-f2 * j11 + f1 * j21) / det)
            } else {
                // Gradient descent fallback near the degeneracy locus.
                let g1 = 2.0 * (f1 * j11 + f2 * j21);
                let g2 = 2.0 * (f1 * j12 + f2 * j22);
                let gn = g1.hypot(g2).max(1e-14);
                (-c / gn * g1 / gn, -c / gn * g2 / gn)
            };
            // Damped step.
            for _ in 0..20 {
                let cand = GroundPoint::new(x.x1 + dx1, x.x2 + dx2);
                let cc = cost(cand);
                if cc < c {
                    x = cand;
                    c = cc;
                    break;
                }
                dx1 *= 0.5;
                dx2 *= 0.5;
                if dx1.abs() + dx2.abs() < 1e-16 {
                    continue 'seed;
                }
            }
        }
        if c > tol * tol || !region.contains(x, 0.5 * resolution) {
            continue;
        }
        if found.iter().any(|y| y.distance(x) < 0.75 * resolution) {
            continue;
        }
        found.push(x);
    }
    found.sort_by(|a, b| (a.x1, a.x2).partial_cmp(&(b.x1, b.x2)).unwrap());
    Ok(found)
}

/// Witness of a collision of `v -> Rddot(u, v)` at fixed `u`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Collision {
    pub v_a: f64,
    pub v_b: f64,
    pub value: f64,
}

/// Result of sampling the Doppler-rate map on one `u = const` slice.
#[derive(Debug, Clone, Serialize)]
pub struct InjectivityReport {
    pub u: f64,
    pub v_lo: f64,
    pub v_hi: f64,
    pub n_samples: usize,
    /// Strictly monotone over the samples, hence injective on the interval.
    pub injective: bool,
    pub collision: Option<Collision>,
    /// Number of samples whose value satisfies `Rddot^2 < rho^2 (1 - u^2)`,
    /// the pointwise guarantee of global injectivity.
    pub pointwise_guarantee_count: usize,
    pub pointwise_guarantee_all: bool,
}

/// Sample `v -> Rddot(u, v)` on `[v_lo, v_hi]` and either certify
/// monotonicity or produce a colliding pair.
///
/// The map has exactly one interior critical point (`sinh v = h / (1 - u^2)`),
/// so when it is not monotone a collision is found by bisecting each branch
/// to a common level.
pub fn brute_force_injectivity(
    traj: &Trajectory,
    u: f64,
    v_lo: f64,
    v_hi: f64,
    n_samples: usize,
) -> Result<InjectivityReport> {
    let (rho, h) = match *traj {
        Trajectory::Circular { radius, height_ratio } => (radius, height_ratio),
        Trajectory::Linear { .. } => {
            return Err(DsarError::invalid("injectivity scan applies to circular trajectories"))
        }
    };
    if u.abs() >= 1.0 {
        return Err(DsarError::invalid(format!("|u| must be < 1, got {}", u.abs())));
    }
    if n_samples < 1000 {
        return Err(DsarError::invalid("need at least 1000 samples"));
    }
    if v_lo > v_hi {
        return Err(DsarError::invalid(format!("invalid v interval [{v_lo}, {v_hi}]")));
    }

    let f = |v: f64| rddot_uv(traj, u, v).expect("|u| < 1 checked");
    let step = if n_samples > 1 { (v_hi - v_lo) / (n_samples - 1) as f64 } else { 0.0 };
    let mut values = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        values.push(f(v_lo + i as f64 * step));
    }

    let value_scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let tol = 1e-12 * value_scale;
    let increasing = values.windows(2).all(|w| w[1] >= w[0] - tol);
    let decreasing = values.windows(2).all(|w| w[1] <= w[0] + tol);
    let monotone = increasing || decreasing || v_lo == v_hi;

    let guarantee = rho * rho * (1.0 - u * u);
    let pointwise_count = values.iter().filter(|v| *v * *v < guarantee).count();

    let mut collision = None;
    if !monotone {
        // Single interior maximum of the v-profile.
        let v_peak = (h / (1.0 - u * u)).asinh();
        if v_peak > v_lo && v_peak < v_hi {
            let peak = f(v_peak);
            let ends = f(v_lo).max(f(v_hi));
            let level = 0.5 * (peak + ends);
            let bisect = |mut lo: f64, mut hi: f64, rising: bool| -> f64 {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let below = f(mid) < level;
                    if below == rising {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            let v_a = bisect(v_lo, v_peak, true);
            let v_b = bisect(v_peak, v_hi, false);
            let sep_tol = 1e-6 * (1.0 + v_a.abs() + v_b.abs());
            if (f(v_a) - f(v_b)).abs() <= 1e-9 * value_scale && (v_a - v_b).abs() > sep_tol {
                collision = Some(Collision { v_a, v_b, value: f(v_a) });
            }
        }
    }

    Ok(InjectivityReport {
        u,
        v_lo,
        v_hi,
        n_samples,
        injective: monotone,
        collision,
        pointwise_guarantee_count: pointwise_count,
        pointwise_guarantee_all: pointwise_count == values.len(),
    })
}

/// Largest `v` satisfying the sufficient injectivity condition
/// `h sinh v < (h^2 - 1) / 2`.
pub fn injectivity_v_cap(h: f64) -> f64 {
    ((h * h - 1.0) / (2.0 * h)).asinh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::canonical_lift;
    use crate::forward::ForwardModel;
    use std::f64::consts::PI;

    fn params() -> ScenarioParams {
        ScenarioParams::new(2.0 * PI * 1e3, 100.0, 100.0).unwrap()
    }

    #[test]
    fn linear_fiber_contains_the_mirror_pair() {
        let traj = Trajectory::linear(1.0).unwrap();
        let p = params();
        let x = GroundPoint::new(0.4, 0.7);
        let (s, tau) = (0.1, 1.0);
        let cp = canonical_lift(&traj, s, tau, x, &p, ForwardModel::StartStop).unwrap();
        let region = GroundRect::new(-2.0, 2.0, -2.0, 2.0).unwrap();
        let fiber =
            left_fiber_search(&traj, s, cp.omega, cp.sigma, tau, region, 0.05, &p).unwrap();
        assert_eq!(fiber.len(), 2, "{fiber:?}");
        assert!(fiber[0].distance(GroundPoint::new(0.4, -0.7)) < 1e-6);
        assert!(fiber[1].distance(x) < 1e-6);
    }

    #[test]
    fn restricting_the_region_yields_a_singleton() {
        let traj = Trajectory::linear(1.0).unwrap();
        let p = params();
        let x = GroundPoint::new(-0.3, 0.9);
        let (s, tau) = (0.0, 1.0);
        let cp = canonical_lift(&traj, s, tau, x, &p, ForwardModel::StartStop).unwrap();
        let region = GroundRect::new(-2.0, 2.0, 0.05, 2.0).unwrap();
        let fiber =
            left_fiber_search(&traj, s, cp.omega, cp.sigma, tau, region, 0.05, &p).unwrap();
        assert_eq!(fiber.len(), 1, "{fiber:?}");
        assert!(fiber[0].distance(x) < 1e-6);
    }

    #[test]
    fn empty_region_is_rejected() {
        assert!(GroundRect::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(GroundRect::new(0.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn injective_inside_the_sufficient_region() {
        // h sinh v < (h^2 - 1) / 2 guarantees injectivity of the v-profile.
        let h = 1.0;
        let traj = Trajectory::circular(1.0, h).unwrap();
        let cap = injectivity_v_cap(h);
        for u in [0.0, 0.4, -0.7] {
            let report =
                brute_force_injectivity(&traj, u, cap - 3.0, cap - 1e-3, 1500).unwrap();
            assert!(report.injective, "u = {u}: {report:?}");
            assert!(report.collision.is_none());
        }
    }

    #[test]
    fn zero_length_interval_is_trivially_injective() {
        let traj = Trajectory::circular(1.0, 1.0).unwrap();
        let report = brute_force_injectivity(&traj, 0.2, 0.5, 0.5, 1000).unwrap();
        assert!(report.injective);
    }

    #[test]
    fn wide_interval_produces_a_collision_certificate() {
        // Regression fixture: h = 0.8, u = 0.15, v in [-1, 4] straddles the
        // profile peak, so two v values share one Doppler rate.
        let h = 0.8;
        let traj = Trajectory::circular(1.0, h).unwrap();
        let report = brute_force_injectivity(&traj, 0.15, -1.0, 4.0, 2000).unwrap();
        assert!(!report.injective);
        let c = report.collision.expect("collision must be certified");
        let peak = (h / (1.0 - 0.15f64 * 0.15)).asinh();
        assert!(c.v_a < peak && peak < c.v_b, "{c:?} peak {peak}");
        let f_a = rddot_uv(&traj, 0.15, c.v_a).unwrap();
        let f_b = rddot_uv(&traj, 0.15, c.v_b).unwrap();
        assert!((f_a - f_b).abs() <= 1e-8 * f_a.abs().max(1.0));
        // Colliding values violate the pointwise guarantee.
        assert!(!report.pointwise_guarantee_all);
        assert!(c.value * c.value >= 1.0 * (1.0 - 0.15f64 * 0.15) - 1e-9);
    }

    #[test]
    fn guarantee_samples_imply_monotonicity() {
        // Whenever every sampled value satisfies the pointwise condition, the
        // slice must have been monotone.
        let traj = Trajectory::circular(1.0, 1.3).unwrap();
        for (u, lo, hi) in [(0.1, -2.0, 0.0), (0.5, -1.0, 0.2), (-0.3, -3.0, -0.5)] {
            let report = brute_force_injectivity(&traj, u, lo, hi, 1200).unwrap();
            if report.pointwise_guarantee_all {
                assert!(report.injective, "u = {u}: {report:?}");
            }
        }
    }

    #[test]
    fn preconditions_are_enforced() {
        let traj = Trajectory::circular(1.0, 1.0).unwrap();
        assert!(brute_force_injectivity(&traj, 1.0, 0.0, 1.0, 1000).is_err());
        assert!(brute_force_injectivity(&traj, 0.0, 0.0, 1.0, 10).is_err());
        assert!(brute_force_injectivity(&traj, 0.0, 1.0, 0.0, 1000).is_err());
        let lin = Trajectory::linear(1.0).unwrap();
        assert!(brute_force_injectivity(&lin, 0.0, 0.0, 1.0, 1000).is_err());
    }
}
