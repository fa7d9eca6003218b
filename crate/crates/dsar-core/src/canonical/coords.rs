//! Ground-plane coordinate systems adapted to the circular flight path.
//!
//! `(u, v)` is chosen so that `Rdot = -rho u` (so `u` is proportional to the
//! Doppler shift, bounded by 1 in magnitude) and so that any degeneracy of
//! the left projection concentrates in `v` alone. `(p, q)` are the rotating
//! frame components `p = (x - rho e) . e / rho`, `q = x . e_perp / rho`; the
//! degeneracy locus is a cubic in `p`.

use serde::Serialize;

use crate::error::{DsarError, Result};
use crate::geometry::{e_radial, e_tangent, range_state, GroundPoint, Trajectory};

/// Points with `|u|` this close to 1 are outside the chart (ground directly
/// under the tangent to the flight path).
pub const CHART_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UvCoords {
    pub u: f64,
    pub v: f64,
}

impl UvCoords {
    pub fn sinh_v(&self) -> f64 {
        self.v.sinh()
    }

    pub fn cosh_v(&self) -> f64 {
        self.v.cosh()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PqCoords {
    pub p: f64,
    pub q: f64,
}

fn circular_parts(traj: &Trajectory) -> Result<(f64, f64)> {
    match *traj {
        Trajectory::Circular { radius, height_ratio } => Ok((radius, height_ratio)),
        Trajectory::Linear { .. } => Err(DsarError::invalid(
            "operation requires a circular trajectory",
        )),
    }
}

/// `(u, v)` of a ground point at slow time `s`.
pub fn uv_coordinates(traj: &Trajectory, s: f64, x: GroundPoint) -> Result<UvCoords> {
    let (rho, h) = circular_parts(traj)?;
    let st = range_state(traj, x, s);
    let u = -st.r_dot / rho;
    if u.abs() >= 1.0 - CHART_TOL {
        return Err(DsarError::invalid(format!(
            "point out of (u, v) chart: |u| = {} too close to 1",
            u.abs()
        )));
    }
    let e = e_radial(s);
    let along = (x.to_vector() - rho * e).dot(&e);
    Ok(UvCoords { u, v: (along / (rho * h)).asinh() })
}

/// Inverse of [`uv_coordinates`]: reconstruct the ground point.
pub fn uv_to_ground(traj: &Trajectory, s: f64, u: f64, v: f64) -> Result<GroundPoint> {
    let (rho, h) = circular_parts(traj)?;
    if u.abs() >= 1.0 {
        return Err(DsarError::invalid(format!("|u| must be < 1, got {}", u.abs())));
    }
    let e = e_radial(s);
    let ep = e_tangent(s);
    let root = (1.0 - u * u).sqrt();
    let xv = rho * e + rho * h * v.sinh() * e + rho * h * (u / root) * v.cosh() * ep;
    Ok(GroundPoint::from_vector(xv))
}

/// `Rddot` expressed in `(u, v)`:
/// `rho sqrt(1 - u^2) / h * (1 + h sinh v - u^2) / cosh v`.
pub fn rddot_uv(traj: &Trajectory, u: f64, v: f64) -> Result<f64> {
    let (rho, h) = circular_parts(traj)?;
    if u.abs() >= 1.0 {
        return Err(DsarError::invalid(format!("|u| must be < 1, got {}", u.abs())));
    }
    let root = (1.0 - u * u).sqrt();
    Ok(rho * root / h * (1.0 + h * v.sinh() - u * u) / v.cosh())
}

/// `d Rddot / d v` at fixed `u`; vanishes exactly on the degeneracy locus
/// `f(u, v) = h^2 + (u^2 - 1) h sinh v = 0`.
pub fn rddot_uv_dv(traj: &Trajectory, u: f64, v: f64) -> Result<f64> {
    let (rho, h) = circular_parts(traj)?;
    if u.abs() >= 1.0 {
        return Err(DsarError::invalid(format!("|u| must be < 1, got {}", u.abs())));
    }
    let root = (1.0 - u * u).sqrt();
    let c = v.cosh();
    Ok(rho * root * sigma_defining_f(h, u, v) / (h * h * c * c))
}

/// Defining function `f(u, v) = h^2 + (u^2 - 1) h sinh v` of the rank-drop
/// locus of the left projection.
pub fn sigma_defining_f(h: f64, u: f64, v: f64) -> f64 {
    h * h + (u * u - 1.0) * v.sinh() * h
}

/// `(p, q)` of a ground point at slow time `s`.
pub fn pq_coordinates(traj: &Trajectory, s: f64, x: GroundPoint) -> Result<PqCoords> {
    let (rho, _) = circular_parts(traj)?;
    let e = e_radial(s);
    let ep = e_tangent(s);
    let xv = x.to_vector();
    Ok(PqCoords { p: (xv - rho * e).dot(&e) / rho, q: xv.dot(&ep) / rho })
}

/// Inverse of [`pq_coordinates`].
pub fn pq_to_ground(traj: &Trajectory, s: f64, pq: PqCoords) -> Result<GroundPoint> {
    let (rho, _) = circular_parts(traj)?;
    let e = e_radial(s);
    let ep = e_tangent(s);
    Ok(GroundPoint::from_vector(rho * (1.0 + pq.p) * e + rho * pq.q * ep))
}

/// `(u, v)` from `(p, q)`; independent of `s` by rotational symmetry.
pub fn pq_to_uv(traj: &Trajectory, pq: PqCoords) -> Result<UvCoords> {
    let (_, h) = circular_parts(traj)?;
    let u = pq.q / (pq.p * pq.p + pq.q * pq.q + h * h).sqrt();
    if u.abs() >= 1.0 - CHART_TOL {
        return Err(DsarError::invalid("point out of (u, v) chart"));
    }
    Ok(UvCoords { u, v: (pq.p / h).asinh() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn circ() -> Trajectory {
        Trajectory::circular(1.0, 1.0).unwrap()
    }

    #[test]
    fn point_under_antenna_maps_to_origin_of_chart() {
        let traj = Trajectory::circular(2.0, 0.7).unwrap();
        let s = 1.3;
        let e = e_radial(s);
        let x = GroundPoint::new(2.0 * e.x, 2.0 * e.y);
        let uv = uv_coordinates(&traj, s, x).unwrap();
        assert!(uv.u.abs() < 1e-14);
        assert!(uv.v.abs() < 1e-14);
    }

    #[test]
    fn u_is_bounded_by_one_everywhere() {
        let traj = circ();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..500 {
            let x = GroundPoint::new(rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0));
            let s = rng.random_range(0.0..std::f64::consts::TAU);
            if let Ok(uv) = uv_coordinates(&traj, s, x) {
                assert!(uv.u.abs() < 1.0);
            }
        }
    }

    #[test]
    fn uv_round_trip() {
        let traj = Trajectory::circular(1.5, 0.8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let x = GroundPoint::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
            let s = rng.random_range(0.0..std::f64::consts::TAU);
            let Ok(uv) = uv_coordinates(&traj, s, x) else { continue };
            let back = uv_to_ground(&traj, s, uv.u, uv.v).unwrap();
            assert!(back.distance(x) <= 1e-10 * (1.0 + x.norm()), "{x:?} -> {uv:?} -> {back:?}");
        }
    }

    #[test]
    fn range_from_uv_matches_geometry() {
        // R = rho h cosh v / sqrt(1 - u^2), evaluated independently.
        let traj = Trajectory::circular(1.2, 1.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..300 {
            let x = GroundPoint::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let s = rng.random_range(0.0..std::f64::consts::TAU);
            let Ok(uv) = uv_coordinates(&traj, s, x) else { continue };
            let r_uv = 1.2 * 1.4 * uv.cosh_v() / (1.0 - uv.u * uv.u).sqrt();
            let r = range_state(&traj, x, s).r;
            assert!((r_uv - r).abs() <= 1e-10 * r);
        }
    }

    #[test]
    fn rddot_uv_matches_range_state() {
        let traj = Trajectory::circular(1.0, 0.9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..300 {
            let x = GroundPoint::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let s = rng.random_range(0.0..std::f64::consts::TAU);
            let Ok(uv) = uv_coordinates(&traj, s, x) else { continue };
            let from_uv = rddot_uv(&traj, uv.u, uv.v).unwrap();
            let direct = range_state(&traj, x, s).r_ddot;
            assert!(
                (from_uv - direct).abs() <= 1e-10 * (1.0 + direct.abs()),
                "{from_uv} vs {direct}"
            );
        }
    }

    #[test]
    fn rddot_examples_and_symmetry() {
        let traj = circ();
        assert!((rddot_uv(&traj, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        for (u, v) in [(0.3, 0.7), (0.5, -1.1)] {
            let a = rddot_uv(&traj, u, v).unwrap();
            let b = rddot_uv(&traj, -u, v).unwrap();
            assert_eq!(a, b);
        }
        assert!(rddot_uv(&traj, 1.0, 0.0).is_err());
    }

    #[test]
    fn rddot_v_derivative_vanishes_exactly_on_f_zero() {
        let traj = Trajectory::circular(1.0, 0.8).unwrap();
        let h = 0.8;
        for u in [0.0f64, 0.35, -0.6] {
            // Solve f(u, v) = 0 for v: sinh v = h / (1 - u^2).
            let v = (h / (1.0 - u * u)).asinh();
            assert!(sigma_defining_f(h, u, v).abs() < 1e-14);
            assert!(rddot_uv_dv(&traj, u, v).unwrap().abs() < 1e-14);
            // FD cross-check away from the locus.
            let dv = crate::geometry::fd::fd_scalar(
                |vv| rddot_uv(&traj, u, vv).unwrap(),
                v + 0.5,
                1,
                1e-6,
            )
            .unwrap();
            let analytic = rddot_uv_dv(&traj, u, v + 0.5).unwrap();
            assert!((dv - analytic).abs() <= 1e-6 * (1.0 + analytic.abs()));
        }
    }

    #[test]
    fn pq_round_trip_and_relations() {
        let traj = Trajectory::circular(2.0, 1.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for _ in 0..300 {
            let x = GroundPoint::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let s = rng.random_range(0.0..std::f64::consts::TAU);
            let pq = pq_coordinates(&traj, s, x).unwrap();
            let back = pq_to_ground(&traj, s, pq).unwrap();
            assert!(back.distance(x) <= 1e-12 * (1.0 + x.norm()));
            // p = h sinh v links the two charts.
            if let Ok(uv) = uv_coordinates(&traj, s, x) {
                assert!((pq.p - 1.3 * uv.sinh_v()).abs() <= 1e-10 * (1.0 + pq.p.abs()));
                let uv2 = pq_to_uv(&traj, pq).unwrap();
                assert!((uv2.u - uv.u).abs() < 1e-10);
                assert!((uv2.v - uv.v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn linear_trajectory_is_rejected() {
        let lin = Trajectory::linear(1.0).unwrap();
        assert!(uv_coordinates(&lin, 0.0, GroundPoint::new(0.0, 1.0)).is_err());
        assert!(rddot_uv(&lin, 0.0, 0.0).is_err());
        assert!(pq_coordinates(&lin, 0.0, GroundPoint::new(0.0, 1.0)).is_err());
    }
}
