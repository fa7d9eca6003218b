//! The microlocal analyzer: canonical lifts, projection Jacobians, the
//! degeneracy locus, singularity classification, and injectivity analysis.
//!
//! The forward operator moves singularities along a canonical relation
//! parametrized by `(s, tau, x)`:
//!
//! ```text
//! (s, w0 - 2 w0 Rdot/c0, 2 w0 tau Rddot/c0, tau; x, -2 tau w0 grad Rdot / c0)
//! ```
//!
//! (start-stop model; the corrected model replaces `Rdot` by
//! `Rdot/c0 + (R^2)''/(2 c0^2)` terms throughout). The projections onto data
//! and scene phase space drop rank on a locus `Sigma`; how their kernels meet
//! `Sigma` decides whether backprojection artifacts are spread out (fold),
//! concentrated (blowdown), or of intermediate cusp type.

pub mod classify;
pub mod coords;
pub mod fiber;
pub mod sigma;

use nalgebra::Vector2;
use serde::Serialize;

use crate::error::{DsarError, Result};
use crate::forward::{ForwardModel, ScenarioParams};
use crate::geometry::{range_state, GroundPoint, RangeState, Trajectory};

pub use classify::{
    classify_singularity, Classification, ClassifyOptions, Projection, SingularityClass,
};
pub use coords::{
    pq_coordinates, pq_to_ground, pq_to_uv, rddot_uv, uv_coordinates, uv_to_ground, PqCoords,
    UvCoords,
};
pub use fiber::{brute_force_injectivity, left_fiber_search, GroundRect, InjectivityReport};
pub use sigma::{sample_sigma_curve, sigma11_root, sigma_evaluate, SigmaReport, Stratum};

/// One point of the canonical relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalPoint {
    pub s: f64,
    /// Frequency on the critical set: the received Doppler-shifted carrier.
    pub omega: f64,
    /// Dual of `s`.
    pub sigma: f64,
    /// Dual of `omega`; never zero on the relation.
    pub tau: f64,
    pub x: GroundPoint,
    /// Scene covector; never zero on the relation.
    pub xi: [f64; 2],
}

fn require_tau(tau: f64) -> Result<()> {
    if tau == 0.0 || !tau.is_finite() {
        return Err(DsarError::invalid(format!("tau must be nonzero and finite, got {tau}")));
    }
    Ok(())
}

/// `Gamma' = grad Rdot / c0 + [Rddot grad R + 2 Rdot grad Rdot + R grad Rddot] / c0^2`,
/// the covector whose `-2 tau w0` multiple is `xi` in the corrected model.
pub fn gamma_dot(st: &RangeState, c0: f64) -> Vector2<f64> {
    st.grad_r_dot / c0
        + (st.r_ddot * st.grad_r + 2.0 * st.r_dot * st.grad_r_dot + st.r * st.grad_r_ddot)
            / (c0 * c0)
}

/// `Gamma'' = grad Rddot / c0 +
/// [Rdddot grad R + 3 Rddot grad Rdot + 3 Rdot grad Rddot + R grad Rdddot] / c0^2`.
pub fn gamma_ddot(st: &RangeState, c0: f64) -> Vector2<f64> {
    st.grad_r_ddot / c0
        + (st.r_dddot * st.grad_r
            + 3.0 * st.r_ddot * st.grad_r_dot
            + 3.0 * st.r_dot * st.grad_r_ddot
            + st.r * st.grad_r_dddot)
            / (c0 * c0)
}

/// Start-stop analogues of `Gamma'`/`Gamma''`: just the scaled gradients.
fn gamma_pair(st: &RangeState, c0: f64, model: ForwardModel) -> (Vector2<f64>, Vector2<f64>) {
    match model {
        ForwardModel::StartStop => (st.grad_r_dot / c0, st.grad_r_ddot / c0),
        ForwardModel::Corrected => (gamma_dot(st, c0), gamma_ddot(st, c0)),
    }
}

/// Lift `(s, tau, x)` to the canonical relation of the chosen model.
pub fn canonical_lift(
    traj: &Trajectory,
    s: f64,
    tau: f64,
    x: GroundPoint,
    params: &ScenarioParams,
    model: ForwardModel,
) -> Result<CanonicalPoint> {
    require_tau(tau)?;
    params.validate_for(traj)?;
    let st = range_state(traj, x, s);
    let w0 = params.omega0;
    let c0 = params.c0;
    let (omega, sigma, xi) = match model {
        ForwardModel::StartStop => {
            let omega = w0 - 2.0 * w0 * st.r_dot / c0;
            let sigma = 2.0 * w0 * tau * st.r_ddot / c0;
            let xi = -2.0 * tau * w0 * st.grad_r_dot / c0;
            (omega, sigma, xi)
        }
        ForwardModel::Corrected => {
            let c2 = c0 * c0;
            let omega = w0 - 2.0 * w0 * (st.r_dot / c0 + 0.5 * st.r_sq_ddot() / c2);
            let sigma = 2.0 * tau * w0 * (st.r_ddot / c0 + 0.5 * st.r_sq_dddot() / c2);
            let xi = -2.0 * tau * w0 * (st.grad_r_dot / c0 + 0.5 * st.grad_r_sq_ddot() / c2);
            (omega, sigma, xi)
        }
    };
    Ok(CanonicalPoint { s, omega, sigma, tau, x, xi: [xi.x, xi.y] })
}

/// Determinant of the `(s, tau) -> xi` block of the right projection, with
/// the common `-2 w0 tau` column factors normalized out:
/// `4 w0^2 det(Gamma', Gamma'')`.
///
/// For the linear start-stop case this equals
/// `(4 w0^2 / (c0^2 R^6)) x2 (x2^2 + h^2)`, vanishing exactly on the ground
/// track; the corrected model reproduces the same expression because the two
/// `c0^-2` bracket combinations vanish identically on a straight path.
pub fn right_projection_det(
    traj: &Trajectory,
    s: f64,
    tau: f64,
    x: GroundPoint,
    params: &ScenarioParams,
    model: ForwardModel,
) -> Result<f64> {
    require_tau(tau)?;
    params.validate_for(traj)?;
    let st = range_state(traj, x, s);
    let (gd, gdd) = gamma_pair(&st, params.c0, model);
    Ok(4.0 * params.omega0 * params.omega0 * (gd.x * gdd.y - gd.y * gdd.x))
}

/// Safety label of a ground point for the circular path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionLabel {
    /// `|x| < rho (h^2 + 1) / 2`: the left projection is injective and the
    /// relation is a canonical graph; backprojection is artifact-free here.
    InjectiveSafe,
    /// `rho (h^2 + 1) / 2 <= |x| < rho (h^2 + 1)`: still a local canonical
    /// graph, but injectivity is no longer guaranteed.
    GraphSafe,
    /// On the outer threshold to working precision.
    Boundary,
    Unsafe,
}

/// Thresholds `(rho (h^2+1)/2, rho (h^2+1))` for the circular path.
pub fn region_thresholds(traj: &Trajectory) -> Result<(f64, f64)> {
    match *traj {
        Trajectory::Circular { radius, height_ratio } => {
            let outer = radius * (height_ratio * height_ratio + 1.0);
            Ok((0.5 * outer, outer))
        }
        Trajectory::Linear { .. } => {
            Err(DsarError::invalid("region check applies to circular trajectories"))
        }
    }
}

/// Classify a ground point against the circular-path safety regions.
pub fn region_check(traj: &Trajectory, x: GroundPoint) -> Result<RegionLabel> {
    let (inner, outer) = region_thresholds(traj)?;
    let r = x.norm();
    if (r - outer).abs() <= 1e-12 * outer {
        return Ok(RegionLabel::Boundary);
    }
    Ok(if r < inner {
        RegionLabel::InjectiveSafe
    } else if r < outer {
        RegionLabel::GraphSafe
    } else {
        RegionLabel::Unsafe
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fd::fd_derivative;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn params() -> ScenarioParams {
        ScenarioParams::new(2.0 * PI * 1e3, 100.0, 100.0).unwrap()
    }

    #[test]
    fn lift_requires_nonzero_tau() {
        let traj = Trajectory::linear(1.0).unwrap();
        let err = canonical_lift(&traj, 0.0, 0.0, GroundPoint::new(0.0, 1.0), &params(), ForwardModel::StartStop);
        assert!(err.is_err());
        assert!(right_projection_det(&traj, 0.0, 0.0, GroundPoint::new(0.0, 1.0), &params(), ForwardModel::StartStop).is_err());
    }

    #[test]
    fn lift_frequency_is_carrier_when_doppler_vanishes() {
        let traj = Trajectory::linear(1.0).unwrap();
        let p = params();
        let s = 0.4;
        let cp = canonical_lift(&traj, s, 1.0, GroundPoint::new(s, 2.0), &p, ForwardModel::StartStop).unwrap();
        assert!((cp.omega - p.omega0).abs() <= 1e-12 * p.omega0);
    }

    #[test]
    fn xi_never_vanishes_on_the_relation() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for traj in [Trajectory::linear(1.0).unwrap(), Trajectory::circular(1.0, 1.0).unwrap()] {
            for model in [ForwardModel::StartStop, ForwardModel::Corrected] {
                for _ in 0..200 {
                    let x = GroundPoint::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
                    let s = rng.random_range(-3.0..3.0);
                    let tau = rng.random_range(0.2..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    let cp = canonical_lift(&traj, s, tau, x, &p, model).unwrap();
                    let xi_norm = cp.xi[0].hypot(cp.xi[1]);
                    assert!(xi_norm > 1e-12, "{traj:?} {model:?}: xi = {:?}", cp.xi);
                }
            }
        }
    }

    #[test]
    fn lift_is_homogeneous_in_tau() {
        let traj = Trajectory::circular(1.0, 1.0).unwrap();
        let p = params();
        let x = GroundPoint::new(0.4, -0.6);
        let a = canonical_lift(&traj, 1.0, 1.0, x, &p, ForwardModel::StartStop).unwrap();
        let b = canonical_lift(&traj, 1.0, 2.0, x, &p, ForwardModel::StartStop).unwrap();
        assert_eq!(a.omega, b.omega);
        assert_eq!(a.s, b.s);
        assert!((b.sigma - 2.0 * a.sigma).abs() <= 1e-12 * a.sigma.abs().max(1e-300));
        assert!((b.xi[0] - 2.0 * a.xi[0]).abs() <= 1e-12 * a.xi[0].abs());
        assert!((b.xi[1] - 2.0 * a.xi[1]).abs() <= 1e-12 * a.xi[1].abs().max(1e-300));
    }

    #[test]
    fn right_det_closed_form_on_linear_path() {
        let traj = Trajectory::linear(1.0).unwrap();
        let p = params();
        // At x = (0, 1), s = 0: R^2 = 2, so det = 4 w0^2 * 2 / (c0^2 * 8).
        let det = right_projection_det(&traj, 0.0, 1.0, GroundPoint::new(0.0, 1.0), &p, ForwardModel::StartStop).unwrap();
        let expect = (p.omega0 / p.c0).powi(2);
        assert!((det - expect).abs() <= 1e-12 * expect, "{det} vs {expect}");
        // Vanishes on the ground track.
        let on = right_projection_det(&traj, 0.3, 1.0, GroundPoint::new(5.0, 0.0), &p, ForwardModel::StartStop).unwrap();
        assert_eq!(on, 0.0);
    }

    #[test]
    fn right_det_matches_fd_jacobian_of_xi() {
        // The actual FD determinant of (s, tau) -> xi equals -tau times the
        // normalized closed form.
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for traj in [Trajectory::linear(1.0).unwrap(), Trajectory::circular(1.0, 1.0).unwrap()] {
            for model in [ForwardModel::StartStop, ForwardModel::Corrected] {
                for _ in 0..50 {
                    let x = GroundPoint::new(rng.random_range(-2.0..2.0), rng.random_range(0.2..2.0));
                    let s = rng.random_range(-2.0..2.0);
                    let tau = rng.random_range(0.5..1.5);
                    let xi = |st: &[f64]| -> Vec<f64> {
                        let cp = canonical_lift(&traj, st[0], st[1], x, &p, model).unwrap();
                        vec![cp.xi[0], cp.xi[1]]
                    };
                    let jac = crate::geometry::fd::fd_jacobian(&xi, &[s, tau], 2, &[1e-5, 1e-5]).unwrap();
                    let fd_det = jac[0] * jac[3] - jac[1] * jac[2];
                    let closed = right_projection_det(&traj, s, tau, x, &p, model).unwrap();
                    let scale = (jac[0].hypot(jac[2])) * (jac[1].hypot(jac[3]));
                    assert!(
                        (fd_det / (-tau) - closed).abs() <= 1e-5 * scale.max(closed.abs()),
                        "{traj:?} {model:?}: fd {} vs closed {closed}",
                        fd_det / (-tau)
                    );
                }
            }
        }
    }

    #[test]
    fn corrected_linear_brackets_vanish() {
        // The two c0^-2 combinations in Gamma'/Gamma'' are identically zero on
        // a straight path, so the corrected xi equals the start-stop xi.
        let traj = Trajectory::linear(1.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..300 {
            let x = GroundPoint::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let s = rng.random_range(-3.0..3.0);
            let st = range_state(&traj, x, s);
            let b1 = st.r_ddot * st.grad_r + 2.0 * st.r_dot * st.grad_r_dot + st.r * st.grad_r_ddot;
            let b2 = st.r_dddot * st.grad_r
                + 3.0 * st.r_ddot * st.grad_r_dot
                + 3.0 * st.r_dot * st.grad_r_ddot
                + st.r * st.grad_r_dddot;
            let scale1 = st.r_ddot.abs() * st.grad_r.norm()
                + 2.0 * st.r_dot.abs() * st.grad_r_dot.norm()
                + st.r * st.grad_r_ddot.norm();
            let scale2 = st.r_dddot.abs() * st.grad_r.norm()
                + 3.0 * st.r_ddot.abs() * st.grad_r_dot.norm()
                + 3.0 * st.r_dot.abs() * st.grad_r_ddot.norm()
                + st.r * st.grad_r_dddot.norm();
            assert!(b1.norm() <= 1e-10 * scale1.max(1e-300), "{b1:?} vs scale {scale1}");
            assert!(b2.norm() <= 1e-10 * scale2.max(1e-300), "{b2:?} vs scale {scale2}");
        }
    }

    #[test]
    fn left_and_right_projections_degenerate_together() {
        // det(D pi_L) and det(D pi_R) vanish on the same set: compare the
        // normalized right det with the FD determinant of the left projection
        // over the ground coordinates.
        let p = params();
        let traj = Trajectory::circular(1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..80 {
            let x = GroundPoint::new(rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5));
            let s = rng.random_range(0.0..2.0 * PI);
            let tau = 1.0;
            let left_block = |pt: &[f64]| -> Vec<f64> {
                let cp = canonical_lift(&traj, s, tau, GroundPoint::new(pt[0], pt[1]), &p, ForwardModel::StartStop).unwrap();
                vec![cp.omega, cp.sigma]
            };
            let jac = crate::geometry::fd::fd_jacobian(&left_block, &[x.x1, x.x2], 2, &[1e-6, 1e-6]).unwrap();
            let left_det = jac[0] * jac[3] - jac[1] * jac[2];
            let right_det = right_projection_det(&traj, s, tau, x, &p, ForwardModel::StartStop).unwrap();
            let left_scale = jac[0].hypot(jac[1]) * jac[2].hypot(jac[3]);
            let right_scale = {
                let st = range_state(&traj, x, s);
                let w0c = 2.0 * p.omega0 / p.c0;
                (w0c * st.grad_r_dot.norm()) * (w0c * st.grad_r_ddot.norm())
            };
            let left_rel = left_det.abs() / left_scale.max(1e-300);
            let right_rel = right_det.abs() / right_scale.max(1e-300);
            // Both normalized determinants are small together or large together.
            if left_rel < 1e-7 {
                assert!(right_rel < 1e-4, "left {left_rel} right {right_rel} at {x:?} s {s}");
            }
            if left_rel > 1e-3 {
                assert!(right_rel > 1e-7, "left {left_rel} right {right_rel} at {x:?} s {s}");
            }
        }
    }

    #[test]
    fn fd_det_of_left_projection_vanishes_exactly_on_sigma() {
        // Cross-check det(D pi_L) against the analytic dRddot/dv factor on the
        // degeneracy locus.
        let traj = Trajectory::circular(1.0, 1.0).unwrap();
        let h = 1.0;
        for u in [0.0f64, 0.3, -0.5] {
            let v = (h / (1.0 - u * u)).asinh();
            let dv = coords::rddot_uv_dv(&traj, u, v).unwrap();
            assert!(dv.abs() < 1e-13);
            let fd = fd_derivative(
                &|pt: &[f64]| rddot_uv(&traj, u, pt[0]).unwrap(),
                &[v],
                &[1.0],
                1,
                1e-6,
            )
            .unwrap();
            assert!(fd.abs() < 1e-8, "u = {u}: fd dRddot/dv = {fd}");
        }
    }

    #[test]
    fn region_labels_follow_thresholds() {
        let traj = Trajectory::circular(1.0, 1.0).unwrap();
        // Thresholds are 1 and 2 for rho = h = 1.
        assert_eq!(region_check(&traj, GroundPoint::new(0.0, 0.0)).unwrap(), RegionLabel::InjectiveSafe);
        assert_eq!(region_check(&traj, GroundPoint::new(1.5, 0.0)).unwrap(), RegionLabel::GraphSafe);
        assert_eq!(region_check(&traj, GroundPoint::new(0.0, 3.0)).unwrap(), RegionLabel::Unsafe);
        assert_eq!(region_check(&traj, GroundPoint::new(2.0, 0.0)).unwrap(), RegionLabel::Boundary);
        // 0.75 of the outer radius: graph-safe but not injective-safe.
        assert_eq!(region_check(&traj, GroundPoint::new(1.5, 0.0)).unwrap(), RegionLabel::GraphSafe);
        assert!(region_check(&Trajectory::linear(1.0).unwrap(), GroundPoint::new(0.0, 0.0)).is_err());
    }
}
