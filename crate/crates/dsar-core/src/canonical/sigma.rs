//! The degeneracy locus of the projection Jacobians.
//!
//! For the linear path the locus is the ground track `{x2 = 0}`. For the
//! circular path it is cut out, in `(p, q)` coordinates, by the cubic
//! `g(p, q) = p^3 - h^2 (p^2 + q^2) + h^2 p - h^4`, equivalently by
//! `f(u, v) = h^2 + (u^2 - 1) h sinh v` in the `(u, v)` chart. The second
//! stratum sits on `q = 0`, where the slow-time derivative
//! `g_s = -3 rho^2 q (p^2 + h^2)` also vanishes.

use serde::Serialize;

use crate::canonical::coords::{
    pq_coordinates, sigma_defining_f, uv_coordinates, PqCoords, UvCoords,
};
use crate::error::{DsarError, Result};
use crate::geometry::{GroundPoint, Trajectory};

/// Relative tolerance for membership in the locus.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Stratum of the degeneracy locus a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    /// Projections have full rank here.
    Regular,
    /// First rank-drop stratum.
    Sigma1,
    /// Iterated stratum (circular path, `q = 0`); cusp points of the right

    /// projection live here.
    Sigma11,
}

/// Evaluation of the locus-defining functions at one `(s, x)`.
#[derive(Debug, Clone, Serialize)]
pub struct SigmaReport {
    /// Value of the defining function (`x2` for linear, the cubic for circular).
    pub defining_value: f64,
    /// Natural magnitude of the defining function at this point; membership
    /// is judged relative to it.
    pub defining_scale: f64,
    pub is_member: bool,
    pub stratum: Stratum,
    /// Circular-path chart data; `None` for the linear path.
    pub uv: Option<UvCoords>,
    pub pq: Option<PqCoords>,
    /// `f(u, v)` in the Doppler chart.
    pub f_uv: Option<f64>,
    /// The cubic `g(p, q)`.
    pub g_cubic: Option<f64>,
    /// Slow-time derivative `g_s = -3 rho^2 q (p^2 + h^2)`.
    pub g_s: Option<f64>,
}

/// The cubic `g(p, q) = p^3 - h^2 (p^2 + q^2) + h^2 p - h^4`.
pub fn g_cubic(h: f64, pq: PqCoords) -> f64 {
    let (p, q) = (pq.p, pq.q);
    p * p * p - h * h * (p * p + q * q) + h * h * p - h * h * h * h
}

/// Gradient of the cubic: `(3p^2 - 2h^2 p + h^2, -2 h^2 q)`.
pub fn g_cubic_grad(h: f64, pq: PqCoords) -> (f64, f64) {
    (3.0 * pq.p * pq.p - 2.0 * h * h * pq.p + h * h, -2.0 * h * h * pq.q)
}

/// Natural magnitude of the cubic at a point: the sum of its monomials in
/// absolute value, so membership thresholds scale with position.
pub fn g_cubic_scale(h: f64, pq: PqCoords) -> f64 {
    let (p, q) = (pq.p.abs(), pq.q.abs());
    p * p * p + h * h * (p * p + q * q) + h * h * p + h * h * h * h
}

/// `g_s` in `(p, q)` coordinates.
pub fn g_s_pq(rho: f64, h: f64, pq: PqCoords) -> f64 {
    -3.0 * rho * rho * pq.q * (pq.p * pq.p + h * h)
}

/// Evaluate the locus-defining functions and classify the stratum.
pub fn sigma_evaluate(traj: &Trajectory, s: f64, x: GroundPoint) -> Result<SigmaReport> {
    match *traj {
        Trajectory::Linear { .. } => {
            let scale = 1.0 + x.norm();
            let member = x.x2.abs() <= MEMBERSHIP_TOL * scale;
            Ok(SigmaReport {
                defining_value: x.x2,
                defining_scale: scale,
                is_member: member,
                stratum: if member { Stratum::Sigma1 } else { Stratum::Regular },
                uv: None,
                pq: None,
                f_uv: None,
                g_cubic: None,
                g_s: None,
            })
        }
        Trajectory::Circular { radius, height_ratio } => {
            let uv = uv_coordinates(traj, s, x)?;
            let pq = pq_coordinates(traj, s, x)?;
            let g = g_cubic(height_ratio, pq);
            let scale = g_cubic_scale(height_ratio, pq);
            let member = g.abs() <= MEMBERSHIP_TOL * scale;
            let on_q0 = pq.q.abs() <= MEMBERSHIP_TOL * (1.0 + pq.p.abs());
            let stratum = if member && on_q0 {
                Stratum::Sigma11
            } else if member {
                Stratum::Sigma1
            } else {
                Stratum::Regular
            };
            Ok(SigmaReport {
                defining_value: g,
                defining_scale: scale,
                is_member: member,
                stratum,
                uv: Some(uv),
                pq: Some(pq),
                f_uv: Some(sigma_defining_f(height_ratio, uv.u, uv.v)),
                g_cubic: Some(g),
                g_s: Some(g_s_pq(radius, height_ratio, pq)),
            })
        }
    }
}

/// Root of the cubic on `q = 0` by bisection; the unique real root, where the
/// iterated stratum sits.
pub fn sigma11_root(h: f64) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(DsarError::invalid("height ratio must be positive"));
    }
    let g = |p: f64| g_cubic(h, PqCoords { p, q: 0.0 });
    let mut lo = 0.0;
    let mut hi = h * h + 1.0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(DsarError::numerical("failed to bracket the q = 0 root"));
        }
    }
    debug_assert!(g(lo) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Explicit branch of the locus: `q(p) = +/- sqrt((p - h^2)(p^2 + h^2)) / h`
/// for `p >= h^2`. Used as an independent oracle for the continuation sampler.
pub fn sigma_q_for_p(h: f64, p: f64) -> Option<f64> {
    let disc = (p - h * h) * (p * p + h * h);
    if disc < 0.0 {
        return None;
    }
    Some(disc.sqrt() / h)
}

/// Sample `n` points of the locus by predictor-corrector continuation along
/// `{g = 0}`, starting from the `q = 0` root and marching both branches.
///
/// The cubic is smooth with nonvanishing gradient on the locus, so plain
/// Newton correction along the gradient converges in a few steps.
pub fn sample_sigma_curve(h: f64, n: usize, p_max: f64) -> Result<Vec<PqCoords>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let p0 = sigma11_root(h)?;
    if !(p_max > p0) {
        return Err(DsarError::invalid(format!(
            "p_max = {p_max} must exceed the q = 0 root {p0}"
        )));
    }

    let correct = |mut pt: PqCoords| -> Result<PqCoords> {
        for _ in 0..20 {
            let g = g_cubic(h, pt);
            let scale = g_cubic_scale(h, pt);
            if g.abs() <= 1e-13 * scale {
                return Ok(pt);
            }
            let (gp, gq) = g_cubic_grad(h, pt);
            let n2 = gp * gp + gq * gq;
            if n2 == 0.0 {
                return Err(DsarError::numerical("vanishing gradient during continuation"));
            }
            pt = PqCoords { p: pt.p - g * gp / n2, q: pt.q - g * gq / n2 };
        }
        Err(DsarError::numerical("continuation corrector failed to converge"))
    };

    // Arc length is comparable to the p-span on each branch.
    let per_branch = n.div_ceil(2);
    let step = 2.0 * (p_max - p0) / per_branch as f64;
    let mut out = Vec::with_capacity(n);
    for branch_sign in [1.0, -1.0] {
        let mut pt = PqCoords { p: p0, q: 0.0 };
        // Leave the q = 0 root along the branch with the requested q sign.
        let mut dir_prev = (0.0, branch_sign);
        for _ in 0..per_branch {
            if out.len() >= n {
                break;
            }
            let (gp, gq) = g_cubic_grad(h, pt);
            let norm = (gp * gp + gq * gq).sqrt();
            let mut tangent = (-gq / norm, gp / norm);
            if tangent.0 * dir_prev.0 + tangent.1 * dir_prev.1 < 0.0 {
                tangent = (-tangent.0, -tangent.1);
            }
            let predicted = PqCoords { p: pt.p + step * tangent.0, q: pt.q + step * tangent.1 };
            pt = correct(predicted)?;
            dir_prev = tangent;
            out.push(pt);
            if pt.p > p_max {
                break;
            }
        }
    }
    Ok(out)
}
