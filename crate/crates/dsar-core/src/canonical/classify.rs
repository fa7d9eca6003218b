//! Numerical fold / blowdown / cusp classification of the projection maps.
//!
//! Everything is done in a 4-dimensional chart on the canonical relation:
//! `(s, tau, x1, x2)` for the linear path, `(s, tau, u, v)` for the circular
//! path (where the degeneracy concentrates in `v`). The projection is treated
//! as a black-box map `R^4 -> R^4`; its Jacobian is assembled by central
//! differences, the kernel comes from an SVD, and the singularity class is
//! read off from how the kernel pairs with the gradient of the Jacobian
//! determinant:
//!
//! - fold: `<d det, V> != 0` at the point;
//! - blowdown: the pairing vanishes at the point and along a curve inside the
//!   degeneracy locus;
//! - cusp: the pairing vanishes only at the point, its derivative along the
//!   kernel field does not, and the locus gradients are independent.

use nalgebra::{Matrix4, Vector4};
use serde::Serialize;

use crate::canonical::coords::{pq_coordinates, uv_coordinates, uv_to_ground};
use crate::canonical::sigma::g_cubic_grad;
use crate::canonical::{canonical_lift, CanonicalPoint};
use crate::error::{DsarError, Result};
use crate::forward::{ForwardModel, ScenarioParams};
use crate::geometry::{GroundPoint, Trajectory};

/// Which factor of the canonical relation to project onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Data phase space `(s, omega, sigma, tau)`.
    Left,
    /// Scene phase space `(x, xi)`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularityClass {
    Fold,
    Blowdown,
    Cusp,
    Unresolved,
}

/// Scale-aware tolerances: the vanishing conditions are exact statements, so
/// numerics need thresholds relative to local magnitudes.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// A point counts as singular when the smallest singular value is below
    /// this times the largest.
    pub corank_tol: f64,
    /// Newton target for staying on the degeneracy locus, relative to the
    /// local determinant scale.
    pub det_tol: f64,
    /// Fold pairing threshold, relative to `|grad det|`.
    pub fold_tol: f64,
    /// Cusp second-pairing threshold, relative to `|grad det|`.
    pub cusp_tol: f64,
    /// Points sampled on each side when walking the locus.
    pub curve_points: usize,
    /// Chart-space step between curve samples.
    pub curve_step: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            corank_tol: 1e-6,
            det_tol: 1e-6,
            fold_tol: 1e-4,
            cusp_tol: 1e-4,
            curve_points: 3,
            curve_step: 0.02,
        }
    }
}

/// Outcome with the numbers the decision was based on.
#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub class: SingularityClass,
    pub singular_values: [f64; 4],
    pub corank: usize,
    /// `|<grad det, V>| / |grad det|` at the point.
    pub fold_pairing: f64,
    /// Largest pairing seen along the locus curve, when walked.
    pub curve_pairing_max: Option<f64>,
    /// `|<d<d det, V>, V>| / |grad det|`, when evaluated.
    pub cusp_pairing: Option<f64>,
    /// Normalized independence of the locus gradients, when evaluated.
    pub gradient_independence: Option<f64>,
    pub note: String,
}

#[derive(Clone, Copy)]
enum ChartKind {
    LinearGround,
    CircularUv,
}

struct Chart<'a> {
    traj: &'a Trajectory,
    params: &'a ScenarioParams,
    model: ForwardModel,
    projection: Projection,
    kind: ChartKind,
    /// Row normalization frozen at the base point so the determinant is a
    /// smooth, well-scaled function on the chart.
    row_scales: [f64; 4],
}

impl<'a> Chart<'a> {
    fn lift(&self, p: &[f64; 4]) -> Result<CanonicalPoint> {
        let (s, tau) = (p[0], p[1]);
        let x = match self.kind {
            ChartKind::LinearGround => GroundPoint::new(p[2], p[3]),
            ChartKind::CircularUv => uv_to_ground(self.traj, s, p[2], p[3])?,
        };
        canonical_lift(self.traj, s, tau, x, self.params, self.model)
    }

    fn map(&self, p: &[f64; 4]) -> Result<[f64; 4]> {
        let cp = self.lift(p)?;
        Ok(match self.projection {
            Projection::Left => [cp.s, cp.omega, cp.sigma, cp.tau],
            Projection::Right => [cp.x.x1, cp.x.x2, cp.xi[0], cp.xi[1]],
        })
    }

    /// Central-difference Jacobian, rows scaled by the frozen normalization.
    fn jacobian(&self, p: &[f64; 4]) -> Result<Matrix4<f64>> {
        let mut jac = Matrix4::zeros();
        for j in 0..4 {
            let h = 1e-5 * (1.0 + p[j].abs());
            let mut plus = *p;
            let mut minus = *p;
            plus[j] += h;
            minus[j] -= h;
            let fp = self.map(&plus)?;
            let fm = self.map(&minus)?;
            for i in 0..4 {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h) / self.row_scales[i];
            }
        }
        Ok(jac)
    }

    fn det(&self, p: &[f64; 4]) -> Result<f64> {
        Ok(self.jacobian(p)?.determinant())
    }

    /// Hadamard-style determinant scale: product of row norms.
    fn det_scale(&self, jac: &Matrix4<f64>) -> f64 {
        (0..4)
            .map(|i| jac.row(i).norm().max(1e-12))
            .product()
    }

    fn grad_det(&self, p: &[f64; 4]) -> Result<Vector4<f64>> {
        let mut g = Vector4::zeros();
        for j in 0..4 {
            let h = 1e-3 * (1.0 + p[j].abs());
            let mut plus = *p;
            let mut minus = *p;
            plus[j] += h;
            minus[j] -= h;
            g[j] = (self.det(&plus)? - self.det(&minus)?) / (2.0 * h);
        }
        Ok(g)
    }
}

fn svd_kernel(jac: &Matrix4<f64>) -> ([f64; 4], Vector4<f64>) {
    let svd = jac.svd(false, true);
    let sv = svd.singular_values;
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut kernel: Vector4<f64> = v_t.row(3).transpose();
    // Deterministic sign: first appreciable component positive.
    let max = kernel.amax();
    for c in kernel.iter() {
        if c.abs() > 1e-10 * max {
            if *c < 0.0 {
                kernel = -kernel;
            }
            break;
        }
    }
    ([sv[0], sv[1], sv[2], sv[3]], kernel)
}

/// Kernel field near the locus, sign-aligned with a reference vector.
fn kernel_at(chart: &Chart, p: &[f64; 4], align: &Vector4<f64>) -> Result<Vector4<f64>> {
    let (_, mut v) = svd_kernel(&chart.jacobian(p)?);
    if v.dot(align) < 0.0 {
        v = -v;
    }
    Ok(v)
}

/// Newton-project a chart point onto the zero set of the determinant.
///
/// Converges well past `det_tol` so the corank test at the projected point
/// has headroom over the finite-difference noise floor.
fn project_to_locus(chart: &Chart, mut p: [f64; 4], opts: &ClassifyOptions) -> Result<[f64; 4]> {
    for _ in 0..16 {
        let jac = chart.jacobian(&p)?;
        let d = jac.determinant();
        if d.abs() <= 0.05 * opts.det_tol * chart.det_scale(&jac) {
            return Ok(p);
        }
        let g = chart.grad_det(&p)?;
        let n2 = g.norm_squared();
        if n2 == 0.0 {
            return Err(DsarError::numerical("determinant gradient vanished during projection"));
        }
        for j in 0..4 {
            p[j] -= d * g[j] / n2;
        }
    }
    Err(DsarError::numerical("failed to project onto the degeneracy locus"))
}

/// Classify the singularity of a projection at a point of the degeneracy
/// locus, given in ground coordinates.
#[allow(clippy::too_many_arguments)]
pub fn classify_singularity(
    traj: &Trajectory,
    params: &ScenarioParams,
    s: f64,
    tau: f64,
    x: GroundPoint,
    projection: Projection,
    model: ForwardModel,
    opts: &ClassifyOptions,
) -> Result<Classification> {
    params.validate_for(traj)?;
    if tau == 0.0 || !tau.is_finite() {
        return Err(DsarError::invalid("tau must be nonzero"));
    }

    let (kind, p0) = match traj {
        Trajectory::Linear { .. } => (ChartKind::LinearGround, [s, tau, x.x1, x.x2]),
        Trajectory::Circular { .. } => {
            let uv = uv_coordinates(traj, s, x)?;
            (ChartKind::CircularUv, [s, tau, uv.u, uv.v])
        }
    };
    let mut chart = Chart {
        traj,
        params,
        model,
        projection,
        kind,
        row_scales: [1.0; 4],
    };
    // Freeze row scales from the raw Jacobian at the base point.
    let raw = chart.jacobian(&p0)?;
    for i in 0..4 {
        chart.row_scales[i] = raw.row(i).norm().max(1e-300);
    }

    let jac = chart.jacobian(&p0)?;
    let (sv, kernel) = svd_kernel(&jac);
    let corank = sv.iter().filter(|v| **v < opts.corank_tol * sv[0]).count();
    let mut out = Classification {
        class: SingularityClass::Unresolved,
        singular_values: sv,
        corank,
        fold_pairing: f64::NAN,
        curve_pairing_max: None,
        cusp_pairing: None,
        gradient_independence: None,
        note: String::new(),
    };
    if corank != 1 {
        out.note = format!(
            "need corank exactly 1, found {corank} (singular values {:?})",
            sv
        );
        return Ok(out);
    }

    let grad = chart.grad_det(&p0)?;
    let grad_norm = grad.norm();
    if grad_norm == 0.0 {
        out.note = "determinant gradient vanished; locus is not cut out simply here".into();
        return Ok(out);
    }
    let pairing = grad.dot(&kernel).abs() / grad_norm;
    out.fold_pairing = pairing;
    if pairing > opts.fold_tol {
        out.class = SingularityClass::Fold;
        return Ok(out);
    }

    // Pairing vanishes at the point. Walk the locus along the kernel direction
    // (tangent to it here) and watch whether the pairing stays zero.
    let normal = grad / grad_norm;
    let mut tangent = kernel - normal * kernel.dot(&normal);
    if tangent.norm() < 0.5 {
        out.note = "kernel nearly normal to the locus after pairing vanished; inconsistent".into();
        return Ok(out);
    }
    tangent /= tangent.norm();

    let mut curve_max: f64 = 0.0;
    let mut curve_ok = true;
    for sign in [-1.0, 1.0] {
        for k in 1..=opts.curve_points {
            let mut probe = p0;
            for j in 0..4 {
                probe[j] += sign * k as f64 * opts.curve_step * tangent[j];
            }
            let on_locus = match project_to_locus(&chart, probe, opts) {
                Ok(p) => p,
                Err(e) => {
                    out.note = format!("locus walk failed: {e}");
                    curve_ok = false;
                    break;
                }
            };
            let jac_c = chart.jacobian(&on_locus)?;
            let (sv_c, kernel_c) = svd_kernel(&jac_c);
            if sv_c[3] >= opts.corank_tol * sv_c[0] * 10.0 {
                // Walked off the singular set; treat as non-blowdown evidence.
                curve_max = curve_max.max(1.0);
                continue;
            }
            let g_c = chart.grad_det(&on_locus)?;
            let pairing_c = g_c.dot(&kernel_c).abs() / g_c.norm().max(1e-300);
            curve_max = curve_max.max(pairing_c);
        }
    }
    if curve_ok {
        out.curve_pairing_max = Some(curve_max);
        if curve_max <= opts.fold_tol {
            out.class = SingularityClass::Blowdown;
            return Ok(out);
        }
    }

    // Cusp test: derivative of the pairing along the kernel field.
    let h = opts.curve_step;
    let psi = |p: &[f64; 4]| -> Result<f64> {
        let v = kernel_at(&chart, p, &kernel)?;
        Ok(chart.grad_det(p)?.dot(&v))
    };
    let mut plus = p0;
    let mut minus = p0;
    for j in 0..4 {
        plus[j] += h * kernel[j];
        minus[j] -= h * kernel[j];
    }
    let dpsi = (psi(&plus)? - psi(&minus)?) / (2.0 * h);
    let cusp_pairing = dpsi.abs() / grad_norm;
    out.cusp_pairing = Some(cusp_pairing);

    let independence = match traj {
        Trajectory::Circular { radius, height_ratio } => {
            let pq = pq_coordinates(traj, s, x)?;
            let (gp, gq) = g_cubic_grad(*height_ratio, pq);
            // grad of g_s = -3 rho^2 q (p^2 + h^2) in (p, q).
            let gsp = -6.0 * radius * radius * pq.q * pq.p;
            let gsq = -3.0 * radius * radius * (pq.p * pq.p + height_ratio * height_ratio);
            let cross = (gp * gsq - gq * gsp).abs();
            cross / ((gp.hypot(gq)) * (gsp.hypot(gsq))).max(1e-300)
        }
        Trajectory::Linear { .. } => {
            // Generic check: gradients of det and of the pairing field.
            let gpsi = {
                let mut g = Vector4::zeros();
                for j in 0..4 {
                    let hh = 1e-3 * (1.0 + p0[j].abs());
                    let mut a = p0;
                    let mut b = p0;
                    a[j] += hh;
                    b[j] -= hh;
                    g[j] = (psi(&a)? - psi(&b)?) / (2.0 * hh);
                }
                g
            };
            let wedge = (grad.norm_squared() * gpsi.norm_squared()
                - grad.dot(&gpsi) * grad.dot(&gpsi))
            .max(0.0)
            .sqrt();
            wedge / (grad.norm() * gpsi.norm()).max(1e-300)
        }
    };
    out.gradient_independence = Some(independence);

    if cusp_pairing > opts.cusp_tol && independence > 1e-3 {
        out.class = SingularityClass::Cusp;
    } else {
        out.note = format!(
            "no class matched: fold pairing {pairing:.3e}, curve max {:?}, cusp pairing {cusp_pairing:.3e}, independence {independence:.3e}",
            out.curve_pairing_max
        );
    }
    Ok(out)
}
