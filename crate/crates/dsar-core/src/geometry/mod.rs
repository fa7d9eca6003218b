//! Flight trajectories and the range function.
//!
//! The range vector from the antenna at slow time `s` to a ground point
//! `x = (x1, x2)` is `(x, 0) - gamma(s)`; its length `R` and the slow-time
//! derivatives `R`, `Rdot`, `Rddot`, `Rdddot` together with their ground-plane
//! gradients drive everything else in the crate. Both model paths admit closed
//! forms; [`fd`] provides the finite-difference oracle they are tested against.

pub mod fd;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{DsarError, Result};

/// A point on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPoint {
    pub x1: f64,
    pub x2: f64,
}

impl GroundPoint {
    pub fn new(x1: f64, x2: f64) -> Self {
        GroundPoint { x1, x2 }
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.x1, self.x2)
    }

    pub fn from_vector(v: Vector2<f64>) -> Self {
        GroundPoint { x1: v.x, x2: v.y }
    }

    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn distance(self, other: GroundPoint) -> f64 {
        (self.x1 - other.x1).hypot(self.x2 - other.x2)
    }
}

/// Antenna flight path, strictly above the ground plane.
///
/// The linear path is `gamma(s) = (s, 0, h)` (unit speed, height `h`); the
/// circular path is `gamma(s) = (rho cos s, rho sin s, rho h)` with radius
/// `rho` and dimensionless height parameter `h` (altitude `rho h`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trajectory {
    Linear { height: f64 },
    Circular { radius: f64, height_ratio: f64 },
}

impl Trajectory {
    pub fn linear(height: f64) -> Result<Self> {
        if !(height > 0.0) || !height.is_finite() {
            return Err(DsarError::invalid(format!(
                "linear trajectory requires height > 0, got {height}"
            )));
        }
        Ok(Trajectory::Linear { height })
    }

    pub fn circular(radius: f64, height_ratio: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(DsarError::invalid(format!(
                "circular trajectory requires radius > 0, got {radius}"
            )));
        }
        if !(height_ratio > 0.0) || !height_ratio.is_finite() {
            return Err(DsarError::invalid(format!(
                "circular trajectory requires height ratio > 0, got {height_ratio}"
            )));
        }
        Ok(Trajectory::Circular { radius, height_ratio })
    }

    /// Platform speed `|gamma'(s)|` (constant for both model paths).
    pub fn speed(&self) -> f64 {
        match self {
            Trajectory::Linear { .. } => 1.0,
            Trajectory::Circular { radius, .. } => *radius,
        }
    }

    /// Altitude of the path above the ground plane.
    pub fn altitude(&self) -> f64 {
        match self {
            Trajectory::Linear { height } => *height,
            Trajectory::Circular { radius, height_ratio } => radius * height_ratio,
        }
    }

    /// `gamma(s)` and its slow-time derivatives up to order 3, in closed form.
    pub fn state(&self, s: f64, order: u32) -> Result<Vector3<f64>> {
        if order > 3 {
            return Err(DsarError::invalid(format!(
                "derivative order must be in 0..=3, got {order}"
            )));
        }
        Ok(match *self {
            Trajectory::Linear { height } => match order {
                0 => Vector3::new(s, 0.0, height),
                1 => Vector3::new(1.0, 0.0, 0.0),
                _ => Vector3::zeros(),
            },
            Trajectory::Circular { radius, height_ratio } => {
                let (sin, cos) = s.sin_cos();
                match order {
                    0 => Vector3::new(radius * cos, radius * sin, radius * height_ratio),
                    1 => Vector3::new(-radius * sin, radius * cos, 0.0),
                    2 => Vector3::new(-radius * cos, -radius * sin, 0.0),
                    _ => Vector3::new(radius * sin, -radius * cos, 0.0),
                }
            }
        })
    }

    pub fn position(&self, s: f64) -> Vector3<f64> {
        self.state(s, 0).expect("order 0 is always valid")
    }

    pub fn velocity(&self, s: f64) -> Vector3<f64> {
        self.state(s, 1).expect("order 1 is always valid")
    }
}

/// Unit vector `e(s) = (cos s, sin s)` toward the antenna's ground track.
pub fn e_radial(s: f64) -> Vector2<f64> {
    let (sin, cos) = s.sin_cos();
    Vector2::new(cos, sin)
}

/// Unit vector `e_perp(s) = (-sin s, cos s)`, the direction of travel.
pub fn e_tangent(s: f64) -> Vector2<f64> {
    let (sin, cos) = s.sin_cos();
    Vector2::new(-sin, cos)
}

/// Range function and derivatives at one `(trajectory, x, s)` triple.
///
/// `r` is strictly positive (the path stays above the ground) and
/// `|r_dot| <= platform speed`. Gradients are with respect to the ground
/// coordinates `(x1, x2)` at fixed `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeState {
    pub r: f64,
    pub r_dot: f64,
    pub r_ddot: f64,
    pub r_dddot: f64,
    pub grad_r: Vector2<f64>,
    pub grad_r_dot: Vector2<f64>,
    pub grad_r_ddot: Vector2<f64>,
    pub grad_r_dddot: Vector2<f64>,
}

impl RangeState {
    /// `(R^2)'' = 2 (Rdot^2 + R Rddot)`.
    pub fn r_sq_ddot(&self) -> f64 {
        2.0 * (self.r_dot * self.r_dot + self.r * self.r_ddot)
    }

    /// `(R^2)''' = 6 Rdot Rddot + 2 R Rdddot`.
    pub fn r_sq_dddot(&self) -> f64 {
        6.0 * self.r_dot * self.r_ddot + 2.0 * self.r * self.r_dddot
    }

    /// `grad (R^2)'' = 2 (2 Rdot grad Rdot + Rddot grad R + R grad Rddot)`.
    pub fn grad_r_sq_ddot(&self) -> Vector2<f64> {
        2.0 * (2.0 * self.r_dot * self.grad_r_dot
            + self.r_ddot * self.grad_r
            + self.r * self.grad_r_ddot)
    }
}

/// Closed-form range state for either model trajectory.
pub fn range_state(traj: &Trajectory, x: GroundPoint, s: f64) -> RangeState {
    match *traj {
        Trajectory::Linear { height } => linear_range_state(height, x, s),
        Trajectory::Circular { radius, height_ratio } => {
            circular_range_state(radius, height_ratio, x, s)
        }
    }
}

fn linear_range_state(h: f64, x: GroundPoint, s: f64) -> RangeState {
    let d = x.x1 - s;
    let b = x.x2 * x.x2 + h * h;
    let r2 = d * d + b;
    let r = r2.sqrt();
    let (r3, r5, r7) = (r2 * r, r2 * r2 * r, r2 * r2 * r2 * r);

    RangeState {
        r,
        r_dot: -d / r,
        r_ddot: b / r3,
        r_dddot: 3.0 * b * d / r5,
        grad_r: Vector2::new(d / r, x.x2 / r),
        grad_r_dot: Vector2::new(-b / r3, d * x.x2 / r3),
        grad_r_ddot: Vector2::new(-3.0 * d * b / r5, (2.0 * x.x2 * r2 - 3.0 * x.x2 * b) / r5),
        grad_r_dddot: Vector2::new(
            3.0 * b * (r2 - 5.0 * d * d) / r7,
            3.0 * d * x.x2 * (2.0 * r2 - 5.0 * b) / r7,
        ),
    }
}

fn circular_range_state(rho: f64, h: f64, x: GroundPoint, s: f64) -> RangeState {
    let e = e_radial(s);
    let ep = e_tangent(s);
    let xv = x.to_vector();
    let w = xv - rho * e;
    let a = xv.dot(&e);
    let b = xv.dot(&ep);
    let r2 = w.norm_squared() + rho * rho * h * h;
    let r = r2.sqrt();
    let (r3, r5, r7) = (r2 * r, r2 * r2 * r, r2 * r2 * r2 * r);
    let rho2 = rho * rho;
    let rho3 = rho2 * rho;

    RangeState {
        r,
        r_dot: -rho * b / r,
        r_ddot: rho * a / r - rho2 * b * b / r3,
        // Obtained by one more s-derivative of Rddot, using e' = e_perp,
        // e_perp' = -e.
        r_dddot: rho * b / r + 3.0 * rho2 * a * b / r3 - 3.0 * rho3 * b * b * b / r5,
        grad_r: w / r,
        grad_r_dot: -rho * ep / r + rho * b * w / r3,
        grad_r_ddot: rho * (e / r - a * w / r3) - rho2 * (2.0 * b * ep / r3 - 3.0 * b * b * w / r5),
        grad_r_dddot: rho * (ep / r - b * w / r3)
            + 3.0 * rho2 * ((b * e + a * ep) / r3 - 3.0 * a * b * w / r5)
            - 3.0 * rho3 * (3.0 * b * b * ep / r5 - 5.0 * b * b * b * w / r7),
    }
}
