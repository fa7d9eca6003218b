//! Shared scenario builders for the kernel benchmarks.

use dsar_core::forward::{Axis, ScenarioParams, Scene};
use dsar_core::geometry::{GroundPoint, Trajectory};
use dsar_core::Complex64;
use std::f64::consts::PI;

pub fn desk_params() -> ScenarioParams {
    ScenarioParams::new(2.0 * PI * 1e3, 100.0, 100.0).expect("valid desk-scale parameters")
}

pub fn linear_trajectory() -> Trajectory {
    Trajectory::linear(1.0).expect("valid height")
}

pub fn circular_trajectory() -> Trajectory {
    Trajectory::circular(1.0, 1.0).expect("valid circle")
}

pub fn point_scene() -> Scene {
    Scene::single(GroundPoint::new(0.25, 0.5), Complex64::new(1.0, 0.0))
}

pub fn small_axes(traj: &Trajectory) -> (Axis, Axis) {
    let s = dsar_core::forward::default_s_axis(traj, 64).expect("axis");
    let w = dsar_core::forward::default_omega_axis(traj, &desk_params(), 32).expect("axis");
    (s, w)
}
