//! Data formation: the exact raw echo, the windowed-transform oracle, and the
//! linearized forward operators.
//!
//! The raw received signal from point scatterers is
//! `d(t) = sum_k V_k exp(-i w0 (t - 2 R_k(t)/c0)) / (4 pi R_k(t))^2`.
//! Windowing about slow time `s` and Fourier transforming in `t` gives
//! `W0(s, w)`; Taylor-expanding the range to first order inside the window
//! collapses the tau-integral to one window-spectrum lookup per scatterer,
//! which is the linearized model evaluated here. The `Corrected` model keeps
//! the first-order transit-time refinement of the start-stop approximation.

pub mod io;
pub mod window;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DsarError, Result};
use crate::geometry::{range_state, GroundPoint, RangeState, Trajectory};
use crate::quad;
use crate::Complex64;

pub use window::{Window, WindowSpectrum};

/// Forward-model flavor used for data formation and canonical analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForwardModel {
    /// Transmit and receive from the same point (Assumption of zero transit time).
    StartStop,
    /// First-order transit-time correction `T = 2 R/c0 + 2 R Rdot / c0^2`.
    Corrected,
}

impl ForwardModel {
    pub fn grid_model(self) -> GridModel {
        match self {
            ForwardModel::StartStop => GridModel::StartStop,
            ForwardModel::Corrected => GridModel::Corrected,
        }
    }
}

/// Provenance tag carried by a [`DataGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridModel {
    /// Quadrature of the exact signal; no Taylor truncation.
    RawOracle,
    StartStop,
    Corrected,
}

impl GridModel {
    pub fn as_str(self) -> &'static str {
        match self {
            GridModel::RawOracle => "raw-oracle",
            GridModel::StartStop => "start-stop",
            GridModel::Corrected => "corrected",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "raw-oracle" => Ok(GridModel::RawOracle),
            "start-stop" => Ok(GridModel::StartStop),
            "corrected" => Ok(GridModel::Corrected),
            other => Err(DsarError::format(format!("unknown grid model tag '{other}'"))),
        }
    }
}

/// Scenario constants: carrier frequency, wave speed, and window width.
///
/// Units are user-chosen but must be mutually consistent; the platform speed
/// is 1 (linear) or `rho` (circular) in the same length/time units, and `c0`
/// sets the speed ratio. `L` is in carrier-phase units (radians of carrier).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub omega0: f64,
    pub c0: f64,
    #[serde(rename = "L")]
    pub window_half_width: f64,
}

impl ScenarioParams {
    pub fn new(omega0: f64, c0: f64, window_half_width: f64) -> Result<Self> {
        let p = ScenarioParams { omega0, c0, window_half_width };
        p.validate_basic()?;
        Ok(p)
    }

    pub fn validate_basic(&self) -> Result<()> {
        if !(self.omega0 > 0.0) || !self.omega0.is_finite() {
            return Err(DsarError::invalid(format!("omega0 must be positive, got {}", self.omega0)));
        }
        if !(self.c0 > 0.0) || !self.c0.is_finite() {
            return Err(DsarError::invalid(format!("c0 must be positive, got {}", self.c0)));
        }
        if !(self.window_half_width > 0.0) || !self.window_half_width.is_finite() {
            return Err(DsarError::invalid(format!(
                "window half-width L must be positive, got {}",
                self.window_half_width
            )));
        }
        Ok(())
    }

    /// Full validation against a trajectory: the wave must outrun the platform.
    pub fn validate_for(&self, traj: &Trajectory) -> Result<()> {
        self.validate_basic()?;
        if self.c0 <= traj.speed() {
            return Err(DsarError::invalid(format!(
                "wave speed c0 = {} must exceed platform speed {}",
                self.c0,
                traj.speed()
            )));
        }
        Ok(())
    }

    pub fn window(&self) -> Window {
        Window::new(self.window_half_width).expect("validated L > 0")
    }

    /// Half-duration of the analysis window in time units: `2L / omega0`.
    pub fn window_half_duration(&self) -> f64 {
        2.0 * self.window_half_width / self.omega0
    }
}

/// One weighted point scatterer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    pub position: GroundPoint,
    pub amplitude: Complex64,
}

/// Ground reflectivity as a list of weighted point scatterers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scene {
    pub scatterers: Vec<Scatterer>,
}

impl Scene {
    pub fn new(scatterers: Vec<Scatterer>) -> Self {
        Scene { scatterers }
    }

    pub fn single(position: GroundPoint, amplitude: Complex64) -> Self {
        Scene { scatterers: vec![Scatterer { position, amplitude }] }
    }

    pub fn is_empty(&self) -> bool {
        self.scatterers.is_empty()
    }

    /// Convert a raster to point scatterers at cell centers, weighted by cell
    /// area, so that one integration code path serves both scene kinds.
    pub fn from_raster(
        origin: (f64, f64),
        spacing: (f64, f64),
        shape: (usize, usize),
        values: &[Complex64],
    ) -> Result<Self> {
        if !(spacing.0 > 0.0 && spacing.1 > 0.0) {
            return Err(DsarError::invalid("raster spacing must be positive"));
        }
        if values.len() != shape.0 * shape.1 {
            return Err(DsarError::invalid(format!(
                "raster has {} values for shape {}x{}",
                values.len(),
                shape.0,
                shape.1
            )));
        }
        let area = spacing.0 * spacing.1;
        let mut scatterers = Vec::with_capacity(values.len());
        for i in 0..shape.0 {
            for j in 0..shape.1 {
                let v = values[i * shape.1 + j];
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(DsarError::invalid("raster amplitudes must be finite"));
                }
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                scatterers.push(Scatterer {
                    position: GroundPoint::new(
                        origin.0 + (i as f64 + 0.5) * spacing.0,
                        origin.1 + (j as f64 + 0.5) * spacing.1,
                    ),
                    amplitude: v * area,
                });
            }
        }
        Ok(Scene { scatterers })
    }
}

/// Exact raw signal `d(t)` for a point-scatterer scene.
pub fn simulate_raw(traj: &Trajectory, scene: &Scene, params: &ScenarioParams, t: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for sc in &scene.scatterers {
        let r = range_state(traj, sc.position, t).r;
        let phase = -params.omega0 * (t - 2.0 * r / params.c0);
        let denom = (4.0 * PI * r) * (4.0 * PI * r);
        acc += sc.amplitude * Complex64::cis(phase) / denom;
    }
    acc
}

/// Windowed Fourier transform of the exact signal by adaptive quadrature.
///
/// `W0(s, w) = integral e^{i w (t - s)} l(w0 (t - s)) d(t) dt` over the window
/// support; no Taylor truncation and no start-stop shortcut beyond `d(t)`
/// itself. Serves as the oracle the linearized models are compared against.
pub fn windowed_transform_oracle(
    traj: &Trajectory,
    scene: &Scene,
    params: &ScenarioParams,
    s: f64,
    omega: f64,
) -> Result<Complex64> {
    params.validate_for(traj)?;
    if scene.is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let window = params.window();
    let half = params.window_half_duration();
    let mut scale = 0.0;
    for sc in &scene.scatterers {
        let r = range_state(traj, sc.position, s).r;
        scale += sc.amplitude.norm() / ((4.0 * PI * r) * (4.0 * PI * r));
    }
    let eps = (1e-10 * scale * 2.0 * half).max(f64::MIN_POSITIVE);
    quad::integrate_complex(
        |t| {
            let tau = t - s;
            let win = window.eval(params.omega0 * tau);
            if win == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::cis(omega * tau) * win * simulate_raw(traj, scene, params, t)
        },
        s - half,
        s + half,
        eps,
    )
}

/// Per-(s, scatterer) factorization of the linearized kernel: the Doppler
/// center frequency and the frequency-independent amplitude.
#[derive(Debug, Clone, Copy)]
pub struct KernelSample {
    /// Frequency at which the window spectrum is centered for this geometry.
    pub doppler_omega: f64,
    /// `exp(i w0 (2R/c0 - s)) / (4 pi R)^2`, with the transit-time refinement
    /// in the corrected model.
    pub amplitude: Complex64,
}

/// Linearized forward kernel for one unit scatterer, shared by data formation
/// and backprojection. The window spectrum cache must be built before any
/// parallel evaluation; the kernel itself is pure.
pub struct ForwardKernel<'a> {
    traj: Trajectory,
    params: ScenarioParams,
    model: ForwardModel,
    spectrum: &'a WindowSpectrum,
}

impl<'a> ForwardKernel<'a> {
    pub fn new(
        traj: &Trajectory,
        params: &ScenarioParams,
        model: ForwardModel,
        spectrum: &'a WindowSpectrum,
    ) -> Self {
        ForwardKernel { traj: *traj, params: *params, model, spectrum }
    }

    pub fn model(&self) -> ForwardModel {
        self.model
    }

    /// Doppler center and amplitude from an already-computed range state.
    pub fn sample_from_state(&self, st: &RangeState, s: f64) -> KernelSample {
        let w0 = self.params.omega0;
        let c0 = self.params.c0;
        match self.model {
            ForwardModel::StartStop => KernelSample {
                doppler_omega: w0 - 2.0 * w0 * st.r_dot / c0,
                amplitude: Complex64::cis(w0 * (2.0 * st.r / c0 - s))
                    / ((4.0 * PI * st.r) * (4.0 * PI * st.r)),
            },
            ForwardModel::Corrected => KernelSample {
                doppler_omega: w0 - 2.0 * w0 * (st.r_dot / c0 + 0.5 * st.r_sq_ddot() / (c0 * c0)),
                amplitude: Complex64::cis(
                    w0 * (2.0 * (st.r / c0 + st.r * st.r_dot / (c0 * c0)) - s),
                )
                    / ((4.0 * PI * st.r) * (4.0 * PI * st.r)),
            },
        }
    }

    pub fn sample(&self, s: f64, x: GroundPoint) -> KernelSample {
        self.sample_from_state(&range_state(&self.traj, x, s), s)
    }

    /// Kernel value `K(s, w, x)` for a unit scatterer at `x`.
    pub fn eval(&self, s: f64, omega: f64, x: GroundPoint) -> Complex64 {
        let ks = self.sample(s, x);
        self.eval_with(&ks, omega)
    }

    /// Kernel value reusing a precomputed [`KernelSample`].
    #[inline]
    pub fn eval_with(&self, ks: &KernelSample, omega: f64) -> Complex64 {
        let nu = (omega - ks.doppler_omega) / self.params.omega0;
        ks.amplitude * (self.spectrum.eval(nu) / self.params.omega0)
    }

    /// Raw window-spectrum lookup, for callers that factor the kernel
    /// themselves.
    #[inline]
    pub fn spectrum_eval(&self, nu: f64) -> f64 {
        self.spectrum.eval(nu)
    }

    /// Slow cross-check path: evaluate the tau-integral by quadrature instead
    /// of the cached spectrum.
    pub fn eval_tau_quadrature(&self, s: f64, omega: f64, x: GroundPoint) -> Result<Complex64> {
        let ks = self.sample(s, x);
        let window = self.params.window();
        let half = self.params.window_half_duration();
        let phi = omega - ks.doppler_omega;
        let eps = 1e-12 * 2.0 * half;
        let integral = quad::integrate_complex(
            |tau| Complex64::cis(phi * tau) * window.eval(self.params.omega0 * tau),
            -half,
            half,
            eps,
        )?;
        Ok(ks.amplitude * integral)
    }
}

/// Sampling axis with strictly increasing values `start + i * step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub n: usize,
    pub start: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(n: usize, start: f64, step: f64) -> Result<Self> {
        let a = Axis { n, start, step };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(DsarError::invalid("axis must have at least one sample"));
        }
        if !(self.step > 0.0) || !self.step.is_finite() || !self.start.is_finite() {
            return Err(DsarError::invalid(format!(
                "axis must be strictly increasing: start {} step {}",
                self.start, self.step
            )));
        }
        Ok(())
    }

    /// Axis covering `[lo, hi]` inclusively with `n` samples.
    pub fn spanning(n: usize, lo: f64, hi: f64) -> Result<Self> {
        if n < 2 {
            return Err(DsarError::invalid("spanning axis needs at least two samples"));
        }
        Axis::new(n, lo, (hi - lo) / (n - 1) as f64)
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.value(i))
    }

    /// Index of the sample nearest to `v`.
    pub fn nearest(&self, v: f64) -> usize {
        let i = ((v - self.start) / self.step).round();
        (i.max(0.0) as usize).min(self.n - 1)
    }
}

/// Sampled `W(s, omega)` with axis metadata and a model tag.
#[derive(Debug, Clone, PartialEq)]
pub struct DataGrid {
    pub model: GridModel,
    pub params: ScenarioParams,
    pub s_axis: Axis,
    pub omega_axis: Axis,
    /// Row-major in `s`: `values[i_s * n_omega + i_omega]`.
    pub values: Vec<Complex64>,
}

impl DataGrid {
    pub fn zeros(model: GridModel, params: ScenarioParams, s_axis: Axis, omega_axis: Axis) -> Result<Self> {
        s_axis.validate()?;
        omega_axis.validate()?;
        params.validate_basic()?;
        Ok(DataGrid {
            model,
            params,
            s_axis,
            omega_axis,
            values: vec![Complex64::new(0.0, 0.0); s_axis.n * omega_axis.n],
        })
    }

    #[inline]
    pub fn at(&self, i_s: usize, i_omega: usize) -> Complex64 {
        self.values[i_s * self.omega_axis.n + i_omega]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Fraction of samples above `rel` times the grid maximum.
    pub fn occupancy(&self, rel: f64) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        let lim = rel * m;
        let hot = self.values.iter().filter(|v| v.norm() > lim).count();
        hot as f64 / self.values.len() as f64
    }
}

/// Default slow-time aperture: `[-2, 2]` for the linear path, one full turn
/// for the circular path.
pub fn default_s_axis(traj: &Trajectory, n: usize) -> Result<Axis> {
    match traj {
        Trajectory::Linear { .. } => Axis::spanning(n, -2.0, 2.0),
        Trajectory::Circular { .. } => {
            if n == 0 {
                return Err(DsarError::invalid("axis must have at least one sample"));
            }
            Axis::new(n, 0.0, 2.0 * PI / n as f64)
        }
    }
}

/// Default frequency band `omega0 (1 +/- 2.5 speed/c0)`, which covers the
/// Doppler shifts of every visible scatterer with margin.
pub fn default_omega_axis(traj: &Trajectory, params: &ScenarioParams, n: usize) -> Result<Axis> {
    params.validate_for(traj)?;
    let half_band = 2.5 * traj.speed() / params.c0 * params.omega0;
    Axis::spanning(n, params.omega0 - half_band, params.omega0 + half_band)
}

/// Evaluate the linearized forward operator on a grid.
///
/// Each output sample is `sum_k spec((w - w_D(s, x_k)) / w0) / w0 * A_k(s) * V_k`.
/// Rows of the grid are independent and computed in parallel; within a row
/// scatterers are accumulated in scene order, so results are reproducible for
/// any thread count.
pub fn linearized_forward(
    traj: &Trajectory,
    scene: &Scene,
    params: &ScenarioParams,
    s_axis: Axis,
    omega_axis: Axis,
    model: ForwardModel,
) -> Result<DataGrid> {
    params.validate_for(traj)?;
    s_axis.validate()?;
    omega_axis.validate()?;
    let spectrum = WindowSpectrum::shared(&params.window())?;
    let kernel = ForwardKernel::new(traj, params, model, &spectrum);
    let mut grid = DataGrid::zeros(model.grid_model(), *params, s_axis, omega_axis)?;

    let n_omega = omega_axis.n;
    grid.values
        .par_chunks_mut(n_omega)
        .enumerate()
        .for_each(|(i_s, row)| {
            let s = s_axis.value(i_s);
            for sc in &scene.scatterers {
                let ks = kernel.sample(s, sc.position);
                for (i_w, out) in row.iter_mut().enumerate() {
                    let omega = omega_axis.value(i_w);
                    *out += kernel.eval_with(&ks, omega) * sc.amplitude;
                }
            }
        });
    Ok(grid)
}

/// Sample the exact windowed transform on a grid (slow; for cross-checks).
pub fn oracle_grid(
    traj: &Trajectory,
    scene: &Scene,
    params: &ScenarioParams,
    s_axis: Axis,
    omega_axis: Axis,
) -> Result<DataGrid> {
    params.validate_for(traj)?;
    s_axis.validate()?;
    omega_axis.validate()?;
    let rows: Vec<Result<Vec<Complex64>>> = (0..s_axis.n)
        .into_par_iter()
        .map(|i_s| {
            let s = s_axis.value(i_s);
            (0..omega_axis.n)
                .map(|i_w| windowed_transform_oracle(traj, scene, params, s, omega_axis.value(i_w)))
                .collect()
        })
        .collect();
    let mut grid = DataGrid::zeros(GridModel::RawOracle, *params, s_axis, omega_axis)?;
    for (i_s, row) in rows.into_iter().enumerate() {
        let row = row?;
        grid.values[i_s * omega_axis.n..(i_s + 1) * omega_axis.n].copy_from_slice(&row);
    }
    Ok(grid)
}
