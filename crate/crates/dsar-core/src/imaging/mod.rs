//! Backprojection imaging with beam-pattern masking.
//!
//! The image is the discrete adjoint of the linearized forward operator
//! applied to the data, with an optional ramp filter and a beam weight that
//! restricts which `(s, x)` pairs contribute:
//!
//! ```text
//! I(x) = sum_{s, w} beam(s, x) conj(K(s, w, x)) F(w) W(s, w) ds dw
//! ```
//!
//! Side-looking and angular-mask beams implement the artifact-suppression
//! criteria: for a linear track, keeping one side of the ground track removes
//! the left-right ambiguity; for a circular track, excluding looks along the
//! direction of travel and gating the range keeps the imaging inside the
//! region where the relation is an injective canonical graph.

pub mod io;
pub mod metrics;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DsarError, Result};
use crate::forward::window::smooth_ramp;
use crate::forward::{DataGrid, ForwardKernel, ForwardModel, GridModel, WindowSpectrum};
use crate::geometry::{e_tangent, range_state, GroundPoint, Trajectory};
use crate::Complex64;

pub use metrics::{artifact_metrics, ArtifactReport, ScattererMetrics, EXCLUSION_RADIUS_CELLS};

/// Illumination mask applied during backprojection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BeamPattern {
    Isotropic,
    /// Keep the `x2 > 0` side of a linear track (the `q > 0` side for a
    /// circular one), with a smooth taper of the given width.
    LeftLooking { taper: f64 },
    RightLooking { taper: f64 },
    /// Keep looks with `|u| < u_max`, i.e. away from the direction of travel.
    AngularMask { u_max: f64, taper: f64 },
    /// Keep ground points within `max_radius` of the scene origin.
    RangeGate { max_radius: f64, taper: f64 },
}

impl BeamPattern {
    pub fn validate(&self) -> Result<()> {
        let taper = match self {
            BeamPattern::Isotropic => return Ok(()),
            BeamPattern::LeftLooking { taper } | BeamPattern::RightLooking { taper } => *taper,
            BeamPattern::AngularMask { u_max, taper } => {
                if !(*u_max > 0.0 && *u_max < 1.0) {
                    return Err(DsarError::invalid(format!(
                        "angular mask u_max must lie in (0, 1), got {u_max}"
                    )));
                }
                *taper
            }
            BeamPattern::RangeGate { max_radius, taper } => {
                if !(*max_radius > 0.0) {
                    return Err(DsarError::invalid("range gate radius must be positive"));
                }
                *taper
            }
        };
        if !(taper > 0.0) || !taper.is_finite() {
            return Err(DsarError::invalid(format!("beam taper must be positive, got {taper}")));
        }
        Ok(())
    }
}

/// Beam weight in `[0, 1]`, smooth in `x` for fixed `s`.
pub fn beam_weight(beam: &BeamPattern, traj: &Trajectory, s: f64, x: GroundPoint) -> f64 {
    match *beam {
        BeamPattern::Isotropic => 1.0,
        BeamPattern::LeftLooking { taper } => smooth_ramp(side_coordinate(traj, s, x) / taper),
        BeamPattern::RightLooking { taper } => smooth_ramp(-side_coordinate(traj, s, x) / taper),
        BeamPattern::AngularMask { u_max, taper } => {
            let u = -range_state(traj, x, s).r_dot / traj.speed();
            smooth_ramp((u_max - u.abs()) / taper)
        }
        BeamPattern::RangeGate { max_radius, taper } => {
            smooth_ramp((max_radius - x.norm()) / taper)
        }
    }
}

/// Signed cross-track coordinate: `x2` for a linear path, `x . e_perp / rho`
/// for a circular one.
fn side_coordinate(traj: &Trajectory, s: f64, x: GroundPoint) -> f64 {
    match *traj {
        Trajectory::Linear { .. } => x.x2,
        Trajectory::Circular { radius, .. } => x.to_vector().dot(&e_tangent(s)) / radius,
    }
}

/// The left-right mirror map of the linear track:
/// `(x1, x2, xi1, xi2) -> (x1, -x2, xi1, -xi2)`. An involution; its graph is
/// where the uncompensated artifact energy lands.
pub fn predict_mirror_artifact(x: GroundPoint, xi: [f64; 2]) -> (GroundPoint, [f64; 2]) {
    (GroundPoint::new(x.x1, -x.x2), [xi[0], -xi[1]])
}

/// Regular image raster; `origin` is the center of cell `(0, 0)` and values
/// are row-major in the `x1` index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageGrid {
    pub origin: (f64, f64),
    pub spacing: (f64, f64),
    pub shape: (usize, usize),
}

impl ImageGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.spacing.0 > 0.0 && self.spacing.1 > 0.0) {
            return Err(DsarError::invalid("image spacing must be positive"));
        }
        if self.shape.0 == 0 || self.shape.1 == 0 {
            return Err(DsarError::invalid("image must have at least one cell"));
        }
        Ok(())
    }

    /// Square grid centered on the origin of the ground plane, cells
    /// symmetric under `x2 -> -x2`.
    pub fn centered(half_extent: f64, n: usize) -> Result<Self> {
        if n < 2 || !(half_extent > 0.0) {
            return Err(DsarError::invalid("centered grid needs n >= 2 and positive extent"));
        }
        let spacing = 2.0 * half_extent / (n - 1) as f64;
        let grid = ImageGrid {
            origin: (-half_extent, -half_extent),
            spacing: (spacing, spacing),
            shape: (n, n),
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn cell_center(&self, i1: usize, i2: usize) -> GroundPoint {
        GroundPoint::new(
            self.origin.0 + i1 as f64 * self.spacing.0,
            self.origin.1 + i2 as f64 * self.spacing.1,
        )
    }

    pub fn len(&self) -> usize {
        self.shape.0 * self.shape.1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell whose center is nearest to `x` (clamped to the raster).
    pub fn nearest_cell(&self, x: GroundPoint) -> (usize, usize) {
        let i1 = ((x.x1 - self.origin.0) / self.spacing.0).round().clamp(0.0, (self.shape.0 - 1) as f64);
        let i2 = ((x.x2 - self.origin.1) / self.spacing.1).round().clamp(0.0, (self.shape.1 - 1) as f64);
        (i1 as usize, i2 as usize)
    }
}

/// Backprojected reflectivity estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub grid: ImageGrid,
    pub values: Vec<Complex64>,
}

impl Image {
    #[inline]
    pub fn at(&self, i1: usize, i2: usize) -> Complex64 {
        self.values[i1 * self.grid.shape.1 + i2]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Optional spectral filter applied before the adjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageFilter {
    None,
    /// `|omega - omega0| + 1e-3 omega0`, regularized away from the band center.
    Ramp,
}

const RAMP_EPSILON_REL: f64 = 1e-3;

fn filter_weights(grid: &DataGrid, filter: ImageFilter) -> Vec<f64> {
    let w0 = grid.params.omega0;
    grid.omega_axis
        .values()
        .map(|w| match filter {
            ImageFilter::None => 1.0,
            ImageFilter::Ramp => (w - w0).abs() + RAMP_EPSILON_REL * w0,
        })
        .collect()
}

fn kernel_model_for(grid: &DataGrid) -> ForwardModel {
    match grid.model {
        GridModel::StartStop => ForwardModel::StartStop,
        GridModel::Corrected => ForwardModel::Corrected,
        // Oracle data is imaged with the adjoint of the linearized model.
        GridModel::RawOracle => ForwardModel::StartStop,
    }
}

fn backproject_value(
    kernel: &ForwardKernel,
    grid: &DataGrid,
    beam: &BeamPattern,
    traj: &Trajectory,
    filter: &[f64],
    measure: f64,
    x: GroundPoint,
) -> Complex64 {
    let w0 = grid.params.omega0;
    let mut acc = Complex64::new(0.0, 0.0);
    for i_s in 0..grid.s_axis.n {
        let s = grid.s_axis.value(i_s);
        let weight = beam_weight(beam, traj, s, x);
        if weight < 1e-14 {
            continue;
        }
        let ks = kernel.sample(s, x);
        let row = &grid.values[i_s * grid.omega_axis.n..(i_s + 1) * grid.omega_axis.n];
        let mut inner = Complex64::new(0.0, 0.0);
        for (i_w, value) in row.iter().enumerate() {
            let nu = (grid.omega_axis.value(i_w) - ks.doppler_omega) / w0;
            inner += value * (kernel.spectrum_eval(nu) * filter[i_w]);
        }
        acc += ks.amplitude.conj() * inner * (weight / w0);
    }
    acc * measure
}

/// Backproject a data grid onto an image raster.
///
/// Cells are independent and computed in parallel; the reduction over the
/// data grid inside each cell is sequential in a fixed order, so the result
/// is identical for any thread count.
pub fn backproject(
    grid: &DataGrid,
    traj: &Trajectory,
    image_grid: ImageGrid,
    beam: &BeamPattern,
    filter: ImageFilter,
) -> Result<Image> {
    image_grid.validate()?;
    beam.validate()?;
    grid.params.validate_for(traj)?;
    grid.s_axis.validate()?;
    grid.omega_axis.validate()?;
    if grid.values.len() != grid.s_axis.n * grid.omega_axis.n {
        return Err(DsarError::invalid("data grid dimensions do not match its axes"));
    }

    let spectrum = WindowSpectrum::shared(&grid.params.window())?;
    let kernel = ForwardKernel::new(traj, &grid.params, kernel_model_for(grid), &spectrum);
    let filter_w = filter_weights(grid, filter);
    let measure = grid.s_axis.step * grid.omega_axis.step;

    let n2 = image_grid.shape.1;
    let mut values = vec![Complex64::new(0.0, 0.0); image_grid.len()];
    values
        .par_chunks_mut(n2)
        .enumerate()
        .for_each(|(i1, row)| {
            for (i2, out) in row.iter_mut().enumerate() {
                let x = image_grid.cell_center(i1, i2);
                *out = backproject_value(&kernel, grid, beam, traj, &filter_w, measure, x);
            }
        });
    Ok(Image { grid: image_grid, values })
}

/// Backprojected values at arbitrary ground points (used by the adjoint
/// pairing tests and the metrics).
pub fn backproject_at_points(
    grid: &DataGrid,
    traj: &Trajectory,
    points: &[GroundPoint],
    beam: &BeamPattern,
    filter: ImageFilter,
) -> Result<Vec<Complex64>> {
    beam.validate()?;
    grid.params.validate_for(traj)?;
    if grid.values.len() != grid.s_axis.n * grid.omega_axis.n {
        return Err(DsarError::invalid("data grid dimensions do not match its axes"));
    }
    let spectrum = WindowSpectrum::shared(&grid.params.window())?;
    let kernel = ForwardKernel::new(traj, &grid.params, kernel_model_for(grid), &spectrum);
    let filter_w = filter_weights(grid, filter);
    let measure = grid.s_axis.step * grid.omega_axis.step;
    Ok(points
        .iter()
        .map(|x| backproject_value(&kernel, grid, beam, traj, &filter_w, measure, *x))
        .collect())
}
