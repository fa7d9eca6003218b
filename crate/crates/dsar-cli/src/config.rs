//! Scenario configuration: a single JSON document, schema `dsar-config/1`,
//! unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use dsar_core::canonical::region_thresholds;
use dsar_core::forward::{Axis, GridModel, ScenarioParams, Scatterer, Scene};
use dsar_core::geometry::{GroundPoint, Trajectory};
use dsar_core::imaging::{BeamPattern, ImageFilter, ImageGrid};
use dsar_core::{Complex64, DsarError};

pub const SCHEMA: &str = "dsar-config/1";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: String,
    pub trajectory: TrajectorySpec,
    pub params: ParamsSpec,
    pub model: String,
    pub scene: SceneSpec,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub beam: Option<BeamSpec>,
    #[serde(default)]
    pub image: Option<ImageSpec>,
    #[serde(default)]
    pub analyze: Option<AnalyzeSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    Linear { height: f64 },
    Circular { radius: f64, height_ratio: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub omega0: f64,
    pub c0: f64,
    #[serde(rename = "L")]
    pub window_half_width: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, untagged)]
pub enum SceneSpec {
    Scatterers {
        scatterers: Vec<ScattererSpec>,
    },
    Raster {
        raster_path: PathBuf,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererSpec {
    pub position: [f64; 2],
    /// Complex amplitude as `[re, im]`.
    pub amplitude: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub s: AxisSpec,
    pub omega: AxisSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub n: usize,
    pub start: f64,
    pub step: f64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BeamSpec {
    Isotropic,
    LeftLooking { taper: f64 },
    RightLooking { taper: f64 },
    AngularMask { u_max: f64, taper: f64 },
    RangeGate { max_radius: f64, taper: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageSpec {
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub shape: [usize; 2],
    #[serde(default)]
    pub filter: Option<FilterSpec>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterSpec {
    None,
    Ramp,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSpec {
    #[serde(default = "default_sigma_samples")]
    pub sigma_samples: usize,
    #[serde(default = "default_classify_samples")]
    pub classify_samples: usize,
}

fn default_sigma_samples() -> usize {
    1000
}

fn default_classify_samples() -> usize {
    20
}

/// Everything a command needs, validated and with defaults resolved.
#[derive(Debug)]
pub struct ResolvedConfig {
    pub trajectory: Trajectory,
    pub params: ScenarioParams,
    pub model: GridModel,
    pub scene: Scene,
    pub s_axis: Axis,
    pub omega_axis: Axis,
    pub beam: BeamPattern,
    pub image_grid: ImageGrid,
    pub filter: ImageFilter,
    pub sigma_samples: usize,
    pub classify_samples: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> DsarError {
    DsarError::invalid(format!("config field `{field}`: {msg}"))
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, DsarError> {
        serde_json::from_str(text).map_err(|e| DsarError::invalid(format!("config parse: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, DsarError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Validate and resolve defaults. `config_dir` anchors relative raster
    /// paths.
    pub fn resolve(&self, config_dir: &Path) -> Result<ResolvedConfig, DsarError> {
        if self.schema != SCHEMA {
            return Err(invalid(
                "schema",
                format!("expected \"{SCHEMA}\", got \"{}\"", self.schema),
            ));
        }
        let trajectory = match self.trajectory {
            TrajectorySpec::Linear { height } => Trajectory::linear(height),
            TrajectorySpec::Circular { radius, height_ratio } => {
                Trajectory::circular(radius, height_ratio)
            }
        }
        .map_err(|e| invalid("trajectory", e))?;

        let params = ScenarioParams::new(
            self.params.omega0,
            self.params.c0,
            self.params.window_half_width,
        )
        .map_err(|e| invalid("params", e))?;
        params
            .validate_for(&trajectory)
            .map_err(|e| invalid("params", e))?;

        let model = GridModel::parse(&self.model).map_err(|e| invalid("model", e))?;

        let scene = match &self.scene {
            SceneSpec::Scatterers { scatterers } => {
                let mut list = Vec::with_capacity(scatterers.len());
                for (i, sc) in scatterers.iter().enumerate() {
                    let amp = Complex64::new(sc.amplitude[0], sc.amplitude[1]);
                    if !(amp.re.is_finite() && amp.im.is_finite())
                        || !sc.position.iter().all(|v| v.is_finite())
                    {
                        return Err(invalid(
                            &format!("scene.scatterers[{i}]"),
                            "position and amplitude must be finite",
                        ));
                    }
                    list.push(Scatterer {
                        position: GroundPoint::new(sc.position[0], sc.position[1]),
                        amplitude: amp,
                    });
                }
                Scene::new(list)
            }
            SceneSpec::Raster { raster_path } => {
                let path = if raster_path.is_absolute() {
                    raster_path.clone()
                } else {
                    config_dir.join(raster_path)
                };
                load_raster(&path)?
            }
        };

        let (s_axis, omega_axis) = match &self.grid {
            Some(g) => {
                let s = Axis::new(g.s.n, g.s.start, g.s.step).map_err(|e| invalid("grid.s", e))?;
                let w = Axis::new(g.omega.n, g.omega.start, g.omega.step)
                    .map_err(|e| invalid("grid.omega", e))?;
                (s, w)
            }
            None => (
                dsar_core::forward::default_s_axis(&trajectory, 256)
                    .map_err(|e| invalid("grid", e))?,
                dsar_core::forward::default_omega_axis(&trajectory, &params, 128)
                    .map_err(|e| invalid("grid", e))?,
            ),
        };

        let beam = match &self.beam {
            None => BeamPattern::Isotropic,
            Some(BeamSpec::Isotropic) => BeamPattern::Isotropic,
            Some(BeamSpec::LeftLooking { taper }) => BeamPattern::LeftLooking { taper: *taper },
            Some(BeamSpec::RightLooking { taper }) => BeamPattern::RightLooking { taper: *taper },
            Some(BeamSpec::AngularMask { u_max, taper }) => {
                BeamPattern::AngularMask { u_max: *u_max, taper: *taper }
            }
            Some(BeamSpec::RangeGate { max_radius, taper }) => {
                BeamPattern::RangeGate { max_radius: *max_radius, taper: *taper }
            }
        };
        beam.validate().map_err(|e| invalid("beam", e))?;

        let (image_grid, filter) = match &self.image {
            Some(spec) => {
                let grid = ImageGrid {
                    origin: (spec.origin[0], spec.origin[1]),
                    spacing: (spec.spacing[0], spec.spacing[1]),
                    shape: (spec.shape[0], spec.shape[1]),
                };
                grid.validate().map_err(|e| invalid("image", e))?;
                let filter = match spec.filter.unwrap_or(FilterSpec::Ramp) {
                    FilterSpec::None => ImageFilter::None,
                    FilterSpec::Ramp => ImageFilter::Ramp,
                };
                (grid, filter)
            }
            None => {
                // 96 x 96 over the illuminated neighborhood of the scene.
                let half = match trajectory {
                    Trajectory::Linear { .. } => 1.5,
                    Trajectory::Circular { .. } => {
                        0.75 * region_thresholds(&trajectory).expect("circular").1
                    }
                };
                (
                    ImageGrid::centered(half, 96).map_err(|e| invalid("image", e))?,
                    ImageFilter::Ramp,
                )
            }
        };

        Ok(ResolvedConfig {
            trajectory,
            params,
            model,
            scene,
            s_axis,
            omega_axis,
            beam,
            image_grid,
            filter,
            sigma_samples: self.analyze.as_ref().map(|a| a.sigma_samples).unwrap_or(1000),
            classify_samples: self.analyze.as_ref().map(|a| a.classify_samples).unwrap_or(20),
            output_dir: self.output_dir.clone().unwrap_or_else(|| PathBuf::from(".")),
            seed: self.seed.unwrap_or(0),
        })
    }
}

/// Raster file: header line `origin_x,origin_y,dx,dy,n1,n2`, then `n1 * n2`
/// lines `re,im`, row-major in the first ground coordinate.
pub fn load_raster(path: &Path) -> Result<Scene, DsarError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| DsarError::format("raster file is empty"))?;
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    if fields.len() != 6 {
        return Err(DsarError::format(
            "raster header must be `origin_x,origin_y,dx,dy,n1,n2`",
        ));
    }
    let parse = |i: usize| -> Result<f64, DsarError> {
        fields[i]
            .parse::<f64>()
            .map_err(|e| DsarError::format(format!("raster header field {i}: {e}")))
    };
    let origin = (parse(0)?, parse(1)?);
    let spacing = (parse(2)?, parse(3)?);
    let n1 = fields[4]
        .parse::<usize>()
        .map_err(|e| DsarError::format(format!("raster header n1: {e}")))?;
    let n2 = fields[5]
        .parse::<usize>()
        .map_err(|e| DsarError::format(format!("raster header n2: {e}")))?;
    let mut values = Vec::with_capacity(n1 * n2);
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(DsarError::format(format!("raster line {}: expected `re,im`", ln + 2)));
        }
        let re = parts[0]
            .parse::<f64>()
            .map_err(|e| DsarError::format(format!("raster line {}: {e}", ln + 2)))?;
        let im = parts[1]
            .parse::<f64>()
            .map_err(|e| DsarError::format(format!("raster line {}: {e}", ln + 2)))?;
        values.push(Complex64::new(re, im));
    }
    if values.len() != n1 * n2 {
        return Err(DsarError::format(format!(
            "raster has {} values, header promises {}",
            values.len(),
            n1 * n2
        )));
    }
    Scene::from_raster(origin, spacing, (n1, n2), &values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_config() -> String {
        r#"{
            "schema": "dsar-config/1",
            "trajectory": {"linear": {"height": 1.0}},
            "params": {"omega0": 6283.0, "c0": 100.0, "L": 100.0},
            "model": "start-stop",
            "scene": {"scatterers": [{"position": [0.25, 0.5], "amplitude": [1.0, 0.0]}]}
        }"#
        .to_string()
    }

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let cfg = ScenarioConfig::from_json(&minimal_config()).unwrap();
        let resolved = cfg.resolve(Path::new(".")).unwrap();
        assert_eq!(resolved.s_axis.n, 256);
        assert_eq!(resolved.omega_axis.n, 128);
        assert_eq!(resolved.image_grid.shape, (96, 96));
        assert!(matches!(resolved.beam, BeamPattern::Isotropic));
        assert_eq!(resolved.seed, 0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = minimal_config().replace("\"model\"", "\"extra\": 1, \"model\"");
        assert!(ScenarioConfig::from_json(&bad).is_err());
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let bad = minimal_config().replace("dsar-config/1", "dsar-config/2");
        let cfg = ScenarioConfig::from_json(&bad).unwrap();
        assert!(cfg.resolve(Path::new(".")).is_err());
    }

    #[test]
    fn slow_wave_is_rejected() {
        let bad = minimal_config().replace("\"c0\": 100.0", "\"c0\": 0.5");
        let cfg = ScenarioConfig::from_json(&bad).unwrap();
        let err = cfg.resolve(Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("params"), "{err}");
    }

    #[test]
    fn unknown_model_is_rejected() {
        let bad = minimal_config().replace("start-stop", "stop-start");
        let cfg = ScenarioConfig::from_json(&bad).unwrap();
        assert!(cfg.resolve(Path::new(".")).is_err());
    }

    #[test]
    fn raster_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("raster.csv");
        std::fs::write(&path, "0.0,0.0,0.5,0.5,2,2\n1,0\n0,0\n0,2\n1,1\n").unwrap();
        let scene = load_raster(&path).unwrap();
        assert_eq!(scene.scatterers.len(), 3);
        let short = dir.path().join("short.csv");
        std::fs::write(&short, "0.0,0.0,0.5,0.5,2,2\n1,0\n").unwrap();
        assert!(load_raster(&short).is_err());
    }
}
