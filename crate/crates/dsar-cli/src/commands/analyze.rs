//! `dsar analyze`: locate the degeneracy locus, classify the projection
//! singularities, and report safety regions and injectivity scans.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use dsar_core::canonical::{
    brute_force_injectivity, classify_singularity, fiber::injectivity_v_cap, pq_to_ground,
    pq_to_uv, region_check, region_thresholds, right_projection_det, sample_sigma_curve,
    sigma11_root, ClassifyOptions, PqCoords, Projection,
};
use dsar_core::forward::{ForwardModel, GridModel};
use dsar_core::geometry::{GroundPoint, Trajectory};

use crate::commands::ensure_dir;
use crate::config::ResolvedConfig;
use crate::CliError;

fn analysis_model(model: GridModel) -> ForwardModel {
    match model {
        GridModel::Corrected => ForwardModel::Corrected,
        // Oracle data is analyzed through the linearized relation.
        GridModel::StartStop | GridModel::RawOracle => ForwardModel::StartStop,
    }
}

pub fn run(cfg: &ResolvedConfig) -> Result<(), CliError> {
    ensure_dir(&cfg.output_dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let model = analysis_model(cfg.model);
    let opts = ClassifyOptions::default();

    let report = match cfg.trajectory {
        Trajectory::Linear { .. } => {
            let mut classifications = Vec::new();
            let mut cloud = Vec::new();
            for _ in 0..cfg.classify_samples {
                let s = rng.random_range(-2.0..2.0);
                let tau = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                let x = GroundPoint::new(rng.random_range(-3.0..3.0), 0.0);
                cloud.push((s, tau, x));
                for projection in [Projection::Left, Projection::Right] {
                    let c = classify_singularity(
                        &cfg.trajectory, &cfg.params, s, tau, x, projection, model, &opts,
                    )?;
                    classifications.push(json!({
                        "s": s, "tau": tau, "x": [x.x1, x.x2],
                        "projection": projection,
                        "class": c.class,
                        "fold_pairing": c.fold_pairing,
                    }));
                }
            }
            let csv_path = cfg.output_dir.join("sigma_points.csv");
            {
                let file = std::fs::File::create(&csv_path)
                    .map_err(|e| CliError::Io(e.to_string()))?;
                let mut w = std::io::BufWriter::new(file);
                writeln!(w, "s,tau,x1,x2").map_err(|e| CliError::Io(e.to_string()))?;
                for (s, tau, x) in &cloud {
                    writeln!(w, "{s},{tau},{},{}", x.x1, x.x2)
                        .map_err(|e| CliError::Io(e.to_string()))?;
                }
            }
            let mut det_examples = Vec::new();
            for x2 in [0.0, 0.5, 1.0] {
                let x = GroundPoint::new(0.0, x2);
                let det = right_projection_det(&cfg.trajectory, 0.0, 1.0, x, &cfg.params, model)?;
                det_examples.push(json!({"x": [x.x1, x.x2], "det": det}));
            }
            json!({
                "trajectory": cfg.trajectory,
                "model": model,
                "sigma": {
                    "description": "ground track x2 = 0 (all s, x1; tau != 0)",
                    "defining_function": "x2",
                    "points_csv": "sigma_points.csv",
                },
                "classifications": classifications,
                "right_projection_det_examples": det_examples,
                "mirror_map": "(x1, x2, xi1, xi2) -> (x1, -x2, xi1, -xi2)",
            })
        }
        Trajectory::Circular { radius, height_ratio } => {
            let (inner, outer) = region_thresholds(&cfg.trajectory)?;
            let root = sigma11_root(height_ratio)?;
            let curve = sample_sigma_curve(
                height_ratio,
                cfg.sigma_samples,
                height_ratio * height_ratio + 3.0,
            )?;

            // Point cloud for plotting.
            let csv_path = cfg.output_dir.join("sigma_points.csv");
            {
                let file = std::fs::File::create(&csv_path)
                    .map_err(|e| CliError::Io(e.to_string()))?;
                let mut w = std::io::BufWriter::new(file);
                writeln!(w, "p,q,u,v,x1_at_s0,x2_at_s0").map_err(|e| CliError::Io(e.to_string()))?;
                for pq in &curve {
                    let uv = pq_to_uv(&cfg.trajectory, *pq)?;
                    let x = pq_to_ground(&cfg.trajectory, 0.0, *pq)?;
                    writeln!(w, "{},{},{},{},{},{}", pq.p, pq.q, uv.u, uv.v, x.x1, x.x2)
                        .map_err(|e| CliError::Io(e.to_string()))?;
                }
            }

            let mut classifications = Vec::new();
            for _ in 0..cfg.classify_samples {
                let pq = curve[rng.random_range(0..curve.len())];
                let s = rng.random_range(0.0..std::f64::consts::TAU);
                let tau = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                let x = pq_to_ground(&cfg.trajectory, s, pq)?;
                let c = classify_singularity(
                    &cfg.trajectory, &cfg.params, s, tau, x, Projection::Left, model, &opts,
                )?;
                classifications.push(json!({
                    "stratum": "sigma1", "projection": Projection::Left,
                    "s": s, "tau": tau, "pq": [pq.p, pq.q], "class": c.class,
                }));
            }
            for _ in 0..cfg.classify_samples {
                let s = rng.random_range(0.0..std::f64::consts::TAU);
                let tau = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                let x = pq_to_ground(&cfg.trajectory, s, PqCoords { p: root, q: 0.0 })?;
                let c = classify_singularity(
                    &cfg.trajectory, &cfg.params, s, tau, x, Projection::Right, model, &opts,
                )?;
                classifications.push(json!({
                    "stratum": "sigma11", "projection": Projection::Right,
                    "s": s, "tau": tau, "pq": [root, 0.0], "class": c.class,
                }));
            }

            let mut region_labels = Vec::new();
            for frac in [0.0, 0.25, 0.6, 0.75, 1.2] {
                let r = frac * outer;
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                let x = GroundPoint::new(r * angle.cos(), r * angle.sin());
                region_labels.push(json!({
                    "x": [x.x1, x.x2],
                    "radius": r,
                    "label": region_check(&cfg.trajectory, x)?,
                }));
            }

            let v_cap = injectivity_v_cap(height_ratio);
            let mut injectivity = Vec::new();
            for u in [0.0, 0.4, -0.4] {
                let inside =
                    brute_force_injectivity(&cfg.trajectory, u, v_cap - 3.0, v_cap - 0.01, 1000)?;
                injectivity.push(json!({
                    "u": u, "interval": [v_cap - 3.0, v_cap - 0.01],
                    "within_sufficient_condition": true,
                    "injective": inside.injective,
                    "collision": inside.collision,
                }));
                let wide = brute_force_injectivity(&cfg.trajectory, u, v_cap - 3.0, v_cap + 6.0, 1000)?;
                injectivity.push(json!({
                    "u": u, "interval": [v_cap - 3.0, v_cap + 6.0],
                    "within_sufficient_condition": false,
                    "injective": wide.injective,
                    "collision": wide.collision,
                }));
            }

            json!({
                "trajectory": cfg.trajectory,
                "model": model,
                "region_thresholds": {
                    "injective_safe_radius": inner,
                    "canonical_graph_radius": outer,
                    "note": "rho (h^2 + 1) / 2 and rho (h^2 + 1)",
                    "rho": radius,
                    "h": height_ratio,
                },
                "sigma": {
                    "defining_cubic": "p^3 - h^2 (p^2 + q^2) + h^2 p - h^4",
                    "samples": curve.len(),
                    "points_csv": "sigma_points.csv",
                    "sigma11_root_p": root,
                },
                "classifications": classifications,
                "region_labels": region_labels,
                "injectivity": injectivity,
            })
        }
    };

    let path = cfg.output_dir.join("analysis.json");
    let body = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Io(format!("report serialization: {e}")))?;
    std::fs::write(&path, body + "\n").map_err(|e| CliError::Io(e.to_string()))?;
    println!("analyze: report written to {}", path.display());

    // Quick console summary of the classification tallies.
    let mut folds = 0;
    let mut blowdowns = 0;
    let mut cusps = 0;
    let mut other = 0;
    if let Some(list) = report.get("classifications").and_then(|c| c.as_array()) {
        for entry in list {
            match entry.get("class").and_then(|c| c.as_str()) {
                Some("fold") => folds += 1,
                Some("blowdown") => blowdowns += 1,
                Some("cusp") => cusps += 1,
                _ => other += 1,
            }
        }
    }
    println!("analyze: classifications: {folds} fold, {blowdowns} blowdown, {cusps} cusp, {other} other");
    Ok(())
}
