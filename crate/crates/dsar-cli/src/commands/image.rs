//! `dsar image`: backproject a data grid and write image plus metrics.

use std::path::Path;

use dsar_core::forward::io as grid_io;
use dsar_core::imaging::{self, artifact_metrics, backproject};

use crate::commands::ensure_dir;
use crate::config::ResolvedConfig;
use crate::CliError;

pub fn run(cfg: &ResolvedConfig, datagrid: &Path) -> Result<(), CliError> {
    let grid = grid_io::read_grid_file(datagrid)?;
    if grid.model != cfg.model {
        return Err(CliError::Usage(format!(
            "model tag mismatch: config says {}, grid file {} says {}",
            cfg.model.as_str(),
            datagrid.display(),
            grid.model.as_str()
        )));
    }

    let image = backproject(&grid, &cfg.trajectory, cfg.image_grid, &cfg.beam, cfg.filter)?;

    ensure_dir(&cfg.output_dir)?;
    let pgm_path = cfg.output_dir.join("image.pgm");
    let csv_path = cfg.output_dir.join("image.csv");
    let metrics_path = cfg.output_dir.join("metrics.json");
    imaging::io::write_pgm_file(&image, &pgm_path)?;
    imaging::io::write_image_csv_file(&image, &csv_path)?;

    if cfg.scene.is_empty() {
        // No truth to compare against: emit an empty peak report.
        std::fs::write(
            &metrics_path,
            serde_json::to_string_pretty(&serde_json::json!({
                "exclusion_radius_cells": imaging::EXCLUSION_RADIUS_CELLS,
                "image_max": image.max_abs(),
                "scatterers": [],
                "warnings": ["empty truth scene; no peak comparison performed"],
            }))
            .expect("static report serializes")
                + "\n",
        )
        .map_err(|e| CliError::Io(e.to_string()))?;
        println!(
            "image: {} x {} cells -> {} (max |I| = {:.6e}, empty truth scene)",
            image.grid.shape.0,
            image.grid.shape.1,
            pgm_path.display(),
            image.max_abs()
        );
        return Ok(());
    }

    let report = artifact_metrics(&image, &cfg.scene, &cfg.trajectory)?;
    imaging::io::write_metrics_file(&report, &metrics_path)?;

    println!(
        "image: {} x {} cells -> {} (max |I| = {:.6e})",
        image.grid.shape.0,
        image.grid.shape.1,
        pgm_path.display(),
        image.max_abs()
    );
    for (i, sc) in report.scatterers.iter().enumerate() {
        let loc = sc
            .location_error_cells
            .map(|e| format!("{e:.2} cells"))
            .unwrap_or_else(|| "not found".to_string());
        let sec = sc
            .secondary
            .as_ref()
            .map(|s| format!("{:.1} dB at ({:.3}, {:.3})", s.ratio_db, s.peak.position[0], s.peak.position[1]))
            .unwrap_or_else(|| "none".to_string());
        println!("image: scatterer {i}: main peak error {loc}; strongest secondary {sec}");
    }
    Ok(())
}
