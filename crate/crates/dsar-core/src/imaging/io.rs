//! Image and metrics output formats.
//!
//! Images are written as 16-bit binary PGM (`P5`, maxval 65535, magnitude
//! max-normalized, most significant byte first per the Netpbm format) and as
//! CSV `(x1, x2, re, im)`. Metrics reports serialize to JSON.

use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{DsarError, Result};
use crate::imaging::{ArtifactReport, Image};

/// Write the magnitude image as 16-bit binary PGM, max-normalized.
///
/// Rows run from the largest `x2` down so the image displays with north up;
/// columns follow `x1`.
pub fn write_pgm<W: Write>(img: &Image, mut out: W) -> Result<()> {
    let (n1, n2) = img.grid.shape;
    let max = img.max_abs();
    write!(out, "P5\n{n1} {n2}\n65535\n")?;
    let mut buf = Vec::with_capacity(n1 * n2 * 2);
    for j in (0..n2).rev() {
        for i in 0..n1 {
            let v = if max > 0.0 {
                (img.at(i, j).norm() / max * 65535.0).round() as u16
            } else {
                0
            };
            buf.extend_from_slice(&v.to_be_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn write_pgm_file(img: &Image, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_pgm(img, &mut w)?;
    w.flush()?;
    Ok(())
}

/// CSV export with one `(x1, x2, re, im)` row per cell.
pub fn write_image_csv<W: Write>(img: &Image, mut out: W) -> Result<()> {
    writeln!(out, "x1,x2,re,im")?;
    for i in 0..img.grid.shape.0 {
        for j in 0..img.grid.shape.1 {
            let c = img.grid.cell_center(i, j);
            let v = img.at(i, j);
            writeln!(out, "{},{},{},{}", c.x1, c.x2, v.re, v.im)?;
        }
    }
    Ok(())
}

pub fn write_image_csv_file(img: &Image, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_image_csv(img, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Metrics report as pretty JSON.
pub fn metrics_json(report: &ArtifactReport) -> Result<String> {
    serde_json::to_string_pretty(report)
        .map_err(|e| DsarError::format(format!("metrics serialization failed: {e}")))
}

pub fn write_metrics_file(report: &ArtifactReport, path: &Path) -> Result<()> {
    std::fs::write(path, metrics_json(report)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::ImageGrid;
    use crate::Complex64;

    fn tiny_image() -> Image {
        let grid = ImageGrid::centered(1.0, 3).unwrap();
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        values[4] = Complex64::new(2.0, 0.0);
        values[0] = Complex64::new(0.0, 1.0);
        Image { grid, values }
    }

    #[test]
    fn pgm_header_and_payload_shape() {
        let img = tiny_image();
        let mut out = Vec::new();
        write_pgm(&img, &mut out).unwrap();
        assert!(out.starts_with(b"P5\n3 3\n65535\n"));
        let header_len = b"P5\n3 3\n65535\n".len();
        assert_eq!(out.len() - header_len, 3 * 3 * 2);
        // Center pixel carries the maximum: row 1, col 1 -> value 65535.
        let idx = header_len + (3 + 1) * 2;
        assert_eq!(u16::from_be_bytes([out[idx], out[idx + 1]]), 65535);
    }

    #[test]
    fn zero_image_writes_zero_pixels() {
        let grid = ImageGrid::centered(1.0, 2).unwrap();
        let img = Image { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] };
        let mut out = Vec::new();
        write_pgm(&img, &mut out).unwrap();
        assert!(out.ends_with(&[0, 0, 0, 0, 0, 0, 0, 0]));
    }

    #[test]
    fn csv_lists_every_cell() {
        let img = tiny_image();
        let mut out = Vec::new();
        write_image_csv(&img, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 1 + 9);
        assert!(text.lines().nth(1).unwrap().starts_with("-1,-1,"));
    }
}
