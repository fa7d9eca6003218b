//! On-disk formats for [`DataGrid`].
//!
//! Binary layout: the magic bytes `DSAR1\n`, one UTF-8 JSON header line
//! terminated by `\n`, then `n_s * n_omega` complex samples as little-endian
//! IEEE-754 f64 `(re, im)` pairs, row-major in `s`. A CSV export
//! `(s, omega, re, im)` is provided for plotting.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DsarError, Result};
use crate::forward::{Axis, DataGrid, GridModel, ScenarioParams};
use crate::Complex64;

pub const MAGIC: &[u8; 6] = b"DSAR1\n";
const MAX_HEADER_BYTES: usize = 1 << 16;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridHeader {
    model: String,
    n_s: usize,
    s0: f64,
    ds: f64,
    n_omega: usize,
    omega0_axis_start: f64,
    domega: f64,
    omega0: f64,
    c0: f64,
    #[serde(rename = "L")]
    window_half_width: f64,
}

/// Write a grid in the binary format.
pub fn write_grid<W: Write>(grid: &DataGrid, mut out: W) -> Result<()> {
    let header = GridHeader {
        model: grid.model.as_str().to_string(),
        n_s: grid.s_axis.n,
        s0: grid.s_axis.start,
        ds: grid.s_axis.step,
        n_omega: grid.omega_axis.n,
        omega0_axis_start: grid.omega_axis.start,
        domega: grid.omega_axis.step,
        omega0: grid.params.omega0,
        c0: grid.params.c0,
        window_half_width: grid.params.window_half_width,
    };
    let header_json = serde_json::to_string(&header)
        .map_err(|e| DsarError::format(format!("header serialization failed: {e}")))?;
    out.write_all(MAGIC)?;
    out.write_all(header_json.as_bytes())?;
    out.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(grid.values.len() * 16);
    for v in &grid.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn write_grid_file(grid: &DataGrid, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_grid(grid, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Read a grid from the binary format, validating structure as it goes.
pub fn read_grid<R: Read>(input: R) -> Result<DataGrid> {
    let mut reader = BufReader::new(input);
    let mut magic = [0u8; 6];
    reader
        .read_exact(&mut magic)
        .map_err(|_| DsarError::format("file too short for DSAR1 magic"))?;
    if &magic != MAGIC {
        return Err(DsarError::format("bad magic bytes, not a DSAR1 file"));
    }
    let mut header_line = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        reader
            .read_exact(&mut byte)
            .map_err(|_| DsarError::format("unterminated header line"))?;
        if byte[0] == b'\n' {
            break;
        }
        header_line.push(byte[0]);
        if header_line.len() > MAX_HEADER_BYTES {
            return Err(DsarError::format("header line exceeds 64 KiB"));
        }
    }
    let header_str = std::str::from_utf8(&header_line)
        .map_err(|_| DsarError::format("header is not valid UTF-8"))?;
    let header: GridHeader = serde_json::from_str(header_str)
        .map_err(|e| DsarError::format(format!("header JSON invalid: {e}")))?;

    let model = GridModel::parse(&header.model)?;
    let params = ScenarioParams::new(header.omega0, header.c0, header.window_half_width)
        .map_err(|e| DsarError::format(format!("header scenario params invalid: {e}")))?;
    let s_axis = Axis::new(header.n_s, header.s0, header.ds)
        .map_err(|e| DsarError::format(format!("header s-axis invalid: {e}")))?;
    let omega_axis = Axis::new(header.n_omega, header.omega0_axis_start, header.domega)
        .map_err(|e| DsarError::format(format!("header omega-axis invalid: {e}")))?;

    let n = header
        .n_s
        .checked_mul(header.n_omega)
        .ok_or_else(|| DsarError::format("grid dimensions overflow"))?;
    let mut payload = vec![0u8; n * 16];
    reader.read_exact(&mut payload).map_err(|_| {
        DsarError::format(format!("payload truncated: expected {n} complex samples"))
    })?;
    let mut trailing = [0u8; 1];
    if reader.read(&mut trailing)? != 0 {
        return Err(DsarError::format("trailing bytes after payload"));
    }

    let mut values = Vec::with_capacity(n);
    for chunk in payload.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        values.push(Complex64::new(re, im));
    }
    Ok(DataGrid { model, params, s_axis, omega_axis, values })
}

pub fn read_grid_file(path: &Path) -> Result<DataGrid> {
    let file = std::fs::File::open(path)?;
    read_grid(file)
}

/// CSV export with one `(s, omega, re, im)` row per sample.
pub fn write_grid_csv<W: Write>(grid: &DataGrid, mut out: W) -> Result<()> {
    writeln!(out, "s,omega,re,im")?;
    for i_s in 0..grid.s_axis.n {
        let s = grid.s_axis.value(i_s);
        for i_w in 0..grid.omega_axis.n {
            let v = grid.at(i_s, i_w);
            writeln!(out, "{s},{omega},{re},{im}", omega = grid.omega_axis.value(i_w), re = v.re, im = v.im)?;
        }
    }
    Ok(())
}

pub fn write_grid_csv_file(grid: &DataGrid, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_grid_csv(grid, &mut w)?;
    w.flush()?;
    Ok(())
}
