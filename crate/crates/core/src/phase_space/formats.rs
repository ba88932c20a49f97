//! Grid file formats.
//!
//! CSV: `#` comment lines, then one record `half_width,resolution,s_order`,
//! then `resolution` records of `resolution` values each (row-major, rows
//! over `Im α`).
//!
//! Binary (little-endian): 8-byte magic `LCPSGRD1`, `u64` resolution,
//! `f64` half-width, `f64` order, then `resolution²` `f64` values row-major.

use super::states::Grid;
use crate::error::{CavityError, Result};
use std::io::{Read, Write};

pub const GRID_MAGIC: &[u8; 8] = b"LCPSGRD1";

pub fn write_grid_csv<W: Write>(grid: &Grid, mut out: W) -> Result<()> {
    writeln!(out, "# phase-space grid P(alpha; s), alpha = x + i p")?;
    writeln!(
        out,
        "# x = -A + col*h, p = -A + row*h, h = 2A/N; header: A,N,s"
    )?;
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let fmt = |e: csv::Error| CavityError::Io(e.to_string());
    w.write_record([
        format!("{}", grid.half_width),
        grid.n.to_string(),
        format!("{}", grid.s),
    ])
    .map_err(fmt)?;
    for row in grid.values.chunks(grid.n) {
        w.write_record(row.iter().map(|v| format!("{v:e}")))
            .map_err(fmt)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_grid_csv<R: Read>(input: R) -> Result<Grid> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut records = r.records();
    let bad = |m: String| CavityError::Format(m);
    let header = records
        .next()
        .ok_or_else(|| bad("missing header record".into()))?
        .map_err(|e| bad(e.to_string()))?;
    if header.len() != 3 {
        return Err(bad(format!(
            "header needs 3 fields, found {}",
            header.len()
        )));
    }
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| bad(format!("{s:?}: {e}")))
    };
    let half_width = parse(&header[0])?;
    let n: usize = header[1]
        .trim()
        .parse()
        .map_err(|e| bad(format!("resolution {:?}: {e}", &header[1])))?;
    let s = parse(&header[2])?;
    let mut values = Vec::with_capacity(n * n);
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != n {
            return Err(bad(format!(
                "row {i} has {} values, expected {n}",
                rec.len()
            )));
        }
        for f in rec.iter() {
            values.push(parse(f)?);
        }
    }
    if values.len() != n * n {
        return Err(bad(format!(
            "expected {n} rows, found {}",
            values.len() / n.max(1)
        )));
    }
    Grid::new(half_width, n, s, values)
}

pub fn write_grid_binary<W: Write>(grid: &Grid, mut out: W) -> Result<()> {
    out.write_all(GRID_MAGIC)?;
    out.write_all(&(grid.n as u64).to_le_bytes())?;
    out.write_all(&grid.half_width.to_le_bytes())?;
    out.write_all(&grid.s.to_le_bytes())?;
    for v in &grid.values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_grid_binary<R: Read>(mut input: R) -> Result<Grid> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != GRID_MAGIC {
        return Err(CavityError::Format("bad magic".into()));
    }
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    let n = u64::from_le_bytes(b) as usize;
    if n > 1 << 14 {
        return Err(CavityError::Format(format!(
            "resolution {n} is implausibly large"
        )));
    }
    input.read_exact(&mut b)?;
    let half_width = f64::from_le_bytes(b);
    input.read_exact(&mut b)?;
    let s = f64::from_le_bytes(b);
    let mut values = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        input.read_exact(&mut b)?;
        values.push(f64::from_le_bytes(b));
    }
    Grid::new(half_width, n, s, values)
}
