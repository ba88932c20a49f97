//! Tables (CSV with `#` header comments) and JSON reports.

use crate::error::CliError;
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub fn write_table<T: Serialize>(
    path: &Path,
    comments: &[String],
    rows: &[T],
) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    for c in comments {
        writeln!(f, "# {c}")?;
    }
    let mut w = csv::Writer::from_writer(f);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}
