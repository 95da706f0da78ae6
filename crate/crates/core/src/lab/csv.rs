//! CSV emission: comma-separated, header row, 17-significant-digit floats,
//! LF line endings. One dialect everywhere so downstream scripts can rely on
//! bit-identical reruns.

use crate::error::Result;
use std::io::Write;
use std::path::Path;

/// Format a float with 17 significant digits.
pub fn fmt(x: f64) -> String {
    format!("{:.16e}", x)
}

pub struct CsvWriter {
    out: std::io::BufWriter<std::fs::File>,
    columns: usize,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let file = std::fs::File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        out.write_all(header.join(",").as_bytes())?;
        out.write_all(b"\n")?;
        Ok(CsvWriter {
            out,
            columns: header.len(),
        })
    }

    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        assert_eq!(values.len(), self.columns, "row width mismatch");
        let line = values.iter().map(|&v| fmt(v)).collect::<Vec<_>>().join(",");
        self.out.write_all(line.as_bytes())?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    /// Mixed row: already-formatted cells (for integer columns).
    pub fn raw_row(&mut self, cells: &[String]) -> Result<()> {
        assert_eq!(cells.len(), self.columns, "row width mismatch");
        self.out.write_all(cells.join(",").as_bytes())?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}
