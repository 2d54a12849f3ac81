use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "sweep,mean_abs_error,std_error,theory,n";

/// One sweep point of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Value of the swept variable (T, d, or r).
    pub sweep: f64,
    pub mean_abs_error: f64,
    /// Standard error of the mean across polynomials.
    pub std_error: f64,
    /// Predicted expected error at this point.
    pub theory: f64,
    pub n: usize,
}

/// Serializes rows with a fixed header. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no rows to write".into()));
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        w.write_record([
            row.sweep.to_string(),
            row.mean_abs_error.to_string(),
            row.std_error.to_string(),
            row.theory.to_string(),
            row.n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Parse { line: 1, msg: format!("unexpected header {:?}", header.join(",")) });
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(x: f64) -> SweepRow {
        SweepRow { sweep: x, mean_abs_error: 0.1 / x, std_error: 1e-3 / 3.0, theory: 0.3989422804014327, n: 100 }
    }

    #[test]
    fn one_row_gives_two_lines() {
        let mut buf = Vec::new();
        write_csv(&[row(64.0)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    }

    #[test]
    fn round_trip_and_determinism() {
        let rows: Vec<SweepRow> = (1..=5).map(|i| row(i as f64 * 1.1)).collect();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        emit_csv(&rows, &a).unwrap();
        emit_csv(&rows, &b).unwrap();
        assert_eq!(read_csv(&a).unwrap(), rows);
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn empty_rows_rejected() {
        assert!(write_csv(&[], Vec::new()).is_err());
    }
}
