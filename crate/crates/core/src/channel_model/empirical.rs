//! Measured blocked-channel packet error curves.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Blocked-slot PER sampled at increasing jammer distances, plus the scalar
/// clear-channel PER.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPerTable {
    rows: Vec<(f64, f64)>,
    per_clear: f64,
}

#[derive(Deserialize)]
struct CsvRow {
    distance_m: f64,
    per_blocked: f64,
}

impl EmpiricalPerTable {
    pub fn new(rows: Vec<(f64, f64)>, per_clear: f64) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Config("empirical PER table has no rows".into()));
        }
        if !(0.0..=1.0).contains(&per_clear) {
            return Err(Error::Config(format!("per_clear must lie in [0, 1] (got {per_clear})")));
        }
        for (i, &(d, p)) in rows.iter().enumerate() {
            if !d.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("empirical PER row {i}: invalid ({d}, {p})")));
            }
            if i > 0 && d <= rows[i - 1].0 {
                return Err(Error::Config(format!(
                    "empirical PER distances must be strictly increasing (row {i}: {d} after {})",
                    rows[i - 1].0
                )));
            }
        }
        Ok(Self { rows, per_clear })
    }

    /// Reads a `distance_m,per_blocked` CSV. Lines starting with `#` are
    /// comments.
    pub fn from_csv_path(path: impl AsRef<Path>, per_clear: f64) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file, per_clear).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_csv_reader(reader: impl std::io::Read, per_clear: f64) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for record in csv.deserialize::<CsvRow>() {
            let row = record.map_err(|e| Error::Config(format!("empirical PER CSV: {e}")))?;
            rows.push((row.distance_m, row.per_blocked));
        }
        Self::new(rows, per_clear)
    }

    pub fn rows(&self) -> &[(f64, f64)] {
        &self.rows
    }

    pub fn per_clear(&self) -> f64 {
        self.per_clear
    }

    /// Piecewise-linear interpolation in distance, clamped at both ends.
    pub fn per_blocked_at(&self, distance_m: f64) -> f64 {
        let rows = &self.rows;
        let (first, last) = (rows[0], rows[rows.len() - 1]);
        if distance_m <= first.0 {
            return first.1;
        }
        if distance_m >= last.0 {
            return last.1;
        }
        let upper = rows.partition_point(|&(d, _)| d <= distance_m);
        let (d0, p0) = rows[upper - 1];
        if d0 == distance_m {
            return p0;
        }
        let (d1, p1) = rows[upper];
        p0 + (p1 - p0) * (distance_m - d0) / (d1 - d0)
    }
}
