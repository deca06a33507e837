//! Extracted database: per-process sums over consecutive windows.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::loss::LossMatrix;

/// `R = floor(S / T)` records; record `k` holds, per process, the sum of the
/// losses at steps `k·T .. (k+1)·T` (0-based, end exclusive). Trailing steps
/// that do not fill a window are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedDatabase {
    window: usize,
    n_processes: usize,
    /// Row-major `R × N`.
    records: Vec<f64>,
    labels: Vec<String>,
}

impl ExtractedDatabase {
    /// Builds a database from records given as `R × N` rows.
    pub fn from_records(window: usize, records: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        let n_processes = labels.len();
        if window == 0 || n_processes == 0 {
            return Err(Error::InvalidInput("window and process count must be positive".into()));
        }
        let mut flat = Vec::with_capacity(records.len() * n_processes);
        for (k, rec) in records.into_iter().enumerate() {
            if rec.len() != n_processes {
                return Err(Error::InvalidInput(format!(
                    "record {k} has {} values for {n_processes} processes",
                    rec.len()
                )));
            }
            if let Some(bad) = rec.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidInput(format!("record {k} holds {bad}")));
            }
            flat.extend(rec);
        }
        Ok(Self { window, n_processes, records: flat, labels })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn n_records(&self) -> usize {
        self.records.len() / self.n_processes
    }

    pub fn n_processes(&self) -> usize {
        self.n_processes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn record(&self, k: usize) -> &[f64] {
        &self.records[k * self.n_processes..(k + 1) * self.n_processes]
    }

    pub fn records(&self) -> impl Iterator<Item = &[f64]> {
        self.records.chunks_exact(self.n_processes)
    }

    pub fn get(&self, k: usize, process: usize) -> f64 {
        self.records[k * self.n_processes + process]
    }

    /// Values of one process across records.
    pub fn column(&self, process: usize) -> Vec<f64> {
        self.records().map(|r| r[process]).collect()
    }

    /// The records as an `N × R` loss matrix, for correlation diagnostics.
    pub fn to_loss_matrix(&self) -> Result<LossMatrix> {
        let rows = (0..self.n_processes).map(|i| self.column(i)).collect();
        LossMatrix::with_labels(rows, self.labels.clone())
    }
}

pub fn extract(series: &LossMatrix, window: usize) -> Result<ExtractedDatabase> {
    let len = series.n_steps();
    if window == 0 {
        return Err(Error::InvalidInput("window must be positive".into()));
    }
    if window > len {
        return Err(Error::WindowExceedsSeries { window, length: len });
    }
    let n = series.n_processes();
    let n_records = len / window;
    let mut records = Vec::with_capacity(n_records * n);
    for k in 0..n_records {
        for row in series.rows() {
            records.push(row[k * window..(k + 1) * window].iter().sum());
        }
    }
    Ok(ExtractedDatabase {
        window,
        n_processes: n,
        records,
        labels: series.labels().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn window_one_is_identity() {
        let m = LossMatrix::from_rows(vec![vec![1.0, 2.0, 3.0], vec![0.5, 0.0, 4.0]]).unwrap();
        let db = extract(&m, 1).unwrap();
        assert_eq!(db.n_records(), 3);
        assert_eq!(db.column(0), m.row(0));
        assert_eq!(db.column(1), m.row(1));
    }

    #[test]
    fn pairs_sum() {
        let m = LossMatrix::from_rows(vec![vec![1.0, 2.0, 3.0, 4.0]]).unwrap();
        assert_eq!(extract(&m, 2).unwrap().column(0), vec![3.0, 7.0]);
    }

    #[test]
    fn trailing_steps_dropped() {
        let m = LossMatrix::from_rows(vec![vec![1.0, 2.0, 3.0, 4.0, 5.0]]).unwrap();
        let db = extract(&m, 2).unwrap();
        assert_eq!(db.column(0), vec![3.0, 7.0]);
        assert_eq!(db.window(), 2);
    }

    #[test]
    fn counts_records() {
        let m = LossMatrix::from_rows(vec![vec![1.0; 5000]]).unwrap();
        assert_eq!(extract(&m, 240).unwrap().n_records(), 20);
        assert_eq!(extract(&m, 5000).unwrap().n_records(), 1);
    }

    #[test]
    fn oversized_window() {
        let m = LossMatrix::from_rows(vec![vec![1.0, 2.0]]).unwrap();
        assert_eq!(extract(&m, 3), Err(Error::WindowExceedsSeries { window: 3, length: 2 }));
        assert!(extract(&m, 0).is_err());
    }
}
