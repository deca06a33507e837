use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Non-negative losses of `N` processes over `S` time steps, stored row-major
/// (one row per process, column index = temporal order).
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix {
    values: Vec<f64>,
    n_processes: usize,
    n_steps: usize,
    labels: Vec<String>,
}

impl LossMatrix {
    /// Builds a matrix from rows, labelling processes `P1..PN`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (1..=rows.len()).map(|i| format!("P{i}")).collect();
        Self::with_labels(rows, labels)
    }

    pub fn with_labels(rows: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        let n_processes = rows.len();
        if n_processes == 0 {
            return Err(Error::InvalidInput("loss matrix needs at least one process".into()));
        }
        if labels.len() != n_processes {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} processes",
                labels.len(),
                n_processes
            )));
        }
        let n_steps = rows[0].len();
        if n_steps < 2 {
            return Err(Error::InvalidInput("loss matrix needs at least two time steps".into()));
        }
        let mut values = Vec::with_capacity(n_processes * n_steps);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_steps {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} steps, expected {n_steps}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidInput(format!(
                    "row {i} holds {bad}; losses must be finite and non-negative"
                )));
            }
            values.extend(row);
        }
        Ok(Self { values, n_processes, n_steps, labels })
    }

    pub fn n_processes(&self) -> usize {
        self.n_processes
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row(&self, process: usize) -> &[f64] {
        &self.values[process * self.n_steps..(process + 1) * self.n_steps]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_steps)
    }

    pub fn get(&self, process: usize, step: usize) -> f64 {
        self.values[process * self.n_steps + step]
    }

    /// Keeps the first `n_steps` columns.
    pub fn truncated(&self, n_steps: usize) -> Result<Self> {
        if n_steps < 2 || n_steps > self.n_steps {
            return Err(Error::InvalidInput(format!(
                "cannot truncate {} steps to {n_steps}",
                self.n_steps
            )));
        }
        let rows = self.rows().map(|r| r[..n_steps].to_vec()).collect();
        Self::with_labels(rows, self.labels.clone())
    }

    pub(crate) fn into_rows(self) -> (Vec<Vec<f64>>, Vec<String>) {
        let rows = self.values.chunks_exact(self.n_steps).map(<[f64]>::to_vec).collect();
        (rows, self.labels)
    }
}
