use alloc::format;
use alloc::vec::Vec;

use crate::aggregate::ExtractedDatabase;
use crate::error::{Error, Result};

pub const DEFAULT_N_STATES: usize = 5;

/// Equal-width bins on `[0, max_i]` per process.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    n_states: usize,
    maxima: Vec<f64>,
}

impl Discretization {
    pub fn new(n_states: usize, maxima: Vec<f64>) -> Result<Self> {
        if !(2..=255).contains(&n_states) {
            return Err(Error::InvalidInput(format!("n_states {n_states} outside 2..=255")));
        }
        if let Some(process) = maxima.iter().position(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::DegenerateProcess { process });
        }
        Ok(Self { n_states, maxima })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_processes(&self) -> usize {
        self.maxima.len()
    }

    pub fn maximum(&self, process: usize) -> f64 {
        self.maxima[process]
    }

    pub fn bin_width(&self, process: usize) -> f64 {
        self.maxima[process] / self.n_states as f64
    }

    /// 0-based state: bin `k` covers `(k·Δ, (k+1)·Δ]`, zero falls in bin 0,
    /// values past the top edge are clamped into the last bin.
    pub fn state_of(&self, process: usize, value: f64) -> u8 {
        let k = libm::ceil(value / self.bin_width(process)) as i64 - 1;
        k.clamp(0, self.n_states as i64 - 1) as u8
    }
}

/// `R × N` discrete states, 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMatrix {
    n_nodes: usize,
    n_states: usize,
    states: Vec<u8>,
}

impl StateMatrix {
    pub fn from_records(n_nodes: usize, n_states: usize, records: &[Vec<u8>]) -> Result<Self> {
        if n_nodes == 0 || n_nodes > 64 {
            return Err(Error::InvalidInput(format!("{n_nodes} nodes; supported range is 1..=64")));
        }
        let mut states = Vec::with_capacity(records.len() * n_nodes);
        for (k, rec) in records.iter().enumerate() {
            if rec.len() != n_nodes {
                return Err(Error::InvalidInput(format!("record {k} has {} states", rec.len())));
            }
            if let Some(s) = rec.iter().find(|s| usize::from(**s) >= n_states) {
                return Err(Error::InvalidInput(format!("record {k} holds state {s}")));
            }
            states.extend_from_slice(rec);
        }
        Ok(Self { n_nodes, n_states, states })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_records(&self) -> usize {
        self.states.len() / self.n_nodes
    }

    pub fn record(&self, k: usize) -> &[u8] {
        &self.states[k * self.n_nodes..(k + 1) * self.n_nodes]
    }

    pub fn records(&self) -> impl Iterator<Item = &[u8]> {
        self.states.chunks_exact(self.n_nodes)
    }

    pub fn get(&self, k: usize, node: usize) -> u8 {
        self.states[k * self.n_nodes + node]
    }
}

/// Bins every process of the database into `n_states` equal-width states
/// between zero and that process's maximum aggregate loss.
pub fn discretize(db: &ExtractedDatabase, n_states: usize) -> Result<(StateMatrix, Discretization)> {
    if db.n_records() == 0 {
        return Err(Error::InvalidInput("extracted database has no records".into()));
    }
    let n = db.n_processes();
    let maxima = (0..n)
        .map(|i| db.records().map(|r| r[i]).fold(0.0, f64::max))
        .collect();
    let disc = Discretization::new(n_states, maxima)?;
    let records: Vec<Vec<u8>> = db
        .records()
        .map(|r| r.iter().enumerate().map(|(i, v)| disc.state_of(i, *v)).collect())
        .collect();
    let states = StateMatrix::from_records(n, n_states, &records)?;
    Ok((states, disc))
}
