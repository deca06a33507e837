//! Synthetic loss series with imposed correlation functions.
//!
//! Each process row starts as independent draws from its marginal. A proposal
//! picks a random row and two distinct positions and exchanges their values;
//! the exchange is kept only if the correlation objective strictly decreases.
//! The run stops after `plateau_window` consecutive rejections or
//! `max_iterations` proposals.
//!
//! Rows may hold more values than the output length (`basin_factor > 1`).
//! The objective only sees the first `length` columns, and swaps range over
//! the whole row, so values from the reservoir can move into the window.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::corrstats::{self, CorrelationTarget};
use crate::error::{Error, Result};
use crate::loss::LossMatrix;
use crate::seed;

pub const DEFAULT_BASIN_FACTOR: f64 = 2.0;
pub const DEFAULT_PLATEAU_WINDOW: u64 = 10_000;
pub const DEFAULT_MAX_ITERATIONS: u64 = 10_000_000;

/// Per-process sampling distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    /// Negative exponential with the given mean.
    Exponential { mean: f64 },
}

impl Marginal {
    pub fn family(&self) -> &'static str {
        match self {
            Marginal::Exponential { .. } => "exponential",
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Marginal::Exponential { mean } => *mean,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Marginal::Exponential { mean } if mean.is_finite() && *mean > 0.0 => Ok(()),
            Marginal::Exponential { mean } => {
                Err(Error::InvalidInput(format!("exponential mean {mean} is not positive")))
            }
        }
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Marginal::Exponential { mean } => {
                let u: f64 = rng.gen();
                -mean * libm::log1p(-u)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    /// Output length `L`.
    pub length: usize,
    pub target: CorrelationTarget,
    /// One marginal per process; its length is `N`.
    pub marginals: Vec<Marginal>,
    pub labels: Vec<String>,
    /// Rows hold `ceil(basin_factor · L)` values.
    pub basin_factor: f64,
    pub plateau_window: u64,
    pub max_iterations: u64,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(length: usize, target: CorrelationTarget, marginals: Vec<Marginal>, seed: u64) -> Self {
        let labels = (1..=marginals.len()).map(|i| format!("P{i}")).collect();
        Self {
            length,
            target,
            marginals,
            labels,
            basin_factor: DEFAULT_BASIN_FACTOR,
            plateau_window: DEFAULT_PLATEAU_WINDOW,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seed,
        }
    }

    pub fn n_processes(&self) -> usize {
        self.marginals.len()
    }

    /// Row length including the reservoir.
    pub fn basin_length(&self) -> usize {
        libm::ceil(self.basin_factor * self.length as f64) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_processes();
        if n == 0 {
            return Err(Error::InvalidInput("generator needs at least one process".into()));
        }
        if self.target.n_processes() != n {
            return Err(Error::InvalidInput(format!(
                "target covers {} processes, {n} marginals given",
                self.target.n_processes()
            )));
        }
        if self.labels.len() != n {
            return Err(Error::InvalidInput(format!("{} labels for {n} processes", self.labels.len())));
        }
        if self.length < 2 || self.target.max_lag() + 2 > self.length {
            return Err(Error::InvalidInput(format!(
                "length {} too short for max_lag {}",
                self.length,
                self.target.max_lag()
            )));
        }
        if !(self.basin_factor >= 1.0) || !self.basin_factor.is_finite() {
            return Err(Error::InvalidInput(format!(
                "basin_factor {} must be >= 1",
                self.basin_factor
            )));
        }
        if self.plateau_window == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidInput(
                "plateau_window and max_iterations must be positive".into(),
            ));
        }
        self.marginals.iter().try_for_each(Marginal::validate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaltReason {
    Plateau,
    MaxIterations,
}

impl HaltReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            HaltReason::Plateau => "plateau",
            HaltReason::MaxIterations => "max_iterations",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorReport {
    pub initial_objective: f64,
    pub final_objective: f64,
    /// `(proposal index, objective)`: the initial value at index 0, then one
    /// entry per accepted swap.
    pub objective_trace: Vec<(u64, f64)>,
    pub accepted_swaps: u64,
    pub proposals: u64,
    pub halted_by: HaltReason,
}

/// `N` rows of `ceil(basin_factor · L)` independent draws, in draw order.
pub fn draw_initial(config: &GeneratorConfig) -> Result<LossMatrix> {
    config.validate()?;
    let mut rng = seed::rng(seed::derive(config.seed, &[0]));
    let len = config.basin_length();
    let rows = config
        .marginals
        .iter()
        .map(|m| (0..len).map(|_| m.sample(&mut rng)).collect())
        .collect();
    LossMatrix::with_labels(rows, config.labels.clone())
}

/// A swap candidate: row index and two distinct positions in that row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Swap {
    pub process: usize,
    pub first: usize,
    pub second: usize,
}

/// Uniform row, then a uniform pair of distinct positions over the full row.
pub fn propose_swap<R: Rng + ?Sized>(n_processes: usize, row_length: usize, rng: &mut R) -> Swap {
    debug_assert!(n_processes >= 1 && row_length >= 2);
    let process = rng.gen_range(0..n_processes);
    let first = rng.gen_range(0..row_length);
    let mut second = rng.gen_range(0..row_length - 1);
    if second >= first {
        second += 1;
    }
    Swap { process, first, second }
}

/// Runs the swap descent; returns the first `L` columns and the run report.
pub fn run(config: &GeneratorConfig) -> Result<(LossMatrix, GeneratorReport)> {
    let initial = draw_initial(config)?;
    let window = initial.truncated(config.length)?;
    // Validates the window (constant rows, vanishing cross-covariances).
    corrstats::objective(&window, &config.target)?;

    let (rows, labels) = initial.into_rows();
    let mut state = DescentState::new(rows, config.length, &config.target);
    let initial_objective = state.total;
    if !initial_objective.is_finite() {
        return Err(Error::InvalidInput("initial objective is not finite".into()));
    }

    let mut rng = seed::rng(seed::derive(config.seed, &[1]));
    let basin = config.basin_length();
    let n = config.n_processes();
    let mut trace = vec![(0u64, initial_objective)];
    let mut proposals = 0u64;
    let mut accepted = 0u64;
    let mut since_accept = 0u64;
    let halted_by = loop {
        if since_accept >= config.plateau_window {
            break HaltReason::Plateau;
        }
        if proposals >= config.max_iterations {
            break HaltReason::MaxIterations;
        }
        let swap = propose_swap(n, basin, &mut rng);
        proposals += 1;
        if state.try_swap(swap) {
            accepted += 1;
            since_accept = 0;
            trace.push((proposals, state.total));
        } else {
            since_accept += 1;
        }
    };

    let final_objective = state.total;
    let rows = state.rows.into_iter().map(|mut r| {
        r.truncate(config.length);
        r
    });
    let output = LossMatrix::with_labels(rows.collect(), labels)?;
    let report = GeneratorReport {
        initial_objective,
        final_objective,
        objective_trace: trace,
        accepted_swaps: accepted,
        proposals,
        halted_by,
    };
    Ok((output, report))
}

/// Running lagged product sums over the window, updated per swap in
/// `O(N · max_lag)`.
struct DescentState {
    n: usize,
    len: usize,
    max_lag: usize,
    rows: Vec<Vec<f64>>,
    sums: Vec<f64>,
    /// `[(i * n + j) * (max_lag + 1) + t] = Σ_{s < len - t} x_i(s) x_j(s + t)`.
    cross: Vec<f64>,
    pair_err: Vec<f64>,
    total: f64,
    target: Vec<f64>,
    inv_len: Vec<f64>,
    scratch_cross: Vec<f64>,
    scratch_err: Vec<f64>,
}

impl DescentState {
    fn new(rows: Vec<Vec<f64>>, len: usize, target: &CorrelationTarget) -> Self {
        let n = rows.len();
        let max_lag = target.max_lag();
        let width = max_lag + 1;
        let sums = rows.iter().map(|r| r[..len].iter().sum()).collect();
        let mut cross = vec![0.0; n * n * width];
        let mut target_c = vec![0.0; n * n * width];
        for i in 0..n {
            for j in 0..n {
                let base = (i * n + j) * width;
                for t in 0..width {
                    cross[base + t] = (0..len - t).map(|s| rows[i][s] * rows[j][s + t]).sum();
                    target_c[base + t] = target.value(i, j, t);
                }
            }
        }
        let inv_len = (0..width).map(|t| 1.0 / (len - t) as f64).collect();
        let mut state = Self {
            n,
            len,
            max_lag,
            rows,
            sums,
            cross,
            pair_err: vec![0.0; n * n],
            total: 0.0,
            target: target_c,
            inv_len,
            scratch_cross: vec![0.0; (2 * n) * width],
            scratch_err: vec![0.0; 2 * n],
        };
        for i in 0..n {
            for j in 0..n {
                let base = (i * n + j) * width;
                state.pair_err[i * n + j] = state.pair_error(
                    &state.cross[base..base + width],
                    state.sums[i],
                    state.sums[j],
                    state.cross[(i * n + i) * width],
                    state.cross[(j * n + j) * width],
                    &state.target[base..base + width],
                );
            }
        }
        state.total = state.pair_err.iter().sum();
        state
    }

    /// Squared deviation of one pair; infinite when its normalizer vanishes.
    fn pair_error(
        &self,
        cross: &[f64],
        sum_i: f64,
        sum_j: f64,
        sq_i: f64,
        sq_j: f64,
        target: &[f64],
    ) -> f64 {
        let l = self.len as f64;
        let mm = (sum_i / l) * (sum_j / l);
        let cov = cross[0] / l - mm;
        let var_i = sq_i / l - (sum_i / l) * (sum_i / l);
        let var_j = sq_j / l - (sum_j / l) * (sum_j / l);
        if !(var_i > 0.0 && var_j > 0.0) || libm::fabs(cov) <= 1e-12 * libm::sqrt(var_i * var_j) {
            return f64::INFINITY;
        }
        let inv_cov = 1.0 / cov;
        let mut err = 0.0;
        for t in 1..=self.max_lag {
            let c = (cross[t] * self.inv_len[t] - mm) * inv_cov;
            let d = c - target[t];
            err += d * d;
        }
        err
    }

    /// Applies the swap if it strictly lowers the objective.
    ///
    /// Pairs involving the swapped row are re-evaluated one at a time; the
    /// partial sum only grows, so evaluation stops once it reaches the
    /// current objective.
    fn try_swap(&mut self, swap: Swap) -> bool {
        let Swap { process: r, first: a, second: b } = swap;
        let len = self.len;
        if a >= len && b >= len {
            return false;
        }
        let (xa, xb) = (self.rows[r][a], self.rows[r][b]);
        if xa == xb {
            return false;
        }
        // Changed window positions and their increments.
        let mut changed = [(0usize, 0.0f64); 2];
        let mut k = 0;
        if a < len {
            changed[k] = (a, xb - xa);
            k += 1;
        }
        if b < len {
            changed[k] = (b, xa - xb);
            k += 1;
        }
        let changed = &changed[..k];
        let both_in_window = k == 2;
        let new_sum_r = self.sums[r] + changed.iter().map(|(_, d)| d).sum::<f64>();

        let n = self.n;
        let width = self.max_lag + 1;
        let mut candidate = 0.0;
        for i in (0..n).filter(|i| *i != r) {
            for j in (0..n).filter(|j| *j != r) {
                candidate += self.pair_err[i * n + j];
            }
        }

        // Scratch slot 2j holds pair (r, j), slot 2j + 1 holds (j, r).
        let rr = (r * n + r) * width;
        let out = 2 * r * width;
        {
            let row_r = &self.rows[r];
            for t in 0..width {
                let mut delta = 0.0;
                if t == 0 {
                    for &(p, d) in changed {
                        let old = row_r[p];
                        delta += (old + d) * (old + d) - old * old;
                    }
                } else {
                    for &(p, d) in changed {
                        if p + t < len {
                            delta += d * row_r[p + t];
                        }
                        if p >= t {
                            delta += d * row_r[p - t];
                        }
                    }
                    if both_in_window && a.abs_diff(b) == t {
                        delta += changed[0].1 * changed[1].1;
                    }
                }
                self.scratch_cross[out + t] = self.cross[rr + t] + delta;
            }
        }
        let sq_r = self.scratch_cross[out];
        let e = self.pair_error(
            &self.scratch_cross[out..out + width],
            new_sum_r,
            new_sum_r,
            sq_r,
            sq_r,
            &self.target[rr..rr + width],
        );
        self.scratch_err[2 * r] = e;
        candidate += e;
        if !(candidate < self.total) {
            return false;
        }

        for j in (0..n).filter(|j| *j != r) {
            let rj = (r * n + j) * width;
            let jr = (j * n + r) * width;
            let (out_rj, out_jr) = (2 * j * width, (2 * j + 1) * width);
            {
                let row_j = &self.rows[j];
                for t in 0..width {
                    let (mut d_rj, mut d_jr) = (0.0, 0.0);
                    for &(p, d) in changed {
                        if p + t < len {
                            d_rj += d * row_j[p + t];
                        }
                        if p >= t {
                            d_jr += d * row_j[p - t];
                        }
                    }
                    self.scratch_cross[out_rj + t] = self.cross[rj + t] + d_rj;
                    self.scratch_cross[out_jr + t] = self.cross[jr + t] + d_jr;
                }
            }
            let sq_j = self.cross[(j * n + j) * width];
            let e_rj = self.pair_error(
                &self.scratch_cross[out_rj..out_rj + width],
                new_sum_r,
                self.sums[j],
                sq_r,
                sq_j,
                &self.target[rj..rj + width],
            );
            candidate += e_rj;
            if !(candidate < self.total) {
                return false;
            }
            let e_jr = self.pair_error(
                &self.scratch_cross[out_jr..out_jr + width],
                self.sums[j],
                new_sum_r,
                sq_j,
                sq_r,
                &self.target[jr..jr + width],
            );
            candidate += e_jr;
            if !(candidate < self.total) {
                return false;
            }
            self.scratch_err[2 * j] = e_rj;
            self.scratch_err[2 * j + 1] = e_jr;
        }

        self.rows[r].swap(a, b);
        self.sums[r] = new_sum_r;
        for j in 0..n {
            let rj = (r * n + j) * width;
            let slot = 2 * j * width;
            self.cross[rj..rj + width].copy_from_slice(&self.scratch_cross[slot..slot + width]);
            self.pair_err[r * n + j] = self.scratch_err[2 * j];
            if j != r {
                let jr = (j * n + r) * width;
                let slot = (2 * j + 1) * width;
                self.cross[jr..jr + width].copy_from_slice(&self.scratch_cross[slot..slot + width]);
                self.pair_err[j * n + r] = self.scratch_err[2 * j + 1];
            }
        }
        self.total = candidate;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrstats::objective;

    fn small_config(seed: u64, basin: f64) -> GeneratorConfig {
        let target = CorrelationTarget::homogeneous(2, 8.0, 40).unwrap();
        let mut cfg = GeneratorConfig::new(
            64,
            target,
            vec![Marginal::Exponential { mean: 10.0 }, Marginal::Exponential { mean: 5.0 }],
            seed,
        );
        cfg.basin_factor = basin;
        cfg
    }

    #[test]
    fn incremental_matches_full_recomputation() {
        for basin in [1.0, 2.0] {
            let cfg = small_config(11, basin);
            let initial = draw_initial(&cfg).unwrap();
            let (rows, _) = initial.into_rows();
            let mut state = DescentState::new(rows, cfg.length, &cfg.target);
            let mut rng = seed::rng(5);
            let mut accepted = 0;
            for _ in 0..5000 {
                let swap = propose_swap(2, cfg.basin_length(), &mut rng);
                if state.try_swap(swap) {
                    accepted += 1;
                }
            }
            assert!(accepted > 10);
            let window = LossMatrix::from_rows(
                state.rows.iter().map(|r| r[..cfg.length].to_vec()).collect(),
            )
            .unwrap();
            let full = objective(&window, &cfg.target).unwrap();
            assert!(
                (full - state.total).abs() <= 1e-8 * full.max(1.0),
                "basin {basin}: incremental {} vs full {full}",
                state.total
            );
        }
    }

    #[test]
    fn single_row_two_columns_forces_the_pair() {
        let mut rng = seed::rng(1);
        for _ in 0..20 {
            let s = propose_swap(1, 2, &mut rng);
            assert_eq!(s.process, 0);
            let mut pair = [s.first, s.second];
            pair.sort();
            assert_eq!(pair, [0, 1]);
        }
    }

    #[test]
    fn rejects_non_positive_mean() {
        let mut cfg = small_config(1, 1.0);
        cfg.marginals[1] = Marginal::Exponential { mean: 0.0 };
        assert!(draw_initial(&cfg).is_err());
        let mut cfg = small_config(1, 1.0);
        cfg.basin_factor = 0.5;
        assert!(run(&cfg).is_err());
    }
}
