//! Seeded experiments: correlation decay, topology versus window, and VaR
//! versus window.
//!
//! Seeds: realization `r` runs the generator with
//! `seed::derive(master, &[r, 0])`; the VaR sampling of realization `r` at
//! window `T` uses `seed::derive(master, &[r, 1, T])`. Adding realizations or
//! windows therefore never changes the results of existing ones.
//!
//! Every experiment computes all of its results before writing anything, so
//! a failing run leaves no partial output behind.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use oprisk_core::bnlearn::{self, DagStructure};
use oprisk_core::corrstats::{self, CorrelationTarget};
use oprisk_core::seed;
use oprisk_core::synthgen::{self, GeneratorConfig, GeneratorReport};
use oprisk_core::varengine::{self, VarReport};
use oprisk_core::{aggregate, ExtractedDatabase, LossMatrix};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::formats::{self, NetworkFile};

/// Lags in the raw correlation export.
pub const FIG1_RAW_LAGS: usize = 1000;
/// Lags in the window-averaged correlation export.
pub const FIG1_AVERAGED_LAGS: usize = 40;

pub fn generator_seed(master: u64, realization: usize) -> u64 {
    seed::derive(master, &[realization as u64, 0])
}

pub fn var_seed(master: u64, realization: usize, window: usize) -> u64 {
    seed::derive(master, &[realization as u64, 1, window as u64])
}

pub fn generator_config(config: &ExperimentConfig, realization: usize) -> GeneratorConfig {
    GeneratorConfig { seed: generator_seed(config.master_seed(), realization), ..config.generator.clone() }
}

pub fn generate(config: &ExperimentConfig, realization: usize) -> Result<(LossMatrix, GeneratorReport)> {
    Ok(synthgen::run(&generator_config(config, realization))?)
}

/// Series of realizations `0..config.realizations`, in order.
pub fn generate_realizations(config: &ExperimentConfig) -> Result<Vec<LossMatrix>> {
    (0..config.realizations)
        .into_par_iter()
        .map(|r| generate(config, r).map(|(series, _)| series))
        .collect()
}

/// Discretizes an extracted database and learns structure and CPTs.
pub fn learn_network(config: &ExperimentConfig, db: &ExtractedDatabase) -> Result<NetworkFile> {
    let (states, discretization) = bnlearn::discretize(db, config.n_states)?;
    let structure = bnlearn::learn_structure(&states, config.search)?;
    let net = bnlearn::learn_cpts(&structure, &states)?;
    Ok(NetworkFile { labels: db.labels().to_vec(), window: db.window(), discretization, net })
}

/// Marginal of every process, then VaR at `horizon`.
pub fn network_var(network: &NetworkFile, horizon: usize, repetitions: usize, seed: u64) -> Result<VarReport> {
    let marginals = (0..network.net.n_nodes())
        .map(|i| bnlearn::marginal(&network.net, i, &network.discretization))
        .collect::<oprisk_core::Result<Vec<_>>>()?;
    Ok(varengine::var_report(&marginals, network.window, horizon, repetitions, seed)?)
}

/// Outcome of one realization at one window.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub structure: DagStructure,
    pub var: Option<VarReport>,
}

/// Results indexed by realization, then by position in `windows`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub windows: Vec<usize>,
    pub labels: Vec<String>,
    pub cells: Vec<Vec<Cell>>,
}

impl Grid {
    pub fn edge_counts(&self, window_index: usize) -> Vec<usize> {
        self.cells.iter().map(|row| row[window_index].structure.n_edges()).collect()
    }

    /// Mean and sample standard deviation of the total VaR across
    /// realizations, one entry per window. `None` without VaR results.
    pub fn var_summary(&self) -> Option<Vec<(usize, f64, f64)>> {
        (0..self.windows.len())
            .map(|k| {
                let totals: Option<Vec<f64>> =
                    self.cells.iter().map(|row| row[k].var.as_ref().map(|v| v.total_var)).collect();
                totals.map(|t| {
                    let (mean, std) = varengine::mean_std(&t);
                    (self.windows[k], mean, std)
                })
            })
            .collect()
    }
}

/// Runs the pipeline for every series and window of the config.
pub fn run_grid(config: &ExperimentConfig, series: &[LossMatrix], with_var: bool) -> Result<Grid> {
    let windows = config.window_grid.clone();
    let jobs: Vec<(usize, usize)> =
        (0..series.len()).flat_map(|r| windows.iter().map(move |&t| (r, t))).collect();
    let flat: Vec<Cell> = jobs
        .par_iter()
        .map(|&(r, t)| {
            let db = aggregate::extract(&series[r], t)?;
            let network = learn_network(config, &db)?;
            let var = if with_var {
                Some(network_var(&network, config.horizon, config.repetitions, var_seed(config.master_seed(), r, t))?)
            } else {
                None
            };
            Ok(Cell { structure: network.net.structure().clone(), var })
        })
        .collect::<Result<_>>()?;
    let mut flat = flat.into_iter();
    let cells = (0..series.len()).map(|_| flat.by_ref().take(windows.len()).collect()).collect();
    let labels = series.first().map(|s| s.labels().to_vec()).unwrap_or_default();
    Ok(Grid { windows, labels, cells })
}

/// `(lag, c_12, C_12)` rows for lags `0..lags`, truncated to what the
/// series supports.
pub fn correlation_rows(series: &LossMatrix, target: &CorrelationTarget, lags: usize) -> Result<Vec<(usize, f64, f64)>> {
    if series.n_processes() < 2 {
        return Err(Error::Config("the correlation export needs at least two processes".into()));
    }
    let max_lag = lags.saturating_sub(1).min(series.n_steps().saturating_sub(2));
    let est = corrstats::empirical_correlation(series, max_lag)?;
    let c = est.slice(0, 1).ok_or(oprisk_core::Error::ConstantSeries { process: 0 })?;
    Ok(c.iter().enumerate().map(|(t, &v)| (t, v, target.value(0, 1, t))).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1 {
    pub raw: Vec<(usize, f64, f64)>,
    pub averaged: Vec<(usize, f64, f64)>,
    pub window: usize,
}

/// Raw and window-averaged cross-correlation of processes 1 and 2; the
/// averaged target uses decay times divided by the window.
pub fn fig1_from_series(config: &ExperimentConfig, series: &LossMatrix) -> Result<Fig1> {
    let target = &config.generator.target;
    let raw = correlation_rows(series, target, FIG1_RAW_LAGS)?;
    let window = config.fig1_window;
    let averaged_series = aggregate::extract(series, window)?.to_loss_matrix()?;
    let averaged_target = target.rescaled(window, 1)?;
    let averaged = correlation_rows(&averaged_series, &averaged_target, FIG1_AVERAGED_LAGS)?;
    Ok(Fig1 { raw, averaged, window })
}

pub fn render_fig1_rows(rows: &[(usize, f64, f64)]) -> String {
    let mut out = String::from("lag,c_12,C_12\n");
    for (t, c, target) in rows {
        out.push_str(&format!("{t},{c:?},{target:?}\n"));
    }
    out
}

pub fn render_table1_counts(grid: &Grid) -> String {
    let mut out = String::from("realization,window,edges\n");
    for (r, row) in grid.cells.iter().enumerate() {
        for (t, cell) in grid.windows.iter().zip(row) {
            out.push_str(&format!("{r},{t},{}\n", cell.structure.n_edges()));
        }
    }
    out
}

pub fn render_fig2(summary: &[(usize, f64, f64)]) -> String {
    let mut out = String::from("window,mean_var,std_var\n");
    for (t, mean, std) in summary {
        out.push_str(&format!("{t},{mean:?},{std:?}\n"));
    }
    out
}

fn write_all(files: Vec<(PathBuf, String)>) -> Result<Vec<PathBuf>> {
    for (path, contents) in &files {
        formats::write_file(path, contents)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

/// Writes `fig1_raw.csv` and `fig1_averaged.csv` for realization 0.
pub fn experiment_fig1(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let (series, _) = generate(config, 0)?;
    let fig = fig1_from_series(config, &series)?;
    write_all(vec![
        (out.join("fig1_raw.csv"), render_fig1_rows(&fig.raw)),
        (out.join("fig1_averaged.csv"), render_fig1_rows(&fig.averaged)),
    ])
}

/// Writes `table1_counts.csv` and one edge list per realization and window
/// under `table1/`.
pub fn experiment_table1(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let series = generate_realizations(config)?;
    let grid = run_grid(config, &series, false)?;
    let mut files = vec![(out.join("table1_counts.csv"), render_table1_counts(&grid))];
    for (r, row) in grid.cells.iter().enumerate() {
        for (t, cell) in grid.windows.iter().zip(row) {
            files.push((
                out.join("table1").join(format!("r{r:03}_T{t:04}.edges")),
                formats::render_edge_list(&cell.structure, &grid.labels),
            ));
        }
    }
    write_all(files)
}

/// Writes `fig2.csv`: mean and standard deviation of the total VaR per window.
pub fn experiment_fig2(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let series = generate_realizations(config)?;
    let grid = run_grid(config, &series, true)?;
    let summary = grid.var_summary().expect("grid computed with VaR");
    write_all(vec![(out.join("fig2.csv"), render_fig2(&summary))])
}
