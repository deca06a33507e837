//! Flat `key = value` experiment configuration.
//!
//! Blank lines and anything after `#` are ignored. Keys may appear at most
//! once; unknown keys are errors. Every key is optional:
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `n_processes` | 3 | number of processes `N` |
//! | `length` | 5000 | series length `L` |
//! | `tau` | 25 | decay time: one value, or `N·N` comma-separated row-major |
//! | `max_lag` | `auto` | lags in the generator objective; `auto` is `min(L-2, ceil(5·max tau))` |
//! | `marginal` | `exponential` | marginal family |
//! | `means` | `100,50,10` | one mean per process (required unless `N = 3`) |
//! | `labels` | `P1,...,PN` | process labels |
//! | `basin_factor` | 2 | generator rows hold `ceil(basin_factor·L)` values |
//! | `plateau_window` | 10000 | consecutive rejections that stop the generator |
//! | `max_iterations` | 10000000 | proposal cap |
//! | `seed` | 1 | master seed |
//! | `window_grid` | `1,5,10,20,40,60,...,240` | aggregation windows `T` |
//! | `realizations` | 30 | independent series per experiment |
//! | `horizon` | `L` | VaR horizon `H` |
//! | `repetitions` | 100 | percentile repetitions of 1000 samples |
//! | `n_states` | 5 | discretization states |
//! | `search` | `greedy` | `greedy` or `exhaustive` (at most 4 processes) |
//! | `fig1_window` | 25 | window of the averaged correlation export |
//! | `output_dir` | unset | output directory when `--out` is not given |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use oprisk_core::bnlearn::{SearchMode, DEFAULT_N_STATES, EXHAUSTIVE_MAX_NODES};
use oprisk_core::corrstats::{default_max_lag, CorrelationTarget};
use oprisk_core::synthgen::{
    GeneratorConfig, Marginal, DEFAULT_BASIN_FACTOR, DEFAULT_MAX_ITERATIONS, DEFAULT_PLATEAU_WINDOW,
};
use oprisk_core::varengine::DEFAULT_REPETITIONS;

use crate::error::{Error, Result};
use crate::formats;

pub const DEFAULT_WINDOW_GRID: [usize; 15] =
    [1, 5, 10, 20, 40, 60, 80, 100, 120, 140, 160, 180, 200, 220, 240];
pub const DEFAULT_LENGTH: usize = 5000;
pub const DEFAULT_TAU: f64 = 25.0;
pub const DEFAULT_MEANS: [f64; 3] = [100.0, 50.0, 10.0];
pub const DEFAULT_REALIZATIONS: usize = 30;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_FIG1_WINDOW: usize = 25;

const KEYS: [&str; 19] = [
    "n_processes",
    "length",
    "tau",
    "max_lag",
    "marginal",
    "means",
    "labels",
    "basin_factor",
    "plateau_window",
    "max_iterations",
    "seed",
    "window_grid",
    "realizations",
    "horizon",
    "repetitions",
    "n_states",
    "search",
    "fig1_window",
    "output_dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Generator settings; `generator.seed` is the master seed.
    pub generator: GeneratorConfig,
    pub window_grid: Vec<usize>,
    pub realizations: usize,
    pub horizon: usize,
    pub repetitions: usize,
    pub n_states: usize,
    pub search: SearchMode,
    pub fig1_window: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::parse("").expect("defaults are valid")
    }
}

struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn get<T>(&self, key: &str, parse: impl FnOnce(&str) -> Option<T>) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some((line, raw)) => parse(raw)
                .map(Some)
                .ok_or_else(|| Error::parse(*line, format!("invalid value {raw:?} for `{key}`"))),
        }
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key, |v| v.parse().ok())
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.get(key, |v| v.split(',').map(|x| x.trim().parse().ok()).collect())
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::parse(line, format!("expected `key = value`, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::parse(line, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(Error::parse(line, format!("empty value for `{key}`")));
            }
            if map.insert(key.to_string(), (line, value.to_string())).is_some() {
                return Err(Error::parse(line, format!("duplicate key `{key}`")));
            }
        }
        Self::from_entries(&Entries(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&formats::read_file(path)?).map_err(|e| match e {
            Error::Parse { line, message } => Error::Config(format!("{}:{line}: {message}", path.display())),
            other => other,
        })
    }

    fn from_entries(e: &Entries) -> Result<Self> {
        let means = e.list::<f64>("means")?;
        let n = match (e.num::<usize>("n_processes")?, &means) {
            (Some(n), _) => n,
            (None, Some(m)) => m.len(),
            (None, None) => DEFAULT_MEANS.len(),
        };
        let means = match means {
            Some(m) => m,
            None if n == DEFAULT_MEANS.len() => DEFAULT_MEANS.to_vec(),
            None => return Err(Error::Config(format!("`means` is required for {n} processes"))),
        };
        if means.len() != n {
            return Err(Error::Config(format!("{} means for {n} processes", means.len())));
        }
        let marginals = match e.get("marginal", |v| (v == "exponential").then_some(()))? {
            Some(()) | None => means.iter().map(|&mean| Marginal::Exponential { mean }).collect(),
        };
        let length = e.num("length")?.unwrap_or(DEFAULT_LENGTH);
        let tau = match e.list::<f64>("tau")? {
            None => vec![DEFAULT_TAU; n * n],
            Some(t) if t.len() == 1 => vec![t[0]; n * n],
            Some(t) if t.len() == n * n => t,
            Some(t) => {
                return Err(Error::Config(format!("`tau` has {} values, expected 1 or {}", t.len(), n * n)))
            }
        };
        let max_tau = tau.iter().copied().fold(0.0, f64::max);
        let max_lag = e
            .get("max_lag", |v| if v == "auto" { Some(None) } else { v.parse().ok().map(Some) })?
            .flatten()
            .unwrap_or_else(|| default_max_lag(length, max_tau));
        let target = CorrelationTarget::new(n, tau, max_lag)?;

        let mut generator = GeneratorConfig::new(length, target, marginals, e.num("seed")?.unwrap_or(DEFAULT_SEED));
        if let Some(labels) = e.get("labels", |v| Some(v.split(',').map(|s| s.trim().to_string()).collect()))? {
            generator.labels = labels;
        }
        generator.basin_factor = e.num("basin_factor")?.unwrap_or(DEFAULT_BASIN_FACTOR);
        generator.plateau_window = e.num("plateau_window")?.unwrap_or(DEFAULT_PLATEAU_WINDOW);
        generator.max_iterations = e.num("max_iterations")?.unwrap_or(DEFAULT_MAX_ITERATIONS);

        let search = e
            .get("search", |v| match v {
                "greedy" => Some(SearchMode::Greedy),
                "exhaustive" => Some(SearchMode::Exhaustive),
                _ => None,
            })?
            .unwrap_or(SearchMode::Greedy);

        let config = Self {
            generator,
            window_grid: e.list("window_grid")?.unwrap_or_else(|| DEFAULT_WINDOW_GRID.to_vec()),
            realizations: e.num("realizations")?.unwrap_or(DEFAULT_REALIZATIONS),
            horizon: e.num("horizon")?.unwrap_or(length),
            repetitions: e.num("repetitions")?.unwrap_or(DEFAULT_REPETITIONS),
            n_states: e.num("n_states")?.unwrap_or(DEFAULT_N_STATES),
            search,
            fig1_window: e.num("fig1_window")?.unwrap_or(DEFAULT_FIG1_WINDOW),
            output_dir: e.get("output_dir", |v| Some(PathBuf::from(v)))?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn master_seed(&self) -> u64 {
        self.generator.seed
    }

    pub fn length(&self) -> usize {
        self.generator.length
    }

    /// Replaces the master seed.
    pub fn set_seed(&mut self, seed: u64) {
        self.generator.seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        self.generator.labels.iter().try_for_each(|l| formats::check_label(l))?;
        let l = self.length();
        if self.window_grid.is_empty() {
            return Err(Error::Config("window_grid is empty".into()));
        }
        if let Some(t) = self.window_grid.iter().find(|&&t| t == 0 || t > l) {
            return Err(Error::Config(format!("window {t} outside 1..={l}")));
        }
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if !(2..=255).contains(&self.n_states) {
            return Err(Error::Config(format!("n_states {} outside 2..=255", self.n_states)));
        }
        if self.search == SearchMode::Exhaustive && self.generator.n_processes() > EXHAUSTIVE_MAX_NODES {
            return Err(Error::Config(format!(
                "exhaustive search needs at most {EXHAUSTIVE_MAX_NODES} processes"
            )));
        }
        if let Some(t) = self.window_grid.iter().find(|&&t| t > self.horizon) {
            return Err(Error::Config(format!("horizon {} below window {t}", self.horizon)));
        }
        if self.fig1_window == 0 || self.fig1_window > l {
            return Err(Error::Config(format!("fig1_window {} outside 1..={l}", self.fig1_window)));
        }
        Ok(())
    }
}
