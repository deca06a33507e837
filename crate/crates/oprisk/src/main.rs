use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use oprisk::formats::{self, NetworkFile};
use oprisk::harness;
use oprisk::ExperimentConfig;
use oprisk_core::corrstats;
use oprisk_core::varengine;

/// Operational-risk pipeline: synthetic loss series, window aggregation,
/// Bayesian-network learning and VaR.
#[derive(Parser, Debug)]
#[command(name = "oprisk", version)]
struct Cli {
    /// Experiment configuration (flat `key = value` file); defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory. Falls back to the config's `output_dir`, then `.`.
    #[arg(long, global = true, env = "OPRISK_OUT")]
    out: Option<PathBuf>,
    /// Aggregation window. For experiments it replaces the window grid.
    #[arg(long, global = true)]
    window: Option<usize>,
    /// VaR horizon, overriding the config.
    #[arg(long, global = true)]
    horizon: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate one correlated loss series (realization 0 of the master seed).
    Generate,
    /// Sum a loss series over non-overlapping windows.
    Aggregate {
        /// Loss series CSV.
        #[arg(long)]
        input: PathBuf,
    },
    /// Learn a discrete Bayesian network from an extracted database.
    Learn {
        /// Extracted database CSV.
        #[arg(long)]
        input: PathBuf,
    },
    /// Per-process and total VaR from a learned network.
    Var {
        /// Network text file.
        #[arg(long)]
        input: PathBuf,
    },
    /// Run a seeded experiment.
    Experiment {
        #[arg(value_enum)]
        which: Experiment,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Experiment {
    Fig1,
    Table1,
    Fig2,
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.set_seed(seed);
    }
    if let Some(horizon) = cli.horizon {
        config.horizon = horizon;
    }
    if let (Some(window), Command::Experiment { .. }) = (cli.window, &cli.command) {
        config.window_grid = vec![window];
        config.fig1_window = window;
    }
    config.validate()?;
    Ok(config)
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn write(path: PathBuf, contents: &str) -> anyhow::Result<PathBuf> {
    formats::write_file(&path, contents)?;
    Ok(path)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = load_config(&cli)?;
    let out = cli.out.clone().or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let out: &Path = &out;
    let master = config.master_seed();
    let written = match &cli.command {
        Command::Generate => {
            let (series, gen_report) = harness::generate(&config, 0)?;
            let est = corrstats::empirical_correlation(&series, config.generator.target.max_lag())?;
            let files = [
                ("series.csv", formats::render_series(&series)?),
                ("generator_report.txt", formats::render_generator_report(&gen_report)),
                ("objective_trace.csv", formats::render_trace(&gen_report)),
                ("correlations.csv", formats::render_correlations(&est, &config.generator.target)),
            ];
            files.into_iter().map(|(name, text)| write(out.join(name), &text)).collect::<anyhow::Result<Vec<_>>>()?
        }
        Command::Aggregate { input } => {
            let Some(window) = cli.window else { bail!("aggregate needs --window") };
            let series = formats::parse_series(&formats::read_file(input)?)
                .with_context(|| format!("reading {}", input.display()))?;
            let db = oprisk_core::extract(&series, window)?;
            vec![write(out.join(format!("extracted_T{window}.csv")), &formats::render_extracted(&db)?)?]
        }
        Command::Learn { input } => {
            let db = formats::parse_extracted(&formats::read_file(input)?)
                .with_context(|| format!("reading {}", input.display()))?;
            let network = harness::learn_network(&config, &db)?;
            let t = network.window;
            let text = formats::render_network(&network)?;
            let edges = formats::render_edge_list(network.net.structure(), &network.labels);
            vec![write(out.join(format!("network_T{t}.txt")), &text)?, write(out.join(format!("edges_T{t}.edges")), &edges)?]
        }
        Command::Var { input } => {
            let network: NetworkFile = formats::parse_network(&formats::read_file(input)?)
                .with_context(|| format!("reading {}", input.display()))?;
            let t = network.window;
            if cli.window.is_some_and(|w| w != t) {
                bail!("--window {} disagrees with the network window {t}", cli.window.unwrap_or_default());
            }
            let var = harness::network_var(&network, config.horizon, config.repetitions, harness::var_seed(master, 0, t))?;
            let mut files = vec![(format!("var_T{t}.csv"), formats::render_var_report(&var, &network.labels))];
            for (i, label) in network.labels.iter().enumerate() {
                let marginal = oprisk_core::bnlearn::marginal(&network.net, i, &network.discretization)?;
                let pdf = varengine::convolve_to_horizon(&marginal, t, config.horizon)?;
                files.push((format!("pdf_T{t}_{label}.csv"), formats::render_pdf(&pdf)));
            }
            files.into_iter().map(|(name, text)| write(out.join(name), &text)).collect::<anyhow::Result<Vec<_>>>()?
        }
        Command::Experiment { which } => match which {
            Experiment::Fig1 => harness::experiment_fig1(&config, out)?,
            Experiment::Table1 => harness::experiment_table1(&config, out)?,
            Experiment::Fig2 => harness::experiment_fig2(&config, out)?,
        },
    };
    report(&written);
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
