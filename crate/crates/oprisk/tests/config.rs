use oprisk::config::{ExperimentConfig, DEFAULT_WINDOW_GRID};
use oprisk::Error;
use oprisk_core::bnlearn::SearchMode;
use oprisk_core::synthgen::Marginal;

#[test]
fn every_key_is_honoured() {
    let text = "\
n_processes = 2
length = 800
tau = 10, 4, 4, 6
max_lag = 30
marginal = exponential
means = 7.5, 2
labels = fraud,outage
basin_factor = 1.5
plateau_window = 50
max_iterations = 900
seed = 123
window_grid = 2, 4
realizations = 5
horizon = 40
repetitions = 20
n_states = 4
search = exhaustive
fig1_window = 8
output_dir = results/run1
";
    let c = ExperimentConfig::parse(text).unwrap();
    let g = &c.generator;
    assert_eq!(g.n_processes(), 2);
    assert_eq!(g.length, 800);
    assert_eq!((g.target.tau(0, 0), g.target.tau(0, 1), g.target.tau(1, 1)), (10.0, 4.0, 6.0));
    assert_eq!(g.target.max_lag(), 30);
    assert_eq!(g.marginals, vec![Marginal::Exponential { mean: 7.5 }, Marginal::Exponential { mean: 2.0 }]);
    assert_eq!(g.labels, vec!["fraud", "outage"]);
    assert_eq!((g.basin_factor, g.plateau_window, g.max_iterations, g.seed), (1.5, 50, 900, 123));
    assert_eq!(c.window_grid, vec![2, 4]);
    assert_eq!((c.realizations, c.horizon, c.repetitions, c.n_states), (5, 40, 20, 4));
    assert_eq!(c.search, SearchMode::Exhaustive);
    assert_eq!(c.fig1_window, 8);
    assert_eq!(c.output_dir.as_deref(), Some(std::path::Path::new("results/run1")));
}

#[test]
fn defaults_match_an_empty_file() {
    let c = ExperimentConfig::default();
    assert_eq!(c, ExperimentConfig::parse("# nothing set\n\n").unwrap());
    assert_eq!(c.window_grid, DEFAULT_WINDOW_GRID.to_vec());
    assert_eq!(c.master_seed(), 1);
    assert_eq!(c.generator.labels, vec!["P1", "P2", "P3"]);
    assert_eq!(c.search, SearchMode::Greedy);
    assert_eq!(c.output_dir, None);
    // auto max_lag = ceil(5 · 25)
    assert_eq!(c.generator.target.max_lag(), 125);
    assert_eq!(ExperimentConfig::parse("max_lag = auto").unwrap(), c);
}

#[test]
fn asymmetric_decay_is_rejected() {
    assert!(ExperimentConfig::parse("n_processes = 2\nmeans = 1,2\ntau = 10,4,5,6\n").is_err());
}

#[test]
fn load_reports_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.cfg");
    std::fs::write(&path, "seed = 4\n\nlength = short\n").unwrap();
    let err = ExperimentConfig::load(&path).unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, Error::Config(_)));
    assert!(msg.contains("exp.cfg:3"), "{msg}");
    assert!(msg.contains("length"), "{msg}");

    std::fs::write(&path, "seed = 4\n").unwrap();
    assert_eq!(ExperimentConfig::load(&path).unwrap().master_seed(), 4);
    assert!(matches!(ExperimentConfig::load(&dir.path().join("missing.cfg")), Err(Error::Io { .. })));
}

#[test]
fn seed_override_revalidates() {
    let mut c = ExperimentConfig::default();
    c.set_seed(99);
    assert_eq!(c.generator.seed, 99);
    c.validate().unwrap();
    c.horizon = 100;
    assert!(c.validate().is_err());
}

#[test]
fn labels_must_be_file_safe() {
    for bad in ["labels = a#b,c,d", "labels = a,,c"] {
        assert!(ExperimentConfig::parse(bad).is_err(), "{bad}");
    }
}
