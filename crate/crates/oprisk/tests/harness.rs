use oprisk::config::ExperimentConfig;
use oprisk::formats;
use oprisk::harness::{self, FIG1_AVERAGED_LAGS};
use oprisk_core::aggregate;

const SMALL: &str = "length = 600\nmax_iterations = 20000\nrealizations = 3\nwindow_grid = 1,5,20,60\n";

fn small() -> ExperimentConfig {
    ExperimentConfig::parse(SMALL).unwrap()
}

#[test]
fn adding_realizations_keeps_earlier_ones() {
    let mut config = small();
    let three = harness::generate_realizations(&config).unwrap();
    config.realizations = 2;
    let two = harness::generate_realizations(&config).unwrap();
    assert_eq!(&three[..2], &two[..]);
    assert_ne!(three[0], three[1]);
}

#[test]
fn seeds_depend_on_every_coordinate() {
    assert_ne!(harness::generator_seed(1, 0), harness::generator_seed(2, 0));
    assert_ne!(harness::generator_seed(1, 0), harness::generator_seed(1, 1));
    assert_ne!(harness::var_seed(1, 0, 5), harness::var_seed(1, 0, 10));
    assert_ne!(harness::var_seed(1, 0, 5), harness::var_seed(1, 1, 5));
    assert_ne!(harness::var_seed(1, 0, 5), harness::generator_seed(1, 0));
}

#[test]
fn unit_window_averaging_reproduces_the_raw_export() {
    let mut config = small();
    config.fig1_window = 1;
    let (series, _) = harness::generate(&config, 0).unwrap();
    let fig = harness::fig1_from_series(&config, &series).unwrap();
    assert_eq!(fig.averaged.len(), FIG1_AVERAGED_LAGS);
    assert_eq!(fig.averaged[..], fig.raw[..FIG1_AVERAGED_LAGS]);
    let raw_csv = harness::render_fig1_rows(&fig.raw);
    let averaged_csv = harness::render_fig1_rows(&fig.averaged);
    assert!(raw_csv.starts_with(&averaged_csv));
}

#[test]
fn averaged_target_uses_rescaled_decay() {
    let config = small();
    let (series, _) = harness::generate(&config, 0).unwrap();
    let fig = harness::fig1_from_series(&config, &series).unwrap();
    assert_eq!(fig.window, 25);
    // 600 / 25 = 24 records support lags up to 22.
    assert_eq!(fig.averaged.len(), 23);
    for &(t, _, target) in &fig.averaged {
        let expected = (-(t as f64)).exp();
        assert!((target - expected).abs() <= 1e-15 * expected, "lag {t}: {target} vs {expected}");
    }
    assert_eq!(fig.raw.len(), 599);
    assert_eq!(fig.raw[0].1, 1.0);
}

#[test]
fn grid_is_deterministic_and_matches_single_cells() {
    let config = small();
    let series = harness::generate_realizations(&config).unwrap();
    let grid = harness::run_grid(&config, &series, true).unwrap();
    assert_eq!(grid, harness::run_grid(&config, &series, true).unwrap());
    assert_eq!(grid.cells.len(), 3);
    for (r, row) in grid.cells.iter().enumerate() {
        assert_eq!(row.len(), 4);
        for (&t, cell) in grid.windows.iter().zip(row) {
            let db = aggregate::extract(&series[r], t).unwrap();
            let net = harness::learn_network(&config, &db).unwrap();
            assert_eq!(&cell.structure, net.net.structure());
            let var = harness::network_var(&net, config.horizon, config.repetitions, harness::var_seed(1, r, t)).unwrap();
            assert_eq!(cell.var.as_ref(), Some(&var));
        }
    }
    let summary = grid.var_summary().unwrap();
    assert_eq!(summary.iter().map(|s| s.0).collect::<Vec<_>>(), vec![1, 5, 20, 60]);
    assert!(summary.iter().all(|&(_, mean, std)| mean > 0.0 && std >= 0.0));
    assert!(harness::run_grid(&config, &series, false).unwrap().var_summary().is_none());
}

#[test]
fn experiments_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = small();
    let fig2 = harness::experiment_fig2(&config, dir.path()).unwrap();
    assert_eq!(fig2, vec![dir.path().join("fig2.csv")]);
    let text = formats::read_file(&fig2[0]).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("window,mean_var,std_var\n1,"));

    let table1 = harness::experiment_table1(&config, dir.path()).unwrap();
    assert_eq!(table1.len(), 1 + 3 * 4);
    let counts = formats::read_file(&dir.path().join("table1_counts.csv")).unwrap();
    assert_eq!(counts.lines().count(), 1 + 3 * 4);
    for line in counts.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let edges = formats::read_file(&dir.path().join("table1").join(format!("r{:03}_T{:04}.edges", f[0].parse::<usize>().unwrap(), f[1].parse::<usize>().unwrap()))).unwrap();
        assert_eq!(edges.lines().count(), f[2].parse::<usize>().unwrap());
    }

    let fig1 = harness::experiment_fig1(&config, dir.path()).unwrap();
    assert_eq!(fig1.len(), 2);
    assert!(formats::read_file(&fig1[0]).unwrap().starts_with("lag,c_12,C_12\n0,1.0,1.0\n"));
}

#[test]
fn failing_experiment_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    // One process has no cross-correlation to export.
    let config = ExperimentConfig::parse("n_processes = 1\nmeans = 10\nlength = 300\nmax_iterations = 1000\n").unwrap();
    assert!(harness::experiment_fig1(&config, dir.path()).is_err());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}
