use std::path::Path;
use std::process::{Command, Output};

use oprisk::config::ExperimentConfig;
use oprisk::formats;
use oprisk::harness;

const SMALL: &str = "length = 600\nmax_iterations = 20000\nrealizations = 2\nwindow_grid = 1,5,20,60\n";

fn oprisk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oprisk"))
        .current_dir(dir)
        .env_remove("OPRISK_OUT")
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.cfg"), SMALL).unwrap();
    dir
}

#[test]
fn unit_window_aggregation_returns_the_generated_data() {
    let dir = setup();
    let d = dir.path();
    ok(oprisk(d, &["generate", "--config", "small.cfg", "--out", "o"]));
    ok(oprisk(d, &["aggregate", "--config", "small.cfg", "--out", "o", "--input", "o/series.csv", "--window", "1"]));
    let generated = formats::read_file(&d.join("o/series.csv")).unwrap();
    let extracted = formats::read_file(&d.join("o/extracted_T1.csv")).unwrap();
    // Same header and rows once the window column is removed.
    let stripped: String = extracted
        .lines()
        .map(|l| format!("{}\n", l.split_once(',').unwrap().1))
        .collect();
    assert_eq!(stripped, generated);
    let series = formats::parse_series(&generated).unwrap();
    let db = formats::parse_extracted(&extracted).unwrap();
    assert_eq!(db.to_loss_matrix().unwrap(), series);
    for name in ["generator_report.txt", "objective_trace.csv", "correlations.csv"] {
        assert!(d.join("o").join(name).is_file(), "{name} missing");
    }
}

#[test]
fn staged_run_reproduces_the_grid_cell() {
    let dir = setup();
    let d = dir.path();
    ok(oprisk(d, &["generate", "--config", "small.cfg", "--out", "o", "--seed", "11"]));
    ok(oprisk(d, &["aggregate", "--config", "small.cfg", "--out", "o", "--input", "o/series.csv", "--window", "20"]));
    ok(oprisk(d, &["learn", "--config", "small.cfg", "--out", "o", "--input", "o/extracted_T20.csv"]));
    ok(oprisk(d, &["var", "--config", "small.cfg", "--out", "o", "--input", "o/network_T20.txt", "--seed", "11"]));

    let mut config = ExperimentConfig::parse(SMALL).unwrap();
    config.set_seed(11);
    config.window_grid = vec![20];
    let series = harness::generate_realizations(&config).unwrap();
    let grid = harness::run_grid(&config, &series[..1], true).unwrap();
    let cell = &grid.cells[0][0];
    let var = formats::read_file(&d.join("o/var_T20.csv")).unwrap();
    let expected = formats::render_var_report(cell.var.as_ref().unwrap(), &grid.labels);
    assert_eq!(var, expected);
    let edges = formats::read_file(&d.join("o/edges_T20.edges")).unwrap();
    assert_eq!(edges, formats::render_edge_list(&cell.structure, &grid.labels));
    for label in ["P1", "P2", "P3"] {
        let pdf = formats::read_file(&d.join(format!("o/pdf_T20_{label}.csv"))).unwrap();
        // 600 / 20 = 30 convolutions of 5 bins.
        assert_eq!(pdf.lines().count(), 1 + 4 * 30 + 1);
    }
}

#[test]
fn fig2_with_default_grid_has_fifteen_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Default grid and length; fewer proposals and realizations keep it quick.
    std::fs::write(d.join("quick.cfg"), "max_iterations = 20000\nrealizations = 2\n").unwrap();
    ok(oprisk(d, &["experiment", "fig2", "--config", "quick.cfg", "--out", "o"]));
    let text = formats::read_file(&d.join("o/fig2.csv")).unwrap();
    let windows: Vec<usize> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(windows, vec![1, 5, 10, 20, 40, 60, 80, 100, 120, 140, 160, 180, 200, 220, 240]);
    for line in text.lines().skip(1) {
        let mean: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(mean > 0.0);
    }
}

#[test]
fn experiment_matches_the_library_entry_point() {
    let dir = setup();
    let d = dir.path();
    ok(oprisk(d, &["experiment", "fig2", "--config", "small.cfg", "--out", "cli", "--seed", "5"]));
    let mut config = ExperimentConfig::parse(SMALL).unwrap();
    config.set_seed(5);
    harness::experiment_fig2(&config, &d.join("lib")).unwrap();
    assert_eq!(std::fs::read(d.join("cli/fig2.csv")).unwrap(), std::fs::read(d.join("lib/fig2.csv")).unwrap());
}

#[test]
fn malformed_config_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (i, bad) in ["length = many\n", "colour = red\n", "window_grid = 1,99999\n", "length 5\n"].iter().enumerate() {
        let name = format!("bad{i}.cfg");
        std::fs::write(d.join(&name), bad).unwrap();
        for sub in [&["generate"][..], &["experiment", "fig2"], &["experiment", "table1"], &["experiment", "fig1"]] {
            let mut args = sub.to_vec();
            args.extend(["--config", name.as_str(), "--out", "o"]);
            let out = oprisk(d, &args);
            assert!(!out.status.success(), "{bad:?} {sub:?} succeeded");
            assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
            assert!(!d.join("o").exists());
        }
    }
}

#[test]
fn usage_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(!oprisk(d, &[]).status.success());
    assert!(!oprisk(d, &["frobnicate"]).status.success());
    assert!(!oprisk(d, &["experiment", "fig3"]).status.success());
    assert!(!oprisk(d, &["aggregate", "--input", "missing.csv", "--window", "2"]).status.success());
    assert!(!oprisk(d, &["learn"]).status.success());
    assert_eq!(std::fs::read_dir(d).unwrap().count(), 0);
}

#[test]
fn empty_database_is_rejected_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("empty.csv"), "window,P1,P2,P3\n").unwrap();
    let out = oprisk(d, &["learn", "--input", "empty.csv", "--out", "o"]);
    assert!(!out.status.success());
    assert!(!d.join("o").exists());
}

#[test]
fn output_directory_from_environment() {
    let dir = setup();
    let d = dir.path();
    let out = Command::new(env!("CARGO_BIN_EXE_oprisk"))
        .current_dir(d)
        .env("OPRISK_OUT", "from_env")
        .args(["generate", "--config", "small.cfg"])
        .output()
        .unwrap();
    ok(out);
    assert!(d.join("from_env/series.csv").is_file());
    // An explicit flag wins over the environment.
    let out = Command::new(env!("CARGO_BIN_EXE_oprisk"))
        .current_dir(d)
        .env("OPRISK_OUT", "from_env")
        .args(["generate", "--config", "small.cfg", "--out", "flag"])
        .output()
        .unwrap();
    ok(out);
    assert!(d.join("flag/series.csv").is_file());
}

#[test]
fn window_flag_narrows_experiments() {
    let dir = setup();
    let d = dir.path();
    ok(oprisk(d, &["experiment", "fig2", "--config", "small.cfg", "--out", "o", "--window", "20", "--horizon", "400"]));
    let text = formats::read_file(&d.join("o/fig2.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("20,"));
}
