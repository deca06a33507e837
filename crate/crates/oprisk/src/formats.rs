//! On-disk formats.
//!
//! Floats are written with Rust's shortest round-trip formatting (`{:?}`), so a
//! value read back is bit-identical to the one written, and reruns with the
//! same seed produce byte-identical files.
//!
//! | file | layout |
//! |------|--------|
//! | loss series | header of process labels, one row per time step |
//! | extracted database | header `window,<labels>`, one row per record, first column the window |
//! | generator report | `key = value` lines |
//! | objective trace | `iteration,objective` |
//! | correlations | `i,j,lag,c,C_target` (1-based process indices) |
//! | network | line-oriented text, see [`render_network`] |
//! | edge list | one `parent child` pair of labels per line |
//! | VaR report | `process,var,std` rows and a final `total,<sum>,` row |
//! | binned PDF | `index,value,mass` (1-based index, monetary value) |

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use oprisk_core::bnlearn::{DagStructure, DiscreteBayesNet, Discretization};
use oprisk_core::corrstats::{CorrelationEstimate, CorrelationTarget};
use oprisk_core::synthgen::GeneratorReport;
use oprisk_core::{BinnedPdf, ExtractedDatabase, LossMatrix, VarReport};

use crate::error::{Error, Result};

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Lines with `#` comments stripped, skipping blank ones, with their
/// 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_f64(line: usize, field: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a number, got {field:?}")))
}

fn parse_usize(line: usize, field: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a non-negative integer, got {field:?}")))
}

pub(crate) fn check_label(label: &str) -> Result<()> {
    if label.is_empty() || label.contains(|c: char| c.is_whitespace() || c == ',' || c == '#') {
        return Err(Error::Config(format!(
            "process label {label:?} must be non-empty without commas, `#` or whitespace"
        )));
    }
    Ok(())
}

fn join_row(values: impl Iterator<Item = f64>) -> String {
    values.map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

pub fn render_series(series: &LossMatrix) -> Result<String> {
    series.labels().iter().try_for_each(|l| check_label(l))?;
    let mut out = series.labels().join(",");
    out.push('\n');
    for s in 0..series.n_steps() {
        out.push_str(&join_row((0..series.n_processes()).map(|i| series.get(i, s))));
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_series(text: &str) -> Result<LossMatrix> {
    let mut lines = content_lines(text);
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty series file"))?;
    let labels: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let mut rows = vec![Vec::new(); labels.len()];
    for (line, l) in lines {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != labels.len() {
            return Err(Error::parse(line, format!("{} fields, expected {}", fields.len(), labels.len())));
        }
        for (row, f) in rows.iter_mut().zip(fields) {
            row.push(parse_f64(line, f)?);
        }
    }
    Ok(LossMatrix::with_labels(rows, labels)?)
}

pub fn render_extracted(db: &ExtractedDatabase) -> Result<String> {
    db.labels().iter().try_for_each(|l| check_label(l))?;
    let mut out = format!("window,{}\n", db.labels().join(","));
    for rec in db.records() {
        let _ = writeln!(out, "{},{}", db.window(), join_row(rec.iter().copied()));
    }
    Ok(out)
}

pub fn parse_extracted(text: &str) -> Result<ExtractedDatabase> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "empty extracted database"))?;
    let mut cols = header.split(',').map(|s| s.trim().to_string());
    if cols.next().as_deref() != Some("window") {
        return Err(Error::parse(hline, "first column must be `window`"));
    }
    let labels: Vec<String> = cols.collect();
    let mut window = None;
    let mut records = Vec::new();
    for (line, l) in lines {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != labels.len() + 1 {
            return Err(Error::parse(line, format!("{} fields, expected {}", fields.len(), labels.len() + 1)));
        }
        let w = parse_usize(line, fields[0])?;
        if *window.get_or_insert(w) != w {
            return Err(Error::parse(line, "window differs between records"));
        }
        records.push(fields[1..].iter().map(|f| parse_f64(line, f)).collect::<Result<Vec<_>>>()?);
    }
    let window = window.ok_or_else(|| Error::parse(hline, "extracted database has no records"))?;
    Ok(ExtractedDatabase::from_records(window, records, labels)?)
}

pub fn render_generator_report(report: &GeneratorReport) -> String {
    format!(
        "initial_objective = {:?}\nfinal_objective = {:?}\naccepted_swaps = {}\nproposals = {}\nhalted_by = {}\n",
        report.initial_objective,
        report.final_objective,
        report.accepted_swaps,
        report.proposals,
        report.halted_by.as_str()
    )
}

pub fn render_trace(report: &GeneratorReport) -> String {
    let mut out = String::from("iteration,objective\n");
    for (it, v) in &report.objective_trace {
        let _ = writeln!(out, "{it},{v:?}");
    }
    out
}

/// All defined pairs and lags of an estimate next to the target values.
pub fn render_correlations(est: &CorrelationEstimate, target: &CorrelationTarget) -> String {
    let mut out = String::from("i,j,lag,c,C_target\n");
    let n = est.n_processes();
    for i in 0..n {
        for j in 0..n {
            let Some(slice) = est.slice(i, j) else { continue };
            for (t, c) in slice.iter().enumerate() {
                let _ = writeln!(out, "{},{},{t},{c:?},{:?}", i + 1, j + 1, target.value(i, j, t));
            }
        }
    }
    out
}

/// A learned network with the discretization and window it was fitted on.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkFile {
    pub labels: Vec<String>,
    pub window: usize,
    pub discretization: Discretization,
    pub net: DiscreteBayesNet,
}

/// Line-oriented network text:
///
/// ```text
/// states <n>
/// window <T>
/// nodes <N>
/// node <label> <upper edge>       (N lines; bin width = upper edge / n)
/// edges <E>
/// edge <parent> <child>           (E lines)
/// cpt <label>                     (per node, followed by one line per parent
/// <p_1> ... <p_n>                  configuration, lowest parent most significant)
/// ```
pub fn render_network(file: &NetworkFile) -> Result<String> {
    file.labels.iter().try_for_each(|l| check_label(l))?;
    let net = &file.net;
    let mut out = String::from("# discrete bayesian network\n");
    let _ = writeln!(out, "states {}", net.n_states());
    let _ = writeln!(out, "window {}", file.window);
    let _ = writeln!(out, "nodes {}", net.n_nodes());
    for (i, label) in file.labels.iter().enumerate() {
        let _ = writeln!(out, "node {label} {:?}", file.discretization.maximum(i));
    }
    let edges = net.structure().edges();
    let _ = writeln!(out, "edges {}", edges.len());
    for (p, c) in &edges {
        let _ = writeln!(out, "edge {} {}", file.labels[*p], file.labels[*c]);
    }
    for (i, label) in file.labels.iter().enumerate() {
        let cpt = net.cpt(i);
        let _ = writeln!(out, "cpt {label}");
        for config in 0..cpt.n_configs() {
            let col: Vec<String> = cpt.column(config).iter().map(|p| format!("{p:?}")).collect();
            let _ = writeln!(out, "{}", col.join(" "));
        }
    }
    Ok(out)
}

fn keyed<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, Vec<String>)> {
    let (line, l) = lines.next().ok_or_else(|| Error::parse(0, format!("missing `{key}` line")))?;
    let mut parts = l.split_whitespace();
    if parts.next() != Some(key) {
        return Err(Error::parse(line, format!("expected `{key}`")));
    }
    Ok((line, parts.map(str::to_string).collect()))
}

pub fn parse_network(text: &str) -> Result<NetworkFile> {
    let mut lines = content_lines(text);
    let single = |(line, args): (usize, Vec<String>)| -> Result<usize> {
        match args.as_slice() {
            [v] => parse_usize(line, v),
            _ => Err(Error::parse(line, "expected one value")),
        }
    };
    let n_states = single(keyed(&mut lines, "states")?)?;
    let window = single(keyed(&mut lines, "window")?)?;
    let n_nodes = single(keyed(&mut lines, "nodes")?)?;
    let mut labels = Vec::with_capacity(n_nodes);
    let mut maxima = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (line, args) = keyed(&mut lines, "node")?;
        let [label, upper] = args.as_slice() else {
            return Err(Error::parse(line, "expected `node <label> <upper edge>`"));
        };
        labels.push(label.clone());
        maxima.push(parse_f64(line, upper)?);
    }
    let index_of = |line: usize, label: &str| {
        labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::parse(line, format!("unknown node {label:?}")))
    };
    let n_edges = single(keyed(&mut lines, "edges")?)?;
    let mut edges = Vec::with_capacity(n_edges);
    for _ in 0..n_edges {
        let (line, args) = keyed(&mut lines, "edge")?;
        let [p, c] = args.as_slice() else {
            return Err(Error::parse(line, "expected `edge <parent> <child>`"));
        };
        edges.push((index_of(line, p)?, index_of(line, c)?));
    }
    let structure = DagStructure::from_edges(n_nodes, &edges)?;
    let mut tables = Vec::with_capacity(n_nodes);
    for (i, label) in labels.iter().enumerate() {
        let (line, args) = keyed(&mut lines, "cpt")?;
        if args.as_slice() != std::slice::from_ref(label) {
            return Err(Error::parse(line, format!("expected `cpt {label}`")));
        }
        let configs = n_states.pow(structure.parents(i).count() as u32);
        let mut table = Vec::with_capacity(configs * n_states);
        for _ in 0..configs {
            let (line, l) = lines.next().ok_or_else(|| Error::parse(line, "truncated cpt"))?;
            let row = l.split_whitespace().map(|f| parse_f64(line, f)).collect::<Result<Vec<_>>>()?;
            if row.len() != n_states {
                return Err(Error::parse(line, format!("{} probabilities, expected {n_states}", row.len())));
            }
            table.extend(row);
        }
        tables.push(table);
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::parse(line, "trailing content after the last cpt"));
    }
    Ok(NetworkFile {
        labels,
        window,
        discretization: Discretization::new(n_states, maxima)?,
        net: DiscreteBayesNet::from_tables(structure, n_states, tables)?,
    })
}

pub fn render_edge_list(structure: &DagStructure, labels: &[String]) -> String {
    structure
        .edges()
        .iter()
        .map(|(p, c)| format!("{} {}\n", labels[*p], labels[*c]))
        .collect()
}

pub fn render_var_report(report: &VarReport, labels: &[String]) -> String {
    let mut out = String::from("process,var,std\n");
    for ((label, var), std) in labels.iter().zip(&report.per_process_var).zip(&report.per_process_std) {
        let _ = writeln!(out, "{label},{var:?},{std:?}");
    }
    let _ = writeln!(out, "total,{:?},", report.total_var);
    out
}

pub fn render_pdf(pdf: &BinnedPdf) -> String {
    let mut out = String::from("index,value,mass\n");
    for (k, m) in pdf.mass().iter().enumerate() {
        let _ = writeln!(out, "{},{:?},{m:?}", k + 1, pdf.value(k));
    }
    out
}
