//! Per-run records and their CSV/JSON encodings.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use specdisc::discretize::{discretize, DiscretizerConfig, Method};
use specdisc::graph::Graph;
use specdisc::metrics::evaluate;
use specdisc::relaxed::{Assignment, RelaxedSolution};
use specdisc::{Error, Result};

/// Slack allowed between an emitted objective and the relaxation bound.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub dataset: String,
    pub cut: String,
    pub method: String,
    pub seed: u64,
    pub eta: Option<f64>,
    pub objective: f64,
    pub relaxed_lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Only filled when timing was requested, so default reports stay reproducible.
    pub wall_ms: Option<f64>,
    pub acc: Option<f64>,
    pub nmi: Option<f64>,
}

impl RunReport {
    /// Rejects non-finite numbers and objectives below the relaxation bound.
    pub fn validate(&self) -> Result<()> {
        let values = [
            Some(self.objective),
            Some(self.relaxed_lower_bound),
            self.eta,
            self.wall_ms,
            self.acc,
            self.nmi,
        ];
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure(format!(
                "non-finite value in report for {}/{}/{}",
                self.dataset, self.cut, self.method
            )));
        }
        if self.objective < self.relaxed_lower_bound - BOUND_SLACK {
            return Err(Error::NumericalFailure(format!(
                "objective {} below relaxed bound {} for {}/{}/{}",
                self.objective, self.relaxed_lower_bound, self.dataset, self.cut, self.method
            )));
        }
        Ok(())
    }
}

/// One discretizer run wrapped as a report. The wall time covers the discretizer only.
pub fn run_one(
    dataset: &str,
    g: &Graph,
    rs: &RelaxedSolution,
    cfg: &DiscretizerConfig,
    report_seed: u64,
    truth: Option<&[usize]>,
    timing: bool,
) -> Result<(Assignment, RunReport)> {
    let start = std::time::Instant::now();
    let (y, rep) = discretize(rs, g, cfg)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let (acc, nmi) = match truth {
        Some(t) => match evaluate(t, y.labels(), rs.c()) {
            Ok(e) => (Some(e.acc), Some(e.nmi)),
            Err(Error::DegeneratePartition { .. }) => (None, None),
            Err(e) => return Err(e),
        },
        None => (None, None),
    };
    let report = RunReport {
        dataset: dataset.to_string(),
        cut: g.cut.to_string(),
        method: cfg.method.to_string(),
        seed: report_seed,
        eta: (cfg.method == Method::FirstOrder).then_some(cfg.eta),
        objective: rep.final_objective,
        relaxed_lower_bound: rs.lower_bound(),
        iterations: rep.iterations,
        converged: rep.converged,
        wall_ms: timing.then_some(elapsed),
        acc,
        nmi,
    };
    report.validate()?;
    Ok((y, report))
}

pub fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => io_error(path, source),
        other => Error::Contract(format!("{}: {other:?}", path.display())),
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| io_error(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| io_error(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}
