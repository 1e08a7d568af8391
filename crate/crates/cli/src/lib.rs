//! Command-line harness for discretizing relaxed spectral clustering solutions.
//!
//! Exit codes: 0 success, 1 a checked inequality failed, 2 bad input, 3 numerical failure.

pub mod bench;
pub mod report;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use specdisc::dataset_io::{load_csv_matrix, CsvOptions};
use specdisc::discretize::{DiscretizerConfig, Method, DEFAULT_ETA};
use specdisc::graph::{build_graph_from_features, build_graph_from_weights, CutKind, Graph};
use specdisc::oracle::{mismatch_study, solve_oracle};
use specdisc::relaxed::solve_relaxed;
use specdisc::theory::run_theory_suite;
use specdisc::{Error, Result};

use crate::bench::{run_bench, write_outputs, BenchPlan, BenchSummary};
use crate::report::{run_one, to_json, write_csv, write_text, RunReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    /// Rows are samples; a kNN graph is built from them.
    #[default]
    Features,
    /// A square symmetric weight matrix.
    Graph,
}

#[derive(Debug, Parser)]
#[command(
    name = "specdisc",
    version,
    about = "Discretize relaxed spectral clustering solutions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster one dataset and write a JSON report with the labels.
    Discretize(DiscretizeArgs),
    /// Run a benchmark grid described by a JSON config.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
    /// How often the cut optimum and the Euclidean-closest partition differ on random graphs.
    Simulate(SimulateArgs),
    /// Randomized checks of the k-means / rotation / cut inequalities.
    TheoryCheck(TheoryArgs),
    /// Exhaustive cut optimum and closest partition of a small graph.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct CsvArgs {
    /// The first line is a header.
    #[arg(long)]
    pub header: bool,
    /// The last column holds integer ground-truth labels.
    #[arg(long)]
    pub labels_last: bool,
}

#[derive(Debug, Args)]
pub struct DiscretizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputKind::Features)]
    pub input_kind: InputKind,
    #[arg(long)]
    pub clusters: usize,
    #[arg(long, default_value = "ratio", value_parser = parse_cut)]
    pub cut: CutKind,
    #[arg(long, default_value = "first_order", value_parser = parse_method)]
    pub method: Method,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: f64,
    /// Neighbors per point for feature inputs.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Record wall time of the discretizer in the report.
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, default_value_t = 2)]
    pub clusters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-instance CSV.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Weight matrix CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub clusters: usize,
    #[arg(long, default_value = "ratio", value_parser = parse_cut)]
    pub cut: CutKind,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_cut(s: &str) -> std::result::Result<CutKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NumericalFailure(_) => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => write_text(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| report::io_error(Path::new("<stdout>"), e))
        }
    }
}

fn emit_csv<T: Serialize>(output: Option<&Path>, rows: &[T]) -> Result<()> {
    match output {
        Some(path) => write_csv(path, rows),
        None => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row)
                    .map_err(|e| Error::Contract(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Contract(e.to_string()))?;
            emit(None, &String::from_utf8_lossy(&bytes))
        }
    }
}

fn load_graph(
    path: &Path,
    kind: InputKind,
    csv: &CsvArgs,
    k: usize,
    cut: CutKind,
) -> Result<(Graph, Option<Vec<usize>>)> {
    let opts = CsvOptions {
        has_header: csv.header,
        labels_last: csv.labels_last && kind == InputKind::Features,
    };
    let data = load_csv_matrix(path, &opts)?;
    match kind {
        InputKind::Features => Ok((build_graph_from_features(&data, k, cut)?, data.labels)),
        InputKind::Graph => Ok((build_graph_from_weights(data.features, cut)?, None)),
    }
}

#[derive(Debug, Serialize)]
pub struct DiscretizeOutput {
    #[serde(flatten)]
    pub report: RunReport,
    pub labels: Vec<usize>,
}

pub fn cmd_discretize(args: &DiscretizeArgs) -> Result<DiscretizeOutput> {
    let (g, truth) = load_graph(&args.input, args.input_kind, &args.csv, args.k, args.cut)?;
    let rs = solve_relaxed(&g, args.clusters)?;
    let mut cfg = DiscretizerConfig::new(args.method, args.seed);
    cfg.eta = args.eta;
    let id = args
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let (y, report) = run_one(&id, &g, &rs, &cfg, args.seed, truth.as_deref(), args.timing)?;
    Ok(DiscretizeOutput {
        report,
        labels: y.into_labels(),
    })
}

#[derive(Debug, Serialize)]
pub struct SimulateRow {
    pub n: usize,
    pub trials: usize,
    pub mismatches: usize,
    pub mismatch_proportion: f64,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Vec<SimulateRow>> {
    Ok(
        mismatch_study(&args.n_list, args.trials, args.clusters, args.seed)?
            .into_iter()
            .map(|r| SimulateRow {
                n: r.n,
                trials: r.trials,
                mismatches: r.mismatches,
                mismatch_proportion: r.proportion,
            })
            .collect(),
    )
}

#[derive(Debug, Serialize)]
pub struct TheoryRow {
    pub instance: usize,
    pub cut: String,
    pub n: usize,
    pub c: usize,
    pub max_sigma: f64,
    pub j_kmeans: Option<f64>,
    pub j_isr: Option<f64>,
    pub eps_var: Option<f64>,
    pub eps: Option<f64>,
    pub sandwich_ok: Option<bool>,
    pub rho_sq: f64,
    pub l_delta: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub rho_ok: bool,
}

/// Summary text, per-instance rows, and whether every check passed.
pub fn cmd_theory_check(args: &TheoryArgs) -> Result<(String, Vec<TheoryRow>, bool)> {
    let suite = run_theory_suite(args.trials, args.seed)?;
    let mut text = String::new();
    let line = |name: &str, t: &specdisc::theory::CheckTally| {
        format!(
            "{name:<10} checked={:<6} violations={:<4} {}\n",
            t.checked,
            t.violations,
            if t.passed() { "PASS" } else { "FAIL" }
        )
    };
    text.push_str(&line("sigma_bound", &suite.sigma_bound));
    text.push_str(&format!("{:<10} max_sigma={:.12}\n", "", suite.max_sigma));
    text.push_str(&line("sandwich", &suite.sandwich));
    text.push_str(&line("ordering", &suite.ordering));
    text.push_str(&line("rho", &suite.rho));
    text.push_str(if suite.passed() {
        "overall PASS\n"
    } else {
        "overall FAIL\n"
    });
    let finite = |v: f64| v.is_finite().then_some(v);
    let rows = suite
        .rows
        .iter()
        .map(|r| TheoryRow {
            instance: r.instance,
            cut: r.cut.to_string(),
            n: r.n,
            c: r.c,
            max_sigma: r.max_sigma,
            j_kmeans: finite(r.j_kmeans),
            j_isr: finite(r.j_isr),
            eps_var: finite(r.eps_var),
            eps: finite(r.eps),
            sandwich_ok: (r.cut == CutKind::Ratio).then_some(r.sandwich_ok),
            rho_sq: r.rho_sq,
            l_delta: r.l_delta,
            lambda_min: r.lambda_min,
            lambda_max: r.lambda_max,
            rho_ok: r.rho_ok,
        })
        .collect();
    Ok((text, rows, suite.passed()))
}

#[derive(Debug, Serialize)]
pub struct Partition {
    pub labels: Vec<usize>,
    pub objective: f64,
}

#[derive(Debug, Serialize)]
pub struct OracleOutput {
    pub n: usize,
    pub clusters: usize,
    pub cut: String,
    pub feasible_count: u64,
    pub relaxed_lower_bound: f64,
    pub optimum: Partition,
    pub closest: Partition,
    pub closest_distance: f64,
    pub same_partition: bool,
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<OracleOutput> {
    let (g, _) = load_graph(
        &args.input,
        InputKind::Graph,
        &CsvArgs {
            header: false,
            labels_last: false,
        },
        0,
        args.cut,
    )?;
    let rs = solve_relaxed(&g, args.clusters)?;
    let r = solve_oracle(&rs, &g, args.clusters)?;
    Ok(OracleOutput {
        n: g.n(),
        clusters: args.clusters,
        cut: args.cut.to_string(),
        feasible_count: r.feasible_count as u64,
        relaxed_lower_bound: rs.lower_bound(),
        same_partition: r.best_labels.same_partition(&r.closest_labels),
        optimum: Partition {
            labels: r.best_labels.canonical(),
            objective: r.best_value,
        },
        closest: Partition {
            labels: r.closest_labels.canonical(),
            objective: r.closest_objective,
        },
        closest_distance: r.closest_value,
    })
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Discretize(args) => {
            let out = cmd_discretize(&args)?;
            emit(args.output.as_deref(), &to_json(&out))?;
        }
        Command::Bench { config } => {
            let plan = BenchPlan::load(&config)?;
            let out = run_bench(&plan)?;
            let files = write_outputs(&plan, &out)?;
            let summary = BenchSummary {
                reports: out.reports.len(),
                eta_runs: out.eta_sweep.len(),
                files,
            };
            emit(None, &to_json(&summary))?;
        }
        Command::Simulate(args) => {
            let rows = cmd_simulate(&args)?;
            emit_csv(args.output.as_deref(), &rows)?;
        }
        Command::TheoryCheck(args) => {
            let (text, rows, passed) = cmd_theory_check(&args)?;
            if let Some(path) = &args.output {
                write_csv(path, &rows)?;
            }
            emit(None, &text)?;
            if !passed {
                return Ok(EXIT_CHECK_FAILED);
            }
        }
        Command::Oracle(args) => {
            let out = cmd_oracle(&args)?;
            emit(args.output.as_deref(), &to_json(&out))?;
        }
    }
    Ok(EXIT_OK)
}
