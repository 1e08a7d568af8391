//! Benchmark grids: dataset × cut × method × seed, with `first_order` searched over η.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use specdisc::dataset_io::{gen_blobs, load_csv_matrix, CsvOptions};
use specdisc::discretize::{DiscretizerConfig, Method};
use specdisc::graph::{build_graph_from_features, build_graph_from_weights, CutKind, Graph};
use specdisc::relaxed::{solve_relaxed, RelaxedSolution};
use specdisc::seeding::derive_seed;
use specdisc::{Error, Result};

use crate::report::{run_one, write_csv, write_text, RunReport};
use crate::InputKind;

fn default_k() -> usize {
    10
}

fn default_eta_grid() -> Vec<f64> {
    vec![1e-3, 1e-2, 1e-1, 1.0, 10.0]
}

fn default_dim() -> usize {
    2
}

fn default_spread() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub inputs: Vec<DatasetEntry>,
    pub cuts: Vec<String>,
    pub methods: Vec<String>,
    #[serde(default = "default_k")]
    pub k_neighbors: usize,
    #[serde(default = "default_eta_grid")]
    pub eta_grid: Vec<f64>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Adds `wall_ms` to every report; off by default so reruns are byte-identical.
    #[serde(default)]
    pub record_timing: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetEntry {
    /// A CSV file; features are turned into a kNN graph, graphs are used as given.
    File {
        id: String,
        path: PathBuf,
        clusters: usize,
        #[serde(default)]
        kind: InputKind,
        #[serde(default)]
        has_header: bool,
        #[serde(default)]
        labels_last: bool,
    },
    /// Gaussian blobs from `gen_blobs`; ground-truth labels are kept.
    Blobs {
        id: String,
        n: usize,
        clusters: usize,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_spread")]
        spread: f64,
        seed: u64,
    },
}

impl DatasetEntry {
    pub fn id(&self) -> &str {
        match self {
            DatasetEntry::File { id, .. } | DatasetEntry::Blobs { id, .. } => id,
        }
    }

    pub fn clusters(&self) -> usize {
        match self {
            DatasetEntry::File { clusters, .. } | DatasetEntry::Blobs { clusters, .. } => *clusters,
        }
    }
}

/// A configuration with its names resolved.
#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub config: BenchConfig,
    pub cuts: Vec<CutKind>,
    pub methods: Vec<Method>,
    /// Directory that relative dataset paths are resolved against.
    pub base_dir: PathBuf,
}

fn parse_list<T: std::str::FromStr<Err = Error>>(items: &[String]) -> Result<Vec<T>> {
    items.iter().map(|s| s.parse()).collect()
}

impl BenchPlan {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let config: BenchConfig = serde_json::from_str(text)
            .map_err(|e| Error::Contract(format!("bench config: {e}")))?;
        let empty = [
            ("inputs", config.inputs.is_empty()),
            ("cuts", config.cuts.is_empty()),
            ("methods", config.methods.is_empty()),
            ("seeds", config.seeds.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::Contract(format!(
                "bench config: `{name}` must not be empty"
            )));
        }
        let mut ids: Vec<&str> = config.inputs.iter().map(DatasetEntry::id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Contract(
                "bench config: dataset ids must be unique".into(),
            ));
        }
        let cuts = parse_list::<CutKind>(&config.cuts)?;
        let methods = parse_list::<Method>(&config.methods)?;
        if methods.contains(&Method::FirstOrder)
            && (config.eta_grid.is_empty()
                || config
                    .eta_grid
                    .iter()
                    .any(|e| !(e.is_finite() && *e >= 0.0)))
        {
            return Err(Error::Contract(
                "bench config: eta_grid needs finite nonnegative values".into(),
            ));
        }
        Ok(Self {
            config,
            cuts,
            methods,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::report::io_error(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
    }
}

struct Prepared {
    id: String,
    truth: Option<Vec<usize>>,
    graph: Graph,
    relaxed: RelaxedSolution,
}

fn prepare(entry: &DatasetEntry, cut: CutKind, k: usize, base_dir: &Path) -> Result<Prepared> {
    let (graph, truth) = match entry {
        DatasetEntry::File {
            path,
            kind,
            has_header,
            labels_last,
            ..
        } => {
            let path = base_dir.join(path);
            let opts = CsvOptions {
                has_header: *has_header,
                labels_last: *labels_last,
            };
            let data = load_csv_matrix(&path, &opts)?;
            let g = match kind {
                InputKind::Features => build_graph_from_features(&data, k, cut)?,
                InputKind::Graph => build_graph_from_weights(data.features, cut)?,
            };
            (g, data.labels)
        }
        DatasetEntry::Blobs {
            n,
            clusters,
            dim,
            spread,
            seed,
            ..
        } => {
            let data = gen_blobs(*n, *clusters, *dim, *spread, *seed)?;
            (build_graph_from_features(&data, k, cut)?, data.labels)
        }
    };
    let relaxed = solve_relaxed(&graph, entry.clusters())?;
    Ok(Prepared {
        id: entry.id().to_string(),
        truth,
        graph,
        relaxed,
    })
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    /// One record per (dataset, cut, method, seed); `first_order` keeps its best η.
    pub reports: Vec<RunReport>,
    /// Every (η, seed) run of `first_order`.
    pub eta_sweep: Vec<RunReport>,
    /// Markdown table per cut, in config order.
    pub tables: Vec<(CutKind, String)>,
}

pub fn cell_seed(dataset: &str, cut: CutKind, method: Method, seed: u64) -> u64 {
    derive_seed([
        dataset.as_bytes(),
        cut.as_str().as_bytes(),
        method.as_str().as_bytes(),
        &seed.to_le_bytes()[..],
    ])
}

pub fn run_bench(plan: &BenchPlan) -> Result<BenchOutput> {
    let cfg = &plan.config;
    let pairs: Vec<(usize, CutKind)> = (0..cfg.inputs.len())
        .flat_map(|d| plan.cuts.iter().map(move |&c| (d, c)))
        .collect();
    let prepared: Vec<Prepared> = pairs
        .par_iter()
        .map(|&(d, cut)| prepare(&cfg.inputs[d], cut, cfg.k_neighbors, &plan.base_dir))
        .collect::<Result<_>>()?;

    // (prepared index, method, seed, eta)
    let mut cells = Vec::new();
    for (p, _) in prepared.iter().enumerate() {
        for &method in &plan.methods {
            for &seed in &cfg.seeds {
                if method == Method::FirstOrder {
                    for &eta in &cfg.eta_grid {
                        cells.push((p, method, seed, eta));
                    }
                } else {
                    cells.push((p, method, seed, 0.0));
                }
            }
        }
    }
    let runs: Vec<RunReport> = cells
        .par_iter()
        .map(|&(p, method, seed, eta)| {
            let prep = &prepared[p];
            let mut dc =
                DiscretizerConfig::new(method, cell_seed(&prep.id, prep.graph.cut, method, seed));
            dc.eta = eta;
            run_one(
                &prep.id,
                &prep.graph,
                &prep.relaxed,
                &dc,
                seed,
                prep.truth.as_deref(),
                cfg.record_timing,
            )
            .map(|(_, r)| r)
        })
        .collect::<Result<_>>()?;

    let mut reports = Vec::new();
    let mut eta_sweep = Vec::new();
    let mut i = 0;
    while i < runs.len() {
        let (_, method, _, _) = cells[i];
        if method == Method::FirstOrder {
            let group = &runs[i..i + cfg.eta_grid.len()];
            eta_sweep.extend_from_slice(group);
            // First minimum wins, so ties go to the smaller η in grid order.
            let best = group.iter().fold(
                &group[0],
                |b, r| if r.objective < b.objective { r } else { b },
            );
            reports.push(best.clone());
            i += cfg.eta_grid.len();
        } else {
            reports.push(runs[i].clone());
            i += 1;
        }
    }

    let tables = plan
        .cuts
        .iter()
        .map(|&cut| (cut, markdown_table(cut, &prepared, &plan.methods, &reports)))
        .collect();
    Ok(BenchOutput {
        reports,
        eta_sweep,
        tables,
    })
}

fn fmt_value(v: f64) -> String {
    format!("{v:.4}")
}

fn markdown_table(
    cut: CutKind,
    prepared: &[Prepared],
    methods: &[Method],
    reports: &[RunReport],
) -> String {
    let mut means: BTreeMap<(&str, &str), (f64, usize)> = BTreeMap::new();
    for r in reports.iter().filter(|r| r.cut == cut.as_str()) {
        let e = means
            .entry((r.dataset.as_str(), r.method.as_str()))
            .or_insert((0.0, 0));
        e.0 += r.objective;
        e.1 += 1;
    }
    let mut out = String::new();
    let _ = writeln!(out, "### Mean objective, {cut} cut\n");
    let header: Vec<&str> = methods.iter().map(|m| m.as_str()).collect();
    let _ = writeln!(out, "| dataset | OPT_r | {} |", header.join(" | "));
    let _ = writeln!(out, "|---|---:|{}", "---:|".repeat(methods.len()));
    for prep in prepared.iter().filter(|p| p.graph.cut == cut) {
        let row: Vec<f64> = methods
            .iter()
            .map(|m| {
                let (sum, count) = means[&(prep.id.as_str(), m.as_str())];
                sum / count as f64
            })
            .collect();
        let best = row.iter().copied().fold(f64::INFINITY, f64::min);
        let cells: Vec<String> = row
            .iter()
            .map(|&v| {
                if v == best {
                    format!("**{}**", fmt_value(v))
                } else {
                    fmt_value(v)
                }
            })
            .collect();
        let _ = writeln!(
            out,
            "| {} | {} | {} |",
            prep.id,
            fmt_value(prep.relaxed.lower_bound()),
            cells.join(" | ")
        );
    }
    out
}

/// Writes `reports.csv`, `eta_sweep.csv` and `table_<cut>.md` under the configured directory.
pub fn write_outputs(plan: &BenchPlan, out: &BenchOutput) -> Result<Vec<PathBuf>> {
    let dir = plan.base_dir.join(&plan.config.output_dir);
    std::fs::create_dir_all(&dir).map_err(|e| crate::report::io_error(&dir, e))?;
    let mut written = Vec::new();
    let reports = dir.join("reports.csv");
    write_csv(&reports, &out.reports)?;
    written.push(reports);
    if !out.eta_sweep.is_empty() {
        let sweep = dir.join("eta_sweep.csv");
        write_csv(&sweep, &out.eta_sweep)?;
        written.push(sweep);
    }
    for (cut, table) in &out.tables {
        let path = dir.join(format!("table_{}.md", cut.as_str()));
        write_text(&path, table)?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Serialize)]
pub struct BenchSummary {
    pub reports: usize,
    pub eta_runs: usize,
    pub files: Vec<PathBuf>,
}
