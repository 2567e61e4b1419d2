//! File-producing commands: cluster a log, sweep `k`, rank methods across
//! logs, and export graphs as DOT. Every artifact starts with an echo of
//! the configuration that produced it, so a run can be repeated from its
//! outputs alone.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::clustering::{Clustering, ClusteringError, ClusteringJson, ExecOptions, InitStrategy, Method};
use crate::dfg::{Dfg, DfgError, EdgeLabels};
use crate::evaluation::{
    cluster_metrics, derive_seed, elbow_csv, elbow_sweep, rank_report, weighted_metrics, Direction, EvaluationError,
    MetricMatrix, MetricRow, RankReport,
};
use crate::event_log::{parse_csv, parse_xes, to_variant_log, CsvConfig, EventLogError, VariantLog, VariantLogJson};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    EventLog(#[from] EventLogError),
    #[error(transparent)]
    Clustering(#[from] ClusteringError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error(transparent)]
    Dfg(#[from] DfgError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CommandError + '_ {
    move |source| CommandError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    Csv,
    Xes,
    VariantsJson,
}

impl FromStr for InputFormat {
    type Err = CommandError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(InputFormat::Csv),
            "xes" => Ok(InputFormat::Xes),
            "variants-json" => Ok(InputFormat::VariantsJson),
            _ => Err(CommandError::Config(format!("unknown input format `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSpec {
    pub path: PathBuf,
    pub format: InputFormat,
    #[serde(default)]
    pub csv: CsvConfig,
}

/// Reads and augments a log.
pub fn load_log(input: &InputSpec) -> Result<VariantLog, CommandError> {
    let path = &input.path;
    let log = match input.format {
        InputFormat::Csv => {
            let file = File::open(path).map_err(io_err(path))?;
            to_variant_log(&parse_csv(file, &input.csv)?)?.augment_bos_eos()?
        }
        InputFormat::Xes => {
            let file = File::open(path).map_err(io_err(path))?;
            to_variant_log(&parse_xes(BufReader::new(file))?)?.augment_bos_eos()?
        }
        InputFormat::VariantsJson => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            VariantLogJson::from_json(&text)?.into_log()?
        }
    };
    Ok(log)
}

/// Clustering method family, without its initialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Ec,
    EcSplit,
    Random,
    FreqKmeans,
}

impl FromStr for MethodKind {
    type Err = CommandError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ec" => Ok(MethodKind::Ec),
            "ec-split" => Ok(MethodKind::EcSplit),
            "random" => Ok(MethodKind::Random),
            "freq-kmeans" => Ok(MethodKind::FreqKmeans),
            _ => Err(CommandError::Config(format!(
                "unknown method `{s}` (expected ec, ec-split, random, freq-kmeans)"
            ))),
        }
    }
}

/// Combines a method family with an optional initialization. EC methods
/// default to `pp`; baselines reject an explicit initialization.
pub fn resolve_method(kind: MethodKind, init: Option<InitStrategy>) -> Result<Method, CommandError> {
    match (kind, init) {
        (MethodKind::Ec, init) => Ok(Method::Ec(init.unwrap_or(InitStrategy::PlusPlus))),
        (MethodKind::EcSplit, init) => Ok(Method::EcSplit(init.unwrap_or(InitStrategy::PlusPlus))),
        (MethodKind::Random, None) => Ok(Method::Random),
        (MethodKind::FreqKmeans, None) => Ok(Method::FrequencyKMeans),
        (_, Some(_)) => Err(CommandError::Config(
            "--init applies only to ec and ec-split".to_string(),
        )),
    }
}

/// Everything needed to reproduce a clustering run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: InputSpec,
    pub method: MethodKind,
    pub init: Option<InitStrategy>,
    pub k: usize,
    pub seed: u64,
    /// Output directory; not echoed, so artifacts do not depend on it.
    #[serde(skip)]
    pub out: PathBuf,
    pub include_sentinels: bool,
    /// Evaluation parallelism; never changes results and is not echoed.
    #[serde(skip, default = "default_parallel")]
    pub parallel: bool,
}

fn default_parallel() -> bool {
    true
}

impl RunConfig {
    pub fn new(input: InputSpec, method: MethodKind, k: usize, seed: u64, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            input,
            method,
            init: None,
            k,
            seed,
            out: out.into(),
            include_sentinels: true,
            parallel: true,
        }
    }

    pub fn resolved_method(&self) -> Result<Method, CommandError> {
        resolve_method(self.method, self.init)
    }

    /// Checks the configuration and fills in the default initialization of
    /// EC methods, so the echoed configuration is complete.
    pub fn normalized(&self) -> Result<(RunConfig, Method), CommandError> {
        if self.k == 0 {
            return Err(CommandError::Config("k must be at least 1".into()));
        }
        let method = self.resolved_method()?;
        let mut config = self.clone();
        if let Method::Ec(s) | Method::EcSplit(s) = method {
            config.init = Some(s);
        }
        Ok((config, method))
    }

    fn options(&self) -> ExecOptions {
        ExecOptions { parallel: self.parallel }
    }
}

fn comment_block(prefix: &str, command: &str, config: &impl Serialize) -> Result<String, CommandError> {
    Ok(format!("{prefix} entroclust {command} {}\n", serde_json::to_string(config)?))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CommandError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn ensure_dir(path: &Path) -> Result<(), CommandError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub cases: u64,
    pub variants: usize,
    pub er_avg: f64,
    pub graph_density: f64,
    pub graph_entropy: f64,
}

#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub clustering: Clustering,
    pub summaries: Vec<ClusterSummary>,
    pub metrics: MetricRow,
    pub artifacts: Vec<PathBuf>,
}

impl ClusterOutcome {
    pub fn summary_lines(&self) -> Vec<String> {
        self.summaries
            .iter()
            .map(|s| {
                format!(
                    "cluster {}: {} cases, {} variants, avg ER {:.4} bits",
                    s.cluster, s.cases, s.variants, s.er_avg
                )
            })
            .collect()
    }
}

fn log_name(input: &InputSpec) -> String {
    input
        .path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Clusters a log and writes `clustering.json`, `assignments.csv`,
/// `cluster_<j>.dot` for every cluster and `metrics.json` into `config.out`.
pub fn cmd_cluster(config: &RunConfig) -> Result<ClusterOutcome, CommandError> {
    let (config, method) = config.normalized()?;
    let config = &config;
    let log = load_log(&config.input)?;
    if config.k > log.len() {
        return Err(CommandError::Config(format!(
            "k = {} exceeds the number of variants ({})",
            config.k,
            log.len()
        )));
    }
    let run_seed = derive_seed(config.seed, &method.tag(), config.k);
    let mut clustering = method.run(&log, config.k, run_seed, config.options())?;
    clustering.seed = config.seed;
    if clustering.k() < config.k {
        log::warn!("only {} of {} requested clusters could be formed", clustering.k(), config.k);
    }
    let config_value = serde_json::to_value(config)?;

    let mut summaries = Vec::with_capacity(clustering.k());
    for (j, c) in clustering.clusters.iter().enumerate() {
        let m = cluster_metrics(&log, c, config.include_sentinels)?;
        summaries.push(ClusterSummary {
            cluster: j,
            cases: c.case_count,
            variants: c.members.len(),
            er_avg: m.er_avg,
            graph_density: m.graph_density,
            graph_entropy: m.graph_entropy,
        });
    }
    let metrics = MetricRow {
        method: clustering.method.clone(),
        log: log_name(&config.input),
        values: weighted_metrics(&clustering, &log, config.include_sentinels)?,
    };

    ensure_dir(&config.out)?;
    let mut artifacts = Vec::new();

    let mut doc = clustering.to_json();
    doc.config = Some(config_value.clone());
    let path = config.out.join("clustering.json");
    write_file(&path, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    artifacts.push(path);

    let mut csv = comment_block("#", "cluster", config)?;
    csv.push_str("case_id,cluster\n");
    for (case, cluster) in clustering.case_rows(&log) {
        writeln!(csv, "{},{}", csv_field(&case), cluster).expect("writing to a String");
    }
    let path = config.out.join("assignments.csv");
    write_file(&path, &csv)?;
    artifacts.push(path);

    for (j, c) in clustering.clusters.iter().enumerate() {
        let dot = comment_block("//", "cluster", config)? + &c.dfg.to_dot(log.alphabet(), EdgeLabels::default());
        let path = config.out.join(format!("cluster_{j}.dot"));
        write_file(&path, &dot)?;
        artifacts.push(path);
    }

    let doc = json!({
        "config": config_value,
        "method": metrics.method,
        "log": metrics.log,
        "values": metrics.values,
        "clusters": summaries,
    });
    let path = config.out.join("metrics.json");
    write_file(&path, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    artifacts.push(path);

    Ok(ClusterOutcome {
        clustering,
        summaries,
        metrics,
        artifacts,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Inclusive range of cluster counts, written `a..b`, `a..=b` or `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KRange {
    pub start: usize,
    pub end: usize,
}

impl KRange {
    pub fn values(&self) -> Vec<usize> {
        (self.start..=self.end).collect()
    }
}

impl FromStr for KRange {
    type Err = CommandError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CommandError::Config(format!("malformed k range `{s}` (expected a..b with 1 <= a <= b)"));
        let (a, b) = match s.split_once("..") {
            Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
            None => (s, s),
        };
        let start: usize = a.trim().parse().map_err(|_| bad())?;
        let end: usize = b.trim().parse().map_err(|_| bad())?;
        if start == 0 || start > end {
            return Err(bad());
        }
        Ok(KRange { start, end })
    }
}

/// Elbow sweep settings. `run.k` is ignored in favour of `k_range`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElbowConfig {
    pub run: RunConfig,
    pub k_range: KRange,
    /// Additional methods swept alongside the configured one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_methods: Vec<String>,
}

/// Sweeps `k` over the range for every method and writes `elbow.csv`.
/// Cells that cannot be computed are left empty.
pub fn cmd_elbow(config: &ElbowConfig) -> Result<PathBuf, CommandError> {
    let (run, first) = config.run.normalized()?;
    let config = &ElbowConfig { run, ..config.clone() };
    let mut methods = vec![first];
    for m in &config.extra_methods {
        let m: Method = m.parse()?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    let log = load_log(&config.run.input)?;
    if config.k_range.end > log.len() {
        log::warn!(
            "k range ends at {} but the log has {} variants; larger k are reported as missing",
            config.k_range.end,
            log.len()
        );
    }
    let cells = elbow_sweep(
        &log,
        &config.k_range.values(),
        &methods,
        config.run.seed,
        config.run.include_sentinels,
        config.run.options(),
    );
    for c in &cells {
        if let Err(e) = &c.result {
            log::warn!("{} k={}: {e}", c.method, c.k);
        }
    }
    ensure_dir(&config.run.out)?;
    let path = config.run.out.join("elbow.csv");
    write_file(&path, &(comment_block("#", "elbow", config)? + &elbow_csv(&cells)))?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankConfig {
    pub matrix: PathBuf,
    pub metric: String,
    pub direction: Direction,
    /// Restrict to these log columns (in this order).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logs: Option<Vec<String>>,
    pub alpha: f64,
    #[serde(skip)]
    pub out: PathBuf,
}

/// Ranks the methods of a metric matrix and writes `ranks.json`.
pub fn cmd_rank(config: &RankConfig) -> Result<(RankReport, PathBuf), CommandError> {
    let file = File::open(&config.matrix).map_err(io_err(&config.matrix))?;
    let mut matrix = MetricMatrix::from_csv(file)?;
    if let Some(logs) = &config.logs {
        matrix = matrix.select_logs(logs)?;
    }
    let report = rank_report(&matrix, &config.metric, config.direction, config.alpha)?;
    let mut doc = serde_json::to_value(&report)?;
    doc["config"] = serde_json::to_value(config)?;
    ensure_dir(&config.out)?;
    let path = config.out.join("ranks.json");
    write_file(&path, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    Ok((report, path))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportConfig {
    pub input: InputSpec,
    /// Clustering JSON to take clusters from; the whole log when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clustering: Option<PathBuf>,
    /// Cluster indices to export; all clusters when empty.
    #[serde(default)]
    pub clusters: Vec<usize>,
    #[serde(skip)]
    pub out: PathBuf,
}

/// Writes `full_log.dot`, or `cluster_<j>.dot` for each selected cluster.
pub fn cmd_export_dfg(config: &ExportConfig) -> Result<Vec<PathBuf>, CommandError> {
    let log = load_log(&config.input)?;
    let header = comment_block("//", "export-dfg", config)?;
    let mut outputs: Vec<(String, Dfg)> = Vec::new();
    match &config.clustering {
        None => {
            if !config.clusters.is_empty() {
                return Err(CommandError::Config("cluster selection requires --clustering".into()));
            }
            let g = Dfg::build(log.variants().iter().map(|v| (&v.trace, v.multiplicity)))?;
            outputs.push(("full_log.dot".to_string(), g));
        }
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            let doc: ClusteringJson = serde_json::from_str(&text)?;
            let clustering = doc.into_clustering(&log)?;
            let selected: Vec<usize> = if config.clusters.is_empty() {
                (0..clustering.k()).collect()
            } else {
                config.clusters.clone()
            };
            for j in selected {
                let c = clustering.clusters.get(j).ok_or_else(|| {
                    CommandError::Config(format!(
                        "unknown cluster id {j} (clustering has {} clusters)",
                        clustering.k()
                    ))
                })?;
                outputs.push((format!("cluster_{j}.dot"), c.dfg.clone()));
            }
        }
    }
    ensure_dir(&config.out)?;
    let mut paths = Vec::new();
    for (name, g) in outputs {
        let path = config.out.join(name);
        write_file(&path, &(header.clone() + &g.to_dot(log.alphabet(), EdgeLabels::default())))?;
        paths.push(path);
    }
    Ok(paths)
}
