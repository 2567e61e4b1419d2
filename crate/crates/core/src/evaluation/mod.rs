//! Clustering quality metrics, the elbow sweep over `k`, and rank-based
//! comparison of methods across logs (average ranks, Friedman test,
//! Nemenyi critical difference).

mod nemenyi;
mod ranking;
pub mod stats;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{Cluster, Clustering, ClusteringError, ExecOptions, Method};
use crate::dfg::{Dfg, DfgError};
use crate::event_log::VariantLog;
use crate::relevance::{average_er_of, RelevanceError};

pub use nemenyi::{nemenyi_cd, nemenyi_q};
pub use ranking::{
    average_ranks, friedman_from_ranks, friedman_test, rank_column, rank_report, Direction, FriedmanResult,
    MetricMatrix, RankReport,
};

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("missing value for method `{method}` on log `{log}`; select a subset of logs without gaps")]
    MissingCell { method: String, log: String },
    #[error("invalid matrix dimensions: {0}")]
    Dimensions(String),
    #[error("unknown log column `{0}`")]
    UnknownLog(String),
    #[error("only alpha = 0.05 is tabulated (got {0})")]
    UnsupportedAlpha(f64),
    #[error("critical values are tabulated for 2..=12 methods (got {0})")]
    MethodsOutOfTable(usize),
    #[error("matrix CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Clustering(#[from] ClusteringError),
    #[error(transparent)]
    Relevance(#[from] RelevanceError),
    #[error(transparent)]
    Dfg(#[from] DfgError),
}

/// The three per-model quality measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub er_avg: f64,
    pub graph_density: f64,
    pub graph_entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub method: String,
    pub log: String,
    pub values: Metrics,
}

fn graph_metrics(log: &VariantLog, members: &[usize], dfg: &Dfg, include_sentinels: bool) -> Result<Metrics, EvaluationError> {
    Ok(Metrics {
        er_avg: average_er_of(log, members.iter().copied(), dfg)?.average_bits,
        graph_density: dfg.graph_density(include_sentinels)?,
        graph_entropy: dfg.graph_entropy(include_sentinels),
    })
}

pub fn cluster_metrics(log: &VariantLog, cluster: &Cluster, include_sentinels: bool) -> Result<Metrics, EvaluationError> {
    graph_metrics(log, &cluster.members, &cluster.dfg, include_sentinels)
}

/// Metrics of the single graph discovered from the whole log.
pub fn log_metrics(log: &VariantLog, include_sentinels: bool) -> Result<Metrics, EvaluationError> {
    let all: Vec<usize> = (0..log.len()).collect();
    let dfg = Dfg::build(log.variants().iter().map(|v| (&v.trace, v.multiplicity)))?;
    graph_metrics(log, &all, &dfg, include_sentinels)
}

/// Case-weighted mean of each cluster's metrics: `sum_j c_j * m(C_j) / T`.
pub fn weighted_metrics(clustering: &Clustering, log: &VariantLog, include_sentinels: bool) -> Result<Metrics, EvaluationError> {
    let total = log.total_cases() as f64;
    let mut out = Metrics {
        er_avg: 0.0,
        graph_density: 0.0,
        graph_entropy: 0.0,
    };
    for c in &clustering.clusters {
        let m = cluster_metrics(log, c, include_sentinels)?;
        let w = c.case_count as f64 / total;
        out.er_avg += w * m.er_avg;
        out.graph_density += w * m.graph_density;
        out.graph_entropy += w * m.graph_entropy;
    }
    Ok(out)
}

pub fn metric_row(clustering: &Clustering, log: &VariantLog, log_name: &str, include_sentinels: bool) -> Result<MetricRow, EvaluationError> {
    Ok(MetricRow {
        method: clustering.method.clone(),
        log: log_name.to_string(),
        values: weighted_metrics(clustering, log, include_sentinels)?,
    })
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent seed for one `(label, k)` cell of an experiment driven by a
/// single master seed.
pub fn derive_seed(seed: u64, label: &str, k: usize) -> u64 {
    let mut h = splitmix64(seed);
    for b in label.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ k as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElbowCell {
    pub method: String,
    pub k: usize,
    pub seed: u64,
    pub result: Result<Metrics, String>,
}

/// Runs every method for every `k` and records the weighted metrics. A
/// failing cell is kept with its error message. Cells are independent and
/// each uses its own derived seed, so the output does not depend on
/// `options.parallel`.
pub fn elbow_sweep(
    log: &VariantLog,
    ks: &[usize],
    methods: &[Method],
    seed: u64,
    include_sentinels: bool,
    options: ExecOptions,
) -> Vec<ElbowCell> {
    let cells: Vec<(Method, usize)> = methods.iter().flat_map(|&m| ks.iter().map(move |&k| (m, k))).collect();
    let run = |&(method, k): &(Method, usize)| {
        let tag = method.tag();
        let cell_seed = derive_seed(seed, &tag, k);
        let result = method
            .run(log, k, cell_seed, options)
            .map_err(EvaluationError::from)
            .and_then(|c| weighted_metrics(&c, log, include_sentinels))
            .map_err(|e| e.to_string());
        ElbowCell {
            method: tag,
            k,
            seed: cell_seed,
            result,
        }
    };
    if options.parallel {
        cells.par_iter().map(run).collect()
    } else {
        cells.iter().map(run).collect()
    }
}

/// `method,k,er,graph_density,graph_entropy` rows; failed cells have empty
/// metric fields.
pub fn elbow_csv(cells: &[ElbowCell]) -> String {
    let mut out = String::from("method,k,er,graph_density,graph_entropy\n");
    for c in cells {
        match &c.result {
            Ok(m) => writeln!(out, "{},{},{},{},{}", c.method, c.k, m.er_avg, m.graph_density, m.graph_entropy),
            Err(_) => writeln!(out, "{},{},,,", c.method, c.k),
        }
        .expect("writing to a String");
    }
    out
}
