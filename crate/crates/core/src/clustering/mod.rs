//! Trace clustering: entropic clustering (EC), its recursive splitting
//! variant, seed initialization, and the random and activity-frequency
//! baselines.
//!
//! All clusterings operate on variants. A [`Clustering`] keeps one live
//! [`Dfg`] per cluster, built from exactly the member variants weighted by
//! their multiplicities.

mod baselines;
mod ec;
mod init;
mod split;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dfg::{Dfg, DfgError};
use crate::event_log::VariantLog;
use crate::relevance::RelevanceError;

pub use baselines::{activity_profile, frequency_kmeanspp, frequency_kmeanspp_detailed, random_clustering, KMeansOutcome};
pub use ec::{ec_cluster, AssignmentStep};
pub use init::{init_plusplus, init_random, init_seeds, normalized_distance, seed_distance};
pub use split::ec_split;

/// Deterministic generator used for every random choice.
pub type ClusterRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> ClusterRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Error)]
pub enum ClusteringError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("k = {k} exceeds the number of variants ({variants})")]
    TooManyClusters { k: usize, variants: usize },
    #[error("invalid seeds: {0}")]
    InvalidSeeds(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("unknown {kind} `{value}`")]
    UnknownName { kind: &'static str, value: String },
    #[error(transparent)]
    Relevance(#[from] RelevanceError),
    #[error(transparent)]
    Dfg(#[from] DfgError),
}

pub(crate) fn check_k(log: &VariantLog, k: usize) -> Result<(), ClusteringError> {
    if k == 0 {
        return Err(ClusteringError::ZeroK);
    }
    if k > log.len() {
        return Err(ClusteringError::TooManyClusters { k, variants: log.len() });
    }
    Ok(())
}

/// How EC picks its initial seed variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InitStrategy {
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "pp")]
    PlusPlus,
    #[serde(rename = "ppnorm")]
    PlusPlusNorm,
}

impl InitStrategy {
    pub fn tag(self) -> &'static str {
        match self {
            InitStrategy::Random => "random",
            InitStrategy::PlusPlus => "pp",
            InitStrategy::PlusPlusNorm => "ppnorm",
        }
    }
}

impl FromStr for InitStrategy {
    type Err = ClusteringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" | "rand" => Ok(InitStrategy::Random),
            "pp" | "++" | "plusplus" => Ok(InitStrategy::PlusPlus),
            "ppnorm" | "++norm" | "plusplus-norm" => Ok(InitStrategy::PlusPlusNorm),
            _ => Err(ClusteringError::UnknownName {
                kind: "init strategy",
                value: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSet {
    pub seed_indices: Vec<usize>,
    pub strategy: InitStrategy,
}

impl SeedSet {
    pub fn new(seed_indices: Vec<usize>, strategy: InitStrategy) -> Self {
        SeedSet { seed_indices, strategy }
    }

    pub fn validate(&self, log: &VariantLog) -> Result<(), ClusteringError> {
        let mut seen = vec![false; log.len()];
        for &i in &self.seed_indices {
            if i >= log.len() {
                return Err(ClusteringError::InvalidSeeds(format!("index {i} out of range")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(ClusteringError::InvalidSeeds(format!("index {i} repeated")));
            }
        }
        if self.seed_indices.is_empty() {
            return Err(ClusteringError::ZeroK);
        }
        Ok(())
    }
}

/// Knobs that must not change results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecOptions {
    pub parallel: bool,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions { parallel: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    /// Variant indices, ascending.
    pub members: Vec<usize>,
    pub dfg: Dfg,
    pub case_count: u64,
}

impl Cluster {
    pub fn from_members(log: &VariantLog, mut members: Vec<usize>) -> Result<Cluster, ClusteringError> {
        members.sort_unstable();
        let dfg = Dfg::build(members.iter().map(|&i| {
            let v = log.variant(i);
            (&v.trace, v.multiplicity)
        }))?;
        let case_count = members.iter().map(|&i| log.variant(i).multiplicity).sum();
        Ok(Cluster {
            members,
            dfg,
            case_count,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub method: String,
    pub seed: u64,
    pub requested_k: usize,
    pub clusters: Vec<Cluster>,
    /// Cluster index of each variant.
    pub assignment: Vec<usize>,
    /// Greedy assignment decisions, in order (EC methods only).
    pub steps: Vec<AssignmentStep>,
    /// Number of candidate relevance evaluations performed.
    pub candidate_evaluations: u64,
}

impl Clustering {
    /// Builds a clustering from explicit member lists. Every variant must
    /// appear in exactly one non-empty list.
    pub fn from_members(
        log: &VariantLog,
        members: Vec<Vec<usize>>,
        method: impl Into<String>,
        seed: u64,
    ) -> Result<Clustering, ClusteringError> {
        let clusters = members
            .into_iter()
            .map(|m| Cluster::from_members(log, m))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_clusters(log, clusters, method.into(), seed)
    }

    pub(crate) fn from_clusters(
        log: &VariantLog,
        clusters: Vec<Cluster>,
        method: String,
        seed: u64,
    ) -> Result<Clustering, ClusteringError> {
        let mut assignment = vec![usize::MAX; log.len()];
        for (j, c) in clusters.iter().enumerate() {
            if c.members.is_empty() {
                return Err(ClusteringError::InvalidPartition(format!("cluster {j} is empty")));
            }
            for &i in &c.members {
                if i >= log.len() {
                    return Err(ClusteringError::InvalidPartition(format!("variant {i} out of range")));
                }
                if assignment[i] != usize::MAX {
                    return Err(ClusteringError::InvalidPartition(format!("variant {i} in two clusters")));
                }
                assignment[i] = j;
            }
        }
        if let Some(i) = assignment.iter().position(|&a| a == usize::MAX) {
            return Err(ClusteringError::InvalidPartition(format!("variant {i} unassigned")));
        }
        Ok(Clustering {
            method,
            seed,
            requested_k: clusters.len(),
            clusters,
            assignment,
            steps: Vec::new(),
            candidate_evaluations: 0,
        })
    }

    pub fn single(log: &VariantLog, method: impl Into<String>, seed: u64) -> Result<Clustering, ClusteringError> {
        Self::from_members(log, vec![(0..log.len()).collect()], method, seed)
    }

    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    /// Checks the partition and that each cluster graph equals a rebuild
    /// from its members.
    pub fn verify(&self, log: &VariantLog) -> Result<(), ClusteringError> {
        let rebuilt = Self::from_members(
            log,
            self.clusters.iter().map(|c| c.members.clone()).collect(),
            self.method.clone(),
            self.seed,
        )?;
        for (j, (a, b)) in self.clusters.iter().zip(&rebuilt.clusters).enumerate() {
            if a != b {
                return Err(ClusteringError::InvalidPartition(format!("cluster {j} graph or counts are stale")));
            }
        }
        if rebuilt.assignment != self.assignment {
            return Err(ClusteringError::InvalidPartition("assignment map is stale".to_string()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> ClusteringJson {
        ClusteringJson {
            method: self.method.clone(),
            seed: self.seed,
            clusters: self
                .clusters
                .iter()
                .map(|c| ClusterJson {
                    variants: c.members.clone(),
                    case_count: c.case_count,
                })
                .collect(),
            config: None,
        }
    }

    /// `case_id,cluster` rows. Logs without case ids get synthetic ids
    /// `v<variant>-<n>`.
    pub fn case_rows(&self, log: &VariantLog) -> Vec<(String, usize)> {
        let mut rows = Vec::with_capacity(log.total_cases() as usize);
        for (i, v) in log.variants().iter().enumerate() {
            let cluster = self.assignment[i];
            if v.case_ids.is_empty() {
                rows.extend((0..v.multiplicity).map(|n| (format!("v{i}-{n}"), cluster)));
            } else {
                rows.extend(v.case_ids.iter().map(|c| (c.clone(), cluster)));
            }
        }
        rows
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterJson {
    pub variants: Vec<usize>,
    pub case_count: u64,
}

/// `{ "method", "seed", "clusters": [{"variants", "case_count"}] }`, with an
/// optional echo of the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringJson {
    pub method: String,
    pub seed: u64,
    pub clusters: Vec<ClusterJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl ClusteringJson {
    pub fn into_clustering(self, log: &VariantLog) -> Result<Clustering, ClusteringError> {
        let c = Clustering::from_members(log, self.clusters.into_iter().map(|c| c.variants).collect(), self.method, self.seed)?;
        Ok(c)
    }
}

/// A clustering procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Ec(InitStrategy),
    EcSplit(InitStrategy),
    Random,
    FrequencyKMeans,
}

impl Method {
    pub fn tag(&self) -> String {
        match self {
            Method::Ec(s) => format!("ec-{}", s.tag()),
            Method::EcSplit(s) => format!("ec-split-{}", s.tag()),
            Method::Random => "random".to_string(),
            Method::FrequencyKMeans => "freq-kmeans".to_string(),
        }
    }

    /// Runs the method with a generator seeded from `seed`.
    pub fn run(&self, log: &VariantLog, k: usize, seed: u64, options: ExecOptions) -> Result<Clustering, ClusteringError> {
        let mut rng = rng_from_seed(seed);
        let mut c = match *self {
            Method::Ec(strategy) => {
                check_k(log, k)?;
                let seeds = init_seeds(log, k, strategy, &mut rng, options)?;
                ec_cluster(log, k, &seeds, options)?
            }
            Method::EcSplit(strategy) => ec_split(log, k, strategy, &mut rng, options)?,
            Method::Random => random_clustering(log, k, &mut rng)?,
            Method::FrequencyKMeans => frequency_kmeanspp(log, k, &mut rng)?,
        };
        c.method = self.tag();
        c.seed = seed;
        Ok(c)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for Method {
    type Err = ClusteringError;

    /// Accepts full tags such as `ec-pp`, `ec-split-random`, `random`,
    /// `freq-kmeans`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(rest) = s.strip_prefix("ec-split-") {
            return Ok(Method::EcSplit(rest.parse()?));
        }
        if let Some(rest) = s.strip_prefix("ec-") {
            return Ok(Method::Ec(rest.parse()?));
        }
        match s {
            "random" => Ok(Method::Random),
            "freq-kmeans" | "frequency-kmeans" => Ok(Method::FrequencyKMeans),
            _ => Err(ClusteringError::UnknownName {
                kind: "method",
                value: s.to_string(),
            }),
        }
    }
}
