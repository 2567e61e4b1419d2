use rayon::prelude::*;

use super::{Cluster, Clustering, ClusteringError, ExecOptions, SeedSet};
use crate::event_log::VariantLog;
use crate::relevance::{trace_cost, Overlay, RelevanceError};

/// One greedy decision: the candidate score of `variant` against every
/// cluster at the time it was visited, and the cluster it joined.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentStep {
    pub variant: usize,
    pub scores: Vec<f64>,
    pub chosen: usize,
}

/// Entropic clustering.
///
/// Each seed founds a cluster. The remaining variants are visited in
/// canonical order (decreasing multiplicity, then first appearance). A
/// variant is hypothetically added, with its full multiplicity, to each
/// cluster graph; it joins the cluster under which its own cost is lowest
/// (ties go to the lowest cluster index) and that graph is updated.
pub fn ec_cluster(log: &VariantLog, k: usize, seeds: &SeedSet, options: ExecOptions) -> Result<Clustering, ClusteringError> {
    seeds.validate(log)?;
    if seeds.seed_indices.len() != k {
        return Err(ClusteringError::InvalidSeeds(format!(
            "expected {k} seeds, got {}",
            seeds.seed_indices.len()
        )));
    }

    let mut clusters: Vec<Cluster> = seeds
        .seed_indices
        .iter()
        .map(|&s| Cluster::from_members(log, vec![s]))
        .collect::<Result<_, _>>()?;
    let mut is_seed = vec![false; log.len()];
    for &s in &seeds.seed_indices {
        is_seed[s] = true;
    }

    let mut steps = Vec::with_capacity(log.len() - k);
    let mut evaluations = 0u64;
    for (v, variant) in log.variants().iter().enumerate() {
        if is_seed[v] {
            continue;
        }
        let score = |c: &Cluster| -> Result<f64, RelevanceError> {
            let overlay = Overlay::new(&c.dfg, &variant.trace, variant.multiplicity);
            Ok(trace_cost(&variant.trace, &overlay)?.bits)
        };
        let scores: Vec<f64> = if options.parallel && k > 1 {
            clusters.par_iter().map(score).collect::<Result<_, _>>()?
        } else {
            clusters.iter().map(score).collect::<Result<_, _>>()?
        };
        evaluations += scores.len() as u64;

        let mut chosen = 0;
        for (j, &s) in scores.iter().enumerate().skip(1) {
            if s < scores[chosen] {
                chosen = j;
            }
        }
        let target = &mut clusters[chosen];
        target.dfg.add_variant(&variant.trace, variant.multiplicity)?;
        target.members.push(v);
        target.case_count += variant.multiplicity;
        steps.push(AssignmentStep {
            variant: v,
            scores,
            chosen,
        });
    }
    for c in &mut clusters {
        c.members.sort_unstable();
    }

    let mut clustering = Clustering::from_clusters(log, clusters, format!("ec-{}", seeds.strategy.tag()), 0)?;
    clustering.steps = steps;
    clustering.candidate_evaluations = evaluations;
    Ok(clustering)
}
