use rand::Rng;

use super::{check_k, ec_cluster, init_seeds, Cluster, Clustering, ClusteringError, ExecOptions, InitStrategy};
use crate::event_log::VariantLog;
use crate::relevance::average_er_of;

/// EC-Split: start from a 2-way EC clustering and repeatedly bisect the
/// cluster with the highest average relevance against its own graph until
/// `k` clusters exist. Sub-clusters replace their parent in place.
///
/// Clusters with a single variant cannot be split; the next-worst cluster
/// is tried instead. If nothing can be split the run stops early and the
/// returned clustering has fewer than `k` clusters (`requested_k` keeps the
/// target). `k = 1` yields the whole log as one cluster.
pub fn ec_split<R: Rng + ?Sized>(
    log: &VariantLog,
    k: usize,
    strategy: InitStrategy,
    rng: &mut R,
    options: ExecOptions,
) -> Result<Clustering, ClusteringError> {
    check_k(log, k)?;
    let tag = format!("ec-split-{}", strategy.tag());
    if k == 1 {
        let mut c = Clustering::single(log, tag, 0)?;
        c.requested_k = 1;
        return Ok(c);
    }

    let seeds = init_seeds(log, 2, strategy, rng, options)?;
    let first = ec_cluster(log, 2, &seeds, options)?;
    let mut steps = first.steps;
    let mut evaluations = first.candidate_evaluations;
    let mut clusters = first.clusters;

    while clusters.len() < k {
        let mut scores = Vec::with_capacity(clusters.len());
        for c in &clusters {
            scores.push(average_er_of(log, c.members.iter().copied(), &c.dfg)?.average_bits);
        }
        let mut order: Vec<usize> = (0..clusters.len()).collect();
        // stable: equal scores keep ascending index
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let Some(worst) = order.into_iter().find(|&j| clusters[j].members.len() >= 2) else {
            log::warn!(
                "ec-split stopped at {} clusters: every cluster holds a single variant",
                clusters.len()
            );
            break;
        };

        let parent = &clusters[worst];
        let sub_log = log.subset(&parent.members);
        let sub_seeds = init_seeds(&sub_log, 2, strategy, rng, options)?;
        let sub = ec_cluster(&sub_log, 2, &sub_seeds, options)?;
        let to_parent = |i: usize| parent.members[i];
        steps.extend(sub.steps.iter().map(|s| super::AssignmentStep {
            variant: to_parent(s.variant),
            scores: s.scores.clone(),
            chosen: s.chosen,
        }));
        evaluations += sub.candidate_evaluations;
        let children: Vec<Cluster> = sub
            .clusters
            .into_iter()
            .map(|c| Cluster {
                members: c.members.into_iter().map(to_parent).collect(),
                dfg: c.dfg,
                case_count: c.case_count,
            })
            .collect();
        clusters.splice(worst..=worst, children);
    }

    let mut c = Clustering::from_clusters(log, clusters, tag, 0)?;
    c.requested_k = k;
    c.steps = steps;
    c.candidate_evaluations = evaluations;
    Ok(c)
}
