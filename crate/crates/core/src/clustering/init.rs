use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;

use super::{check_k, ClusteringError, ExecOptions, InitStrategy, SeedSet};
use crate::event_log::{Trace, VariantLog};
use crate::relevance::{pairwise_components, self_er, RelevanceError};

/// `k` distinct variants drawn uniformly without replacement.
pub fn init_random<R: Rng + ?Sized>(log: &VariantLog, k: usize, rng: &mut R) -> Result<SeedSet, ClusteringError> {
    check_k(log, k)?;
    let seeds = rand::seq::index::sample(rng, log.len(), k).into_vec();
    Ok(SeedSet::new(seeds, InitStrategy::Random))
}

/// Divides a pairwise component by the trace's self-cost, or leaves it
/// unchanged when the self-cost is zero.
pub fn normalized_distance(component: f64, self_cost: f64) -> f64 {
    if self_cost > 0.0 {
        component / self_cost
    } else {
        component
    }
}

/// Seed distance between two variants: the pairwise relevance, or with
/// `self_costs` given, the mean of each trace's component divided by its
/// own self-cost.
pub fn seed_distance(a: &Trace, b: &Trace, self_costs: Option<(f64, f64)>) -> Result<f64, RelevanceError> {
    let (ca, cb) = pairwise_components(a, b)?;
    Ok(match self_costs {
        None => (ca + cb) / 2.0,
        Some((sa, sb)) => (normalized_distance(ca, sa) + normalized_distance(cb, sb)) / 2.0,
    })
}

/// ++ seeding: the first seed is uniform, each further seed is drawn with
/// probability proportional to the squared distance to its closest seed.
/// When every remaining distance is zero the draw falls back to uniform.
pub fn init_plusplus<R: Rng + ?Sized>(
    log: &VariantLog,
    k: usize,
    rng: &mut R,
    normalize: bool,
    options: ExecOptions,
) -> Result<SeedSet, ClusteringError> {
    check_k(log, k)?;
    let n = log.len();
    let strategy = if normalize { InitStrategy::PlusPlusNorm } else { InitStrategy::PlusPlus };

    let self_costs: Option<Vec<f64>> = if normalize {
        let compute = |i: usize| self_er(&log.variant(i).trace);
        let costs: Result<Vec<f64>, _> = if options.parallel {
            (0..n).into_par_iter().map(compute).collect()
        } else {
            (0..n).map(compute).collect()
        };
        Some(costs?)
    } else {
        None
    };

    let mut seeds = vec![rng.random_range(0..n)];
    let mut is_seed = vec![false; n];
    is_seed[seeds[0]] = true;
    let mut closest = vec![f64::INFINITY; n];

    while seeds.len() < k {
        let last = *seeds.last().expect("non-empty");
        let dist = |v: usize| -> Result<f64, RelevanceError> {
            if is_seed[v] {
                return Ok(0.0);
            }
            let sc = self_costs.as_ref().map(|s| (s[v], s[last]));
            seed_distance(&log.variant(v).trace, &log.variant(last).trace, sc)
        };
        let fresh: Result<Vec<f64>, _> = if options.parallel {
            (0..n).into_par_iter().map(dist).collect()
        } else {
            (0..n).map(dist).collect()
        };
        for (c, d) in closest.iter_mut().zip(fresh?) {
            *c = c.min(d);
        }
        let weights: Vec<f64> = (0..n)
            .map(|v| if is_seed[v] { 0.0 } else { closest[v] * closest[v] })
            .collect();
        let next = sample_weighted_or_uniform(&weights, &is_seed, rng);
        is_seed[next] = true;
        seeds.push(next);
    }
    Ok(SeedSet::new(seeds, strategy))
}

/// Draws an index proportionally to `weights`; if all weights are zero,
/// draws uniformly among indices not yet taken.
fn sample_weighted_or_uniform<R: Rng + ?Sized>(weights: &[f64], taken: &[bool], rng: &mut R) -> usize {
    match WeightedIndex::new(weights) {
        Ok(dist) => dist.sample(rng),
        Err(_) => {
            let free: Vec<usize> = (0..weights.len()).filter(|&v| !taken[v]).collect();
            free[rng.random_range(0..free.len())]
        }
    }
}

pub fn init_seeds<R: Rng + ?Sized>(
    log: &VariantLog,
    k: usize,
    strategy: InitStrategy,
    rng: &mut R,
    options: ExecOptions,
) -> Result<SeedSet, ClusteringError> {
    match strategy {
        InitStrategy::Random => init_random(log, k, rng),
        InitStrategy::PlusPlus => init_plusplus(log, k, rng, false, options),
        InitStrategy::PlusPlusNorm => init_plusplus(log, k, rng, true, options),
    }
}
