//! Baselines: uniform random assignment and k-means++ on activity-frequency
//! profiles. Both work on variants, weighting by multiplicity where it
//! matters (centroids, seeding).

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::{check_k, Clustering, ClusteringError};
use crate::event_log::{Activity, Trace, VariantLog};

const MAX_ITERATIONS: usize = 100;
const SHIFT_TOLERANCE: f64 = 1e-6;

/// Assigns every variant to a uniformly drawn cluster. Empty clusters are
/// filled by moving the last member of the currently largest cluster.
pub fn random_clustering<R: Rng + ?Sized>(log: &VariantLog, k: usize, rng: &mut R) -> Result<Clustering, ClusteringError> {
    check_k(log, k)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for v in 0..log.len() {
        members[rng.random_range(0..k)].push(v);
    }
    repair_empty(&mut members);
    Clustering::from_members(log, members, "random", 0)
}

fn repair_empty(members: &mut [Vec<usize>]) {
    while let Some(empty) = members.iter().position(|m| m.is_empty()) {
        let largest = (0..members.len())
            .max_by(|&a, &b| members[a].len().cmp(&members[b].len()).then(b.cmp(&a)))
            .expect("k >= 1");
        let moved = members[largest].pop().expect("largest cluster has >= 2 members");
        members[empty].push(moved);
    }
}

/// Relative activity frequencies of a trace over `vocabulary`, sentinels
/// excluded. The empty trace maps to the zero vector.
pub fn activity_profile(t: &Trace, vocabulary: &[Activity]) -> Vec<f64> {
    let body = t.body();
    let mut profile = vec![0.0; vocabulary.len()];
    if body.is_empty() {
        return profile;
    }
    for a in body {
        if let Some(i) = vocabulary.iter().position(|v| v == a) {
            profile[i] += 1.0;
        }
    }
    let n = body.len() as f64;
    for p in &mut profile {
        *p /= n;
    }
    profile
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone)]
pub struct KMeansOutcome {
    pub clustering: Clustering,
    pub centroids: Vec<Vec<f64>>,
    pub iterations: usize,
}

pub fn frequency_kmeanspp<R: Rng + ?Sized>(log: &VariantLog, k: usize, rng: &mut R) -> Result<Clustering, ClusteringError> {
    Ok(frequency_kmeanspp_detailed(log, k, rng)?.clustering)
}

/// Weighted k-means on activity profiles: k-means++ seeding with
/// `weight * D^2` sampling, then Lloyd iterations with multiplicity-weighted
/// centroids until the largest centroid shift is below 1e-6 (at most 100
/// iterations). An empty cluster takes the point farthest from its own
/// centroid among clusters with at least two points.
pub fn frequency_kmeanspp_detailed<R: Rng + ?Sized>(
    log: &VariantLog,
    k: usize,
    rng: &mut R,
) -> Result<KMeansOutcome, ClusteringError> {
    check_k(log, k)?;
    let alphabet = log.alphabet();
    let used: Vec<&str> = log.vocabulary();
    let vocabulary: Vec<Activity> = used.iter().filter_map(|l| alphabet.get(l)).collect();
    let points: Vec<Vec<f64>> = log
        .variants()
        .iter()
        .map(|v| activity_profile(&v.trace, &vocabulary))
        .collect();
    let weights: Vec<f64> = log.variants().iter().map(|v| v.multiplicity as f64).collect();
    let n = points.len();

    // seeding
    let mut chosen = vec![false; n];
    let first = WeightedIndex::new(&weights).expect("positive multiplicities").sample(rng);
    chosen[first] = true;
    let mut centroids = vec![points[first].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let w: Vec<f64> = (0..n).map(|i| if chosen[i] { 0.0 } else { weights[i] * d2[i] }).collect();
        let next = match WeightedIndex::new(&w) {
            Ok(dist) => dist.sample(rng),
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        chosen[next] = true;
        centroids.push(points[next].clone());
        let c = centroids.last().expect("just pushed");
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, c));
        }
    }

    let dim = vocabulary.len();
    let mut assignment = vec![0usize; n];
    let mut iterations = 0;
    for iter in 1..=MAX_ITERATIONS {
        iterations = iter;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = sq_dist(p, &centroids[0]);
            for (j, c) in centroids.iter().enumerate().skip(1) {
                let d = sq_dist(p, c);
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            assignment[i] = best;
        }

        let mut sizes = vec![0usize; k];
        for &a in &assignment {
            sizes[a] += 1;
        }
        while let Some(empty) = sizes.iter().position(|&s| s == 0) {
            let donor = (0..n)
                .filter(|&i| sizes[assignment[i]] >= 2)
                .max_by(|&a, &b| {
                    sq_dist(&points[a], &centroids[assignment[a]])
                        .total_cmp(&sq_dist(&points[b], &centroids[assignment[b]]))
                        .then(b.cmp(&a))
                })
                .expect("k <= number of variants");
            sizes[assignment[donor]] -= 1;
            assignment[donor] = empty;
            sizes[empty] = 1;
        }

        let mut sums = vec![vec![0.0; dim]; k];
        let mut mass = vec![0.0; k];
        for (i, p) in points.iter().enumerate() {
            let a = assignment[i];
            mass[a] += weights[i];
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += weights[i] * x;
            }
        }
        let mut shift: f64 = 0.0;
        for j in 0..k {
            let new: Vec<f64> = sums[j].iter().map(|s| s / mass[j]).collect();
            shift = shift.max(sq_dist(&new, &centroids[j]).sqrt());
            centroids[j] = new;
        }
        if shift < SHIFT_TOLERANCE {
            break;
        }
    }

    let mut members = vec![Vec::new(); k];
    for (i, &a) in assignment.iter().enumerate() {
        members[a].push(i);
    }
    let clustering = Clustering::from_members(log, members, "freq-kmeans", 0)?;
    Ok(KMeansOutcome {
        clustering,
        centroids,
        iterations,
    })
}
