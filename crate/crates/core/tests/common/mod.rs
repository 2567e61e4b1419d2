#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use entroclust::event_log::Activity;
use entroclust::{Trace, VariantLog};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LABELS: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

pub fn log_of(traces: &[(Vec<&str>, u64)]) -> VariantLog {
    VariantLog::from_label_traces(traces).unwrap().augment_bos_eos().unwrap()
}

/// Up to `max_variants` traces over the first `alphabet` labels, each of
/// length at most `max_len`, with multiplicities in 1..=`max_mult`.
pub fn random_traces<R: Rng>(
    rng: &mut R,
    alphabet: usize,
    max_variants: usize,
    max_len: usize,
    max_mult: u64,
) -> Vec<(Vec<&'static str>, u64)> {
    let n = rng.random_range(1..=max_variants);
    (0..n)
        .map(|_| {
            let len = rng.random_range(0..=max_len);
            let t = (0..len).map(|_| LABELS[rng.random_range(0..alphabet)]).collect();
            (t, rng.random_range(1..=max_mult))
        })
        .collect()
}

pub fn traces_strategy(
    alphabet: usize,
    max_variants: usize,
    max_len: usize,
) -> impl Strategy<Value = Vec<(Vec<&'static str>, u64)>> {
    prop::collection::vec(
        (prop::collection::vec(0..alphabet, 0..=max_len), 1u64..=20),
        1..=max_variants,
    )
    .prop_map(|vs| {
        vs.into_iter()
            .map(|(t, m)| (t.into_iter().map(|i| LABELS[i]).collect(), m))
            .collect()
    })
}

/// Augmented trace over raw activity ids `2..2+alphabet`.
pub fn raw_trace(ids: &[u32]) -> Trace {
    Trace::new(ids.iter().map(|&i| Activity(i + 2)).collect()).augmented()
}

/// Independent relevance oracle: counts edges and nodes of the whole log
/// from scratch and multiplies plain probabilities.
pub struct NaiveModel {
    nodes: HashMap<Activity, u64>,
    edges: HashMap<(Activity, Activity), u64>,
}

impl NaiveModel {
    pub fn from_log(log: &VariantLog) -> Self {
        let mut nodes = HashMap::new();
        let mut edges = HashMap::new();
        for v in log.variants() {
            let acts = v.trace.activities();
            for a in acts {
                *nodes.entry(*a).or_insert(0) += v.multiplicity;
            }
            for w in acts.windows(2) {
                *edges.entry((w[0], w[1])).or_insert(0) += v.multiplicity;
            }
        }
        NaiveModel { nodes, edges }
    }

    pub fn probability(&self, t: &Trace) -> f64 {
        t.activities()
            .windows(2)
            .map(|w| self.edges[&(w[0], w[1])] as f64 / self.nodes[&w[0]] as f64)
            .product()
    }

    pub fn cost(&self, t: &Trace) -> f64 {
        -(self.probability(t).max(1e-10)).log2()
    }

    pub fn average(&self, log: &VariantLog) -> f64 {
        let expanded = log.expand();
        expanded.iter().map(|t| self.cost(t)).sum::<f64>() / expanded.len() as f64
    }
}

/// Two families of 20 distinct variants each over disjoint five-letter
/// alphabets. Returns the log and the family of every variant.
pub fn two_family_log(seed: u64) -> (VariantLog, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut traces: Vec<(Vec<&str>, u64)> = Vec::new();
    for family in 0..2 {
        let alphabet = &LABELS[..5];
        let mut seen = BTreeSet::new();
        while seen.len() < 20 {
            let len = rng.random_range(2..=7);
            let t: Vec<usize> = (0..len).map(|_| rng.random_range(0..5)).collect();
            if seen.insert(t.clone()) {
                let labels = t.iter().map(|&i| if family == 0 { alphabet[i] } else { FAMILY_B[i] }).collect();
                traces.push((labels, rng.random_range(1..=50)));
            }
        }
    }
    let log = log_of(&traces);
    let family = log
        .variants()
        .iter()
        .map(|v| usize::from(FAMILY_B.contains(&log.alphabet().label(v.trace.body()[0]))))
        .collect();
    (log, family)
}

pub const FAMILY_B: [&str; 5] = ["p", "q", "r", "s", "t"];

