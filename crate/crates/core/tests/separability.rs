mod common;

use common::two_family_log;
use entroclust::clustering::{ec_cluster, SeedSet};
use entroclust::{ExecOptions, InitStrategy};

/// Exact recovery of two disjoint-alphabet families from one seed each.
/// A variant from the other family, added at full multiplicity, only pays
/// for its start branch, so the greedy rule usually prefers the foreign
/// cluster; this does not hold at present.
#[test]
#[ignore = "exact family recovery is not achieved by the greedy assignment rule"]
fn disjoint_families_are_recovered_exactly() {
    for seed in 0..10 {
        let (log, family) = two_family_log(seed);
        let seeds: Vec<usize> = (0..2).map(|f| family.iter().position(|&x| x == f).unwrap()).collect();
        let c = ec_cluster(&log, 2, &SeedSet::new(seeds.clone(), InitStrategy::Random), ExecOptions::default()).unwrap();
        for i in 0..log.len() {
            assert_eq!(c.assignment[i], c.assignment[seeds[family[i]]], "seed {seed}, variant {i}");
        }
    }
}
