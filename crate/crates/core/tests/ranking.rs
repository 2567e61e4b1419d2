use std::fs::File;
use std::path::PathBuf;

use entroclust::evaluation::{average_ranks, friedman_test, rank_report, Direction, MetricMatrix};

fn matrix(name: &str) -> MetricMatrix {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name);
    MetricMatrix::from_csv(File::open(path).unwrap()).unwrap()
}

#[test]
fn reference_er_ranks_are_reproduced() {
    let m = matrix("method_er.csv");
    assert_eq!(m.methods.len(), 12);
    assert_eq!(m.logs.len(), 8);
    let reference = [12.00, 10.33, 8.25, 9.12, 7.88, 8.50, 2.00, 2.12, 2.88, 6.00, 4.38, 4.38];
    let ours = average_ranks(&m, Direction::LowerIsBetter).unwrap();
    for ((name, &a), &b) in m.methods.iter().zip(&ours).zip(&reference) {
        assert!((a - b).abs() <= 0.5, "{name}: {a} vs {b}");
    }
    let f = friedman_test(&m, Direction::LowerIsBetter).unwrap();
    assert!((f.chi2 - 76.25).abs() <= 0.05 * 76.25, "{}", f.chi2);
    assert!(f.p_value < 1e-10);
}

#[test]
fn er_report_lists_significant_pairs() {
    let m = matrix("method_er.csv");
    let r = rank_report(&m, "er", Direction::LowerIsBetter, 0.05).unwrap();
    let cd = r.cd.unwrap();
    // q(12) = 3.268, N = 8
    assert!((cd - 3.268 * (12.0f64 * 13.0 / 48.0).sqrt()).abs() < 1e-9);
    let full = ["full_log".to_string(), "ec_pp".to_string()];
    assert!(r.pairs_significant.contains(&full));
    for [a, b] in &r.pairs_significant {
        assert!((r.avg_ranks[a] - r.avg_ranks[b]).abs() > cd);
    }
}

#[test]
fn gaps_require_a_log_subset() {
    let m = matrix("method_alignment_fitness.csv");
    assert!(friedman_test(&m, Direction::HigherIsBetter).is_err());
    let subset = m
        .select_logs(&["helpdesk", "rtfm", "hospital_billing", "sepsis", "bpic13_incidents", "bpic13_closed_problems"])
        .unwrap();
    let r = rank_report(&subset, "alignment-fitness", Direction::HigherIsBetter, 0.05).unwrap();
    assert!(r.p_value.unwrap() > 0.05);
    assert!(r.pairs_significant.is_empty());
    assert!(!r.notes.is_empty());
}
