use std::fs;
use std::path::PathBuf;

use entroclust::commands::{load_log, InputFormat, InputSpec};
use entroclust::event_log::{CsvConfig, VariantLogJson};
use entroclust::VariantLog;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn bodies(log: &VariantLog) -> Vec<(String, u64)> {
    log.variants()
        .iter()
        .map(|v| {
            let labels: Vec<&str> = v.trace.body().iter().map(|&a| log.alphabet().label(a)).collect();
            (labels.join(","), v.multiplicity)
        })
        .collect()
}

fn expected() -> Vec<(String, u64)> {
    vec![("register,check,approve".into(), 2), ("register,reject".into(), 1)]
}

#[test]
fn xes_and_csv_agree() {
    let xes = load_log(&InputSpec {
        path: data("small.xes"),
        format: InputFormat::Xes,
        csv: CsvConfig::default(),
    })
    .unwrap();
    let csv = load_log(&InputSpec {
        path: data("small.csv"),
        format: InputFormat::Csv,
        csv: CsvConfig::default(),
    })
    .unwrap();
    assert_eq!(bodies(&xes), expected());
    assert_eq!(bodies(&csv), expected());
    assert!(xes.is_augmented() && csv.is_augmented());
    assert_eq!(xes.variant(0).case_ids, vec!["c1", "c2"]);
    assert_eq!(csv.total_cases(), 3);
}

#[test]
fn variants_json_round_trips_through_a_file() {
    let log = load_log(&InputSpec {
        path: data("small.csv"),
        format: InputFormat::Csv,
        csv: CsvConfig::default(),
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("variants.json");
    fs::write(&path, VariantLogJson::from_log(&log).to_json().unwrap()).unwrap();
    let back = load_log(&InputSpec {
        path,
        format: InputFormat::VariantsJson,
        csv: CsvConfig::default(),
    })
    .unwrap();
    assert_eq!(bodies(&back), expected());
}

#[test]
fn missing_file_is_reported_with_its_path() {
    let err = load_log(&InputSpec {
        path: data("nope.csv"),
        format: InputFormat::Csv,
        csv: CsvConfig::default(),
    })
    .unwrap_err();
    assert!(err.to_string().contains("nope.csv"), "{err}");
}

#[test]
fn inconsistent_variant_export_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"variants":[{"trace":["a"],"multiplicity":2}],"total_cases":3}"#).unwrap();
    let err = load_log(&InputSpec {
        path,
        format: InputFormat::VariantsJson,
        csv: CsvConfig::default(),
    });
    assert!(err.is_err());
}
