//! Replays the checked-in fuzz seeds so the parsers are exercised on every
//! test run, not only under the fuzzer.

use std::fs;
use std::path::PathBuf;

use simplex_clf::dataio::{parse_dataset_bytes, DatasetSchema};
use simplex_clf::evaluation::{parse_int_range, parse_range};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn dataset_seeds() {
    let mut accepted = Vec::new();
    for (name, bytes) in seeds("parse_dataset") {
        for schema in [DatasetSchema::new("label"), DatasetSchema::uci_glass()] {
            if let Ok(ds) = parse_dataset_bytes(&bytes, &schema) {
                for row in ds.rows() {
                    assert!(
                        (row.parts().iter().sum::<f64>() - 1.0).abs() < 1e-9,
                        "{name}"
                    );
                }
                accepted.push(name.clone());
            }
        }
    }
    accepted.sort();
    assert_eq!(
        accepted,
        ["glass_head.csv", "overflow.csv", "quoted.csv", "simple.csv"]
    );
}

#[test]
fn range_seeds() {
    let mut accepted = Vec::new();
    for (name, bytes) in seeds("parse_range") {
        let text = String::from_utf8(bytes).unwrap();
        if let Ok(v) = parse_range(&text) {
            assert!(!v.is_empty() && v.iter().all(|x| x.is_finite()), "{name}");
            accepted.push(name.clone());
        }
        let _ = parse_int_range(&text);
    }
    assert_eq!(accepted, ["alpha", "list", "single", "spaces", "unit"]);
}
