#![no_main]

use libfuzzer_sys::fuzz_target;
use simplex_clf::dataio::{parse_dataset_bytes, DatasetSchema};

fuzz_target!(|data: &[u8]| {
    for schema in [DatasetSchema::new("label"), DatasetSchema::uci_glass()] {
        if let Ok(ds) = parse_dataset_bytes(data, &schema) {
            assert_eq!(ds.rows().len(), ds.labels().len());
            for row in ds.rows() {
                let s: f64 = row.parts().iter().sum();
                assert!((s - 1.0).abs() < 1e-9);
            }
        }
    }
});
