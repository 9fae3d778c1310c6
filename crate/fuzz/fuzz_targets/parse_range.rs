#![no_main]

use libfuzzer_sys::fuzz_target;
use simplex_clf::evaluation::{parse_int_range, parse_range};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(values) = parse_range(text) {
        assert!(!values.is_empty());
        assert!(values.iter().all(|v| v.is_finite()));
    }
    let _ = parse_int_range(text);
});
