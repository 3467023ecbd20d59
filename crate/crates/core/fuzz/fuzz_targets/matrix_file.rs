#![no_main]

use libfuzzer_sys::fuzz_target;
use nhvqe::matrix_file::{matrix_to_json, parse_matrix};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_matrix(text) {
        assert_eq!(parse_matrix(&matrix_to_json(&m)).unwrap(), m);
    }
});
