#![no_main]

use libfuzzer_sys::fuzz_target;
use nhvqe::matrix_file::parse_real;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = parse_real(text) {
        assert!(x.is_finite());
    }
});
