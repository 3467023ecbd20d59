#![no_main]

use libfuzzer_sys::fuzz_target;
use nhvqe::heatmap::{grid_to_csv, read_grid};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = read_grid(text) {
        let again = read_grid(&grid_to_csv(&grid)).unwrap();
        assert_eq!(again.values.len(), grid.values.len());
        for (a, b) in again.values.iter().zip(&grid.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
});
