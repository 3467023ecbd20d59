// Replays the checked-in fuzz seeds through the same checks as the fuzz targets.

use std::path::PathBuf;

use nhvqe::heatmap::{grid_to_csv, read_grid};
use nhvqe::matrix_file::{matrix_to_json, parse_matrix, parse_real};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn matrix_file_seeds() {
    let mut parsed = 0;
    for (name, text) in seeds("matrix_file") {
        if let Ok(m) = parse_matrix(&text) {
            assert_eq!(parse_matrix(&matrix_to_json(&m)).unwrap(), m, "{name}");
            parsed += 1;
        }
    }
    assert!(parsed > 0);
}

#[test]
fn real_literal_seeds() {
    for (name, text) in seeds("real_literal") {
        if let Ok(x) = parse_real(&text) {
            assert!(x.is_finite(), "{name}");
        }
    }
}

#[test]
fn heatmap_csv_seeds() {
    let mut parsed = 0;
    for (name, text) in seeds("heatmap_csv") {
        if let Ok(grid) = read_grid(&text) {
            let again = read_grid(&grid_to_csv(&grid)).unwrap();
            let bits = |g: &[f64]| g.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&again.values), bits(&grid.values), "{name}");
            parsed += 1;
        }
    }
    assert!(parsed > 0);
}
