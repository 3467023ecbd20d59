//! Scans of the inner minimum over a rectangle of ε values.
//!
//! Each cell holds the smallest eigenvalue of `H(ε)`, computed either by
//! the variational solver or by direct diagonalization. Zeros of the
//! surface sit on the eigenvalues of `M`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, input, Result};
use crate::linalg::{Complex, ComplexMatrix};
use crate::oracle::hermitian_eig_reference;
use crate::proxy::{default_pad, hermitianize};
use crate::vqe::{minimize_shifted, GDConfig};

/// Above this many cells the default engine is [`Engine::Exact`].
pub const VQE_CELL_LIMIT: usize = 400;
pub const CSV_HEADER: &str = "re,im,value";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Vqe,
    Exact,
}

impl Engine {
    pub fn default_for(cells: usize) -> Self {
        if cells > VQE_CELL_LIMIT {
            Self::Exact
        } else {
            Self::Vqe
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "vqe" => Ok(Self::Vqe),
            "exact" => Ok(Self::Exact),
            other => Err(format!("unknown engine {other:?}, expected vqe or exact")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapRequest {
    pub matrix: ComplexMatrix,
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub re_count: usize,
    pub im_count: usize,
    /// `None` picks by grid size, see [`Engine::default_for`].
    pub engine: Option<Engine>,
    /// Padding for the vqe engine; `None` uses [`default_pad`] at the grid
    /// radius.
    pub pad_d: Option<f64>,
    /// Inner solver settings for the vqe engine; `rng_seed` seeds row `r`
    /// with `rng_seed + r`.
    pub inner: GDConfig,
}

impl HeatmapRequest {
    pub fn new(
        matrix: ComplexMatrix,
        re_range: (f64, f64),
        im_range: (f64, f64),
        re_count: usize,
        im_count: usize,
    ) -> Self {
        Self {
            matrix,
            re_range,
            im_range,
            re_count,
            im_count,
            engine: None,
            pad_d: None,
            inner: GDConfig::inner_default(),
        }
    }

    pub fn engine(&self) -> Engine {
        self.engine
            .unwrap_or_else(|| Engine::default_for(self.re_count * self.im_count))
    }

    fn validate(&self) -> Result<()> {
        self.matrix.require_square("heatmap")?;
        for (name, (lo, hi), count) in [
            ("re", self.re_range, self.re_count),
            ("im", self.im_range, self.im_count),
        ] {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(domain(format!("{name} range must be finite")));
            }
            if count == 0 {
                return Err(domain(format!("{name} resolution must be positive")));
            }
            if lo > hi || (lo == hi && count > 1) {
                return Err(domain(format!("{name} range needs min < max, got [{lo}, {hi}]")));
            }
        }
        if let Some(d) = self.pad_d {
            if !(d.is_finite() && d > 0.0) {
                return Err(domain(format!("padding value d must be positive, got {d}")));
            }
        }
        Ok(())
    }
}

fn axis((lo, hi): (f64, f64), count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub re_axis: Vec<f64>,
    pub im_axis: Vec<f64>,
    /// Row-major: `values[i * re_axis.len() + j]` is the cell at
    /// `re_axis[j] + im_axis[i]·i`.
    pub values: Vec<f64>,
}

impl HeatmapGrid {
    pub fn value(&self, re_index: usize, im_index: usize) -> f64 {
        self.values[im_index * self.re_axis.len() + re_index]
    }

    pub fn point(&self, re_index: usize, im_index: usize) -> Complex {
        Complex::new(self.re_axis[re_index], self.im_axis[im_index])
    }

    /// Lowest cell as `(ε, value)`, the first one on ties.
    pub fn min_cell(&self) -> (Complex, f64) {
        let (k, &v) = self
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("a grid has at least one cell");
        let n = self.re_axis.len();
        (self.point(k % n, k / n), v)
    }

    /// Cells strictly below all of their (up to eight) neighbors.
    pub fn local_minima(&self) -> Vec<(usize, usize)> {
        let (nr, ni) = (self.re_axis.len() as isize, self.im_axis.len() as isize);
        let mut out = Vec::new();
        for i in 0..ni {
            for j in 0..nr {
                let v = self.value(j as usize, i as usize);
                let lowest = (-1..=1)
                    .flat_map(|di| (-1..=1).map(move |dj| (di, dj)))
                    .filter(|&(di, dj)| (di, dj) != (0, 0))
                    .map(|(di, dj)| (i + di, j + dj))
                    .filter(|&(a, b)| (0..ni).contains(&a) && (0..nr).contains(&b))
                    .all(|(a, b)| v < self.value(b as usize, a as usize));
                if lowest {
                    out.push((j as usize, i as usize));
                }
            }
        }
        out
    }
}

/// Evaluates every cell of the request.
///
/// The exact engine diagonalizes `H(ε)` without padding, since the pad only
/// contributes eigenvalues at `d`. The vqe engine runs the inner solver on
/// the padded proxy, sweeping rows in serpentine order with each cell
/// warm-started from its predecessor. Rows are independent chains, so both
/// engines parallelize over rows without changing the result.
pub fn scan(req: &HeatmapRequest) -> Result<HeatmapGrid> {
    req.validate()?;
    let re_axis = axis(req.re_range, req.re_count);
    let im_axis = axis(req.im_range, req.im_count);
    let rows: Vec<Result<Vec<f64>>> = match req.engine() {
        Engine::Exact => im_axis
            .par_iter()
            .map(|&im| {
                re_axis
                    .iter()
                    .map(|&re| exact_cell(&req.matrix, Complex::new(re, im)))
                    .collect()
            })
            .collect(),
        Engine::Vqe => {
            let radius = [req.re_range.0, req.re_range.1]
                .iter()
                .flat_map(|&re| [req.im_range.0, req.im_range.1].map(|im| Complex::new(re, im).norm()))
                .fold(0.0, f64::max);
            let d = req.pad_d.unwrap_or_else(|| default_pad(&req.matrix, radius));
            im_axis
                .par_iter()
                .enumerate()
                .map(|(i, &im)| vqe_row(req, &re_axis, im, i, d))
                .collect()
        }
    };
    let mut values = Vec::with_capacity(re_axis.len() * im_axis.len());
    for row in rows {
        values.extend(row?);
    }
    Ok(HeatmapGrid {
        re_axis,
        im_axis,
        values,
    })
}

fn exact_cell(m: &ComplexMatrix, eps: Complex) -> Result<f64> {
    Ok(hermitian_eig_reference(&hermitianize(m, eps)?)?[0])
}

fn vqe_row(req: &HeatmapRequest, re_axis: &[f64], im: f64, row: usize, d: f64) -> Result<Vec<f64>> {
    let seed = req.inner.rng_seed.wrapping_add(row as u64);
    let cold = GDConfig {
        rng_seed: seed,
        ..req.inner.clone()
    };
    // one fresh draw beside the warm start, in case the warm basin turns
    // into a saddle where the lowest eigenvector switches
    let warm = GDConfig {
        restarts: req.inner.restarts.min(1),
        ..cold.clone()
    };
    let mut order: Vec<usize> = (0..re_axis.len()).collect();
    if row % 2 == 1 {
        order.reverse();
    }
    let mut values = vec![0.0; re_axis.len()];
    let mut theta = None;
    for (k, j) in order.into_iter().enumerate() {
        let cfg = GDConfig {
            rng_seed: seed.wrapping_add((k as u64) << 32),
            ..if theta.is_some() { warm.clone() } else { cold.clone() }
        };
        let res = minimize_shifted(&req.matrix, Complex::new(re_axis[j], im), d, &cfg, theta.as_ref())?;
        values[j] = res.value;
        theta = Some(res.theta_star);
    }
    Ok(values)
}

/// Renders the CSV layout: header `re,im,value`, then one line per cell in
/// row-major order, every number in shortest round-trip form.
pub fn grid_to_csv(grid: &HeatmapGrid) -> String {
    let mut out = String::with_capacity(32 * (grid.values.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (i, im) in grid.im_axis.iter().enumerate() {
        for (j, re) in grid.re_axis.iter().enumerate() {
            let v = grid.values[i * grid.re_axis.len() + j];
            writeln!(out, "{re:?},{im:?},{v:?}").expect("writing to a String");
        }
    }
    out
}

pub fn write_grid(grid: &HeatmapGrid, mut dest: impl Write) -> Result<()> {
    dest.write_all(grid_to_csv(grid).as_bytes())?;
    dest.flush()?;
    Ok(())
}

pub fn write_grid_file(grid: &HeatmapGrid, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_grid(grid, std::io::BufWriter::new(file))
}

/// Parses a grid written by [`write_grid`], checking that the rows form a
/// complete rectangle in row-major order.
pub fn read_grid(text: &str) -> Result<HeatmapGrid> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = body.split('\n');
    match lines.next() {
        Some(CSV_HEADER) => {}
        other => {
            return Err(input(format!(
                "line 1: expected header {CSV_HEADER:?}, got {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut cells = Vec::new();
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        if line.is_empty() {
            return Err(input(format!("line {lineno}: empty line")));
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(input(format!(
                "line {lineno}: expected 3 fields, got {}",
                fields.len()
            )));
        }
        let mut parsed = [0.0; 3];
        for (col, (slot, field)) in parsed.iter_mut().zip(&fields).enumerate() {
            *slot = field.parse::<f64>().map_err(|_| {
                input(format!("line {lineno}, field {}: invalid number {field:?}", col + 1))
            })?;
        }
        cells.push((lineno, parsed));
    }
    if cells.is_empty() {
        return Err(input("no data rows"));
    }
    let first_im = cells[0].1[1];
    let re_count = cells
        .iter()
        .take_while(|(_, c)| c[1].to_bits() == first_im.to_bits())
        .count();
    if cells.len() % re_count != 0 {
        return Err(input(format!(
            "{} data rows do not fill rows of {re_count} cells",
            cells.len()
        )));
    }
    let re_axis: Vec<f64> = cells[..re_count].iter().map(|(_, c)| c[0]).collect();
    let im_axis: Vec<f64> = cells.iter().step_by(re_count).map(|(_, c)| c[1]).collect();
    for (k, (lineno, c)) in cells.iter().enumerate() {
        let (re, im) = (re_axis[k % re_count], im_axis[k / re_count]);
        if c[0].to_bits() != re.to_bits() || c[1].to_bits() != im.to_bits() {
            return Err(input(format!(
                "line {lineno}: cell ({:?}, {:?}) breaks the row-major grid",
                c[0], c[1]
            )));
        }
    }
    Ok(HeatmapGrid {
        re_axis,
        im_axis,
        values: cells.into_iter().map(|(_, c)| c[2]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engine_default_switches_above_the_cell_limit() {
        assert_eq!(Engine::default_for(400), Engine::Vqe);
        assert_eq!(Engine::default_for(401), Engine::Exact);
        assert_eq!("exact".parse::<Engine>().unwrap(), Engine::Exact);
        assert!("dense".parse::<Engine>().is_err());
    }

    #[test]
    fn two_by_two_grid_has_five_lines() {
        let mut req = HeatmapRequest::new(ComplexMatrix::identity(2), (0.0, 1.0), (0.0, 1.0), 2, 2);
        req.engine = Some(Engine::Exact);
        let grid = scan(&req).unwrap();
        let csv = grid_to_csv(&grid);
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("re,im,value\n0.0,0.0,1.0"), "{csv}");
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
        assert_eq!(read_grid(&csv).unwrap(), grid);
    }

    #[test]
    fn exact_cell_vanishes_at_an_eigenvalue() {
        let m = ComplexMatrix::from_real_diag(&[1.0, -2.0]);
        let mut req = HeatmapRequest::new(m, (-2.0, 1.0), (0.0, 1.0), 4, 2);
        req.engine = Some(Engine::Exact);
        let grid = scan(&req).unwrap();
        assert!(grid.value(0, 0).abs() < 1e-10);
        assert!(grid.value(3, 0).abs() < 1e-10);
        assert!(grid.value(1, 0) > 0.5);
    }

    #[test]
    fn read_rejects_malformed_files() {
        assert!(read_grid("").is_err());
        assert!(read_grid("re,im,value\n").is_err());
        assert!(read_grid("x,y,z\n0.0,0.0,1.0\n").is_err());
        let err = read_grid("re,im,value\n0.0,0.0,abc\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(read_grid("re,im,value\n0.0,0.0,1.0\n1.0,0.0,1.0\n0.0,1.0,1.0\n").is_err());
        assert!(read_grid("re,im,value\n0.0,0.0,1.0\n\n0.0,1.0,1.0\n").is_err());
        assert!(read_grid("re,im,value\n0.0,0.0,1.0\n0.0,1.0\n").is_err());
    }

    #[test]
    fn minimum_cell_and_local_minima() {
        let grid = HeatmapGrid {
            re_axis: vec![0.0, 1.0, 2.0],
            im_axis: vec![0.0, 1.0],
            values: vec![0.1, 3.0, 3.0, 2.0, 3.0, 0.25],
        };
        assert_eq!(grid.min_cell(), (Complex::new(0.0, 0.0), 0.1));
        assert_eq!(grid.local_minima(), vec![(0, 0), (2, 1)]);
    }
}
