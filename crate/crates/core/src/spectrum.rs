//! Multi-start search for the whole spectrum.
//!
//! Starting values of ε are laid out on a grid and each start runs the
//! nested descent of [`crate::vqe`]. Accepted estimates are polished,
//! deduplicated and, for real matrices, completed with their conjugates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::{Complex, ComplexMatrix};
use crate::lorenz::{classify_stability, default_stability_tol, StabilityClass};
use crate::proxy::{default_pad, svd_proxy};
use crate::vqe::{accept_threshold, find_eigenvalue_with, GDConfig};

pub const DEFAULT_RE_COUNT: usize = 9;
pub const DEFAULT_IM_COUNT: usize = 5;
pub const DEFAULT_POLISH_STEPS: usize = 20;
const POLISH_TOL_FACTOR: f64 = 0.1;

/// Rectangle of starting points, `re_count × im_count` evenly spaced values
/// including the edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub re_count: usize,
    pub im_count: usize,
}

fn axis(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count)
            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

impl SearchGrid {
    pub fn new(
        (re_min, re_max): (f64, f64),
        (im_min, im_max): (f64, f64),
        re_count: usize,
        im_count: usize,
    ) -> Result<Self> {
        let grid = Self {
            re_min,
            re_max,
            im_min,
            im_max,
            re_count,
            im_count,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(domain("search grid bounds must be finite"));
        }
        if self.re_count == 0 || self.im_count == 0 {
            return Err(domain("search grid counts must be positive"));
        }
        // a single column or row may sit on a collapsed range
        if self.re_min > self.re_max || (self.re_min == self.re_max && self.re_count > 1) {
            return Err(domain("search grid needs re_min < re_max"));
        }
        if self.im_min > self.im_max {
            return Err(domain("search grid needs im_min <= im_max"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.re_count * self.im_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Starting points in row-major order: all real parts of the lowest row
    /// first.
    pub fn points(&self) -> Vec<Complex> {
        let re = axis(self.re_min, self.re_max, self.re_count);
        axis(self.im_min, self.im_max, self.im_count)
            .into_iter()
            .flat_map(|im| re.iter().map(move |&re| Complex::new(re, im)))
            .collect()
    }

    /// Largest `|ε|` over the grid.
    pub fn radius(&self) -> f64 {
        let re = self.re_min.abs().max(self.re_max.abs());
        let im = self.im_min.abs().max(self.im_max.abs());
        re.hypot(im)
    }
}

/// `R = min(‖M‖_F, max Gershgorin radius + max |m_ii|)`.
pub fn spectral_radius_bound(m: &ComplexMatrix) -> Result<f64> {
    m.require_square("search bounds")?;
    let n = m.n_rows();
    let gershgorin = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let diag = (0..n).map(|i| m[(i, i)].norm()).fold(0.0, f64::max);
    Ok(m.frobenius_norm().min(gershgorin + diag))
}

/// Default grid: `[−R, R] × [0, R]` for real matrices (conjugates are
/// completed, not searched), `[−R, R] × [−R, R]` otherwise.
pub fn search_bounds(m: &ComplexMatrix) -> Result<SearchGrid> {
    let r = spectral_radius_bound(m)?;
    if r == 0.0 {
        return SearchGrid::new((0.0, 0.0), (0.0, 0.0), 1, 1);
    }
    if m.is_real() {
        SearchGrid::new((-r, r), (0.0, r), DEFAULT_RE_COUNT, DEFAULT_IM_COUNT)
    } else {
        SearchGrid::new((-r, r), (-r, r), DEFAULT_RE_COUNT, DEFAULT_RE_COUNT)
    }
}

/// `δ = 1e-3 · max(1, ‖M‖_F)`.
pub fn default_dedup_radius(m: &ComplexMatrix) -> f64 {
    1e-3 * m.frobenius_norm().max(1.0)
}

/// `1e-5 · max(1, ‖M‖_F)`: imaginary parts below this are snapped to zero.
pub fn default_realness_tolerance(m: &ComplexMatrix) -> f64 {
    1e-5 * m.frobenius_norm().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub inner: GDConfig,
    pub outer: GDConfig,
    /// Defaults to [`accept_threshold`].
    pub accept_tol: Option<f64>,
    /// Defaults to [`default_dedup_radius`].
    pub dedup_radius: Option<f64>,
    /// Defaults to [`default_realness_tolerance`].
    pub im_tol: Option<f64>,
    pub polish_steps: usize,
    /// Run grid starts on the rayon pool; results do not depend on it.
    pub parallel: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            inner: GDConfig::inner_default(),
            outer: GDConfig::outer_default(),
            accept_tol: None,
            dedup_radius: None,
            im_tol: None,
            polish_steps: DEFAULT_POLISH_STEPS,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueEstimate {
    pub value: Complex,
    pub residual: f64,
    pub start_point: Complex,
    pub conjugate_completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub matrix_dim: usize,
    /// Sorted by real part, then imaginary part.
    pub estimates: Vec<EigenvalueEstimate>,
    /// `true` when exactly `matrix_dim` values were found, counting
    /// conjugates.
    pub complete: bool,
    pub starts_used: usize,
    /// Set for complete 3×3 spectra.
    pub stability: Option<StabilityClass>,
    /// Accepted estimates whose residual would not drop under polishing,
    /// discarded as pseudospectral.
    pub flagged: usize,
    pub note: Option<String>,
}

impl SpectrumReport {
    pub fn values(&self) -> Vec<Complex> {
        self.estimates.iter().map(|e| e.value).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Merge {
    Appended,
    /// Within `δ` of `existing[index]`; `replaced` when the candidate had the
    /// lower residual and took its place.
    Absorbed { index: usize, replaced: bool },
}

/// Folds `candidate` into `existing`, keeping one representative per
/// `δ`-neighborhood.
pub fn dedup(
    existing: &mut Vec<EigenvalueEstimate>,
    candidate: EigenvalueEstimate,
    delta: f64,
) -> Merge {
    let nearest = existing
        .iter()
        .enumerate()
        .map(|(i, e)| (i, (e.value - candidate.value).norm()))
        .filter(|&(_, dist)| dist <= delta)
        .min_by(|a, b| a.1.total_cmp(&b.1));
    match nearest {
        Some((index, _)) => {
            let replaced = candidate.residual < existing[index].residual;
            if replaced {
                existing[index] = candidate;
            }
            Merge::Absorbed { index, replaced }
        }
        None => {
            existing.push(candidate);
            Merge::Appended
        }
    }
}

enum StartOutcome {
    Rejected,
    Flagged,
    Accepted(EigenvalueEstimate),
}

struct Search<'a> {
    m: &'a ComplexMatrix,
    cfg: &'a SpectrumConfig,
    d: f64,
    accept_tol: f64,
}

impl Search<'_> {
    fn run(&self, index: usize, start: Complex) -> Result<StartOutcome> {
        let inner = GDConfig {
            rng_seed: self.cfg.inner.rng_seed.wrapping_add(index as u64),
            ..self.cfg.inner.clone()
        };
        let found =
            find_eigenvalue_with(self.m, start, &inner, &self.cfg.outer, self.d, self.accept_tol, None)?;
        if !found.accepted {
            return Ok(StartOutcome::Rejected);
        }
        if self.cfg.polish_steps == 0 {
            return Ok(StartOutcome::Accepted(EigenvalueEstimate {
                value: found.epsilon_star,
                residual: found.residual,
                start_point: start,
                conjugate_completed: false,
            }));
        }
        // A true eigenvalue keeps shrinking under a tighter inner solve; a
        // shallow pseudospectral well does not.
        let polish_inner = GDConfig {
            gradient_tolerance: inner.gradient_tolerance * POLISH_TOL_FACTOR,
            restarts: 0,
            ..inner.clone()
        };
        let polish_outer = GDConfig {
            max_iterations: self.cfg.polish_steps,
            ..self.cfg.outer.clone()
        };
        let polished = find_eigenvalue_with(
            self.m,
            found.epsilon_star,
            &polish_inner,
            &polish_outer,
            self.d,
            self.accept_tol,
            Some(&found.theta_star),
        )?;
        let target = (0.5 * found.residual).max(1e-3 * self.accept_tol);
        if polished.residual > target {
            return Ok(StartOutcome::Flagged);
        }
        let best = if polished.residual <= found.residual {
            polished
        } else {
            found
        };
        Ok(StartOutcome::Accepted(EigenvalueEstimate {
            value: best.epsilon_star,
            residual: best.residual,
            start_point: start,
            conjugate_completed: false,
        }))
    }
}

/// Runs the grid starts in row-major order until `n` eigenvalues (counting
/// completed conjugates) are collected or the grid is exhausted.
///
/// Starts may be evaluated concurrently in batches, but they are merged one
/// at a time in grid order, so the report is the same with or without the
/// thread pool.
pub fn find_spectrum(
    m: &ComplexMatrix,
    grid: &SearchGrid,
    cfg: &SpectrumConfig,
    d: f64,
) -> Result<SpectrumReport> {
    m.require_square("spectrum search")?;
    grid.validate()?;
    if !(d.is_finite() && d > 0.0) {
        return Err(domain(format!("padding value d must be positive, got {d}")));
    }
    let n = m.n_rows();
    let real = m.is_real();
    if real && grid.im_min < 0.0 {
        return Err(domain("a real matrix is searched in the upper half-plane only"));
    }
    let accept_tol = cfg.accept_tol.unwrap_or_else(|| accept_threshold(m));
    let delta = cfg.dedup_radius.unwrap_or_else(|| default_dedup_radius(m));
    let im_tol = cfg.im_tol.unwrap_or_else(|| default_realness_tolerance(m));
    let search = Search {
        m,
        cfg,
        d,
        accept_tol,
    };

    let starts = grid.points();
    let batch = if cfg.parallel {
        rayon::current_num_threads().max(1)
    } else {
        1
    };
    // real matrices: only the upper representative of each pair is stored
    let mut primaries: Vec<EigenvalueEstimate> = Vec::new();
    let count = |p: &[EigenvalueEstimate]| -> usize {
        p.iter()
            .map(|e| if real && e.value.im != 0.0 { 2 } else { 1 })
            .sum()
    };
    let mut flagged = 0;
    let mut starts_used = 0;
    'outer: for (chunk_index, chunk) in starts.chunks(batch).enumerate() {
        let base = chunk_index * batch;
        let outcomes: Vec<Result<StartOutcome>> = if batch > 1 {
            chunk
                .par_iter()
                .enumerate()
                .map(|(k, &z)| search.run(base + k, z))
                .collect()
        } else {
            chunk
                .iter()
                .enumerate()
                .map(|(k, &z)| search.run(base + k, z))
                .collect()
        };
        for outcome in outcomes {
            starts_used += 1;
            match outcome? {
                StartOutcome::Rejected => {}
                StartOutcome::Flagged => flagged += 1,
                StartOutcome::Accepted(mut est) => {
                    if real {
                        if est.value.im.abs() <= im_tol {
                            est.value.im = 0.0;
                        } else if est.value.im < 0.0 {
                            est.value = est.value.conj();
                        }
                    }
                    dedup(&mut primaries, est, delta);
                }
            }
            if count(&primaries) >= n {
                break 'outer;
            }
        }
    }

    let found = count(&primaries);
    let mut estimates = Vec::with_capacity(found);
    for p in primaries {
        let pair = real && p.value.im != 0.0;
        let conj = EigenvalueEstimate {
            value: p.value.conj(),
            conjugate_completed: true,
            ..p.clone()
        };
        estimates.push(p);
        if pair {
            estimates.push(conj);
        }
    }
    estimates.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    let note = match found.cmp(&n) {
        std::cmp::Ordering::Less => Some(format!(
            "found {found} of {n} eigenvalues; values repeated within the dedup radius count once"
        )),
        std::cmp::Ordering::Greater => Some(format!(
            "found {found} values for a {n}x{n} matrix; an accepted value is spurious"
        )),
        std::cmp::Ordering::Equal => None,
    };
    let complete = found == n;
    // stability of an equilibrium of a three-dimensional flow
    let stability = if complete && n == 3 {
        let values: Vec<Complex> = estimates.iter().map(|e| e.value).collect();
        let tol = default_stability_tol(&values);
        Some(classify_stability(&values, tol, tol)?)
    } else {
        None
    };
    Ok(SpectrumReport {
        matrix_dim: n,
        estimates,
        complete,
        starts_used,
        stability,
        flagged,
        note,
    })
}

/// [`find_spectrum`] over [`search_bounds`] with `d` from [`default_pad`]
/// at the grid radius.
pub fn find_spectrum_default(m: &ComplexMatrix, cfg: &SpectrumConfig) -> Result<SpectrumReport> {
    let grid = search_bounds(m)?;
    let d = default_pad(m, grid.radius());
    find_spectrum(m, &grid, cfg, d)
}

/// Real-axis starts used by [`find_singular_values`].
pub const SVD_AXIS_STARTS: usize = 33;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularValues {
    /// Descending, `min(rows, cols)` of them when complete.
    pub values: Vec<f64>,
    pub report: SpectrumReport,
}

/// Singular values as square roots of the eigenvalues of the smaller Gram
/// matrix, searched on `[0, R]` of the real axis only. `pad_d` defaults to
/// [`default_pad`] of the Gram matrix.
pub fn find_singular_values(
    m: &ComplexMatrix,
    cfg: &SpectrumConfig,
    pad_d: Option<f64>,
) -> Result<SingularValues> {
    let gram = if m.n_rows() >= m.n_cols() {
        svd_proxy(m)
    } else {
        svd_proxy(&m.adjoint())
    };
    let r = spectral_radius_bound(&gram)?;
    let grid = if r == 0.0 {
        SearchGrid::new((0.0, 0.0), (0.0, 0.0), 1, 1)?
    } else {
        SearchGrid::new((0.0, r), (0.0, 0.0), SVD_AXIS_STARTS, 1)?
    };
    let d = pad_d.unwrap_or_else(|| default_pad(&gram, grid.radius()));
    let report = find_spectrum(&gram, &grid, cfg, d)?;
    let mut values: Vec<f64> = report
        .estimates
        .iter()
        .map(|e| e.value.re.max(0.0).sqrt())
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(SingularValues { values, report })
}
