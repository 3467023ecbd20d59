//! The two nested gradient descents.
//!
//! The inner loop minimizes `⟨Ψ(θ)|H|Ψ(θ)⟩` over the circuit angles θ; the
//! outer loop moves the complex probe ε so that the inner minimum of the
//! padded proxy `H(ε)` reaches zero, which happens exactly at eigenvalues.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzParams, CircuitLayout, Gate, GateSlot, Statevector, DEFAULT_LAYERS};
use crate::error::{domain, shape, Result};
use crate::linalg::{Complex, ComplexMatrix, ZERO};
use crate::proxy::register_size;

const ARMIJO_SHRINK: f64 = 0.5;
const ARMIJO_DECREASE: f64 = 1e-4;
// smallest trial step, relative to the learning rate
const ARMIJO_MIN_STEP: f64 = 1e-14;
const OUTER_MAX_HALVINGS: usize = 30;
const HERMITIAN_TOL: f64 = 1e-10;
const BB_MIN_FACTOR: f64 = 1e-3;
const BB_MAX_FACTOR: f64 = 1e6;
const NONMONOTONE_MEMORY: usize = 10;
const INEXACT_INNER_RATIO: f64 = 1e-3;

/// Hyperparameters of one gradient descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GDConfig {
    /// First trial step; later steps take secant (Barzilai–Borwein) lengths
    /// scaled from it.
    pub learning_rate: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub restarts: usize,
    pub fd_step: f64,
    pub rng_seed: u64,
    /// Layer count of the trial circuit on registers of three or more qubits.
    pub ansatz_layers: usize,
}

impl GDConfig {
    pub fn inner_default() -> Self {
        Self {
            learning_rate: 0.1,
            max_iterations: 2000,
            gradient_tolerance: 1e-10,
            restarts: 3,
            fd_step: 1e-5,
            rng_seed: 0,
            ansatz_layers: DEFAULT_LAYERS,
        }
    }

    pub fn outer_default() -> Self {
        Self {
            learning_rate: 0.05,
            max_iterations: 500,
            gradient_tolerance: 1e-9,
            restarts: 0,
            fd_step: 1e-6,
            rng_seed: 0,
            ansatz_layers: DEFAULT_LAYERS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("gradient_tolerance", self.gradient_tolerance),
            ("fd_step", self.fd_step),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iterations == 0 {
            return Err(domain("max_iterations must be positive"));
        }
        Ok(())
    }
}

impl Default for GDConfig {
    fn default() -> Self {
        Self::inner_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerResult {
    pub theta_star: AnsatzParams,
    pub value: f64,
    pub psi_min: Statevector,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterResult {
    pub epsilon_star: Complex,
    pub residual: f64,
    /// `(ε, minimized expectation)` for every accepted outer step.
    pub trace: Vec<(Complex, f64)>,
    pub accepted: bool,
    pub theta_star: AnsatzParams,
    pub psi_min: Statevector,
    pub inner_converged: bool,
}

/// Default acceptance threshold `1e-8 · max(1, ‖M‖_F²)` for a vanishing
/// inner minimum.
pub fn accept_threshold(m: &ComplexMatrix) -> f64 {
    1e-8 * m.frobenius_norm().powi(2).max(1.0)
}

/// The function minimized by the inner loop, as a `dim × dim` row-major
/// matrix.
#[derive(Clone)]
struct Objective {
    kind: ObjectiveKind,
    dim: usize,
    matrix: Vec<Complex>,
    noise_scale: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ObjectiveKind {
    /// `⟨ψ|H|ψ⟩` for an explicit Hermitian `H`.
    Dense,
    /// `‖Fψ‖²` with `F = diag(M − εI, √d·I)`, the same quadratic form as the
    /// padded proxy evaluated through its factor, which keeps full relative
    /// precision as the value approaches zero.
    Factor,
}

impl Objective {
    fn dense(h: &ComplexMatrix) -> Self {
        let scale = h.entries().iter().map(|z| z.norm()).sum::<f64>();
        Self {
            kind: ObjectiveKind::Dense,
            dim: h.n_rows(),
            matrix: h.entries().to_vec(),
            noise_scale: scale,
        }
    }

    fn shifted(m: &ComplexMatrix, eps: Complex, pad: f64, dim: usize) -> Result<Self> {
        let shifted = m.shifted(eps)?;
        let n = shifted.n_rows();
        let mut matrix = vec![ZERO; dim * dim];
        for i in 0..n {
            matrix[i * dim..i * dim + n].copy_from_slice(shifted.row(i));
        }
        for i in n..dim {
            matrix[i * dim + i] = Complex::new(pad.sqrt(), 0.0);
        }
        let row_scale = matrix
            .chunks(dim)
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(Self {
            kind: ObjectiveKind::Factor,
            dim,
            matrix,
            noise_scale: row_scale,
        })
    }

    fn eval_with(&self, matrix: &[Complex], amps: &[Complex]) -> f64 {
        let rows = matrix.chunks(self.dim).map(|row| {
            row.iter().zip(amps).map(|(a, b)| a * b).sum::<Complex>()
        });
        match self.kind {
            ObjectiveKind::Dense => rows.zip(amps).map(|(hv, a)| (a.conj() * hv).re).sum(),
            ObjectiveKind::Factor => rows.map(|v| v.norm_sqr()).sum(),
        }
    }

    fn eval(&self, amps: &[Complex]) -> f64 {
        self.eval_with(&self.matrix, amps)
    }

    // Rewrites `matrix` so that evaluating it on ψ equals evaluating the
    // original on `gate·ψ`.
    fn pull_back(&self, matrix: &mut [Complex], gate: &Gate, qubits: u32) {
        let dim = self.dim;
        let gt = gate.transpose();
        for row in matrix.chunks_mut(dim) {
            gt.apply(row, qubits);
        }
        if self.kind == ObjectiveKind::Dense {
            let ga = gate.adjoint();
            let mut col = vec![ZERO; dim];
            for c in 0..dim {
                for r in 0..dim {
                    col[r] = matrix[r * dim + c];
                }
                ga.apply(&mut col, qubits);
                for r in 0..dim {
                    matrix[r * dim + c] = col[r];
                }
            }
        }
    }

    // Rounding bound on `eval` near a point with value `f`.
    fn noise(&self, f: f64) -> f64 {
        let e = f64::EPSILON * self.dim as f64 * self.noise_scale;
        match self.kind {
            ObjectiveKind::Dense => 4.0 * e,
            ObjectiveKind::Factor => {
                4.0 * (2.0 * f.max(0.0).sqrt() * e + e * e) + 4.0 * f64::EPSILON * f.abs()
            }
        }
    }
}

struct Problem {
    objective: Objective,
    layout: CircuitLayout,
    slots: Vec<GateSlot>,
}

impl Problem {
    fn new(objective: Objective, layout: CircuitLayout) -> Self {
        debug_assert_eq!(objective.dim, layout.dim());
        let slots = layout.slots();
        Self {
            objective,
            layout,
            slots,
        }
    }

    fn value(&self, theta: &[f64], scratch: &mut Vec<Complex>) -> f64 {
        scratch.clear();
        scratch.resize(self.layout.dim(), ZERO);
        scratch[0] = Complex::new(1.0, 0.0);
        let q = self.layout.qubits();
        for slot in &self.slots {
            slot.build(theta).apply(scratch, q);
        }
        self.objective.eval(scratch)
    }

    // Central differences, one gate at a time: the prefix state before the
    // gate is cached on the way forward and the objective is pulled back
    // through the suffix, so each probe rebuilds a single gate.
    fn gradient(&self, theta: &[f64], step: f64) -> Vec<f64> {
        let q = self.layout.qubits();
        let dim = self.layout.dim();
        let gates: Vec<Gate> = self.slots.iter().map(|s| s.build(theta)).collect();
        let mut prefix = Vec::with_capacity(gates.len());
        let mut state = vec![ZERO; dim];
        state[0] = Complex::new(1.0, 0.0);
        for gate in &gates {
            prefix.push(state.clone());
            gate.apply(&mut state, q);
        }

        let mut grad = vec![0.0; theta.len()];
        let mut pulled = self.objective.matrix.clone();
        let mut probe = theta.to_vec();
        let mut work = vec![ZERO; dim];
        for (k, slot) in self.slots.iter().enumerate().rev() {
            for p in slot.params() {
                let mut side = |x: f64| {
                    probe[p] = x;
                    work.copy_from_slice(&prefix[k]);
                    slot.build(&probe).apply(&mut work, q);
                    self.objective.eval_with(&pulled, &work)
                };
                let up = side(theta[p] + step);
                let down = side(theta[p] - step);
                probe[p] = theta[p];
                grad[p] = (up - down) / (2.0 * step);
            }
            self.objective.pull_back(&mut pulled, &gates[k], q);
        }
        grad
    }
}

struct Descent {
    theta: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

// Gradient descent with Armijo backtracking from the learning rate.
// Terminates on a small gradient (never below the rounding floor of the
// difference quotient), on line-search failure, which means the computed
// gradient no longer yields a resolvable decrease, or on the iteration cap.
fn descend(problem: &Problem, mut theta: Vec<f64>, cfg: &GDConfig) -> Descent {
    let mut scratch = Vec::with_capacity(problem.layout.dim());
    let mut f = problem.value(&theta, &mut scratch);
    let mut best = (theta.clone(), f);
    let mut recent = VecDeque::with_capacity(NONMONOTONE_MEMORY);
    let mut candidate = vec![0.0; theta.len()];
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
    let finish = |best: (Vec<f64>, f64), iterations, converged| Descent {
        theta: best.0,
        value: best.1,
        iterations,
        converged,
    };
    for iteration in 0..cfg.max_iterations {
        let grad = problem.gradient(&theta, cfg.fd_step);
        let gmax = grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
        let floor = problem.objective.noise(f) / cfg.fd_step;
        if gmax < cfg.gradient_tolerance.max(floor) || !gmax.is_finite() {
            return finish(best, iteration, true);
        }
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        if recent.len() == NONMONOTONE_MEMORY {
            recent.pop_front();
        }
        recent.push_back(f);
        let reference = recent.iter().copied().fold(f, f64::max);
        let mut t = match &previous {
            Some((x_prev, g_prev)) => bb_length(&theta, x_prev, &grad, g_prev, cfg.learning_rate),
            None => cfg.learning_rate,
        };
        let accepted = loop {
            for ((c, x), g) in candidate.iter_mut().zip(&theta).zip(&grad) {
                *c = x - t * g;
            }
            let fc = problem.value(&candidate, &mut scratch);
            // strict decrease: once the step vanishes in rounding, f - c·t·|g|²
            // rounds back to f
            if fc < reference && fc <= reference - ARMIJO_DECREASE * t * g2 {
                break Some(fc);
            }
            t *= ARMIJO_SHRINK;
            if t < ARMIJO_MIN_STEP * cfg.learning_rate {
                break None;
            }
        };
        let Some(fc) = accepted else {
            return finish(best, iteration, true);
        };
        std::mem::swap(&mut theta, &mut candidate);
        previous = Some((candidate.clone(), grad));
        f = fc;
        if f < best.1 {
            best = (theta.clone(), f);
        }
    }
    finish(best, cfg.max_iterations, false)
}

// Barzilai–Borwein length for θ-space steps, clamped around the configured
// rate so that a near-flat or negatively curved secant cannot blow up.
fn bb_length(x: &[f64], x_prev: &[f64], g: &[f64], g_prev: &[f64], lr: f64) -> f64 {
    let (mut ss, mut sy) = (0.0, 0.0);
    for i in 0..x.len() {
        let s = x[i] - x_prev[i];
        ss += s * s;
        sy += s * (g[i] - g_prev[i]);
    }
    if sy > 0.0 && ss > 0.0 {
        (ss / sy).clamp(lr * BB_MIN_FACTOR, lr * BB_MAX_FACTOR)
    } else {
        lr
    }
}

fn random_angles(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect()
}

fn run_inner(
    problem: &Problem,
    cfg: &GDConfig,
    warm_start: Option<&AnsatzParams>,
) -> Result<InnerResult> {
    cfg.validate()?;
    let len = problem.layout.num_params();
    if let Some(w) = warm_start {
        if w.len() != len {
            return Err(shape(format!(
                "warm start has {} angles, circuit takes {len}",
                w.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let first = match warm_start {
        Some(w) => w.angles().to_vec(),
        None => random_angles(&mut rng, len),
    };
    let mut best = descend(problem, first, cfg);
    let mut iterations = best.iterations;
    for _ in 0..cfg.restarts {
        let run = descend(problem, random_angles(&mut rng, len), cfg);
        iterations += run.iterations;
        if run.value < best.value {
            best = run;
        }
    }
    let theta_star = AnsatzParams::new(best.theta);
    let psi_min = problem.layout.prepare(&theta_star)?;
    let value = problem.objective.eval(psi_min.amplitudes());
    Ok(InnerResult {
        theta_star,
        value,
        psi_min,
        iterations,
        converged: best.converged,
    })
}

/// Minimizes `⟨Ψ(θ)|H|Ψ(θ)⟩` over the angles of the trial circuit sized for
/// `H`.
///
/// `warm_start`, when given, is the first initialization; every restart
/// draws fresh angles uniformly from `[0, 2π)` with the configured seed, and
/// the lowest value wins.
pub fn minimize_expectation(
    h: &ComplexMatrix,
    cfg: &GDConfig,
    warm_start: Option<&AnsatzParams>,
) -> Result<InnerResult> {
    h.require_square("expectation minimization")?;
    let scale = h.frobenius_norm().max(1.0);
    if h.hermitian_defect() > HERMITIAN_TOL * scale {
        return Err(domain("expectation minimization requires a Hermitian operator"));
    }
    let layout = CircuitLayout::for_dimension(h.n_rows(), cfg.ansatz_layers)?;
    let problem = Problem::new(Objective::dense(h), layout);
    run_inner(&problem, cfg, warm_start)
}

/// Inner minimization of the padded proxy of `M − εI`, evaluated in factored
/// form.
pub fn minimize_shifted(
    m: &ComplexMatrix,
    eps: Complex,
    d: f64,
    cfg: &GDConfig,
    warm_start: Option<&AnsatzParams>,
) -> Result<InnerResult> {
    if !(d.is_finite() && d > 0.0) {
        return Err(domain(format!("padding value d must be positive, got {d}")));
    }
    let (size, qubits) = register_size(m.n_rows());
    let layout = CircuitLayout::for_qubits(qubits, cfg.ansatz_layers)?;
    let problem = Problem::new(Objective::shifted(m, eps, d, size)?, layout);
    run_inner(&problem, cfg, warm_start)
}

/// Analytic outer gradient `(−2 Re z, −2 Im z)` with
/// `z = ⟨ψ|(M − εI)|ψ⟩` over the leading `n` amplitudes, the derivative of
/// the inner minimum with the minimizer held fixed.
pub fn envelope_gradient(m: &ComplexMatrix, eps: Complex, psi: &[Complex]) -> Result<(f64, f64)> {
    m.require_square("envelope gradient")?;
    let n = m.n_rows();
    if psi.len() < n {
        return Err(shape(format!(
            "state has {} amplitudes, matrix needs {n}",
            psi.len()
        )));
    }
    let lead = &psi[..n];
    let z: Complex = (0..n)
        .map(|i| {
            let mv: Complex = m.row(i).iter().zip(lead).map(|(a, b)| a * b).sum();
            lead[i].conj() * (mv - eps * lead[i])
        })
        .sum();
    Ok((-2.0 * z.re, -2.0 * z.im))
}

/// Drives the inner minimum of `H(ε)` to zero by gradient descent over
/// `(Re ε, Im ε)`.
pub fn find_eigenvalue(
    m: &ComplexMatrix,
    eps0: Complex,
    inner_cfg: &GDConfig,
    outer_cfg: &GDConfig,
    d: f64,
) -> Result<OuterResult> {
    find_eigenvalue_with(m, eps0, inner_cfg, outer_cfg, d, accept_threshold(m), None)
}

/// [`find_eigenvalue`] with an explicit acceptance threshold and an optional
/// initial circuit state.
pub fn find_eigenvalue_with(
    m: &ComplexMatrix,
    eps0: Complex,
    inner_cfg: &GDConfig,
    outer_cfg: &GDConfig,
    d: f64,
    accept_tol: f64,
    warm_start: Option<&AnsatzParams>,
) -> Result<OuterResult> {
    m.require_square("eigenvalue search")?;
    outer_cfg.validate()?;
    inner_cfg.validate()?;

    // Inexact inner solves: each step asks for an inner gradient a fixed
    // fraction below the current outer gradient, tightening to the configured
    // tolerance as the outer loop converges.
    let tolerance_for = |outer_grad: f64| {
        inner_cfg
            .gradient_tolerance
            .max(INEXACT_INNER_RATIO * outer_grad)
    };
    let first_cfg = GDConfig {
        restarts: if warm_start.is_some() { 0 } else { inner_cfg.restarts },
        gradient_tolerance: tolerance_for(m.frobenius_norm().max(1.0)),
        ..inner_cfg.clone()
    };
    let mut eps = eps0;
    let mut cur = minimize_shifted(m, eps, d, &first_cfg, warm_start)?;
    let mut cur_cfg = first_cfg;
    let mut trace = vec![(eps, cur.value)];

    let mut previous: Option<(Complex, Complex)> = None;
    for step in 0..outer_cfg.max_iterations {
        let (gr, gi) = if cur.converged {
            envelope_gradient(m, eps, cur.psi_min.amplitudes())?
        } else {
            outer_fd_gradient(m, eps, d, &cur_cfg, &cur, outer_cfg.fd_step)?
        };
        let direction = Complex::new(gr, gi);
        let gmax = gr.abs().max(gi.abs());
        if gmax < outer_cfg.gradient_tolerance && cur_cfg.gradient_tolerance <= inner_cfg.gradient_tolerance {
            break;
        }
        // restarts only at the cold start; later steps follow the warm minimizer
        let step_cfg = GDConfig {
            restarts: 0,
            gradient_tolerance: tolerance_for(gmax),
            ..inner_cfg.clone()
        };
        let mut t = match previous {
            Some((eps_prev, grad_prev)) => {
                bb_step(eps - eps_prev, direction - grad_prev, outer_cfg.learning_rate)
            }
            None => outer_cfg.learning_rate,
        };
        previous = Some((eps, direction));
        let mut next = None;
        for _ in 0..OUTER_MAX_HALVINGS {
            let candidate = eps - direction * t;
            let mut trial = minimize_shifted(m, candidate, d, &step_cfg, Some(&cur.theta_star))?;
            if !trial.converged && inner_cfg.restarts > 0 {
                // the warm basin stalled; fall back to fresh random starts
                let fresh_cfg = GDConfig {
                    restarts: inner_cfg.restarts - 1,
                    rng_seed: inner_cfg.rng_seed.wrapping_add(1 + step as u64),
                    ..step_cfg.clone()
                };
                let fresh = minimize_shifted(m, candidate, d, &fresh_cfg, None)?;
                if fresh.value < trial.value {
                    trial = fresh;
                }
            }
            if trial.value <= cur.value {
                next = Some((candidate, trial));
                break;
            }
            t *= 0.5;
        }
        let Some((candidate, trial)) = next else {
            break;
        };
        let moved = (candidate - eps).norm();
        eps = candidate;
        cur = trial;
        cur_cfg = step_cfg;
        trace.push((eps, cur.value));
        if moved <= f64::EPSILON * (1.0 + eps.norm()) {
            break;
        }
    }

    Ok(OuterResult {
        epsilon_star: eps,
        residual: cur.value,
        trace,
        accepted: cur.value < accept_tol,
        theta_star: cur.theta_star,
        psi_min: cur.psi_min,
        inner_converged: cur.converged,
    })
}

// Barzilai–Borwein length `s·s / s·y`. Near a simple eigenvalue the inner
// minimum is close to an isotropic quadratic in ε, for which this is the
// exact step, whereas a fixed rate contracts like `1 − 2·lr·c²`.
fn bb_step(s: Complex, y: Complex, lr: f64) -> f64 {
    let sy = s.re * y.re + s.im * y.im;
    let ss = s.norm_sqr();
    if sy > 0.0 && ss > 0.0 {
        (ss / sy).clamp(lr * BB_MIN_FACTOR, lr * BB_MAX_FACTOR)
    } else {
        lr
    }
}

// Central differences of the inner minimum in Re ε and Im ε.
fn outer_fd_gradient(
    m: &ComplexMatrix,
    eps: Complex,
    d: f64,
    cfg: &GDConfig,
    cur: &InnerResult,
    step: f64,
) -> Result<(f64, f64)> {
    let g = |z: Complex| -> Result<f64> {
        Ok(minimize_shifted(m, z, d, cfg, Some(&cur.theta_star))?.value)
    };
    let re = (g(eps + Complex::new(step, 0.0))? - g(eps - Complex::new(step, 0.0))?) / (2.0 * step);
    let im = (g(eps + Complex::new(0.0, step))? - g(eps - Complex::new(0.0, step))?) / (2.0 * step);
    Ok((re, im))
}

/// Central difference quotient of `θ ↦ ⟨Ψ(θ)|H|Ψ(θ)⟩`, as used by the inner
/// loop.
pub fn expectation_gradient(
    h: &ComplexMatrix,
    theta: &AnsatzParams,
    step: f64,
    layers: usize,
) -> Result<Vec<f64>> {
    let layout = CircuitLayout::for_dimension(h.n_rows(), layers)?;
    if theta.len() != layout.num_params() {
        return Err(shape(format!(
            "circuit takes {} angles, got {}",
            layout.num_params(),
            theta.len()
        )));
    }
    let problem = Problem::new(Objective::dense(h), layout);
    Ok(problem.gradient(theta.angles(), step))
}
