//! Exact statevector simulation of the parameterized trial circuits.
//!
//! The two-qubit circuit is the universal three-block form
//!
//! ```text
//! U(θ) = (A₃ ⊗ A₄) · exp(i(α XX + β YY + γ ZZ)) · (A₁ ⊗ A₂),   Aₖ = Rz(a)·Ry(b)·Rz(c)
//! ```
//!
//! with θ = (A₁, A₂, A₃, A₄, (α, β, γ)), fifteen angles in total. Qubit 0 is
//! the most significant bit of the amplitude index.
//!
//! Registers of other sizes use a single Euler rotation (one qubit) or a
//! layered circuit (three or more qubits): every layer applies an Euler
//! rotation to each qubit followed by a chain of `exp(iγ ZZ)` couplings on
//! neighbouring qubits, and a final rotation layer closes the circuit.

use serde::{Deserialize, Serialize};

use crate::error::{domain, shape, Result};
use crate::linalg::{Complex, ComplexMatrix, ComplexVector, ONE, ZERO};

pub const UNIVERSAL_TWO_QUBIT_PARAMS: usize = 15;
pub const DEFAULT_LAYERS: usize = 3;

const HERMITIAN_TOL: f64 = 1e-10;

/// The rotation angles of a trial circuit, in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzParams(Vec<f64>);

impl AnsatzParams {
    pub fn new(angles: Vec<f64>) -> Self {
        Self(angles)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }

    pub fn angles_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Unit-norm amplitudes of a `q`-qubit register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statevector {
    amplitudes: Vec<Complex>,
    qubits: u32,
}

impl Statevector {
    /// `|0…0⟩`.
    pub fn zero_state(qubits: u32) -> Self {
        let mut amplitudes = vec![ZERO; 1 << qubits];
        amplitudes[0] = ONE;
        Self { amplitudes, qubits }
    }

    /// Normalizes `amplitudes`, whose length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(shape(format!("statevector length {len} is not 2^q with q >= 1")));
        }
        let norm = amplitudes.iter().map(Complex::norm_sqr).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(domain("statevector amplitudes have no finite nonzero norm"));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
            qubits: len.trailing_zeros(),
        })
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(Complex::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn to_vector(&self) -> ComplexVector {
        ComplexVector::new(self.amplitudes.clone())
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        let p = Complex::from_polar(1.0, phase);
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * p).collect(),
            qubits: self.qubits,
        }
    }
}

/// Structure of a trial circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CircuitLayout {
    /// `Rz·Ry·Rz` on a single qubit.
    SingleQubit,
    /// The 15-angle universal two-qubit circuit.
    UniversalTwoQubit,
    /// Rotation + ZZ-chain layers on three or more qubits.
    Layered { qubits: u32, layers: usize },
}

impl CircuitLayout {
    /// Layout used for a register of `qubits` qubits.
    pub fn for_qubits(qubits: u32, layers: usize) -> Result<Self> {
        match qubits {
            0 => Err(shape("a trial circuit needs at least one qubit")),
            1 => Ok(Self::SingleQubit),
            2 => Ok(Self::UniversalTwoQubit),
            q => Ok(Self::Layered {
                qubits: q,
                layers: layers.max(1),
            }),
        }
    }

    pub fn for_dimension(dim: usize, layers: usize) -> Result<Self> {
        if !dim.is_power_of_two() {
            return Err(shape(format!("register dimension {dim} is not a power of two")));
        }
        Self::for_qubits(dim.trailing_zeros(), layers)
    }

    pub fn qubits(&self) -> u32 {
        match *self {
            Self::SingleQubit => 1,
            Self::UniversalTwoQubit => 2,
            Self::Layered { qubits, .. } => qubits,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits()
    }

    pub fn num_params(&self) -> usize {
        match *self {
            Self::SingleQubit => 3,
            Self::UniversalTwoQubit => UNIVERSAL_TWO_QUBIT_PARAMS,
            Self::Layered { qubits, layers } => {
                let q = qubits as usize;
                layers * (4 * q - 1) + 3 * q
            }
        }
    }

    /// Applies `U(θ)` in place to an arbitrary register state.
    pub fn apply(&self, theta: &[f64], amps: &mut [Complex]) -> Result<()> {
        if theta.len() != self.num_params() {
            return Err(shape(format!(
                "circuit takes {} angles, got {}",
                self.num_params(),
                theta.len()
            )));
        }
        if amps.len() != self.dim() {
            return Err(shape(format!(
                "circuit acts on dimension {}, got {}",
                self.dim(),
                amps.len()
            )));
        }
        let q = self.qubits();
        for slot in self.slots() {
            slot.build(theta).apply(amps, q);
        }
        Ok(())
    }

    /// Gates in application order, each naming the angles it reads.
    pub(crate) fn slots(&self) -> Vec<GateSlot> {
        match *self {
            Self::SingleQubit => vec![GateSlot::Rot { target: 0, first: 0 }],
            Self::UniversalTwoQubit => vec![
                GateSlot::Rot { target: 0, first: 0 },
                GateSlot::Rot { target: 1, first: 3 },
                GateSlot::Pair { op: PairOp::Zz, a: 0, b: 1, param: 14 },
                GateSlot::Pair { op: PairOp::Yy, a: 0, b: 1, param: 13 },
                GateSlot::Pair { op: PairOp::Xx, a: 0, b: 1, param: 12 },
                GateSlot::Rot { target: 0, first: 6 },
                GateSlot::Rot { target: 1, first: 9 },
            ],
            Self::Layered { qubits: q, layers } => {
                let mut slots = Vec::new();
                let mut k = 0;
                for _ in 0..layers {
                    for target in 0..q {
                        slots.push(GateSlot::Rot { target, first: k });
                        k += 3;
                    }
                    for a in 0..q - 1 {
                        slots.push(GateSlot::Pair { op: PairOp::Zz, a, b: a + 1, param: k });
                        k += 1;
                    }
                }
                for target in 0..q {
                    slots.push(GateSlot::Rot { target, first: k });
                    k += 3;
                }
                debug_assert_eq!(k, self.num_params());
                slots
            }
        }
    }

    /// `U(θ)|0…0⟩`.
    pub fn prepare(&self, theta: &AnsatzParams) -> Result<Statevector> {
        let mut state = Statevector::zero_state(self.qubits());
        self.apply(theta.angles(), &mut state.amplitudes)?;
        Ok(state)
    }

    /// The full circuit unitary, column `k` being `U(θ)|k⟩`.
    pub fn unitary(&self, theta: &AnsatzParams) -> Result<ComplexMatrix> {
        let dim = self.dim();
        let mut u = ComplexMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut amps = vec![ZERO; dim];
            amps[col] = ONE;
            self.apply(theta.angles(), &mut amps)?;
            for (row, a) in amps.into_iter().enumerate() {
                u[(row, col)] = a;
            }
        }
        Ok(u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum GateSlot {
    /// Euler rotation reading angles `first..first + 3`.
    Rot { target: u32, first: usize },
    Pair { op: PairOp, a: u32, b: u32, param: usize },
}

impl GateSlot {
    pub(crate) fn params(&self) -> std::ops::Range<usize> {
        match *self {
            Self::Rot { first, .. } => first..first + 3,
            Self::Pair { param, .. } => param..param + 1,
        }
    }

    pub(crate) fn build(&self, theta: &[f64]) -> Gate {
        match *self {
            Self::Rot { target, first } => Gate::Rot {
                target,
                g: euler(&theta[first..first + 3]),
            },
            Self::Pair { op, a, b, param } => Gate::Pair {
                op,
                a,
                b,
                phi: theta[param],
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Gate {
    Rot { target: u32, g: [[Complex; 2]; 2] },
    Pair { op: PairOp, a: u32, b: u32, phi: f64 },
}

impl Gate {
    pub(crate) fn apply(&self, amps: &mut [Complex], qubits: u32) {
        match *self {
            Gate::Rot { target, ref g } => apply_1q(amps, qubits, target, g),
            Gate::Pair { op, a, b, phi } => apply_pair_exp(amps, qubits, a, b, op, phi),
        }
    }

    pub(crate) fn adjoint(&self) -> Gate {
        match *self {
            Gate::Rot { target, g } => Gate::Rot {
                target,
                g: [
                    [g[0][0].conj(), g[1][0].conj()],
                    [g[0][1].conj(), g[1][1].conj()],
                ],
            },
            Gate::Pair { op, a, b, phi } => Gate::Pair { op, a, b, phi: -phi },
        }
    }

    // P⊗P is symmetric for every Pauli P, so only rotations change.
    pub(crate) fn transpose(&self) -> Gate {
        match *self {
            Gate::Rot { target, g } => Gate::Rot {
                target,
                g: [[g[0][0], g[1][0]], [g[0][1], g[1][1]]],
            },
            pair => pair,
        }
    }
}

// Rz(a)·Ry(b)·Rz(c)
fn euler(abc: &[f64]) -> [[Complex; 2]; 2] {
    let (a, b, c) = (abc[0], abc[1], abc[2]);
    let (sb, cb) = (0.5 * b).sin_cos();
    let sum = Complex::from_polar(1.0, -0.5 * (a + c));
    let diff = Complex::from_polar(1.0, -0.5 * (a - c));
    [
        [sum * cb, -diff * sb],
        [diff.conj() * sb, sum.conj() * cb],
    ]
}

fn apply_1q(amps: &mut [Complex], qubits: u32, target: u32, g: &[[Complex; 2]; 2]) {
    let bit = 1usize << (qubits - 1 - target);
    for i in 0..amps.len() {
        if i & bit == 0 {
            let j = i | bit;
            let (x, y) = (amps[i], amps[j]);
            amps[i] = g[0][0] * x + g[0][1] * y;
            amps[j] = g[1][0] * x + g[1][1] * y;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PairOp {
    Xx,
    Yy,
    Zz,
}

// exp(iφ P⊗P) = cos φ · I + i sin φ · P⊗P, since (P⊗P)² = I.
fn apply_pair_exp(amps: &mut [Complex], qubits: u32, a: u32, b: u32, op: PairOp, phi: f64) {
    let ba = 1usize << (qubits - 1 - a);
    let bb = 1usize << (qubits - 1 - b);
    let (s, c) = phi.sin_cos();
    let is = Complex::new(0.0, s);
    match op {
        PairOp::Zz => {
            let plus = Complex::new(c, s);
            let minus = plus.conj();
            for (i, amp) in amps.iter_mut().enumerate() {
                let parity = (i & ba != 0) ^ (i & bb != 0);
                *amp *= if parity { minus } else { plus };
            }
        }
        PairOp::Xx | PairOp::Yy => {
            let mask = ba | bb;
            for i in 0..amps.len() {
                let j = i ^ mask;
                if i < j {
                    // YY picks up −1 when both bits agree, +1 otherwise
                    let sign = match op {
                        PairOp::Yy if (i & ba != 0) == (i & bb != 0) => -1.0,
                        _ => 1.0,
                    };
                    let (x, y) = (amps[i], amps[j]);
                    amps[i] = x * c + is * sign * y;
                    amps[j] = y * c + is * sign * x;
                }
            }
        }
    }
}

/// `U(θ)|00⟩` for the universal two-qubit circuit.
pub fn prepare_state(theta: &AnsatzParams) -> Result<Statevector> {
    CircuitLayout::UniversalTwoQubit.prepare(theta)
}

/// `Re ⟨ψ|H|ψ⟩` for Hermitian `H`.
pub fn expectation(psi: &Statevector, h: &ComplexMatrix) -> Result<f64> {
    h.require_square("expectation")?;
    if h.n_rows() != psi.dim() {
        return Err(shape(format!(
            "operator of dimension {} applied to a {}-amplitude state",
            h.n_rows(),
            psi.dim()
        )));
    }
    let scale = h.frobenius_norm().max(1.0);
    if h.hermitian_defect() > HERMITIAN_TOL * scale {
        return Err(domain("expectation requires a Hermitian operator"));
    }
    let z = quadratic_form(h, psi.amplitudes());
    debug_assert!(z.im.abs() < HERMITIAN_TOL * scale);
    Ok(z.re)
}

/// `⟨v|H|v⟩` without validation.
pub(crate) fn quadratic_form(h: &ComplexMatrix, v: &[Complex]) -> Complex {
    v.iter()
        .enumerate()
        .map(|(i, vi)| {
            let hv: Complex = h.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
            vi.conj() * hv
        })
        .sum()
}

/// `|⟨a|b⟩|²`.
pub fn state_overlap(a: &Statevector, b: &Statevector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(shape(format!(
            "overlap of {}- and {}-amplitude states",
            a.dim(),
            b.dim()
        )));
    }
    let z: Complex = a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(z.norm_sqr().min(1.0))
}
