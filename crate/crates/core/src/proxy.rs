//! Hermitian proxies for non-Hermitian matrices.
//!
//! For a square `M` and a complex probe `ε`, `H(ε) = (M − εI)†(M − εI)` is
//! Hermitian and positive semi-definite, and its smallest eigenvalue vanishes
//! exactly when `ε` is an eigenvalue of `M`. Quantum registers hold `2^q`
//! amplitudes, so `H(ε)` is padded up to the next power of two with a large
//! diagonal penalty `d` on the extra basis states.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, shape, Result};
use crate::linalg::{Complex, ComplexMatrix, ONE, ZERO};

const PAULI_IMAG_CUTOFF: f64 = 1e-10;

/// `(M − εI)†(M − εI)`.
pub fn hermitianize(m: &ComplexMatrix, eps: Complex) -> Result<ComplexMatrix> {
    let shifted = m.shifted(eps)?;
    shifted.adjoint().matmul(&shifted)
}

/// Smallest power of two not below `n`, as `(2^q, q)`, with at least one
/// qubit.
pub fn register_size(n: usize) -> (usize, u32) {
    let size = n.max(2).next_power_of_two();
    (size, size.trailing_zeros())
}

/// Embeds `h` in the leading block of a `2^q × 2^q` matrix whose remaining
/// diagonal entries equal `d`.
pub fn augment(h: &ComplexMatrix, d: f64) -> Result<ComplexMatrix> {
    h.require_square("augmentation")?;
    if !(d.is_finite() && d > 0.0) {
        return Err(domain(format!("padding value d must be positive, got {d}")));
    }
    let n = h.n_rows();
    let (size, _) = register_size(n);
    if size == n {
        return Ok(h.clone());
    }
    let mut out = ComplexMatrix::zeros(size, size);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = h[(i, j)];
        }
    }
    for i in n..size {
        out[(i, i)] = Complex::new(d, 0.0);
    }
    Ok(out)
}

/// `(‖M‖_F + radius)² + 1`.
///
/// Since `σ_min(M − εI) ≤ ‖M‖_F + |ε|`, this exceeds the smallest eigenvalue
/// of every `H(ε)` with `|ε| ≤ radius`.
pub fn default_pad(m: &ComplexMatrix, search_radius: f64) -> f64 {
    let r = m.frobenius_norm() + search_radius.max(0.0);
    r * r + 1.0
}

/// `M†M`, whose eigenvalues are the squared singular values of `M`.
pub fn svd_proxy(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint().matmul(m).expect("adjoint dimensions always agree")
}

/// A padded shifted proxy together with the data that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianProxy {
    pub matrix: ComplexMatrix,
    pub epsilon: Complex,
    pub pad_value: f64,
    pub original_dim: usize,
    pub qubits: u32,
}

impl HermitianProxy {
    pub fn build(m: &ComplexMatrix, epsilon: Complex, pad_value: f64) -> Result<Self> {
        let h = hermitianize(m, epsilon)?;
        let matrix = augment(&h, pad_value)?;
        let (_, qubits) = register_size(m.n_rows());
        Ok(Self {
            matrix,
            epsilon,
            pad_value,
            original_dim: m.n_rows(),
            qubits,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    // entry <bit| P |bit ^ flips>
    fn entry(self, bit: bool) -> Complex {
        match (self, bit) {
            (Pauli::I, _) | (Pauli::X, _) | (Pauli::Z, false) => ONE,
            (Pauli::Z, true) => -ONE,
            (Pauli::Y, false) => Complex::new(0.0, -1.0),
            (Pauli::Y, true) => Complex::new(0.0, 1.0),
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of Pauli matrices; position 0 acts on the most
/// significant bit of the basis index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        Self(ops)
    }

    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                'I' => Some(Pauli::I),
                'X' => Some(Pauli::X),
                'Y' => Some(Pauli::Y),
                'Z' => Some(Pauli::Z),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }

    pub fn qubits(&self) -> usize {
        self.0.len()
    }

    fn flip_mask(&self) -> usize {
        let q = self.0.len();
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| p.flips())
            .fold(0, |acc, (k, _)| acc | 1 << (q - 1 - k))
    }

    // P[row][row ^ flip_mask]
    fn row_entry(&self, row: usize) -> Complex {
        let q = self.0.len();
        self.0
            .iter()
            .enumerate()
            .fold(ONE, |acc, (k, p)| acc * p.entry(row >> (q - 1 - k) & 1 == 1))
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let size = 1 << self.0.len();
        let mask = self.flip_mask();
        let mut m = ComplexMatrix::zeros(size, size);
        for row in 0..size {
            m[(row, row ^ mask)] = self.row_entry(row);
        }
        m
    }

    fn all(q: usize) -> impl Iterator<Item = PauliString> {
        (0..4usize.pow(q as u32)).map(move |mut code| {
            let mut ops = vec![Pauli::I; q];
            for k in (0..q).rev() {
                ops[k] = Pauli::ALL[code % 4];
                code /= 4;
            }
            PauliString(ops)
        })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.symbol()))
    }
}

/// `H = Σ c_P P` over all `4^q` Pauli strings.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliDecomposition {
    pub qubits: usize,
    pub coefficients: BTreeMap<PauliString, Complex>,
}

impl PauliDecomposition {
    pub fn coefficient(&self, label: &str) -> Complex {
        PauliString::parse(label)
            .and_then(|p| self.coefficients.get(&p).copied())
            .unwrap_or(ZERO)
    }

    /// Real parts of all coefficients, keyed by label. Exact for Hermitian input.
    pub fn real_coefficients(&self) -> BTreeMap<String, f64> {
        self.coefficients
            .iter()
            .map(|(p, c)| (p.to_string(), c.re))
            .collect()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let size = 1 << self.qubits;
        let mut out = ComplexMatrix::zeros(size, size);
        for (p, &c) in &self.coefficients {
            let mask = p.flip_mask();
            for row in 0..size {
                out[(row, row ^ mask)] += c * p.row_entry(row);
            }
        }
        out
    }
}

/// `c_P = tr(P·H) / 2^q`. Imaginary parts below `1e-10` are dropped.
pub fn pauli_decompose(h: &ComplexMatrix) -> Result<PauliDecomposition> {
    h.require_square("Pauli decomposition")?;
    let size = h.n_rows();
    if size == 0 || !size.is_power_of_two() {
        return Err(shape(format!(
            "Pauli decomposition needs a 2^q dimension, got {size}"
        )));
    }
    let q = size.trailing_zeros() as usize;
    let mut coefficients = BTreeMap::new();
    for p in PauliString::all(q) {
        let mask = p.flip_mask();
        let trace: Complex = (0..size)
            .map(|row| p.row_entry(row) * h[(row ^ mask, row)])
            .sum();
        let mut c = trace / size as f64;
        if c.im.abs() < PAULI_IMAG_CUTOFF {
            c.im = 0.0;
        }
        if c != ZERO {
            coefficients.insert(p, c);
        }
    }
    Ok(PauliDecomposition {
        qubits: q,
        coefficients,
    })
}
