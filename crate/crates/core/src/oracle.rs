//! Classical reference spectra.
//!
//! These routines share no code with the variational path and serve as the
//! ground truth it is checked against: Faddeev–LeVerrier characteristic
//! polynomials with Durand–Kerner roots for general matrices, cyclic complex
//! Jacobi rotations for Hermitian ones.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{Complex, ComplexMatrix, ONE, ZERO};

/// Largest dimension the reference routines accept.
pub const MAX_ORACLE_DIM: usize = 16;

const ROOT_UPDATE_TOL: f64 = 1e-13;
const ROOT_MAX_ITERATIONS: usize = 1000;
const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFF_TOL: f64 = 1e-12;
const HERMITIAN_INPUT_TOL: f64 = 1e-10;

/// Monic characteristic polynomial `λⁿ + c₁λⁿ⁻¹ + … + cₙ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharPoly {
    coeffs: Vec<Complex>,
}

impl CharPoly {
    /// `coeffs[k]` is `c_{k+1}`.
    pub fn new(coeffs: Vec<Complex>) -> Self {
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn eval(&self, z: Complex) -> Complex {
        self.coeffs.iter().fold(ONE, |acc, &c| acc * z + c)
    }

    /// `(−1)ⁿ cₙ`, the product of the roots.
    pub fn root_product(&self) -> Complex {
        let n = self.degree();
        let last = self.coeffs.last().copied().unwrap_or(ONE);
        if n.is_multiple_of(2) {
            last
        } else {
            -last
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceMethod {
    CharPoly,
    Jacobi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpectrum {
    pub eigenvalues: Vec<Complex>,
    pub method: ReferenceMethod,
}

fn require_oracle_size(m: &ComplexMatrix, what: &str) -> Result<()> {
    m.require_square(what)?;
    if m.n_rows() > MAX_ORACLE_DIM {
        return Err(domain(format!(
            "{what} supports at most {MAX_ORACLE_DIM} rows, got {}",
            m.n_rows()
        )));
    }
    Ok(())
}

/// Faddeev–LeVerrier: `M₁ = M`, `c₁ = −tr M₁`, `Mₖ₊₁ = M(Mₖ + cₖI)`,
/// `cₖ₊₁ = −tr(Mₖ₊₁)/(k+1)`.
pub fn char_poly(m: &ComplexMatrix) -> Result<CharPoly> {
    require_oracle_size(m, "characteristic polynomial")?;
    let n = m.n_rows();
    let mut coeffs = Vec::with_capacity(n);
    if n == 0 {
        return Ok(CharPoly::new(coeffs));
    }
    let mut mk = m.clone();
    coeffs.push(-mk.trace());
    for k in 1..n {
        let shifted = mk.shifted(-coeffs[k - 1])?;
        mk = m.matmul(&shifted)?;
        coeffs.push(-mk.trace() / (k as f64 + 1.0));
    }
    Ok(CharPoly::new(coeffs))
}

/// All roots by Durand–Kerner simultaneous iteration from `(0.4+0.9i)^k`.
pub fn poly_roots(p: &CharPoly) -> Result<Vec<Complex>> {
    let n = p.degree();
    if n == 0 {
        return Err(domain("root finding needs degree >= 1"));
    }
    let seed = Complex::new(0.4, 0.9);
    let mut roots: Vec<Complex> = (0..n).map(|k| seed.powu(k as u32)).collect();

    for _ in 0..ROOT_MAX_ITERATIONS {
        let mut worst = 0.0_f64;
        for i in 0..n {
            let zi = roots[i];
            let mut denom = ONE;
            for (j, &zj) in roots.iter().enumerate() {
                if j != i {
                    let mut d = zi - zj;
                    if d == ZERO {
                        d = Complex::new(f64::EPSILON, f64::EPSILON);
                    }
                    denom *= d;
                }
            }
            let step = p.eval(zi) / denom;
            if !step.is_finite() {
                continue;
            }
            roots[i] = zi - step;
            worst = worst.max(step.norm() / roots[i].norm().max(1.0));
        }
        if worst < ROOT_UPDATE_TOL {
            sort_complex(&mut roots);
            return Ok(roots);
        }
    }
    Err(Error::Convergence {
        iterations: ROOT_MAX_ITERATIONS,
        best: roots,
    })
}

pub(crate) fn sort_complex(values: &mut [Complex]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Eigenvalues of a general square matrix, ascending by real then imaginary part.
pub fn eig_reference(m: &ComplexMatrix) -> Result<ReferenceSpectrum> {
    let p = char_poly(m)?;
    let eigenvalues = if p.degree() == 0 {
        Vec::new()
    } else {
        poly_roots(&p)?
    };
    Ok(ReferenceSpectrum {
        eigenvalues,
        method: ReferenceMethod::CharPoly,
    })
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Returns ascending eigenvalues and a unitary matrix whose column `k` is the
/// eigenvector for eigenvalue `k`.
pub fn hermitian_eigh(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    require_oracle_size(h, "Hermitian eigensolver")?;
    let scale = h.frobenius_norm();
    if h.hermitian_defect() > HERMITIAN_INPUT_TOL * scale.max(1.0) {
        return Err(domain("Hermitian eigensolver received a non-Hermitian matrix"));
    }
    let n = h.n_rows();
    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);
    for i in 0..n {
        a[(i, i)] = Complex::new(a[(i, i)].re, 0.0);
    }

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let target = JACOBI_OFF_TOL * scale;
    let mut sweeps = 0;
    while off_norm(&a) > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Convergence {
                iterations: sweeps,
                best: (0..n).map(|i| a[(i, i)]).collect(),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = v[(row, src)];
        }
    }
    Ok((values, vectors))
}

// One unitary rotation A <- W† A W annihilating A[p][q], with W = diag(1, ḡ)·R
// on the (p, q) plane, g the phase of A[p][q] and R = [[c, s], [−s, c]].
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let g = apq / b;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let w_pp = Complex::new(c, 0.0);
    let w_pq = Complex::new(s, 0.0);
    let w_qp = -g.conj() * s;
    let w_qq = g.conj() * c;

    let n = a.n_rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * w_pp + akq * w_qp;
        a[(k, q)] = akp * w_pq + akq * w_qq;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * w_pp + vkq * w_qp;
        v[(k, q)] = vkp * w_pq + vkq * w_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = w_pp.conj() * apk + w_qp.conj() * aqk;
        a[(q, k)] = w_pq.conj() * apk + w_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex::new(a[(q, q)].re, 0.0);
}

/// Ascending real eigenvalues of a Hermitian matrix.
pub fn hermitian_eig_reference(h: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigh(h).map(|(values, _)| values)
}

/// Descending singular values from the smaller Gram matrix, `M†M` or `MM†`,
/// so there are `min(rows, cols)` of them.
pub fn svd_reference(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let gram = if m.n_rows() >= m.n_cols() {
        m.adjoint().matmul(m)?
    } else {
        m.matmul(&m.adjoint())?
    };
    let mut values: Vec<f64> = hermitian_eig_reference(&gram)?
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    values.reverse();
    Ok(values)
}

/// Descending singular values by one-sided (Hestenes) Jacobi on the columns
/// of `M`. Never forms `M†M`, so a vanishing singular value comes out with
/// absolute error near `ε·‖M‖` rather than `√ε·‖M‖`.
pub fn singular_values_jacobi(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let a = if m.n_rows() >= m.n_cols() {
        m.clone()
    } else {
        m.adjoint()
    };
    let (rows, cols) = (a.n_rows(), a.n_cols());
    let mut columns: Vec<Vec<Complex>> = (0..cols)
        .map(|j| (0..rows).map(|i| a[(i, j)]).collect())
        .collect();
    let tol = f64::EPSILON * rows as f64;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = columns[p].iter().map(Complex::norm_sqr).sum();
                let beta: f64 = columns[q].iter().map(Complex::norm_sqr).sum();
                let gamma: Complex = columns[p]
                    .iter()
                    .zip(&columns[q])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let g = gamma.norm();
                if g <= tol * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..rows {
                    let x = columns[p][i];
                    let y = columns[q][i] * phase.conj();
                    columns[p][i] = x * cs - y * sn;
                    columns[q][i] = x * sn + y * cs;
                }
            }
        }
        if !rotated {
            let mut values: Vec<f64> = columns
                .iter()
                .map(|col| col.iter().map(Complex::norm_sqr).sum::<f64>().sqrt())
                .collect();
            values.sort_by(|x, y| y.total_cmp(x));
            return Ok(values);
        }
    }
    Err(Error::Convergence {
        iterations: JACOBI_MAX_SWEEPS,
        best: Vec::new(),
    })
}
