//! Dense complex matrices and vectors.
//!
//! Everything here is small (at most a few hundred rows) and stored
//! row-major. All operations are pure and allocate their result.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Result};

pub type Complex = Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[Complex]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let diag: Vec<Complex> = diag.iter().map(|&d| Complex::new(d, 0.0)).collect();
        Self::from_diag(&diag)
    }

    /// Builds a matrix from a row-major entry vector.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(shape(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Complex>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(shape(format!(
                "row {bad} has {} entries, expected {cols}",
                rows[bad].len()
            )));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// True when every entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if self.cols != v.dim() {
            return Err(shape(format!(
                "cannot apply {}x{} matrix to vector of dimension {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        let out = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v.entries())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        Ok(ComplexVector(out))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(Complex::norm_sqr).sum::<f64>().sqrt()
    }

    /// `true` iff `max |M[i][j] - conj(M[j][i])| <= tol`.
    pub fn is_hermitian(&self, tol: f64) -> Result<bool> {
        self.require_square("hermiticity test")?;
        Ok(self.hermitian_defect() <= tol)
    }

    pub(crate) fn hermitian_defect(&self) -> f64 {
        let n = self.rows;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> Complex {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `M - shift * I`.
    pub fn shifted(&self, shift: Complex) -> Result<Self> {
        self.require_square("diagonal shift")?;
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] -= shift;
        }
        Ok(out)
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(shape(format!(
                "cannot subtract {}x{} from {}x{}",
                rhs.rows, rhs.cols, self.rows, self.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Largest entrywise modulus of `self - rhs`; shapes must agree.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn require_square(&self, what: &str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(shape(format!(
                "{what} needs a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:>+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexVector(Vec<Complex>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex>) -> Self {
        Self(entries)
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self(entries.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Complex] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Complex> {
        self.0
    }

    /// Conjugate-linear in `self`: `Σ conj(self_i) * other_i`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex> {
        if self.dim() != other.dim() {
            return Err(shape(format!(
                "inner product of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(Complex::norm_sqr).sum::<f64>().sqrt()
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex;

    fn index(&self, i: usize) -> &Complex {
        &self.0[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const I: Complex = Complex::new(0.0, 1.0);

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn random_matrix(rng: &mut impl Rng, n: usize, m: usize) -> ComplexMatrix {
        let data = (0..n * m)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        ComplexMatrix::from_vec(n, m, data).unwrap()
    }

    #[test]
    fn adjoint_examples() {
        let m = ComplexMatrix::from_rows(&[vec![I]]).unwrap();
        assert_eq!(m.adjoint()[(0, 0)], -I);
        assert_eq!(ComplexMatrix::identity(3).adjoint(), ComplexMatrix::identity(3));
        let n = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let t = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(n.adjoint(), t);
        let r = ComplexMatrix::zeros(2, 3).adjoint();
        assert_eq!((r.n_rows(), r.n_cols()), (3, 2));
    }

    #[test]
    fn matmul_examples() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(x.matmul(&x).unwrap(), ComplexMatrix::identity(2));
        let a = ComplexMatrix::from_rows(&[vec![ONE, I], vec![ZERO, ONE]]).unwrap();
        assert_eq!(a.matmul(&ComplexMatrix::identity(2)).unwrap(), a);
        assert_eq!(ComplexMatrix::identity(2).matmul(&a).unwrap(), a);
        assert!(matches!(
            a.matmul(&ComplexMatrix::zeros(3, 1)),
            Err(crate::Error::Shape(_))
        ));
    }

    #[test]
    fn matvec_examples() {
        let v = ComplexVector::from_real(&[1.0, 2.0]);
        assert_eq!(ComplexMatrix::identity(2).matvec(&v).unwrap(), v);
        let d = ComplexMatrix::from_real_diag(&[2.0, 3.0]);
        assert_eq!(
            d.matvec(&ComplexVector::from_real(&[1.0, 1.0])).unwrap(),
            ComplexVector::from_real(&[2.0, 3.0])
        );
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(
            x.matvec(&ComplexVector::from_real(&[1.0, 0.0])).unwrap(),
            ComplexVector::from_real(&[0.0, 1.0])
        );
        assert!(x.matvec(&ComplexVector::from_real(&[1.0])).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let e0 = ComplexVector::from_real(&[1.0, 0.0]);
        let e1 = ComplexVector::from_real(&[0.0, 1.0]);
        let ie0 = ComplexVector::new(vec![I, ZERO]);
        assert_eq!(e0.inner_product(&e0).unwrap(), ONE);
        assert_eq!(ie0.inner_product(&ie0).unwrap(), ONE);
        assert_eq!(e0.inner_product(&e1).unwrap(), ZERO);
        // conjugate-linear on the left
        assert_eq!(ie0.inner_product(&e0).unwrap(), -I);
        assert!(e0.inner_product(&ComplexVector::from_real(&[1.0])).is_err());
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(ComplexMatrix::zeros(3, 3).frobenius_norm(), 0.0);
        assert!((ComplexMatrix::identity(5).frobenius_norm() - 5f64.sqrt()).abs() < 1e-15);
        let m = ComplexMatrix::from_real_rows(&[&[3.0, 4.0]]).unwrap();
        assert_eq!(m.frobenius_norm(), 5.0);
    }

    #[test]
    fn hermitian_examples() {
        let h = ComplexMatrix::from_rows(&[vec![ONE, I], vec![-I, c(2.0, 0.0)]]).unwrap();
        assert!(h.is_hermitian(0.0).unwrap());
        let n = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(!n.is_hermitian(1e-12).unwrap());
        assert!(ComplexMatrix::zeros(2, 3).is_hermitian(1.0).is_err());
    }

    #[test]
    fn associativity_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 3, 3);
            let b = random_matrix(&mut rng, 3, 3);
            let m = random_matrix(&mut rng, 3, 3);
            let left = a.matmul(&b).unwrap().matmul(&m).unwrap();
            let right = a.matmul(&b.matmul(&m).unwrap()).unwrap();
            assert!(left.max_abs_diff(&right) < 1e-12);
        }
    }

    #[test]
    fn gram_matrices_are_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let n = rng.random_range(1..6);
            let m = rng.random_range(1..6);
            let a = random_matrix(&mut rng, n, m);
            let g = a.adjoint().matmul(&a).unwrap();
            assert!(g.is_hermitian(1e-12).unwrap());
        }
    }

    #[test]
    fn kron_of_paulis() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let xx = x.kron(&x);
        assert_eq!(xx[(0, 3)], ONE);
        assert_eq!(xx[(1, 2)], ONE);
        assert_eq!(xx[(0, 0)], ZERO);
    }

    fn arb_entries(len: usize) -> impl Strategy<Value = Vec<Complex>> {
        prop::collection::vec((-1e3..1e3f64, -1e3..1e3f64), len)
            .prop_map(|v| v.into_iter().map(|(a, b)| c(a, b)).collect())
    }

    proptest! {
        #[test]
        fn adjoint_is_an_involution(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(&mut rng, rows, cols).scale(c(rng.random_range(-100.0..100.0), 0.0));
            prop_assert_eq!(m.adjoint().adjoint(), m);
        }

        #[test]
        fn self_inner_product_is_real_nonnegative(v in arb_entries(6)) {
            let v = ComplexVector::new(v);
            let z = v.inner_product(&v).unwrap();
            prop_assert_eq!(z.im, 0.0);
            prop_assert!(z.re >= 0.0);
        }
    }
}
