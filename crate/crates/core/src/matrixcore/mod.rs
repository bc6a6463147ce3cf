//! Dense linear algebra at desk scale: Pfaffians, determinants and a cyclic
//! Jacobi eigensolver for Hermitian matrices.

mod det;
mod eigen;
mod pfaffian;

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use det::{determinant, determinant_complex, ComplexDeterminant};
pub use eigen::{eig_sym, eigenvalues_sym, SymEigen, MAX_JACOBI_ORDER, MAX_SWEEPS};
pub use pfaffian::{pfaffian, pfaffian_naive, NAIVE_MAX_ORDER};

/// Square matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy> SquareMatrix<T> {
    pub fn from_vec(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::domain("square matrix data has the wrong length"));
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

pub type Matrix = SquareMatrix<f64>;
pub type ComplexMatrix = SquareMatrix<Complex64>;

impl Matrix {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let n = self.n;
        Matrix::from_fn(n, |i, j| (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self.get(j, i))
    }
}

/// Absolute tolerance of the skew-symmetry check in [`SkewMatrix::new`].
pub const SKEW_TOL: f64 = 1e-12;

/// Real skew-symmetric matrix of even order.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    inner: Matrix,
}

impl SkewMatrix {
    /// Checks `|a_jk + a_kj| <= 1e-12`, then stores `(A - A^T) / 2`.
    pub fn new(m: Matrix) -> Result<Self> {
        let n = m.order();
        if n == 0 || n % 2 != 0 {
            return Err(Error::domain("skew matrix order must be even and positive"));
        }
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((m.get(i, j) + m.get(j, i)).abs());
            }
        }
        if !(worst <= SKEW_TOL) {
            return Err(Error::NotSkew(worst));
        }
        let inner = Matrix::from_fn(n, |i, j| 0.5 * (m.get(i, j) - m.get(j, i)));
        Ok(Self { inner })
    }

    /// Builds from the strict upper triangle; the rest follows by skew reflection.
    pub fn from_upper(n: usize, mut upper: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::domain("skew matrix order must be even and positive"));
        }
        let mut m = Matrix::from_fn(n, |_, _| 0.0);
        for i in 0..n {
            for j in i + 1..n {
                let v = upper(i, j);
                m.set(i, j, v);
                m.set(j, i, -v);
            }
        }
        Ok(Self { inner: m })
    }

    pub fn order(&self) -> usize {
        self.inner.order()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner.get(i, j)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.inner
    }

    /// `B A B^T`, again skew.
    pub fn congruence(&self, b: &Matrix) -> Result<SkewMatrix> {
        let m = b.mul(&self.inner).mul(&b.transpose());
        let n = m.order();
        Ok(SkewMatrix { inner: Matrix::from_fn(n, |i, j| 0.5 * (m.get(i, j) - m.get(j, i))) })
    }
}

/// Tolerance of the conjugate-symmetry check in [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let n = m.order();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((m.get(i, j) - m.get(j, i).conj()).norm());
            }
        }
        if !(worst <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian(worst));
        }
        let inner = ComplexMatrix::from_fn(n, |i, j| (m.get(i, j) + m.get(j, i).conj()) * 0.5);
        Ok(Self { inner })
    }

    pub fn from_real_symmetric(m: &Matrix) -> Result<Self> {
        Self::new(ComplexMatrix::from_fn(m.order(), |i, j| Complex64::new(m.get(i, j), 0.0)))
    }

    /// Trusted constructor for matrices built Hermitian by design.
    pub(crate) fn from_upper_unchecked(n: usize, mut upper: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = ComplexMatrix::from_fn(n, |_, _| Complex64::new(0.0, 0.0));
        for i in 0..n {
            m.set(i, i, Complex64::new(upper(i, i).re, 0.0));
            for j in i + 1..n {
                let v = upper(i, j);
                m.set(i, j, v);
                m.set(j, i, v.conj());
            }
        }
        Self { inner: m }
    }

    pub fn order(&self) -> usize {
        self.inner.order()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner.get(i, j)
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.inner.as_slice().iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn trace(&self) -> f64 {
        (0..self.order()).map(|i| self.get(i, i).re).sum()
    }
}
