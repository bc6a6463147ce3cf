use alloc::vec::Vec;
use num_complex::Complex64;

use super::{ComplexMatrix, HermitianMatrix};
use crate::error::{Error, Result};

pub const MAX_JACOBI_ORDER: usize = 64;
pub const MAX_SWEEPS: usize = 100;
const OFF_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: Option<ComplexMatrix>,
    /// `max |(V^H V - I)_ij|`; zero when vectors were not accumulated.
    pub orthonormality_residual: f64,
    pub sweeps: usize,
}

/// Eigenvalues and eigenvectors by cyclic complex Jacobi rotations.
pub fn eig_sym(m: &HermitianMatrix) -> Result<SymEigen> {
    jacobi(m, true)
}

/// Eigenvalues only (ascending); same iteration without accumulating vectors.
pub fn eigenvalues_sym(m: &HermitianMatrix) -> Result<Vec<f64>> {
    jacobi(m, false).map(|e| e.values)
}

fn jacobi(m: &HermitianMatrix, want_vectors: bool) -> Result<SymEigen> {
    let n = m.order();
    if n > MAX_JACOBI_ORDER {
        return Err(Error::Size { order: n, cap: MAX_JACOBI_ORDER });
    }
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut a: Vec<Complex64> = (0..n * n).map(|k| m.get(k / n, k % n)).collect();
    let mut v: Vec<Complex64> = if want_vectors {
        (0..n * n).map(|k| if k / n == k % n { one } else { zero }).collect()
    } else {
        Vec::new()
    };
    let norm = m.frobenius_norm();
    let mut sweeps = 0;
    loop {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[i * n + j].norm_sqr();
                }
            }
        }
        if libm::sqrt(off) <= OFF_TOL * norm {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let b = apq.norm();
                if b < 1e-300 {
                    continue;
                }
                // Phase-rotate index q so that a_pq becomes real and positive.
                let w = apq / b;
                let wc = w.conj();
                for i in 0..n {
                    a[i * n + q] *= wc;
                }
                for j in 0..n {
                    a[q * n + j] *= w;
                }
                if want_vectors {
                    for i in 0..n {
                        v[i * n + q] *= wc;
                    }
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                for i in 0..n {
                    let xp = a[i * n + p];
                    let xq = a[i * n + q];
                    a[i * n + p] = xp * c - xq * s;
                    a[i * n + q] = xp * s + xq * c;
                }
                for j in 0..n {
                    let xp = a[p * n + j];
                    let xq = a[q * n + j];
                    a[p * n + j] = xp * c - xq * s;
                    a[q * n + j] = xp * s + xq * c;
                }
                a[p * n + q] = zero;
                a[q * n + p] = zero;
                a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);
                if want_vectors {
                    for i in 0..n {
                        let xp = v[i * n + p];
                        let xq = v[i * n + q];
                        v[i * n + p] = xp * c - xq * s;
                        v[i * n + q] = xp * s + xq * c;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let (vectors, residual) = if want_vectors {
        let vm = ComplexMatrix::from_fn(n, |i, j| v[i * n + order[j]]);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut s = zero;
                for k in 0..n {
                    s += vm.get(k, i).conj() * vm.get(k, j);
                }
                let target = if i == j { one } else { zero };
                worst = worst.max((s - target).norm());
            }
        }
        (Some(vm), worst)
    } else {
        (None, 0.0)
    };
    Ok(SymEigen { values, vectors, orthonormality_residual: residual, sweeps })
}
