use alloc::vec::Vec;
use num_complex::Complex64;

use super::{ComplexMatrix, Matrix};
use crate::logval::SignedLog;

/// `log|det M|` and sign by LU with partial pivoting; singular gives sign 0.
pub fn determinant(m: &Matrix) -> SignedLog {
    let n = m.order();
    let mut a: Vec<f64> = m.as_slice().to_vec();
    let mut log_abs = 0.0;
    let mut sign = 1.0;
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if a[i * n + k].abs() > a[p * n + k].abs() {
                p = i;
            }
        }
        let pivot = a[p * n + k];
        if pivot == 0.0 {
            return SignedLog::ZERO;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        log_abs += libm::log(pivot.abs());
        if pivot < 0.0 {
            sign = -sign;
        }
        for i in k + 1..n {
            let f = a[i * n + k] / pivot;
            if f != 0.0 {
                for j in k + 1..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
    }
    SignedLog::new(log_abs, sign)
}

/// Determinant of a complex matrix as `exp(log_abs) * phase`, `|phase| = 1`
/// (phase 0 when singular).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexDeterminant {
    pub log_abs: f64,
    pub phase: Complex64,
}

impl ComplexDeterminant {
    pub fn value(&self) -> Complex64 {
        if self.phase == Complex64::new(0.0, 0.0) {
            return self.phase;
        }
        self.phase * libm::exp(self.log_abs)
    }
}

pub fn determinant_complex(m: &ComplexMatrix) -> ComplexDeterminant {
    let n = m.order();
    let mut a: Vec<Complex64> = m.as_slice().to_vec();
    let mut log_abs = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if a[i * n + k].norm() > a[p * n + k].norm() {
                p = i;
            }
        }
        let pivot = a[p * n + k];
        let r = pivot.norm();
        if r == 0.0 {
            return ComplexDeterminant { log_abs: f64::NEG_INFINITY, phase: Complex64::new(0.0, 0.0) };
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            phase = -phase;
        }
        log_abs += libm::log(r);
        phase *= pivot / r;
        for i in k + 1..n {
            let f = a[i * n + k] / pivot;
            for j in k + 1..n {
                let t = a[k * n + j];
                a[i * n + j] -= f * t;
            }
        }
    }
    ComplexDeterminant { log_abs, phase }
}
