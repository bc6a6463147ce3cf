//! Signed numbers stored as `sign * exp(log_abs)`.
//!
//! Kernel coefficients mix factorials, Gamma ratios and Gaussian factors
//! whose individual sizes leave the f64 range long before their products do.

use core::ops::{Mul, Neg};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub log_abs: f64,
    /// One of -1, 0, +1.
    pub sign: f64,
}

impl SignedLog {
    pub const ZERO: Self = Self { log_abs: f64::NEG_INFINITY, sign: 0.0 };
    pub const ONE: Self = Self { log_abs: 0.0, sign: 1.0 };

    pub fn new(log_abs: f64, sign: f64) -> Self {
        if sign == 0.0 || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self { log_abs, sign: sign.signum() }
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self { log_abs: libm::log(v.abs()), sign: v.signum() }
        }
    }

    /// `exp(log_abs)` only.
    pub fn positive(log_abs: f64) -> Self {
        Self::new(log_abs, 1.0)
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0.0
    }

    /// Converts to f64; may overflow to infinity or underflow to zero.
    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * libm::exp(self.log_abs)
        }
    }

    pub fn recip(self) -> Self {
        if self.sign == 0.0 {
            Self { log_abs: f64::INFINITY, sign: f64::NAN }
        } else {
            Self { log_abs: -self.log_abs, sign: self.sign }
        }
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        let sign = if n % 2 == 0 { self.sign.abs() } else { self.sign };
        Self::new(self.log_abs * n as f64, sign)
    }
}

impl Mul for SignedLog {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.log_abs + rhs.log_abs, self.sign * rhs.sign)
    }
}

impl Neg for SignedLog {
    type Output = Self;
    fn neg(self) -> Self {
        Self { log_abs: self.log_abs, sign: -self.sign }
    }
}

/// Running sum of [`SignedLog`] terms kept relative to a moving reference
/// exponent, so that terms far outside the f64 range can still be added.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    reference: f64,
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    const RESCALE: f64 = 600.0;

    pub fn new() -> Self {
        Self { reference: f64::NEG_INFINITY, scaled: 0.0 }
    }

    pub fn add(&mut self, term: SignedLog) {
        if term.is_zero() {
            return;
        }
        if self.reference == f64::NEG_INFINITY {
            self.reference = term.log_abs;
            self.scaled = term.sign;
            return;
        }
        let shift = term.log_abs - self.reference;
        if shift > Self::RESCALE {
            self.scaled *= libm::exp(-shift);
            self.reference = term.log_abs;
            self.scaled += term.sign;
        } else {
            self.scaled += term.sign * libm::exp(shift);
        }
    }

    pub fn add_f64(&mut self, v: f64) {
        self.add(SignedLog::from_f64(v));
    }

    pub fn get(&self) -> SignedLog {
        if self.scaled == 0.0 || self.reference == f64::NEG_INFINITY {
            SignedLog::ZERO
        } else {
            SignedLog::new(self.reference + libm::log(self.scaled.abs()), self.scaled.signum())
        }
    }

    /// `log|partial sum|`, `-inf` when the sum is zero.
    pub fn log_abs(&self) -> f64 {
        self.get().log_abs
    }
}

/// Stopping rule for slowly starting infinite series: stop after `run`
/// consecutive terms each below `tol` times the larger of the partial-sum
/// magnitude and the largest term seen so far.
#[derive(Debug, Clone, Copy)]
pub struct TailMonitor {
    log_tol: f64,
    run: usize,
    small: usize,
    max_term: f64,
    pub terms: usize,
}

impl TailMonitor {
    pub fn new(tol: f64, run: usize) -> Self {
        Self { log_tol: libm::log(tol), run, small: 0, max_term: f64::NEG_INFINITY, terms: 0 }
    }

    /// Records `term` (already added to `sum`); returns true once converged.
    pub fn push(&mut self, term: SignedLog, sum: &LogSum) -> bool {
        self.terms += 1;
        let reference = sum.log_abs().max(self.max_term);
        if term.log_abs > self.max_term {
            self.max_term = term.log_abs;
        }
        let small = term.is_zero() || (reference.is_finite() && term.log_abs <= reference + self.log_tol);
        if small {
            self.small += 1;
        } else {
            self.small = 0;
        }
        self.small >= self.run
    }
}
