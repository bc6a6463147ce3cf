//! Per-point data `B_n(s, x)` and `C_n(s, x)`, with the infinite C-series
//! summed lazily and cached.

use alloc::vec::Vec;

use super::coeff::CoeffTables;
use super::Truncation;
use crate::error::{Error, Result};
use crate::logval::{LogSum, SignedLog, TailMonitor};
use crate::specfun::{hermite_log_seq, laguerre_log_seq, ln_factorial};

const LN_2: f64 = core::f64::consts::LN_2;

fn ln_pow(base: f64, expo: f64) -> Result<f64> {
    if expo == 0.0 {
        Ok(0.0)
    } else if base > 0.0 {
        Ok(expo * libm::log(base))
    } else if expo > 0.0 {
        Ok(f64::NEG_INFINITY)
    } else {
        Err(Error::domain("kernel prefactor diverges at x = 0"))
    }
}

fn scaled(v: SignedLog, ln_factor: f64) -> SignedLog {
    if v.is_zero() || ln_factor == f64::NEG_INFINITY {
        SignedLog::ZERO
    } else {
        SignedLog::new(v.log_abs + ln_factor, v.sign)
    }
}

/// Sums `terms[start..]` under the tail rule; error if the cap is reached first.
fn tail_sum(terms: &[SignedLog], start: usize, trunc: &Truncation, what: &'static str) -> Result<(SignedLog, usize)> {
    let mut sum = LogSum::new();
    let mut mon = TailMonitor::new(trunc.tol, trunc.run);
    for term in &terms[start.min(terms.len())..] {
        sum.add(*term);
        if mon.push(*term, &sum) {
            return Ok((sum.get(), mon.terms));
        }
    }
    Err(Error::Truncation { what, terms: mon.terms })
}

#[derive(Debug, Clone)]
enum Family {
    Bm {
        /// `ln of l!/(2l+1)! r^{l+1/2} H_{2l+1}(z)`, the C_{2k} series terms.
        terms: Vec<SignedLog>,
        herm: Vec<SignedLog>,
        ln_c_common: f64,
        ln_r: f64,
    },
    Besq {
        /// `Gamma(j+1)/Gamma(j+1+nu) r^j L_j^nu(z)`.
        w: Vec<SignedLog>,
        ln_c_common: f64,
        a: f64,
    },
}

/// `B_n` for `n < N` and lazily the `C_n` of one space-time point.
#[derive(Debug, Clone)]
pub(crate) struct Column {
    pub b: Vec<SignedLog>,
    c: Vec<SignedLog>,
    family: Family,
    /// Largest number of series terms used so far.
    pub max_terms: usize,
}

impl Column {
    pub fn bm(s: f64, x: f64, sigma2: f64, n: usize, trunc: &Truncation) -> Column {
        let v = sigma2 + 2.0 * s;
        let z = x / libm::sqrt(v);
        let ln_r = libm::log(sigma2 / v);
        let ln_g = libm::log(v / (4.0 * sigma2));
        let e_b = -x * x / (2.0 * (sigma2 + s));
        let herm = hermite_log_seq((2 * trunc.l_max + 1).max(n), z);
        let mut b = Vec::with_capacity(n);
        for m in 0..n {
            let k = m / 2;
            let val = if m % 2 == 0 {
                herm[m]
            } else {
                let mut acc = LogSum::new();
                acc.add(herm[m]);
                if k > 0 {
                    acc.add(-scaled(herm[m - 2], libm::log(4.0 * k as f64 * sigma2 / v)));
                }
                acc.get()
            };
            b.push(scaled(val, 0.5 * m as f64 * ln_g + e_b));
        }
        let terms = (0..=trunc.l_max)
            .map(|l| {
                let lf = l as f64;
                scaled(herm[2 * l + 1], ln_factorial(l) - ln_factorial(2 * l + 1) + (lf + 0.5) * ln_r)
            })
            .collect();
        let ln_c_common = 0.5 * libm::log(sigma2) + 0.5 * ln_r + x * x / (2.0 * (sigma2 + s)) - x * x / v;
        Column { b, c: Vec::new(), family: Family::Bm { terms, herm, ln_c_common, ln_r }, max_terms: 0 }
    }

    pub fn besq(s: f64, x: f64, sigma2: f64, n: usize, tables: &CoeffTables) -> Result<Column> {
        let (nu, kappa) = (tables.nu, tables.kappa);
        let a = nu - 0.5 * kappa;
        let v = sigma2 + 2.0 * s;
        let z = x / v;
        let lag = laguerre_log_seq(tables.l_max.max(n), nu, z)?;
        let ln_grow = libm::log(v / sigma2);
        let ln_b_common = -(nu + 1.0) * LN_2 - libm::lgamma(nu + 1.0) - (kappa + 1.0) * libm::log(sigma2)
            - (nu - kappa) * libm::log(sigma2 + s)
            - x / (2.0 * (sigma2 + s))
            + ln_pow(x, a)?;
        let mut b = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = LogSum::new();
            for j in 0..=k {
                acc.add(scaled(SignedLog::from_f64(tables.alpha[k][j]), j as f64 * ln_grow) * lag[j]);
            }
            b.push(scaled(acc.get(), ln_factorial(k) + ln_b_common));
        }
        let ln_r = libm::log(sigma2 / v);
        let w = (0..=tables.l_max)
            .map(|j| {
                let jf = j as f64;
                scaled(lag[j], libm::lgamma(jf + 1.0) - libm::lgamma(jf + 1.0 + nu) + jf * ln_r)
            })
            .collect();
        let ln_c_common = -(nu - 1.0) * LN_2 - libm::lgamma(nu + 1.0) + libm::log(sigma2)
            + (nu - kappa) * libm::log(sigma2 + s)
            - (nu + 1.0) * libm::log(v)
            + x / (2.0 * (sigma2 + s))
            - x / v
            + ln_pow(x, 0.5 * kappa)?;
        Ok(Column { b, c: Vec::new(), family: Family::Besq { w, ln_c_common, a }, max_terms: 0 })
    }

    /// `C_m`, computing and caching all lower orders first.
    pub fn c(&mut self, m: usize, trunc: &Truncation, tables: Option<&CoeffTables>) -> Result<SignedLog> {
        while self.c.len() <= m {
            let n = self.c.len();
            let (v, used) = self.compute_c(n, trunc, tables)?;
            self.max_terms = self.max_terms.max(used);
            self.c.push(v);
        }
        Ok(self.c[m])
    }

    fn compute_c(&self, n: usize, trunc: &Truncation, tables: Option<&CoeffTables>) -> Result<(SignedLog, usize)> {
        let k = n / 2;
        let kf = k as f64;
        match &self.family {
            Family::Bm { terms, herm, ln_c_common, ln_r } => {
                if n % 2 == 0 {
                    let (sum, used) = tail_sum(terms, k, trunc, "C_2k series")?;
                    let ln_pre = ln_factorial(2 * k) - ln_factorial(k) + (1.0 - 2.0 * kf) * LN_2 + ln_c_common;
                    Ok((scaled(sum, ln_pre), used))
                } else {
                    if 2 * k >= herm.len() {
                        return Err(Error::Truncation { what: "C_2k+1 degree", terms: 2 * k });
                    }
                    let ln_pre = (1.0 - 2.0 * kf) * LN_2 + ln_c_common + kf * ln_r;
                    Ok((-scaled(herm[2 * k], ln_pre), 0))
                }
            }
            Family::Besq { w, ln_c_common, a } => {
                let tables = tables.ok_or_else(|| Error::domain("chiral kernel needs coefficient tables"))?;
                if k >= tables.beta_odd.len() {
                    return Err(Error::Truncation { what: "C series index", terms: tables.l_max });
                }
                let terms: Vec<SignedLog> = if n % 2 == 0 {
                    let row = &tables.beta_odd[k];
                    (0..w.len()).map(|j| if j < 2 * k + 1 { SignedLog::ZERO } else { SignedLog::from_f64(row[j]) * w[j] }).collect()
                } else {
                    (0..w.len())
                        .map(|j| if j < 2 * k { SignedLog::ZERO } else { SignedLog::from_f64(tables.gb[j - 2 * k]) * w[j] })
                        .collect()
                };
                let start = if n % 2 == 0 { 2 * k + 1 } else { 2 * k };
                let (sum, used) = tail_sum(&terms, start, trunc, "chiral C series")?;
                let ln_pre = ln_factorial(n) + libm::lgamma(2.0 * kf + 2.0 * a + 2.0) - ln_factorial(2 * k + 1) + ln_c_common;
                let v = scaled(sum, ln_pre);
                Ok((if n % 2 == 0 { v } else { -v }, used))
            }
        }
    }
}
