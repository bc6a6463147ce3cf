//! Hermite and Laguerre polynomials, Gamma, modified Bessel `I_nu` and the
//! generalized binomial coefficient.
//!
//! Polynomials are evaluated by their three-term recurrences. The `*_log_seq`
//! variants return whole sequences in [`SignedLog`] form and rescale while
//! recurring, which the kernel series need for degrees in the hundreds.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::logval::SignedLog;

const LN_2: f64 = core::f64::consts::LN_2;
const RESCALE_AT: f64 = 1e250;

/// Physicists' Hermite polynomial `H_n(x)`.
///
/// Overflows to infinity for extreme `n`, `x`; use [`hermite_log_seq`] there.
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_0(x), ..., H_{n_max}(x)` as signed logarithms.
///
/// Recurs on `H_n / sqrt(2^n n!)`, which stays within a factor of
/// `exp(x^2/2)` of one, and rescales when that factor gets large.
pub fn hermite_log_seq(n_max: usize, x: f64) -> Vec<SignedLog> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut scale = 0.0;
    let mut prev = 0.0;
    let mut cur = 1.0;
    for n in 0..=n_max {
        if n > 0 {
            let nf = n as f64;
            let next = libm::sqrt(2.0 / nf) * x * cur - libm::sqrt((nf - 1.0) / nf) * prev;
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE_AT {
                cur /= RESCALE_AT;
                prev /= RESCALE_AT;
                scale += libm::log(RESCALE_AT);
            }
        }
        let norm = 0.5 * (n as f64 * LN_2 + ln_factorial(n));
        let v = SignedLog::from_f64(cur);
        out.push(SignedLog::new(v.log_abs + scale + norm, v.sign));
    }
    out
}

/// Probabilists' Hermite `He_0(u), ..., He_{m_max}(u)`.
pub fn hermite_prob_seq(m_max: usize, u: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(m_max + 1);
    out.push(1.0);
    if m_max >= 1 {
        out.push(u);
    }
    for m in 1..m_max {
        let next = u * out[m] - m as f64 * out[m - 1];
        out.push(next);
    }
    out
}

fn check_laguerre_index(nu: f64) -> Result<()> {
    if nu.is_nan() || nu <= -1.0 {
        return Err(Error::domain("Laguerre index must satisfy nu > -1"));
    }
    Ok(())
}

/// Generalized Laguerre polynomial `L_n^nu(x)`.
pub fn laguerre(n: usize, nu: f64, x: f64) -> Result<f64> {
    check_laguerre_index(nu)?;
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 1.0 + nu - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + nu - x) * cur - (kf + nu) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `L_0^nu(x), ..., L_{n_max}^nu(x)` as signed logarithms, rescaled while recurring.
pub fn laguerre_log_seq(n_max: usize, nu: f64, x: f64) -> Result<Vec<SignedLog>> {
    check_laguerre_index(nu)?;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut scale = 0.0;
    let mut prev = 0.0;
    let mut cur = 1.0;
    for n in 0..=n_max {
        if n == 1 {
            prev = cur;
            cur = 1.0 + nu - x;
        } else if n > 1 {
            let k = (n - 1) as f64;
            let next = ((2.0 * k + 1.0 + nu - x) * cur - (k + nu) * prev) / (k + 1.0);
            prev = cur;
            cur = next;
        }
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            prev /= RESCALE_AT;
            scale += libm::log(RESCALE_AT);
        }
        let v = SignedLog::from_f64(cur);
        out.push(SignedLog::new(v.log_abs + scale, v.sign));
    }
    Ok(out)
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == libm::round(x)
}

/// `ln Gamma(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("log_gamma requires a positive argument"));
    }
    Ok(libm::lgamma(x))
}

/// `Gamma(x)`; poles at the nonpositive integers are errors.
pub fn gamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    let g = libm::tgamma(x);
    if g.is_infinite() {
        return Err(Error::Overflow("Gamma function beyond the f64 range".into()));
    }
    Ok(g)
}

/// `Gamma(x)` as a signed logarithm, valid off the poles for any real `x`.
pub fn gamma_signed_log(x: f64) -> Result<SignedLog> {
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    let (lg, sign) = libm::lgamma_r(x);
    Ok(SignedLog::new(lg, sign as f64))
}

/// `ln n!`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// Crossover between the power series and the large-argument expansion of `I_nu`.
pub fn bessel_crossover(nu: f64) -> f64 {
    15.0 + nu
}

/// Modified Bessel function of the first kind `I_nu(x)`, `x >= 0`, `nu > -1`.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    let scaled = bessel_i_scaled(nu, x)?;
    if x > 709.0 {
        let v = libm::exp(libm::log(scaled) + x);
        if v.is_infinite() {
            return Err(Error::Overflow("I_nu(x) beyond the f64 range".into()));
        }
        return Ok(v);
    }
    Ok(scaled * libm::exp(x))
}

/// `exp(-x) I_nu(x)`, finite for every `x >= 0`.
pub fn bessel_i_scaled(nu: f64, x: f64) -> Result<f64> {
    if nu.is_nan() || nu <= -1.0 {
        return Err(Error::domain("bessel_i requires nu > -1"));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain("bessel_i requires x >= 0"));
    }
    if x == 0.0 && nu < 0.0 {
        return Err(Error::Overflow("I_nu(0) diverges for nu < 0".into()));
    }
    if x <= bessel_crossover(nu) {
        Ok(bessel_i_series_log(nu, x).map(|l| libm::exp(l - x)).unwrap_or(0.0))
    } else {
        Ok(bessel_i_asymptotic_scaled(nu, x))
    }
}

/// `ln I_nu(x)` from the ascending series; `None` when the value is zero.
pub(crate) fn bessel_i_series_log(nu: f64, x: f64) -> Option<f64> {
    if x == 0.0 {
        return if nu == 0.0 { Some(0.0) } else { None };
    }
    let half = 0.5 * x;
    let q = half * half;
    let lead = nu * libm::log(half) - libm::lgamma(nu + 1.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= q / (n * (n + nu));
        sum += term;
        if term < 1e-17 * sum && n > libm::sqrt(q) {
            break;
        }
        if n > 10_000.0 {
            break;
        }
    }
    Some(lead + libm::log(sum))
}

/// Hankel large-argument expansion of `exp(-x) I_nu(x)`, summed to its smallest term.
pub(crate) fn bessel_i_asymptotic_scaled(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * k * x);
        if next.abs() >= term.abs() || next == 0.0 {
            break;
        }
        sum += next;
        term = next;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        k += 1.0;
    }
    sum / libm::sqrt(2.0 * core::f64::consts::PI * x)
}

fn near_integer(v: f64) -> Option<i64> {
    let r = libm::round(v);
    if (v - r).abs() <= 1e-12 * r.abs().max(1.0) {
        Some(r as i64)
    } else {
        None
    }
}

/// Generalized binomial `(n + alpha choose n)` with integer `n` and real `alpha`.
///
/// Both nonzero cases reduce to `prod_{i=1}^n (alpha + i) / i`, which is how
/// they are evaluated; reals within 1e-12 of an integer count as integers.
pub fn gen_binom(n: i64, alpha: f64) -> f64 {
    gen_binom_signed_log(n, alpha).value()
}

/// [`gen_binom`] as a signed logarithm.
pub fn gen_binom_signed_log(n: i64, alpha: f64) -> SignedLog {
    if n == 0 {
        return SignedLog::ONE;
    }
    if n < 0 {
        return SignedLog::ZERO;
    }
    let alpha_int = near_integer(alpha);
    if let Some(a) = alpha_int {
        if a < 0 && n + a >= 0 {
            return SignedLog::ZERO;
        }
    }
    // Remaining cases: alpha not a negative integer, or n + alpha a negative integer.
    let alpha = alpha_int.map(|a| a as f64).unwrap_or(alpha);
    let mut log_abs = 0.0;
    let mut sign = 1.0;
    for i in 1..=n {
        let f = alpha + i as f64;
        if f < 0.0 {
            sign = -sign;
        }
        log_abs += libm::log(f.abs()) - libm::log(i as f64);
    }
    SignedLog::new(log_abs, sign)
}
