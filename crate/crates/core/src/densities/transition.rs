use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::logval::{LogSum, SignedLog};
use crate::specfun::{bessel_crossover, bessel_i_scaled, hermite_prob_seq};

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// Extended Gaussian kernel `(2 pi |t|)^{-1/2} exp(-(x - y)^2 / 2t)` at complex
/// arguments; `t = 0` (the delta case) is rejected.
pub fn p_bm(t: f64, y: Complex64, x: Complex64) -> Result<Complex64> {
    if t == 0.0 || !t.is_finite() {
        return Err(Error::domain("p_bm needs a finite nonzero time"));
    }
    let d = x - y;
    Ok((-(d * d) / (2.0 * t)).exp() / libm::sqrt(TWO_PI * t.abs()))
}

/// [`p_bm`] restricted to real arguments.
pub fn p_bm_real(t: f64, y: f64, x: f64) -> f64 {
    let d = x - y;
    libm::exp(-d * d / (2.0 * t)) / libm::sqrt(TWO_PI * t.abs())
}

/// `d^m/dz^m p(t, y | z)` at `z = x` for `m = 0..=m_max`, `t > 0`.
pub fn p_bm_z_derivatives(t: f64, y: f64, x: f64, m_max: usize) -> Vec<f64> {
    let st = libm::sqrt(t);
    let base = p_bm_real(t, y, x);
    let he = hermite_prob_seq(m_max, (y - x) / st);
    let mut scale = 1.0;
    he.iter()
        .map(|h| {
            let v = base * scale * h;
            scale /= st;
            v
        })
        .collect()
}

/// `base^expo` as a logarithm with the conventions `0^0 = 1`, `0^{>0} = 0`, `0^{<0} = inf`.
fn ln_pow(base: f64, expo: f64) -> f64 {
    if expo == 0.0 {
        0.0
    } else if base == 0.0 {
        if expo > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        expo * libm::log(base)
    }
}

/// `sum_n w^n / (n! Gamma(n + nu + 1))` in log form.
fn ln_bessel_series(nu: f64, w: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0.0;
    if w > 0.0 {
        loop {
            n += 1.0;
            term *= w / (n * (n + nu));
            sum += term;
            if (term < 1e-17 * sum && n * n > w) || n > 20_000.0 {
                break;
            }
        }
    }
    libm::log(sum) - libm::lgamma(nu + 1.0)
}

fn check_besq(nu: f64, t: f64, y: f64, x: f64) -> Result<()> {
    if !(nu > -1.0) {
        return Err(Error::domain("BESQ index must satisfy nu > -1"));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain("BESQ transition density needs t > 0"));
    }
    if !(x >= 0.0) || !(y >= 0.0) {
        return Err(Error::domain("BESQ arguments must be nonnegative"));
    }
    Ok(())
}

/// `ln p^{(nu,kappa)}(t, y | x)`, shared by [`p_besq`] (`kappa = 0`) and [`p_meander`].
fn ln_p_meander(nu: f64, kappa: f64, t: f64, y: f64, x: f64) -> f64 {
    let a = nu - 0.5 * kappa;
    let two_t = 2.0 * t;
    if x == 0.0 {
        return ln_pow(y, a) - y / two_t - (nu + 1.0) * libm::log(two_t) - libm::lgamma(nu + 1.0);
    }
    let w = libm::sqrt(x * y) / t;
    if w <= bessel_crossover(nu) {
        // (1/2t) y^a x^{kappa/2} (2t)^{-nu} e^{-(x+y)/2t} sum_n (xy/4t^2)^n / (n! Gamma(n+nu+1))
        ln_pow(y, a) + ln_pow(x, 0.5 * kappa) - (nu + 1.0) * libm::log(two_t) - (x + y) / two_t
            + ln_bessel_series(nu, x * y / (two_t * two_t))
    } else {
        let d = libm::sqrt(x) - libm::sqrt(y);
        let scaled = bessel_i_scaled(nu, w).unwrap_or(0.0);
        -libm::log(two_t) + 0.5 * (nu - kappa) * (libm::log(y) - libm::log(x)) - d * d / two_t + libm::log(scaled)
    }
}

/// BESQ^(nu) transition density `p^(nu)(t, y | x)` for `t > 0`, `x, y >= 0`.
///
/// Negative elapsed times only occur inside the contour kernel for the
/// squared Bessel case, which is not implemented, so `t <= 0` is rejected.
pub fn p_besq(nu: f64, t: f64, y: f64, x: f64) -> Result<f64> {
    check_besq(nu, t, y, x)?;
    Ok(libm::exp(ln_p_meander(nu, 0.0, t, y, x)))
}

/// `p^{(nu,kappa)}(t, y | x)`; equals [`p_besq`] when `kappa = 0`.
pub fn p_meander(nu: f64, kappa: f64, t: f64, y: f64, x: f64) -> Result<f64> {
    check_besq(nu, t, y, x)?;
    if !(kappa >= 0.0 && kappa < 2.0 * (nu + 1.0)) {
        return Err(Error::domain("kappa must lie in [0, 2(nu+1))"));
    }
    Ok(libm::exp(ln_p_meander(nu, kappa, t, y, x)))
}

/// Backward term `p_-^{(nu,kappa)}(s, x; t, y; sigma^2)` for `s > t`.
pub fn p_meander_minus(nu: f64, kappa: f64, s: f64, t: f64, x: f64, y: f64, sigma2: f64) -> Result<f64> {
    if !(s > t) || !(t >= 0.0) {
        return Err(Error::domain("p_meander_minus needs s > t >= 0"));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::domain("sigma2 must be positive"));
    }
    let dt = s - t;
    let core = p_meander(nu, kappa, dt, y, x)?;
    let (ss, st) = (sigma2 + s, sigma2 + t);
    let pre = if x > 0.0 {
        libm::pow(ss / st, nu - kappa) * libm::exp(x / (2.0 * ss) - y / (2.0 * st))
    } else {
        libm::pow(st / sigma2, -(nu - kappa)) * libm::pow(ss / sigma2, kappa) * libm::exp(-y / (2.0 * st))
    };
    Ok(pre * core)
}

/// `d^m/dz^m p^(nu)(t, y | z)` at `z = x >= 0` for `m = 0..=m_max`.
///
/// Uses `p = (1/2t)(y/2t)^nu e^{-(z+y)/2t} S(z)` with the entire series
/// `S(z) = sum_n (y z / 4t^2)^n / (n! Gamma(n+nu+1))`.
pub fn p_besq_z_derivatives(nu: f64, t: f64, y: f64, x: f64, m_max: usize) -> Result<Vec<f64>> {
    check_besq(nu, t, y, x)?;
    let two_t = 2.0 * t;
    let q = y / (two_t * two_t);
    let ln_pre = -libm::log(two_t) + ln_pow(y / two_t, nu) - (x + y) / two_t;
    // ln S^{(i)}(x), all terms positive.
    let mut ln_s = Vec::with_capacity(m_max + 1);
    for i in 0..=m_max {
        if q == 0.0 {
            ln_s.push(if i == 0 { -libm::lgamma(nu + 1.0) } else { f64::NEG_INFINITY });
            continue;
        }
        let mut sum = LogSum::new();
        let mut ln_term = i as f64 * libm::log(q) - libm::lgamma(i as f64 + nu + 1.0);
        let mut n = i;
        loop {
            sum.add(SignedLog::positive(ln_term));
            if x == 0.0 {
                break;
            }
            let nf = n as f64;
            ln_term += libm::log(q * x) - libm::log((nf + 1.0 + nu) * (nf + 1.0 - i as f64));
            n += 1;
            if ln_term < sum.log_abs() - 40.0 && (nf + 1.0) * (nf + 1.0) > q * x {
                break;
            }
            if n > i + 50_000 {
                break;
            }
        }
        ln_s.push(sum.log_abs());
    }
    let mut out = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let mut acc = LogSum::new();
        let mut binom = 0.0;
        for i in 0..=m {
            if i > 0 {
                binom += libm::log((m - i + 1) as f64) - libm::log(i as f64);
            }
            let k = (m - i) as f64;
            let sign = if (m - i) % 2 == 0 { 1.0 } else { -1.0 };
            acc.add(SignedLog::new(binom - k * libm::log(two_t) + ln_s[i], sign));
        }
        let v = acc.get();
        out.push(SignedLog::new(v.log_abs + ln_pre, v.sign).value());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn bm_examples() {
        let v = p_bm(1.0, c(0.0), c(0.0)).unwrap();
        assert!((v.re - 0.398_942_280_401_432_7).abs() < 1e-15);
        let v = p_bm(-1.0, c(0.0), c(1.0)).unwrap();
        assert!((v.re - libm::exp(0.5) / libm::sqrt(TWO_PI)).abs() < 1e-15 && v.im == 0.0);
        let v = p_bm(2.0, c(1.0), c(1.0)).unwrap();
        assert!((v.re - 1.0 / libm::sqrt(4.0 * core::f64::consts::PI)).abs() < 1e-15);
        assert!(p_bm(0.0, c(0.0), c(0.0)).is_err());
    }

    #[test]
    fn besq_examples() {
        assert!((p_besq(0.0, 1.0, 0.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(p_besq(1.0, 0.5, 0.0, 0.0).unwrap(), 0.0);
        let expect = 0.5 * libm::exp(-1.0) * 1.266_065_877_752_008_4;
        assert!((p_besq(0.0, 1.0, 1.0, 1.0).unwrap() - expect).abs() < 1e-15);
        assert!(p_besq(0.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn besq_branches_agree() {
        // Below and above the Bessel crossover the two evaluation routes must agree.
        let nu = 1.5;
        let t = 0.5;
        for &(x, y) in &[(10.0, 18.0), (20.0, 15.0), (3.0, 300.0)] {
            let w = libm::sqrt(x * y) / t;
            let direct = 1.0 / (2.0 * t) * libm::pow(y / x, nu / 2.0) * libm::exp(-(x + y) / (2.0 * t) + w)
                * bessel_i_scaled(nu, w).unwrap();
            let v = p_besq(nu, t, y, x).unwrap();
            assert!((v - direct).abs() <= 1e-12 * direct, "{x} {y}: {v} vs {direct}");
        }
    }

    #[test]
    fn meander_examples() {
        assert_eq!(p_meander(1.0, 0.0, 1.0, 2.0, 3.0).unwrap(), p_besq(1.0, 1.0, 2.0, 3.0).unwrap());
        assert!((p_meander(0.0, 0.0, 1.0, 0.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        let expect = libm::exp(-0.5) / 4.0;
        assert!((p_meander(1.0, 1.0, 1.0, 1.0, 0.0).unwrap() - expect).abs() < 1e-15);
        assert!(p_meander(1.0, 4.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn meander_minus_examples() {
        let (nu, s, t, x, y, s2) = (1.0, 1.2, 0.4, 0.7, 1.9, 1.3);
        let expect = libm::pow((s2 + s) / (s2 + t), nu) * libm::exp(x / (2.0 * (s2 + s)) - y / (2.0 * (s2 + t)))
            * p_besq(nu, s - t, y, x).unwrap();
        assert!((p_meander_minus(nu, 0.0, s, t, x, y, s2).unwrap() - expect).abs() < 1e-15);
        assert_eq!(p_meander_minus(1.0, 0.5, 1.0, 0.5, 0.0, 0.0, 1.0).unwrap(), 0.0);
        assert!(p_meander_minus(1.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0).is_err());
        // With nu = kappa = 0 the x = 0 branch is the limit of the x > 0 branch.
        let near = p_meander_minus(0.0, 0.0, 1.5, 0.5, 1e-9, 0.8, 1.0).unwrap();
        let at = p_meander_minus(0.0, 0.0, 1.5, 0.5, 0.0, 0.8, 1.0).unwrap();
        assert!((near - at).abs() < 1e-6 * at);
    }

    #[test]
    fn bm_derivatives_match_finite_differences() {
        let (t, y, x) = (0.7, 0.4, -0.3);
        let d = p_bm_z_derivatives(t, y, x, 3);
        let h = 1e-4;
        let f = |z: f64| p_bm_real(t, y, z);
        let fd1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let fd2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        assert!((d[1] - fd1).abs() < 1e-8);
        assert!((d[2] - fd2).abs() < 1e-6);
    }

    #[test]
    fn besq_derivatives_match_finite_differences() {
        let (nu, t, y) = (0.5, 0.8, 1.3);
        for &x in &[0.6, 25.0] {
            let d = p_besq_z_derivatives(nu, t, y, x, 2).unwrap();
            let f = |z: f64| p_besq(nu, t, y, z).unwrap();
            assert!((d[0] - f(x)).abs() < 1e-13 * f(x).max(1e-300));
            let h = 1e-4;
            let fd1 = (f(x + h) - f(x - h)) / (2.0 * h);
            let fd2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            assert!((d[1] - fd1).abs() < 1e-7 * (1.0 + fd1.abs()), "{} vs {}", d[1], fd1);
            assert!((d[2] - fd2).abs() < 1e-5 * (1.0 + fd2.abs()));
        }
        // At z = 0 the first derivative is one-sided; compare with a forward difference.
        let d = p_besq_z_derivatives(nu, t, y, 0.0, 1).unwrap();
        let f = |z: f64| p_besq(nu, t, y, z).unwrap();
        let h = 1e-6;
        let fwd = (-3.0 * f(0.0) + 4.0 * f(h) - f(2.0 * h)) / (2.0 * h);
        assert!((d[1] - fwd).abs() < 1e-6);
    }
}
