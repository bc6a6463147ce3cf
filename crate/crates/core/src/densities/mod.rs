//! Transition densities, initial ensemble laws and multitime joint densities.
//!
//! Joint densities are returned as [`SignedLog`]; the finite-duration bridge
//! densities carry the sign of the final Vandermonde product.

mod joint;
mod transition;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::logval::SignedLog;
use crate::matrixcore::{determinant, Matrix};

pub use joint::{
    bridge_constant_bm, bridge_constant_meander, f_besq_det, f_det, f_meander_det, h_plus, h_plus_besq,
    joint_density_besq, joint_density_bm, joint_density_bm_bridge, joint_density_meander_bridge,
};
pub use transition::{
    p_besq, p_besq_z_derivatives, p_bm, p_bm_real, p_bm_z_derivatives, p_meander, p_meander_minus,
};

/// Finite point configuration `sum_j delta_{x_j}`, stored sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    points: Vec<f64>,
}

impl Configuration {
    /// Sorts the input; rejects empty input and NaN.
    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("configuration needs at least one point"));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("configuration points must be finite"));
        }
        points.sort_by(f64::total_cmp);
        Ok(Self { points })
    }

    /// `n * delta_x`.
    pub fn delta(n: usize, x: f64) -> Result<Self> {
        Self::new(alloc::vec![x; n])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distinct points with multiplicities, ascending.
    pub fn support(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &x in &self.points {
            match out.last_mut() {
                Some((y, m)) if *y == x => *m += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }

    /// `xi_j`: the first `j` points.
    pub fn truncate(&self, j: usize) -> Result<Self> {
        if j == 0 || j > self.len() {
            return Err(Error::domain("truncation index out of range"));
        }
        Ok(Self { points: self.points[..j].to_vec() })
    }

    /// `tau_w xi` for real `w`.
    pub fn shift(&self, w: f64) -> Self {
        Self { points: self.points.iter().map(|x| x + w).collect() }
    }

    /// `c o xi`, `c > 0`.
    pub fn dilate(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::domain("dilatation factor must be positive"));
        }
        Ok(Self { points: self.points.iter().map(|x| c * x).collect() })
    }

    /// Membership in the open Weyl chamber `x_1 < ... < x_N`.
    pub fn in_chamber(&self) -> bool {
        self.points.windows(2).all(|w| w[0] < w[1])
    }

    pub fn is_nonnegative(&self) -> bool {
        self.points[0] >= 0.0
    }

    pub fn max_abs(&self) -> f64 {
        self.points.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Parameters `(nu, a)` of the chiral start, with `kappa = 2 (nu - a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesqParams {
    nu: f64,
    a: f64,
}

impl BesqParams {
    /// Requires `nu > -1` and `a` in `(-1, nu]`.
    pub fn new(nu: f64, a: f64) -> Result<Self> {
        if !(nu > -1.0) {
            return Err(Error::domain("BESQ index must satisfy nu > -1"));
        }
        if !(a > -1.0 && a <= nu) {
            return Err(Error::domain("parameter a must lie in (-1, nu]"));
        }
        Ok(Self { nu, a })
    }

    pub fn from_kappa(nu: f64, kappa: f64) -> Result<Self> {
        Self::new(nu, nu - 0.5 * kappa)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn kappa(&self) -> f64 {
        2.0 * (self.nu - self.a)
    }
}

/// `sigma^2 / (sigma^2 + t)`.
pub fn c_shrink(sigma2: f64, t: f64) -> Result<f64> {
    if !(sigma2 > 0.0) || !(t >= 0.0) {
        return Err(Error::domain("c_shrink needs sigma2 > 0 and t >= 0"));
    }
    Ok(sigma2 / (sigma2 + t))
}

/// `h_N(x) = prod_{j<k} (x_k - x_j)`.
pub fn vandermonde(x: &[f64]) -> f64 {
    vandermonde_log(x).value()
}

pub fn vandermonde_log(x: &[f64]) -> SignedLog {
    let mut out = SignedLog::ONE;
    for k in 0..x.len() {
        for j in 0..k {
            out = out * SignedLog::from_f64(x[k] - x[j]);
        }
    }
    out
}

pub fn sgn_vandermonde(x: &[f64]) -> f64 {
    vandermonde_log(x).sign
}

/// `det[x_j^{k-1}]`, the determinant form of [`vandermonde`].
pub fn vandermonde_det(x: &[f64]) -> f64 {
    let n = x.len();
    determinant(&Matrix::from_fn(n, |j, k| libm::pow(x[j], k as f64))).value()
}

/// Chamber check for ordered observation vectors: `Ok(false)` for
/// coincident points (density zero), error when out of order.
pub(crate) fn check_ordered(x: &[f64], nonnegative: bool) -> Result<bool> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("configuration points must be finite"));
    }
    if nonnegative && x.iter().any(|&v| v < 0.0) {
        return Err(Error::domain("points must be nonnegative"));
    }
    let mut strict = true;
    for w in x.windows(2) {
        if w[1] < w[0] {
            return Err(Error::domain("configuration is not in the Weyl chamber"));
        }
        if w[1] == w[0] {
            strict = false;
        }
    }
    Ok(strict)
}

fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln C_N^(beta)`.
pub fn ln_normalizer_beta(n: usize, beta: f64) -> f64 {
    let nf = n as f64;
    let mut s = 0.5 * nf * libm::log(2.0 * core::f64::consts::PI) - ln_gamma(nf + 1.0);
    for j in 1..=n {
        s += ln_gamma(j as f64 * beta / 2.0 + 1.0) - ln_gamma(beta / 2.0 + 1.0);
    }
    s
}

/// `ln C_N^(beta, a)`.
pub fn ln_normalizer_beta_a(n: usize, beta: f64, a: f64) -> f64 {
    let nf = n as f64;
    let mut s = 0.5 * nf * (beta * (nf - 1.0) + 2.0 * (a + 1.0)) * core::f64::consts::LN_2 - ln_gamma(nf + 1.0);
    for j in 1..=n {
        let jb = j as f64 * beta / 2.0;
        s += ln_gamma(jb + 1.0) + ln_gamma(jb + a - beta / 2.0 + 1.0) - ln_gamma(beta / 2.0 + 1.0);
    }
    s
}

fn check_beta(beta: f64, sigma2: f64) -> Result<()> {
    if !(beta >= 1.0) {
        return Err(Error::domain("beta must be at least 1"));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::domain("sigma2 must be positive"));
    }
    Ok(())
}

/// Density of the Gaussian-type ensemble on the chamber `x_1 < ... < x_N`.
pub fn mu_beta(beta: f64, sigma2: f64, x: &[f64]) -> Result<f64> {
    Ok(mu_beta_log(beta, sigma2, x)?.value())
}

pub fn mu_beta_log(beta: f64, sigma2: f64, x: &[f64]) -> Result<SignedLog> {
    check_beta(beta, sigma2)?;
    if x.is_empty() {
        return Err(Error::domain("empty configuration"));
    }
    if !check_ordered(x, false)? {
        return Ok(SignedLog::ZERO);
    }
    let n = x.len() as f64;
    let sq: f64 = x.iter().map(|v| v * v).sum();
    let ln = -0.25 * n * (beta * (n - 1.0) + 2.0) * libm::log(sigma2) - ln_normalizer_beta(x.len(), beta)
        - sq / (2.0 * sigma2)
        + beta * vandermonde_log(x).log_abs;
    Ok(SignedLog::positive(ln))
}

/// Density of the chiral (Laguerre-type) ensemble on `0 <= x_1 < ... < x_N`.
pub fn mu_beta_a(beta: f64, a: f64, sigma2: f64, x: &[f64]) -> Result<f64> {
    Ok(mu_beta_a_log(beta, a, sigma2, x)?.value())
}

pub fn mu_beta_a_log(beta: f64, a: f64, sigma2: f64, x: &[f64]) -> Result<SignedLog> {
    check_beta(beta, sigma2)?;
    if !(a > -1.0) {
        return Err(Error::domain("a must exceed -1"));
    }
    if x.is_empty() {
        return Err(Error::domain("empty configuration"));
    }
    if !check_ordered(x, true)? {
        return Ok(SignedLog::ZERO);
    }
    let n = x.len() as f64;
    let mut ln = -0.5 * n * (beta * (n - 1.0) + 2.0 * (a + 1.0)) * libm::log(sigma2)
        - ln_normalizer_beta_a(x.len(), beta, a)
        + beta * vandermonde_log(x).log_abs;
    for &v in x {
        if v == 0.0 {
            if a > 0.0 {
                return Ok(SignedLog::ZERO);
            } else if a < 0.0 {
                return Ok(SignedLog::positive(f64::INFINITY));
            }
        } else {
            ln += a * libm::log(v);
        }
        ln -= v / (2.0 * sigma2);
    }
    Ok(SignedLog::positive(ln))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configuration_ops() {
        let c = Configuration::new(alloc::vec![1.0, -1.0, 1.0]).unwrap();
        assert_eq!(c.points(), &[-1.0, 1.0, 1.0]);
        assert_eq!(c.support(), alloc::vec![(-1.0, 1), (1.0, 2)]);
        assert_eq!(c.truncate(2).unwrap().points(), &[-1.0, 1.0]);
        assert_eq!(c.shift(2.0).points(), &[1.0, 3.0, 3.0]);
        assert_eq!(c.dilate(0.5).unwrap().points(), &[-0.5, 0.5, 0.5]);
        assert!(!c.in_chamber());
        assert!(Configuration::new(alloc::vec![]).is_err());
    }

    #[test]
    fn besq_params() {
        let p = BesqParams::new(1.0, 0.0).unwrap();
        assert_eq!(p.kappa(), 2.0);
        assert!(BesqParams::new(1.0, 1.5).is_err());
        assert!(BesqParams::new(-1.0, -1.0).is_err());
        assert_eq!(BesqParams::from_kappa(0.5, 0.0).unwrap().a(), 0.5);
    }

    #[test]
    fn shrink_examples() {
        assert_eq!(c_shrink(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(c_shrink(1.0, 1.0).unwrap(), 0.5);
        let s2 = 1.7;
        assert!(s2 * c_shrink(s2, 0.3).unwrap() > s2 * c_shrink(s2, 0.9).unwrap());
    }

    #[test]
    fn vandermonde_examples() {
        assert_eq!(vandermonde(&[0.0, 1.0, 2.0]), 2.0);
        assert_eq!(vandermonde(&[0.3, 1.0, 0.3]), 0.0);
        assert_eq!(sgn_vandermonde(&[0.0, 1.0, 5.0]), 1.0);
        let x = [-0.7, 0.2, 1.1, 2.5];
        assert!((vandermonde(&x) - vandermonde_det(&x)).abs() < 1e-12);
    }

    #[test]
    fn gue_single_particle_is_gaussian() {
        let s2 = 2.0;
        let x = 0.8;
        let expect = libm::exp(-x * x / (2.0 * s2)) / libm::sqrt(2.0 * core::f64::consts::PI * s2);
        assert!((mu_beta(2.0, s2, &[x]).unwrap() - expect).abs() < 1e-15);
        assert!((mu_beta(1.0, s2, &[x]).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn chiral_single_particle() {
        let (a, s2, x) = (0.5, 1.5, 2.0);
        let expect = libm::pow(x, a) * libm::exp(-x / (2.0 * s2)) / (libm::pow(2.0 * s2, a + 1.0) * libm::tgamma(a + 1.0));
        assert!((mu_beta_a(1.0, a, s2, &[x]).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn ensemble_domain_checks() {
        assert!(mu_beta(1.0, 1.0, &[1.0, 0.0]).is_err());
        assert_eq!(mu_beta(1.0, 1.0, &[0.5, 0.5]).unwrap(), 0.0);
        assert!(mu_beta_a(1.0, 0.0, 1.0, &[-0.1, 1.0]).is_err());
        assert!(mu_beta(0.5, 1.0, &[0.0]).is_err());
    }
}
