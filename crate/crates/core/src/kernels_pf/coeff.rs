use alloc::vec::Vec;

use crate::densities::BesqParams;
use crate::error::{Error, Result};
use crate::specfun::{gen_binom, ln_factorial};

/// `b(m, n)`: zero unless both indices are odd; one for `m > n`; otherwise
/// `prod_{l=0}^{(n-m)/2} (m + 2l + 2nu - kappa) / (m + 2l)`.
pub fn coeff_b(m: usize, n: usize, nu: f64, kappa: f64) -> f64 {
    if m % 2 == 0 || n % 2 == 0 {
        return 0.0;
    }
    if m > n {
        return 1.0;
    }
    let shift = 2.0 * nu - kappa;
    (0..=(n - m) / 2)
        .map(|l| {
            let base = (m + 2 * l) as f64;
            (base + shift) / base
        })
        .product()
}

/// `alpha_{k,j}`, `0 <= j <= k`.
pub fn coeff_alpha(k: usize, j: usize, nu: f64, kappa: f64) -> Result<f64> {
    if j > k {
        return Err(Error::domain("alpha_{k,j} needs j <= k"));
    }
    let (k, j) = (k as i64, j as i64);
    let al = nu - kappa;
    if k % 2 == 0 {
        Ok(gen_binom(k - j, al))
    } else {
        let kf = k as f64;
        Ok((kf + 2.0 * nu - kappa) / kf * gen_binom(k - 2 - j, al) - gen_binom(k - j, al))
    }
}

/// `beta_{j,2k}`, `j >= 2k`.
pub fn coeff_beta_even(j: usize, k: usize, nu: f64, kappa: f64) -> Result<f64> {
    if j < 2 * k {
        return Err(Error::domain("beta_{j,2k} needs j >= 2k"));
    }
    Ok(gen_binom((j - 2 * k) as i64, kappa - nu - 2.0))
}

/// `beta_{j,2k+1}`, `j >= 2k+1`.
pub fn coeff_beta_odd(j: usize, k: usize, nu: f64, kappa: f64) -> Result<f64> {
    if j < 2 * k + 1 {
        return Err(Error::domain("beta_{j,2k+1} needs j >= 2k+1"));
    }
    let al = kappa - nu - 2.0;
    Ok(-(k + 1..=j.div_ceil(2))
        .map(|l| coeff_b(2 * k + 3, 2 * l - 1, nu, kappa) * gen_binom((j + 1 - 2 * l) as i64, al))
        .sum::<f64>())
}

/// `ln d_k(sigma^2) = ln(2 sigma^2 Gamma(k + 1/2) Gamma(k + 1))`.
pub fn ln_d_bm(k: usize, sigma2: f64) -> f64 {
    libm::log(2.0 * sigma2) + libm::lgamma(k as f64 + 0.5) + ln_factorial(k)
}

/// `ln d_k^{(nu,kappa)}(sigma^2)`.
pub fn ln_d_besq(k: usize, sigma2: f64, nu: f64, kappa: f64) -> f64 {
    -2.0 * nu * core::f64::consts::LN_2 - kappa * libm::log(sigma2)
        + ln_factorial(2 * k)
        + libm::lgamma(2.0 * k as f64 + 2.0 + 2.0 * nu - kappa)
        - 2.0 * libm::lgamma(nu + 1.0)
}

/// Memoized coefficient arrays of the chiral kernel, immutable once built.
#[derive(Debug, Clone)]
pub struct CoeffTables {
    pub nu: f64,
    pub kappa: f64,
    /// `alpha[k][j]` for `k < N`.
    pub alpha: Vec<Vec<f64>>,
    /// `gen_binom(n, kappa - nu - 2)`, so `beta_{j,2k} = gb[j - 2k]`.
    pub gb: Vec<f64>,
    /// `beta_odd[k][j] = beta_{j,2k+1}` (zero for `j < 2k+1`).
    pub beta_odd: Vec<Vec<f64>>,
    pub l_max: usize,
}

impl CoeffTables {
    pub fn new(params: &BesqParams, n_particles: usize, l_max: usize) -> Self {
        let (nu, kappa) = (params.nu(), params.kappa());
        let alpha = (0..n_particles.max(1))
            .map(|k| (0..=k).map(|j| coeff_alpha(k, j, nu, kappa).unwrap_or(0.0)).collect())
            .collect();
        let al = kappa - nu - 2.0;
        let gb: Vec<f64> = (0..=l_max as i64 + 1).map(|n| gen_binom(n, al)).collect();
        let mut beta_odd = Vec::with_capacity(l_max / 2 + 1);
        for k in 0..=l_max / 2 {
            // b(2k+3, 2l-1) for l = k+1, k+2, ... by cumulative products.
            let mut bl = Vec::new();
            let m = 2 * k + 3;
            let mut prod = 1.0;
            for l in k + 1..=l_max.div_ceil(2) {
                let n = 2 * l - 1;
                if n >= m {
                    let base = n as f64;
                    prod *= (base + 2.0 * nu - kappa) / base;
                    bl.push(prod);
                } else {
                    bl.push(1.0);
                }
            }
            let mut row = alloc::vec![0.0; l_max + 1];
            for j in 2 * k + 1..=l_max {
                let mut acc = 0.0;
                for l in k + 1..=j.div_ceil(2) {
                    acc += bl[l - k - 1] * gb[j + 1 - 2 * l];
                }
                row[j] = -acc;
            }
            beta_odd.push(row);
        }
        Self { nu, kappa, alpha, gb, beta_odd, l_max }
    }
}
