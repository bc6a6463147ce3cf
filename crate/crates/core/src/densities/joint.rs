use alloc::vec::Vec;

use super::transition::{p_besq, p_besq_z_derivatives, p_bm_real, p_bm_z_derivatives, p_meander};
use super::{check_ordered, vandermonde_log, Configuration};
use crate::error::{Error, Result};
use crate::logval::SignedLog;
use crate::matrixcore::{determinant, Matrix};
use crate::specfun::ln_factorial;

fn check_pair(t: f64, y: &[f64], x: &[f64]) -> Result<()> {
    if y.len() != x.len() || y.is_empty() {
        return Err(Error::domain("configurations must have equal positive cardinality"));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain("elapsed time must be positive"));
    }
    Ok(())
}

fn det_of(n: usize, mut entry: impl FnMut(usize, usize) -> Result<f64>) -> Result<SignedLog> {
    let mut data = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            data.push(entry(j, k)?);
        }
    }
    Ok(determinant(&Matrix::from_vec(n, data)?))
}

/// `det[p(t, y_j | x_k)]` for Brownian motion.
pub fn f_det(t: f64, y: &[f64], x: &[f64]) -> Result<SignedLog> {
    check_pair(t, y, x)?;
    det_of(y.len(), |j, k| Ok(p_bm_real(t, y[j], x[k])))
}

/// `det[p^(nu)(t, y_j | x_k)]`.
pub fn f_besq_det(nu: f64, t: f64, y: &[f64], x: &[f64]) -> Result<SignedLog> {
    check_pair(t, y, x)?;
    det_of(y.len(), |j, k| p_besq(nu, t, y[j], x[k]))
}

/// `det[p^(nu,kappa)(t, y_j | x_k)]`.
pub fn f_meander_det(nu: f64, kappa: f64, t: f64, y: &[f64], x: &[f64]) -> Result<SignedLog> {
    check_pair(t, y, x)?;
    det_of(y.len(), |j, k| p_meander(nu, kappa, t, y[j], x[k]))
}

/// Newton divided differences `g[x_1], g[x_1, x_2], ..., g[x_1..x_N]` on sorted
/// nodes; a repeated node uses `g^{(m)}(x) / m!`. `derivs(x, m)` returns
/// `g, g', ..., g^{(m)}` at `x`.
fn divided_differences(nodes: &[f64], mut derivs: impl FnMut(f64, usize) -> Result<Vec<f64>>) -> Result<Vec<f64>> {
    let n = nodes.len();
    // Taylor coefficients g^{(m)}/m! at each node, up to its multiplicity.
    let mut taylor: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let mut mult = 1;
        while i + mult < n && nodes[i + mult] == nodes[i] {
            mult += 1;
        }
        let d = derivs(nodes[i], mult - 1)?;
        let coeffs: Vec<f64> = d.iter().enumerate().map(|(m, v)| v / libm::exp(ln_factorial(m))).collect();
        for _ in 0..mult {
            taylor.push(coeffs.clone());
        }
        i += mult;
    }
    // Column m holds g[x_i..x_{i+m}] for all valid i.
    let mut col: Vec<f64> = taylor.iter().map(|c| c[0]).collect();
    let mut out = Vec::with_capacity(n);
    out.push(col[0]);
    for m in 1..n {
        let next: Vec<f64> = (0..n - m)
            .map(|i| {
                if nodes[i + m] == nodes[i] {
                    taylor[i][m]
                } else {
                    (col[i + 1] - col[i]) / (nodes[i + m] - nodes[i])
                }
            })
            .collect();
        out.push(next[0]);
        col = next;
    }
    Ok(out)
}

fn h_plus_generic(
    y: &[f64],
    xi: &Configuration,
    mut derivs: impl FnMut(f64, f64, usize) -> Result<Vec<f64>>,
) -> Result<SignedLog> {
    let n = xi.len();
    if y.len() != n {
        return Err(Error::domain("configurations must have equal cardinality"));
    }
    let nodes = xi.points();
    let mut data = alloc::vec![0.0; n * n];
    for (k, &yk) in y.iter().enumerate() {
        let dd = divided_differences(nodes, |z, m| derivs(yk, z, m))?;
        for j in 0..n {
            data[j * n + k] = dd[j];
        }
    }
    Ok(determinant(&Matrix::from_vec(n, data)?))
}

/// `h_N^(+)(t, y; xi)`: determinant of the divided differences of
/// `z -> p(t, y_k | z)` on the truncations `xi_j`.
pub fn h_plus(t: f64, y: &[f64], xi: &Configuration) -> Result<SignedLog> {
    if !(t > 0.0) {
        return Err(Error::domain("h_plus needs t > 0"));
    }
    h_plus_generic(y, xi, |yk, z, m| Ok(p_bm_z_derivatives(t, yk, z, m)))
}

/// `h_N^(nu,+)(t, y; xi)` for nonnegative `xi`.
pub fn h_plus_besq(nu: f64, t: f64, y: &[f64], xi: &Configuration) -> Result<SignedLog> {
    if !xi.is_nonnegative() {
        return Err(Error::domain("initial configuration must be nonnegative"));
    }
    h_plus_generic(y, xi, |yk, z, m| p_besq_z_derivatives(nu, t, yk, z, m))
}

fn check_path(times: &[f64], configs: &[Vec<f64>], n: usize, nonnegative: bool) -> Result<bool> {
    if times.is_empty() || times.len() != configs.len() {
        return Err(Error::domain("need one configuration per observation time"));
    }
    if !(times[0] > 0.0) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("observation times must be positive and strictly increasing"));
    }
    let mut strict = true;
    for c in configs {
        if c.len() != n {
            return Err(Error::domain("all configurations must have N points"));
        }
        strict &= check_ordered(c, nonnegative)?;
    }
    Ok(strict)
}

/// Multitime density of noncolliding BM started from `xi` at times
/// `0 < t_1 < ... < t_M`.
pub fn joint_density_bm(xi: &Configuration, times: &[f64], configs: &[Vec<f64>]) -> Result<SignedLog> {
    if !check_path(times, configs, xi.len(), false)? {
        return Ok(SignedLog::ZERO);
    }
    let m = times.len();
    let mut out = vandermonde_log(&configs[m - 1]) * h_plus(times[0], &configs[0], xi)?;
    for i in 0..m - 1 {
        out = out * f_det(times[i + 1] - times[i], &configs[i + 1], &configs[i])?;
    }
    Ok(out)
}

/// Multitime density of noncolliding BESQ^(nu) started from `xi`.
pub fn joint_density_besq(nu: f64, xi: &Configuration, times: &[f64], configs: &[Vec<f64>]) -> Result<SignedLog> {
    if !check_path(times, configs, xi.len(), true)? {
        return Ok(SignedLog::ZERO);
    }
    let m = times.len();
    let mut out = vandermonde_log(&configs[m - 1]) * h_plus_besq(nu, times[0], &configs[0], xi)?;
    for i in 0..m - 1 {
        out = out * f_besq_det(nu, times[i + 1] - times[i], &configs[i + 1], &configs[i])?;
    }
    Ok(out)
}

/// `ln C_{N,T}(t)`.
pub fn bridge_constant_bm(n: usize, big_t: f64, t: f64) -> f64 {
    let nf = n as f64;
    let mut s = 0.5 * nf * libm::log(core::f64::consts::PI) + 0.25 * nf * (nf - 1.0) * libm::log(big_t)
        - 0.5 * nf * (nf - 1.0) * libm::log(t);
    for j in 1..=n {
        s -= libm::lgamma(j as f64 / 2.0);
    }
    s
}

/// `ln C^{(nu,kappa)}_{N,T}(t)`.
pub fn bridge_constant_meander(n: usize, nu: f64, kappa: f64, big_t: f64, t: f64) -> f64 {
    let nf = n as f64;
    let mut s = 0.5 * (nf + kappa - 1.0) * nf * libm::log(big_t) - (nf - 1.0) * nf * libm::log(t)
        - 0.5 * nf * (nf - kappa - 1.0) * core::f64::consts::LN_2;
    let half_ln_pi = 0.5 * libm::log(core::f64::consts::PI);
    for j in 1..=n {
        let jf = j as f64;
        s += libm::lgamma(nu + 1.0) + half_ln_pi - libm::lgamma(jf / 2.0) - libm::lgamma((jf + 1.0 + 2.0 * nu - kappa) / 2.0);
    }
    s
}

/// Shared shape of the finite-duration densities started from `N delta_0`;
/// `times` ends with the duration `T`.
fn bridge_density(
    times: &[f64],
    configs: &[Vec<f64>],
    nonnegative: bool,
    ln_const: impl FnOnce(usize, f64, f64) -> f64,
    mut step: impl FnMut(f64, &[f64], &[f64]) -> Result<SignedLog>,
    mut from_zero: impl FnMut(f64, f64) -> Result<f64>,
) -> Result<SignedLog> {
    if times.len() < 2 {
        return Err(Error::domain("need at least one observation time before the duration T"));
    }
    let n = configs.first().map_or(0, Vec::len);
    if n == 0 {
        return Err(Error::domain("empty configuration"));
    }
    if !check_path(times, configs, n, nonnegative)? {
        return Ok(SignedLog::ZERO);
    }
    let m = times.len() - 1;
    let t1 = times[0];
    let mut out = SignedLog::new(ln_const(n, times[m], t1), vandermonde_log(&configs[m]).sign);
    for i in 0..m {
        out = out * step(times[i + 1] - times[i], &configs[i + 1], &configs[i])?;
    }
    out = out * vandermonde_log(&configs[0]);
    for &x in &configs[0] {
        out = out * SignedLog::from_f64(from_zero(t1, x)?);
    }
    Ok(out)
}

/// Density of noncolliding BM with duration `T = times.last()` from `N delta_0`.
pub fn joint_density_bm_bridge(times: &[f64], configs: &[Vec<f64>]) -> Result<SignedLog> {
    bridge_density(
        times,
        configs,
        false,
        bridge_constant_bm,
        f_det,
        |t, x| Ok(p_bm_real(t, x, 0.0)),
    )
}

/// Density of the noncolliding squared generalized meander with duration
/// `T = times.last()` from `N delta_0`.
pub fn joint_density_meander_bridge(nu: f64, kappa: f64, times: &[f64], configs: &[Vec<f64>]) -> Result<SignedLog> {
    bridge_density(
        times,
        configs,
        true,
        |n, big_t, t| bridge_constant_meander(n, nu, kappa, big_t, t),
        |dt, y, x| f_meander_det(nu, kappa, dt, y, x),
        |t, x| p_meander(nu, kappa, t, x, 0.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::vandermonde;
    use alloc::vec;

    #[test]
    fn single_particle_reductions() {
        let xi = Configuration::new(vec![0.4]).unwrap();
        let d = joint_density_bm(&xi, &[0.8], &[vec![1.1]]).unwrap();
        assert!((d.value() - p_bm_real(0.8, 1.1, 0.4)).abs() < 1e-15);
        let d = f_det(0.3, &[0.2], &[0.5]).unwrap();
        assert!((d.value() - p_bm_real(0.3, 0.2, 0.5)).abs() < 1e-15);
        let xi = Configuration::new(vec![0.7]).unwrap();
        let d = joint_density_besq(1.5, &xi, &[0.6], &[vec![2.0]]).unwrap();
        assert!((d.value() - p_besq(1.5, 0.6, 2.0, 0.7).unwrap()).abs() < 1e-15);
        // N = 1 bridge: C_{1,T} = 1 and h_1 = 1.
        let d = joint_density_bm_bridge(&[0.3, 1.0], &[vec![0.2], vec![-0.4]]).unwrap();
        let expect = p_bm_real(0.7, -0.4, 0.2) * p_bm_real(0.3, 0.2, 0.0);
        assert!((d.value() - expect).abs() < 1e-15);
        assert!(bridge_constant_bm(1, 2.0, 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_by_hand() {
        let (t, y, x) = (0.6, [-0.3, 0.9], [-1.0, 0.5]);
        let p = |a: f64, b: f64| p_bm_real(t, a, b);
        let expect = p(y[0], x[0]) * p(y[1], x[1]) - p(y[0], x[1]) * p(y[1], x[0]);
        assert!((f_det(t, &y, &x).unwrap().value() - expect).abs() < 1e-15);
    }

    #[test]
    fn h_plus_distinct_is_ratio() {
        let xi = Configuration::new(vec![-0.8, 0.1, 1.3]).unwrap();
        let y = [-0.5, 0.4, 2.0];
        let t = 0.9;
        let h = h_plus(t, &y, &xi).unwrap().value();
        let expect = f_det(t, &y, xi.points()).unwrap().value() / vandermonde(xi.points());
        assert!((h - expect).abs() < 1e-12 * expect.abs());
    }

    #[test]
    fn h_plus_double_point_uses_derivative() {
        let xi = Configuration::delta(2, 0.0).unwrap();
        let y = [-0.4, 0.7];
        let t = 0.5;
        let h = 1e-5;
        let dp = |yk: f64| (p_bm_real(t, yk, h) - p_bm_real(t, yk, -h)) / (2.0 * h);
        let expect = p_bm_real(t, y[0], 0.0) * dp(y[1]) - p_bm_real(t, y[1], 0.0) * dp(y[0]);
        let v = h_plus(t, &y, &xi).unwrap().value();
        assert!((v - expect).abs() < 1e-8, "{v} vs {expect}");
    }

    #[test]
    fn h_plus_besq_distinct_is_ratio() {
        let xi = Configuration::new(vec![0.3, 1.7]).unwrap();
        let y = [0.5, 2.5];
        let (nu, t) = (0.5, 0.8);
        let h = h_plus_besq(nu, t, &y, &xi).unwrap().value();
        let expect = f_besq_det(nu, t, &y, xi.points()).unwrap().value() / vandermonde(xi.points());
        assert!((h - expect).abs() < 1e-10 * expect.abs());
    }

    #[test]
    fn meander_constant_at_one_particle() {
        let (nu, kappa, big_t) = (1.3, 0.8, 2.0);
        let expect = 0.5 * kappa * libm::log(2.0 * big_t) + libm::lgamma(nu + 1.0) - libm::lgamma(nu + 1.0 - kappa / 2.0);
        assert!((bridge_constant_meander(1, nu, kappa, big_t, 0.7) - expect).abs() < 1e-13);
    }

    #[test]
    fn coincident_points_give_zero_and_disorder_errors() {
        let xi = Configuration::new(vec![-1.0, 1.0]).unwrap();
        assert!(joint_density_bm(&xi, &[1.0], &[vec![0.5, 0.5]]).unwrap().is_zero());
        assert!(joint_density_bm(&xi, &[1.0], &[vec![0.5, 0.1]]).is_err());
        assert!(joint_density_bm(&xi, &[1.0, 0.5], &[vec![0.0, 1.0], vec![0.0, 1.0]]).is_err());
    }
}
