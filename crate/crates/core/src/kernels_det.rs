//! Determinantal kernel of noncolliding Brownian motion started from a fixed
//! configuration, as a double integral: an inner contour integral around the
//! initial points (evaluated by residues) and an outer integral along the
//! imaginary axis.
//!
//! The residue sum over `supp xi` equals the Hermite interpolation polynomial
//! of `z -> p(s, x | z)` on the nodes of `xi`, evaluated at `iu`. The outer
//! integrand is therefore regular at `u = 0` and the excluded band may be
//! taken as small as desired (the default is no band at all). The same fact
//! gives the exact evaluation `int (iu)^m p(-t, iu | y) du = t^{m/2} He_m(y / sqrt t)`,
//! available as [`OuterMethod::Moments`].

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::densities::{p_bm, p_bm_real, p_bm_z_derivatives, Configuration};
use crate::error::{Error, Result};
use crate::logval::SignedLog;
use crate::matrixcore::{determinant, Matrix};
use crate::mc_sim::{path_rng, sample_initial, EnsembleKind, EnsembleSpec};
use crate::quad::GaussLegendre;
use crate::specfun::{hermite_prob_seq, ln_factorial};
use crate::SpaceTimePoint;

/// How the outer `u`-integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterMethod {
    /// Gauss-Legendre panels on `[epsilon, U]`, using `f(-u) = conj f(u)`.
    Quadrature,
    /// Exact Gaussian moments of the interpolation polynomial.
    Moments,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetKernelParams {
    /// Outer cutoff; `None` picks `max(10 sqrt t, 10 sqrt s, sqrt(y^2 + 100 t)) + max|xi|`.
    pub u_cutoff: Option<f64>,
    /// Multiplies the cutoff.
    pub u_scale: f64,
    pub nodes_per_panel: usize,
    /// Multiplies the default panel width `min(sqrt t / 2, pi t / (|y| + 1))`.
    pub panel_scale: f64,
    /// Half-width of the excluded band around `u = 0`.
    pub epsilon: f64,
    /// Base radius of the circles around multiple poles; `None` picks it from `s` and the pole spacing.
    pub radius: Option<f64>,
    pub circle_nodes: usize,
    /// Absolute bound on the estimated truncated tail of the outer integral.
    pub tail_tol: f64,
    pub method: OuterMethod,
}

impl Default for DetKernelParams {
    fn default() -> Self {
        Self {
            u_cutoff: None,
            u_scale: 1.0,
            nodes_per_panel: 16,
            panel_scale: 1.0,
            epsilon: 0.0,
            radius: None,
            circle_nodes: 64,
            tail_tol: 1e-12,
            method: OuterMethod::Quadrature,
        }
    }
}

impl DetKernelParams {
    /// Twice the node density, twice the cutoff, half the band.
    pub fn refined(&self) -> Self {
        Self { u_scale: 2.0 * self.u_scale, panel_scale: self.panel_scale / 2.0, epsilon: self.epsilon / 2.0, ..*self }
    }
}

/// Initial configuration of the determinantal process.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialConfig {
    Atoms(Configuration),
    /// `N delta_0`, the extended Hermite kernel.
    Delta0(usize),
}

impl InitialConfig {
    fn support(&self) -> Result<Vec<(f64, usize)>> {
        match self {
            InitialConfig::Atoms(c) => Ok(c.support()),
            InitialConfig::Delta0(n) if *n > 0 => Ok(alloc::vec![(0.0, *n)]),
            InitialConfig::Delta0(_) => Err(Error::domain("N must be positive")),
        }
    }
}

/// `Pi_xi(z) = prod_{x in xi} (1 - z / x)`; `0` must not be in `supp xi`.
pub fn weierstrass(xi: &Configuration, z: Complex64) -> Result<Complex64> {
    let mut out = Complex64::new(1.0, 0.0);
    for &x in xi.points() {
        if x == 0.0 {
            return Err(Error::domain("the genus-0 product needs nonzero roots"));
        }
        out *= Complex64::new(1.0, 0.0) - z / x;
    }
    Ok(out)
}

/// Residue sum of `p(s,x|z) Pi_{tau_{-z} xi}(w - z) / (w - z)` over `supp xi`.
struct ResidueSum<'a> {
    support: &'a [(f64, usize)],
    s: f64,
    x: f64,
    radii: Vec<f64>,
    /// `p(s, x | c)` at each support point.
    at_poles: Vec<Complex64>,
    circle_nodes: usize,
}

impl<'a> ResidueSum<'a> {
    fn new(support: &'a [(f64, usize)], s: f64, x: f64, params: &DetKernelParams) -> Result<Self> {
        let mut separation = f64::INFINITY;
        for w in support.windows(2) {
            separation = separation.min(w[1].0 - w[0].0);
        }
        let base = match params.radius {
            Some(r) => {
                if !(r > 0.0) || r >= 0.2 * separation {
                    return Err(Error::domain("circle radius must be positive and below 0.2 of the pole spacing"));
                }
                r
            }
            None => (0.5 * libm::sqrt(s).min(1.0)).min(0.2 * separation),
        };
        let at_poles = support.iter().map(|&(c, _)| Complex64::new(p_bm_real(s, x, c), 0.0)).collect();
        Ok(Self { support, s, x, radii: alloc::vec![base; support.len()], at_poles, circle_nodes: params.circle_nodes })
    }

    fn p(&self, z: Complex64) -> Complex64 {
        // p(s, x | z); the time is positive so this cannot fail.
        p_bm(self.s, Complex64::new(self.x, 0.0), z).unwrap_or_default()
    }

    fn eval(&self, w: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let num = self.support.iter().fold(one, |acc, &(c, m)| acc * (Complex64::new(c, 0.0) - w).powu(m as u32));
        let mut total = Complex64::new(0.0, 0.0);
        for (idx, &(c, m)) in self.support.iter().enumerate() {
            if m == 1 {
                let mut den = w - c;
                for &(d, md) in self.support {
                    if d != c {
                        den *= Complex64::new(d - c, 0.0).powu(md as u32);
                    }
                }
                total -= self.at_poles[idx] * num / den;
            } else {
                total += self.circle(idx, c, w, num);
            }
        }
        total
    }

    /// Contour integral over a circle around `c` by the trapezoid rule, with
    /// the radius chosen so `w` stays well away from the contour.
    fn circle(&self, idx: usize, c: f64, w: Complex64, num: Complex64) -> Complex64 {
        let base = self.radii[idx];
        let d = (w - c).norm();
        // Keep r within [base / 2, 2 base] and w at least a factor 2 off the contour.
        let (r, inside) = if d >= 2.0 * base {
            (base, false)
        } else if d <= 0.5 * base {
            (base, true)
        } else if d <= base {
            (2.0 * d, true)
        } else {
            (0.5 * d, false)
        };
        let m = self.circle_nodes;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..m {
            let theta = 2.0 * core::f64::consts::PI * (k as f64 + 0.5) / m as f64;
            let e = Complex64::from_polar(r, theta);
            let z = Complex64::new(c, 0.0) + e;
            let mut den = w - z;
            for &(d, md) in self.support {
                den *= (Complex64::new(d, 0.0) - z).powu(md as u32);
            }
            acc += self.p(z) * num / den * e;
        }
        let integral = acc / m as f64;
        if inside {
            // The circle also encloses z = w, whose residue is -p(s, x | w).
            integral + self.p(w)
        } else {
            integral
        }
    }
}

fn check_times(s: f64, t: f64) -> Result<()> {
    if !(s > 0.0 && t > 0.0) || !s.is_finite() || !t.is_finite() {
        return Err(Error::domain("kernel times must be positive"));
    }
    Ok(())
}

/// Coefficients of the Newton-form interpolation polynomial of `p(s, x | .)`
/// on the nodes of `support`, converted to the monomial basis.
fn interpolation_monomials(support: &[(f64, usize)], s: f64, x: f64) -> Vec<f64> {
    let nodes: Vec<f64> = support.iter().flat_map(|&(c, m)| core::iter::repeat(c).take(m)).collect();
    let n = nodes.len();
    let mut taylor: Vec<Vec<f64>> = Vec::with_capacity(n);
    for &(c, m) in support {
        let d = p_bm_z_derivatives(s, x, c, m - 1);
        let coeffs: Vec<f64> = d.iter().enumerate().map(|(j, v)| v / libm::exp(ln_factorial(j))).collect();
        for _ in 0..m {
            taylor.push(coeffs.clone());
        }
    }
    let mut col: Vec<f64> = taylor.iter().map(|c| c[0]).collect();
    let mut newton = alloc::vec![col[0]];
    for m in 1..n {
        let next: Vec<f64> = (0..n - m)
            .map(|i| if nodes[i + m] == nodes[i] { taylor[i][m] } else { (col[i + 1] - col[i]) / (nodes[i + m] - nodes[i]) })
            .collect();
        newton.push(next[0]);
        col = next;
    }
    // sum_j newton[j] prod_{k<j} (w - x_k)
    let mut poly = alloc::vec![0.0; n];
    let mut basis = alloc::vec![1.0];
    for j in 0..n {
        for (i, b) in basis.iter().enumerate() {
            poly[i] += newton[j] * b;
        }
        if j + 1 < n {
            let mut next = alloc::vec![0.0; basis.len() + 1];
            for (i, b) in basis.iter().enumerate() {
                next[i + 1] += b;
                next[i] -= nodes[j] * b;
            }
            basis = next;
        }
    }
    poly
}

fn kernel_from_support(support: &[(f64, usize)], s: f64, x: f64, t: f64, y: f64, params: &DetKernelParams) -> Result<f64> {
    check_times(s, t)?;
    let main = match params.method {
        OuterMethod::Moments => {
            let poly = interpolation_monomials(support, s, x);
            let sq = libm::sqrt(t);
            let he = hermite_prob_seq(poly.len(), y / sq);
            let mut acc = 0.0;
            let mut scale = 1.0;
            for (m, c) in poly.iter().enumerate() {
                acc += c * scale * he[m];
                scale *= sq;
            }
            acc
        }
        OuterMethod::Quadrature => outer_quadrature(support, s, x, t, y, params)?,
    };
    let back = if s > t { p_bm_real(s - t, x, y) } else { 0.0 };
    Ok(main - back)
}

fn outer_quadrature(support: &[(f64, usize)], s: f64, x: f64, t: f64, y: f64, params: &DetKernelParams) -> Result<f64> {
    let res = ResidueSum::new(support, s, x, params)?;
    let max_xi = support.iter().fold(0.0f64, |m, &(c, _)| m.max(c.abs()));
    let u_max = params.u_scale
        * params.u_cutoff.unwrap_or_else(|| {
            (10.0 * libm::sqrt(t)).max(10.0 * libm::sqrt(s)).max(libm::sqrt(y * y + 100.0 * t)) + max_xi
        });
    let lo = params.epsilon;
    if !(u_max > lo) || !(params.panel_scale > 0.0) || params.nodes_per_panel == 0 || params.circle_nodes == 0 {
        return Err(Error::domain("invalid outer quadrature parameters"));
    }
    let width = (0.5 * libm::sqrt(t)).min(core::f64::consts::PI * t / (y.abs() + 1.0)) * params.panel_scale;
    let panels = libm::ceil((u_max - lo) / width).max(1.0) as usize;
    let gl = GaussLegendre::new(params.nodes_per_panel);
    let f = |u: f64| {
        let w = Complex64::new(0.0, u);
        let q = p_bm(-t, w, Complex64::new(y, 0.0)).unwrap_or_default();
        2.0 * (res.eval(w) * q).re
    };
    let value = gl.integrate_panels(lo, u_max, panels, f);
    // Gaussian tail beyond U: |f(U)| t / U bounds the remainder.
    let w = Complex64::new(0.0, u_max);
    let edge = 2.0 * (res.eval(w) * p_bm(-t, w, Complex64::new(y, 0.0)).unwrap_or_default()).norm();
    let tail = edge * t / u_max;
    if tail > params.tail_tol {
        return Err(Error::Quadrature { tail, tol: params.tail_tol });
    }
    Ok(value)
}

/// Kernel `K^xi(s, x; t, y)` for an atomic initial configuration.
pub fn kernel_bm(xi: &Configuration, s: f64, x: f64, t: f64, y: f64, params: &DetKernelParams) -> Result<f64> {
    kernel_from_support(&xi.support(), s, x, t, y, params)
}

/// Kernel for `N delta_0` via the order-`N` pole at the origin.
pub fn kernel_bm_delta0(n: usize, s: f64, x: f64, t: f64, y: f64, params: &DetKernelParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("N must be positive"));
    }
    kernel_from_support(&[(0.0, n)], s, x, t, y, params)
}

/// `det[K(t_m, x_j; t_n, x_k)]` over all listed points.
pub fn correlation_det(init: &InitialConfig, points: &[SpaceTimePoint], params: &DetKernelParams) -> Result<SignedLog> {
    let support = init.support()?;
    let n = points.len();
    if n == 0 {
        return Err(Error::domain("need at least one point"));
    }
    let mut data = Vec::with_capacity(n * n);
    for p in points {
        for q in points {
            data.push(kernel_from_support(&support, p.t, p.x, q.t, q.x, params)?);
        }
    }
    Ok(determinant(&Matrix::from_vec(n, data)?))
}

/// Outcome of [`check_shift_identity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftReport {
    /// Determinant of the `N delta_0` kernel at times shifted by `sigma^2`.
    pub shifted: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub samples: usize,
    /// `|mc_mean - shifted| <= 3 mc_stderr` (or both exactly equal).
    pub pass: bool,
}

/// Averages `det K^xi` over `xi` drawn from the GUE-type law and compares with
/// the `N delta_0` kernel at shifted times.
///
/// The Monte Carlo side evaluates each sampled kernel with the exact moment
/// method; the shifted side uses `params` as given.
pub fn check_shift_identity(
    n: usize,
    sigma2: f64,
    points: &[SpaceTimePoint],
    samples: usize,
    seed: u64,
    params: &DetKernelParams,
) -> Result<ShiftReport> {
    if samples < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    let shifted_pts: Vec<SpaceTimePoint> = points.iter().map(|p| SpaceTimePoint::new(p.t + sigma2, p.x)).collect();
    let shifted = correlation_det(&InitialConfig::Delta0(n), &shifted_pts, params)?.value();
    let spec = EnsembleSpec::new(EnsembleKind::Gue, n, sigma2)?;
    let moments = DetKernelParams { method: OuterMethod::Moments, ..*params };
    let (mut sum, mut sum2) = (0.0, 0.0);
    for i in 0..samples {
        let mut rng = path_rng(seed, i as u64);
        let xi = Configuration::new(sample_initial(&spec, &mut rng)?)?;
        let v = correlation_det(&InitialConfig::Atoms(xi), points, &moments)?.value();
        sum += v;
        sum2 += v * v;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = ((sum2 - m * mean * mean) / (m - 1.0)).max(0.0);
    let se = libm::sqrt(var / m);
    let pass = (mean - shifted).abs() <= 3.0 * se || mean == shifted;
    Ok(ShiftReport { shifted, mc_mean: mean, mc_stderr: se, samples, pass })
}
