//! Gauss-Legendre rules, composite panels and adaptive bisection.

use alloc::vec::Vec;

/// `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n` from the Tricomi initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integral of `f` over `[a, b]` with one application of the rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }

    /// Composite rule on `panels` equal subintervals of `[a, b]`.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }

    /// Mapped nodes and weights of the composite rule, for callers that
    /// evaluate the integrand themselves (e.g. in parallel).
    pub fn composite_points(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.nodes.len());
        for k in 0..panels {
            let mid = a + h * (k as f64 + 0.5);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + 0.5 * h * x, 0.5 * h * w));
            }
        }
        out
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Adaptive bisection with a fixed rule: a panel is accepted when the rule on
/// it and the sum over its two halves agree to `abs_tol` (scaled by the square
/// root of the panel's share of the interval, so endpoint singularities
/// terminate) or `rel_tol` of the panel value.
pub fn adaptive<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_depth: u32,
    mut f: F,
) -> AdaptiveResult {
    let mut evaluations = 0;
    let mut eval = |lo: f64, hi: f64, f: &mut F| {
        evaluations += rule.nodes.len();
        rule.integrate(lo, hi, &mut *f)
    };
    let whole = eval(a, b, &mut f);
    let mut stack = alloc::vec![(a, b, whole, 0u32)];
    let mut value = 0.0;
    let mut error = 0.0;
    let mut converged = true;
    let width = (b - a).abs();
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = eval(lo, mid, &mut f);
        let right = eval(mid, hi, &mut f);
        let refined = left + right;
        let diff = (refined - est).abs();
        let share = (hi - lo).abs() / width;
        let target = (abs_tol * libm::sqrt(share)).max(rel_tol * refined.abs());
        if diff <= target || depth >= max_depth {
            if diff > target {
                converged = false;
            }
            value += refined;
            error += diff;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    AdaptiveResult { value, error_estimate: error, evaluations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_polynomials() {
        for n in 1..=20 {
            let gl = GaussLegendre::new(n);
            let wsum: f64 = gl.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n={n}");
            for deg in 0..2 * n {
                let v = gl.integrate(-1.0, 1.0, |x| libm::pow(x, deg as f64));
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((v - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn gaussian_integral() {
        let gl = GaussLegendre::new(16);
        let v = gl.integrate_panels(-12.0, 12.0, 12, |x| libm::exp(-0.5 * x * x));
        assert!((v - libm::sqrt(2.0 * core::f64::consts::PI)).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let gl = GaussLegendre::new(10);
        let r = adaptive(&gl, 0.0, 1.0, 1e-11, 0.0, 40, libm::sqrt);
        assert!(r.converged);
        assert!((r.value - 2.0 / 3.0).abs() < 1e-10);
    }
}
