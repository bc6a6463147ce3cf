//! Verification checks shared by the `verify` command and the acceptance
//! tests. Tolerances are fixed here.

use anyhow::Result;
use noncolliding_core::densities::{joint_density_bm, joint_density_bm_bridge, mu_beta, BesqParams, Configuration};
use noncolliding_core::kernels_det::{check_shift_identity, correlation_det, DetKernelParams, InitialConfig};
use noncolliding_core::kernels_pf::{correlation_pf, PfKernel, PfKernelParams, Truncation};
use noncolliding_core::matrixcore::{determinant, pfaffian, pfaffian_naive, Matrix, SkewMatrix};
use noncolliding_core::mc_sim::{path_rng, EnsembleKind, EnsembleSpec, EstimatorSpec, Window};
use noncolliding_core::quad::GaussLegendre;
use noncolliding_core::SpaceTimePoint;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::campaign::{self, Dynamics};

pub const TOL_PF_DET: f64 = 1e-9;
pub const TOL_PF_NAIVE: f64 = 1e-10;
pub const TOL_PF_SCALING: f64 = 1e-10;
pub const TOL_LEMMA: f64 = 1e-8;
pub const TOL_NORMALIZATION: f64 = 1e-4;
pub const TOL_CROSS: f64 = 1e-3;
pub const SE_MULTIPLE: f64 = 3.0;
pub const MIN_BIN_FRACTION: f64 = 0.95;
pub const TOL_REFINEMENT: f64 = 1e-7;
/// Roundoff floor for the positivity of one-point functions.
pub const TOL_NEGATIVITY: f64 = 1e-10;
pub const TOL_TRUNCATION: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: String,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `measured <= tolerance`.
    fn at_most(id: &str, name: impl Into<String>, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self { id: id.into(), name: name.into(), measured, tolerance, pass: measured <= tolerance, detail: detail.into() }
    }

    /// Passes when `measured >= tolerance`.
    fn at_least(id: &str, name: impl Into<String>, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self { id: id.into(), name: name.into(), measured, tolerance, pass: measured >= tolerance, detail: detail.into() }
    }

    fn failed(id: &str, name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Self { id: id.into(), name: name.into(), measured: f64::NAN, tolerance: f64::NAN, pass: false, detail: err.to_string() }
    }
}

fn pt(t: f64, x: f64) -> SpaceTimePoint {
    SpaceTimePoint::new(t, x)
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn random_skew<R: Rng>(n: usize, rng: &mut R) -> SkewMatrix {
    let mut upper = vec![0.0; n * n];
    for v in upper.iter_mut() {
        *v = normal(rng);
    }
    SkewMatrix::from_upper(n, |i, j| upper[i * n + j]).expect("upper triangle is finite")
}

/// Pf^2 = det and elimination against the permutation sum, even orders 2 to 12.
pub fn pfaffian_identities(count: usize, seed: u64) -> Vec<Check> {
    let mut rng = path_rng(seed, 0);
    let (mut worst_det, mut worst_naive) = (0.0f64, 0.0f64);
    for _ in 0..count {
        let n = 2 * rng.random_range(1..=6usize);
        let a = random_skew(n, &mut rng);
        let pf = pfaffian(&a);
        let naive = pfaffian_naive(&a).unwrap_or(f64::NAN);
        let det = determinant(a.as_matrix());
        let rel = if det.sign > 0.0 { ((2.0 * pf.log_abs - det.log_abs).exp() - 1.0).abs() } else { f64::INFINITY };
        worst_det = worst_det.max(rel);
        worst_naive = worst_naive.max((pf.value() - naive).abs() / naive.abs());
    }
    vec![
        Check::at_most("A1", "Pf^2 = det", worst_det, TOL_PF_DET, format!("{count} matrices")),
        Check::at_most("A1", "elimination = permutation sum", worst_naive, TOL_PF_NAIVE, format!("{count} matrices")),
    ]
}

/// `Pf(D A D) = det(D) Pf(A)` for diagonal `D`.
pub fn pfaffian_scaling(count: usize, seed: u64) -> Vec<Check> {
    let mut rng = path_rng(seed, 1);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let n = 2 * rng.random_range(1..=6usize);
        let a = random_skew(n, &mut rng);
        let v: Vec<f64> = (0..n)
            .map(|_| {
                let m: f64 = rng.random_range(0.5..2.0);
                if rng.random::<bool>() { m } else { -m }
            })
            .collect();
        let d = Matrix::from_fn(n, |i, j| if i == j { v[i] } else { 0.0 });
        let scaled = match a.congruence(&d) {
            Ok(s) => pfaffian(&s).value(),
            Err(e) => return vec![Check::failed("A2", "Pf scaling", e)],
        };
        let expect = v.iter().product::<f64>() * pfaffian(&a).value();
        worst = worst.max((scaled - expect).abs() / expect.abs());
    }
    vec![Check::at_most("A2", "Pf scaling", worst, TOL_PF_SCALING, format!("{count} pairs"))]
}

/// Both sides of the dilatation identity at `N = 2, M = 1, sigma^2 = 1`.
pub fn lemma_sides(xi: [f64; 2], x1: [f64; 2], t1: f64) -> Result<(f64, f64)> {
    let s2 = 1.0;
    let conf = Configuration::new(xi.to_vec())?;
    let lhs = mu_beta(1.0, s2, &xi)? * joint_density_bm(&conf, &[t1], &[x1.to_vec()])?.value();
    let c = s2 / (s2 + t1);
    let tau = s2 * c;
    let cx = vec![c * x1[0], c * x1[1]];
    let rhs = joint_density_bm_bridge(&[tau, s2], &[cx, xi.to_vec()])?.value() * c * c;
    Ok((lhs, rhs))
}

pub fn lemma(count: usize, seed: u64) -> Vec<Check> {
    let mut rng = path_rng(seed, 2);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let mut xi = [normal(&mut rng), normal(&mut rng)];
        let mut x1 = [1.5 * normal(&mut rng), 1.5 * normal(&mut rng)];
        xi.sort_by(f64::total_cmp);
        x1.sort_by(f64::total_cmp);
        let t1: f64 = rng.random_range(0.2..2.0);
        match lemma_sides(xi, x1, t1) {
            Ok((l, r)) => worst = worst.max((l - r).abs() / l.abs()),
            Err(e) => return vec![Check::failed("A3", "dilatation identity", e)],
        }
    }
    vec![Check::at_most("A3", "dilatation identity", worst, TOL_LEMMA, format!("{count} random tuples, N=2, M=1"))]
}

/// `int rho(t, x) dx` of the Brownian Pfaffian kernel.
pub fn integral_bm(kernel: &PfKernel, t: f64) -> Result<f64> {
    let gl = GaussLegendre::new(20);
    let w = 9.0 * (kernel.params().sigma2 + t).sqrt();
    let nodes = gl.composite_points(-w, w, 32);
    let vals: Vec<f64> = nodes.par_iter().map(|&(x, wt)| kernel.rho1(pt(t, x)).map(|r| wt * r)).collect::<Result<_, _>>()?;
    Ok(vals.iter().sum())
}

/// `int rho(t, x) dx` of the chiral kernel, integrated in `u = sqrt x`.
pub fn integral_besq(kernel: &PfKernel, t: f64) -> Result<f64> {
    let gl = GaussLegendre::new(20);
    let s2 = kernel.params().sigma2;
    let u_max = (80.0 * (s2 + 2.0 * t)).sqrt();
    let nodes = gl.composite_points(0.0, u_max, 80);
    let vals: Vec<f64> =
        nodes.par_iter().map(|&(u, wt)| kernel.rho1(pt(t, u * u)).map(|r| 2.0 * u * wt * r)).collect::<Result<_, _>>()?;
    Ok(vals.iter().sum())
}

pub const NORMALIZATION_TIMES: [f64; 3] = [0.25, 1.0, 4.0];
pub const CHIRAL_CASES: [(f64, f64); 2] = [(1.0, 0.0), (0.5, 0.5)];

fn bm_kernel(n: usize, trunc: Truncation) -> Result<PfKernel> {
    Ok(PfKernel::new(PfKernelParams::bm(n, 1.0)?.with_truncation(trunc)?))
}

fn besq_kernel(nu: f64, a: f64, trunc: Truncation) -> Result<PfKernel> {
    Ok(PfKernel::new(PfKernelParams::besq(2, 1.0, BesqParams::new(nu, a)?)?.with_truncation(trunc)?))
}

/// Integrals behind the normalization check, labelled.
fn normalization_values(trunc: Truncation, times: &[f64]) -> Result<Vec<(String, f64, f64)>> {
    let mut out = Vec::new();
    for n in [2usize, 4] {
        let k = bm_kernel(n, trunc)?;
        for &t in times {
            out.push((format!("BM N={n} t={t}"), integral_bm(&k, t)?, n as f64));
        }
    }
    for (nu, a) in CHIRAL_CASES {
        let k = besq_kernel(nu, a, trunc)?;
        for &t in times {
            out.push((format!("BESQ nu={nu} a={a} t={t}"), integral_besq(&k, t)?, 2.0));
        }
    }
    Ok(out)
}

pub fn normalization() -> Vec<Check> {
    match normalization_values(Truncation::default(), &NORMALIZATION_TIMES) {
        Ok(v) => v
            .into_iter()
            .map(|(label, got, n)| Check::at_most("A4", format!("int rho = N, {label}"), (got - n).abs(), TOL_NORMALIZATION, format!("integral {got}")))
            .collect(),
        Err(e) => vec![Check::failed("A4", "int rho = N", e)],
    }
}

/// Point sets of the cross-formalism check: five single-time, five two-time.
pub fn cross_point_sets(seed: u64) -> Vec<Vec<SpaceTimePoint>> {
    let mut rng = path_rng(seed, 3);
    let mut sets = Vec::new();
    for k in 0..10 {
        let x: f64 = rng.random_range(-1.5..1.5);
        let y: f64 = rng.random_range(-1.5..1.5);
        let t1: f64 = rng.random_range(0.3..2.0);
        let t2: f64 = t1 + rng.random_range(0.2..1.5);
        sets.push(match k {
            0 | 1 => vec![pt(t1, x)],
            2..=4 => vec![pt(t1, x), pt(t1, y)],
            _ => vec![pt(t1, x), pt(t2, y)],
        });
    }
    sets
}

/// `E^(1)[det K^xi]` at `N = 2, sigma^2 = 1` by product Gauss-Legendre over
/// `xi = (a, a + u)`.
pub fn averaged_det(points: &[SpaceTimePoint], params: &DetKernelParams) -> Result<f64> {
    let gl = GaussLegendre::new(20);
    let outer = gl.composite_points(-7.0, 7.0, 6);
    let gaps = gl.composite_points(0.0, 10.0, 6);
    let parts: Vec<f64> = outer
        .par_iter()
        .map(|&(a, wa)| -> Result<f64> {
            let mut acc = 0.0;
            for &(u, wu) in &gaps {
                let xi = [a, a + u];
                let mu = mu_beta(1.0, 1.0, &xi)?;
                let init = InitialConfig::Atoms(Configuration::new(xi.to_vec())?);
                acc += wu * mu * correlation_det(&init, points, params)?.value();
            }
            Ok(wa * acc)
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}

pub fn cross_formalism(seed: u64) -> Vec<Check> {
    let run = || -> Result<(f64, String)> {
        let k = bm_kernel(2, Truncation::default())?;
        let params = DetKernelParams::default();
        let mut worst = 0.0f64;
        let mut detail = String::new();
        for set in cross_point_sets(seed) {
            let pf = correlation_pf(&set, &k)?;
            let det = averaged_det(&set, &params)?;
            let rel = (pf - det).abs() / pf.abs();
            worst = worst.max(rel);
            detail.push_str(&format!("[{} pts: pf {pf:.6e} det {det:.6e}] ", set.len()));
        }
        Ok((worst, detail.trim_end().to_string()))
    };
    match run() {
        Ok((w, d)) => vec![Check::at_most("A5", "E[det K^xi] = Pf", w, TOL_CROSS, d)],
        Err(e) => vec![Check::failed("A5", "E[det K^xi] = Pf", e)],
    }
}

pub fn shift_point_sets() -> Vec<Vec<SpaceTimePoint>> {
    vec![
        vec![pt(0.5, 0.0)],
        vec![pt(1.0, 0.8)],
        vec![pt(2.0, -1.5)],
        vec![pt(1.0, -0.5), pt(1.0, 0.7)],
        vec![pt(0.5, 0.2), pt(1.5, -0.4)],
    ]
}

pub fn shift(samples: usize, seed: u64) -> Vec<Check> {
    let params = DetKernelParams::default();
    let sets = shift_point_sets();
    let reports: Vec<_> = sets.par_iter().enumerate().map(|(i, set)| check_shift_identity(2, 1.0, set, samples, seed.wrapping_add(i as u64), &params)).collect();
    reports
        .into_iter()
        .zip(&sets)
        .map(|(r, set)| match r {
            Ok(r) => {
                let z = (r.mc_mean - r.shifted).abs() / r.mc_stderr;
                let pass = r.pass;
                let mut c = Check::at_most(
                    "A6",
                    format!("shift identity at {}", describe(set)),
                    z,
                    SE_MULTIPLE,
                    format!("MC {:.6e} +- {:.2e}, shifted {:.6e}, {} samples", r.mc_mean, r.mc_stderr, r.shifted, r.samples),
                );
                c.pass = pass;
                c
            }
            Err(e) => Check::failed("A6", "shift identity", e),
        })
        .collect()
}

fn describe(set: &[SpaceTimePoint]) -> String {
    let parts: Vec<String> = set.iter().map(|p| format!("({}, {})", p.t, p.x)).collect();
    parts.join(" ")
}

pub const MC_TIMES: [f64; 2] = [0.5, 2.0];

/// One-point and same-time two-point histograms of matrix-BM paths from the
/// GOE start against the Pfaffian kernel.
pub fn mc_bm(paths: usize, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    for n in [2usize, 4] {
        if let Err(e) = mc_bm_one(n, paths, seed, &mut out) {
            out.push(Check::failed("A7", format!("matrix BM N={n}"), e));
        }
    }
    out
}

fn mc_bm_one(n: usize, paths: usize, seed: u64, out: &mut Vec<Check>) -> Result<()> {
    let spec = EnsembleSpec::new(EnsembleKind::Goe, n, 1.0)?;
    let one = MC_TIMES.iter().map(|&t| Window::bm_default(1.0, t, 48)).collect::<Result<Vec<_>, _>>()?;
    let two = MC_TIMES.iter().map(|&t| {
        let h = 4.0 * (1.0 + t).sqrt();
        Window::new(-h, h, 16)
    });
    let est = EstimatorSpec { one_point: one, same_time: two.collect::<Result<_, _>>()?, two_time: vec![] };
    let run = campaign::run(&spec, Dynamics::Bm, &MC_TIMES, paths, seed, &est)?;
    let k = bm_kernel(n, Truncation::default())?;
    compare_campaign("A7", &format!("BM N={n}"), &run, &k, out);
    Ok(())
}

fn compare_campaign(id: &str, label: &str, run: &campaign::CampaignOutput, k: &PfKernel, out: &mut Vec<Check>) {
    for (i, &t) in MC_TIMES.iter().enumerate() {
        let h1 = &run.estimates.one_point[i];
        let a1 = h1.compare(SE_MULTIPLE, |x| k.rho1(pt(t, x)).unwrap_or(f64::NAN));
        out.push(Check::at_least(
            id,
            format!("{label} t={t} one-point bins within 3 SE"),
            a1.fraction(),
            MIN_BIN_FRACTION,
            format!("{}/{} bins, worst z {:.2}, {} paths, {} failures", a1.within, a1.bins, a1.worst_z, run.paths, run.failures),
        ));
        let h2 = &run.estimates.same_time[i];
        let a2 = h2.compare(SE_MULTIPLE, |x, y| correlation_pf(&[pt(t, x), pt(t, y)], k).unwrap_or(f64::NAN));
        out.push(Check::at_least(
            id,
            format!("{label} t={t} two-point bins within 3 SE"),
            a2.fraction(),
            MIN_BIN_FRACTION,
            format!("{}/{} bins, worst z {:.2}", a2.within, a2.bins, a2.worst_z),
        ));
    }
}

/// Laguerre-process paths from the chGOE(1) start against the chiral kernel at `(nu, a) = (1, 0)`.
pub fn mc_besq(paths: usize, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    if let Err(e) = mc_besq_inner(paths, seed, &mut out) {
        out.push(Check::failed("A8", "Laguerre process N=2", e));
    }
    out
}

fn mc_besq_inner(paths: usize, seed: u64, out: &mut Vec<Check>) -> Result<()> {
    let nu = 1u32;
    let spec = EnsembleSpec::new(EnsembleKind::ChGoe(nu), 2, 1.0)?;
    let pilot = (paths / 20).clamp(500, 5000);
    let one = campaign::besq_pilot_windows(&spec, nu, &MC_TIMES, pilot, seed, 0.999, 48)?;
    let two = campaign::besq_pilot_windows(&spec, nu, &MC_TIMES, pilot, seed, 0.99, 16)?;
    let est = EstimatorSpec { one_point: one, same_time: two, two_time: vec![] };
    let run = campaign::run(&spec, Dynamics::Besq(nu), &MC_TIMES, paths, seed, &est)?;
    let k = besq_kernel(nu as f64, 0.0, Truncation::default())?;
    compare_campaign("A8", "Laguerre N=2 nu=1 a=0", &run, &k, out);
    Ok(())
}

/// Integral, positivity and refinement stability of the determinantal kernel.
pub fn det_kernel() -> Vec<Check> {
    let params = DetKernelParams::default();
    let refined = params.refined();
    let inits = [("xi = d(-1) + d(1)", InitialConfig::Atoms(Configuration::new(vec![-1.0, 1.0]).expect("finite"))), ("xi = 2 d(0)", InitialConfig::Delta0(2))];
    let mut out = Vec::new();
    for (label, init) in &inits {
        for t in [0.5, 2.0] {
            let run = || -> Result<(f64, f64, f64)> {
                let gl = GaussLegendre::new(20);
                let w = 8.0 * f64::sqrt(t) + 1.0;
                let nodes = gl.composite_points(-w, w, 16);
                let vals: Vec<f64> = nodes
                    .par_iter()
                    .map(|&(x, _)| correlation_det(init, &[pt(t, x)], &params).map(|v| v.value()))
                    .collect::<Result<_, _>>()?;
                let integral: f64 = nodes.iter().zip(&vals).map(|(&(_, wt), v)| wt * v).sum();
                let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let mut drift = 0.0f64;
                for &(x, y, dt) in &[(0.0, 0.0, 0.0), (0.7, -0.4, 0.0), (-1.2, 0.3, 0.5), (0.4, 1.1, -0.3), (1.5, 1.5, 0.0)] {
                    let s = (t + dt).max(0.1);
                    let a = correlation_det(init, &[pt(s, x), pt(t, y)], &params)?.value();
                    let b = correlation_det(init, &[pt(s, x), pt(t, y)], &refined)?.value();
                    drift = drift.max((a - b).abs());
                }
                Ok((integral, min, drift))
            };
            match run() {
                Ok((integral, min, drift)) => {
                    out.push(Check::at_most("A9", format!("int rho = N, {label}, t={t}"), (integral - 2.0).abs(), TOL_NORMALIZATION, format!("integral {integral}")));
                    out.push(Check::at_most("A9", format!("rho >= 0, {label}, t={t}"), (-min).max(0.0), TOL_NEGATIVITY, format!("min rho on nodes {min:e}")));
                    out.push(Check::at_most("A9", format!("refinement stability, {label}, t={t}"), drift, TOL_REFINEMENT, "max change of 2-point det over 5 pairs"));
                }
                Err(e) => out.push(Check::failed("A9", format!("{label}, t={t}"), e)),
            }
        }
    }
    out
}

/// Normalization integrals and Pfaffian values under a tighter truncation.
pub fn truncation(seed: u64) -> Vec<Check> {
    let base = Truncation::default();
    let tight = Truncation { tol: base.tol / 2.0, l_max: 2 * base.l_max, ..base };
    let run = || -> Result<f64> {
        let times = [1.0];
        let a = normalization_values(base, &times)?;
        let b = normalization_values(tight, &times)?;
        let mut worst = a.iter().zip(&b).map(|(x, y)| (x.1 - y.1).abs()).fold(0.0, f64::max);
        let (k1, k2) = (bm_kernel(2, base)?, bm_kernel(2, tight)?);
        for set in cross_point_sets(seed) {
            worst = worst.max((correlation_pf(&set, &k1)? - correlation_pf(&set, &k2)?).abs());
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => vec![Check::at_most("A10", "truncation robustness", w, TOL_TRUNCATION, "tol halved, L_max doubled; normalization integrals at t=1 and the cross-check Pfaffians")],
        Err(e) => vec![Check::failed("A10", "truncation robustness", e)],
    }
}

/// Named groups of checks run by `verify`.
pub const SUITES: [&str; 8] = ["pf2det", "normalization", "lemma", "shift", "mc-bm", "mc-besq", "cross", "truncation"];

/// Runs a suite; `budget` caps Monte Carlo sample and path counts.
pub fn run_suite(name: &str, budget: usize, seed: u64) -> Option<Vec<Check>> {
    Some(match name {
        "pf2det" => {
            let mut v = pfaffian_identities(200, seed);
            v.extend(pfaffian_scaling(100, seed));
            v
        }
        "normalization" => {
            let mut v = normalization();
            v.extend(det_kernel());
            v
        }
        "lemma" => lemma(5, seed),
        "shift" => shift(budget, seed),
        "mc-bm" => mc_bm(budget, seed),
        "mc-besq" => mc_besq(budget, seed),
        "cross" => cross_formalism(seed),
        "truncation" => truncation(seed),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_sides_agree() {
        let (l, r) = lemma_sides([-0.3, 0.9], [0.1, 1.4], 0.7).unwrap();
        assert!((l - r).abs() < 1e-10 * l);
    }

    #[test]
    fn point_sets_are_reproducible() {
        assert_eq!(cross_point_sets(5), cross_point_sets(5));
        assert_eq!(cross_point_sets(5).len(), 10);
    }

    #[test]
    fn unknown_suite() {
        assert!(run_suite("nope", 10, 0).is_none());
    }
}
