//! Monte Carlo oracle: random-matrix initial ensembles, exact matrix-valued
//! Brownian increments, eigenvalue trajectories and histogram estimators.

use alloc::vec::Vec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::densities::mu_beta_a_log;
use crate::error::{Error, Result};
use crate::matrixcore::{eigenvalues_sym, HermitianMatrix};

/// Minimum gap between sorted eigenvalues; anything closer is treated as a solver defect.
pub const TIE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    Goe,
    Gue,
    ChGoe(u32),
    ChGue(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub sigma2: f64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n: usize, sigma2: f64) -> Result<Self> {
        if n == 0 || !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::domain("ensemble needs N >= 1 and sigma^2 > 0"));
        }
        Ok(Self { kind, n, sigma2 })
    }

    /// `a` of the chiral weight `x^a e^{-x / 2 sigma^2}`, if chiral.
    pub fn chiral_a(&self) -> Option<f64> {
        match self.kind {
            EnsembleKind::ChGoe(nu) => Some((nu as f64 - 1.0) / 2.0),
            EnsembleKind::ChGue(nu) => Some(nu as f64),
            _ => None,
        }
    }
}

/// Independent generator for path `stream` under `seed`.
pub fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    z * libm::sqrt(var)
}

fn checked_sorted(mut v: Vec<f64>) -> Result<Vec<f64>> {
    v.sort_by(f64::total_cmp);
    for w in v.windows(2) {
        if w[1] - w[0] <= TIE_TOL * w[1].abs().max(1.0) {
            return Err(Error::domain("coincident eigenvalues in a sample"));
        }
    }
    Ok(v)
}

/// `M^* M` eigenvalues for an `(N + nu) x N` matrix stored row-major.
fn gram_spectrum(m: &[Complex64], rows: usize, cols: usize) -> Result<Vec<f64>> {
    let h = HermitianMatrix::from_upper_unchecked(cols, |i, j| {
        (0..rows).map(|r| m[r * cols + i].conj() * m[r * cols + j]).sum()
    });
    eigenvalues_sym(&h).map(|v| v.into_iter().map(|x| x.max(0.0)).collect())
}

/// One draw from the eigenvalue law of the ensemble, sorted ascending.
///
/// GOE: diagonal `N(0, s2)`, off-diagonal `N(0, s2/2)`. GUE: diagonal
/// `N(0, s2)`, real and imaginary parts off the diagonal `N(0, s2/2)`.
/// Chiral kinds: squared singular values of `(N + nu) x N` matrices whose real
/// (and imaginary) entries are `N(0, s2)`.
pub fn sample_initial<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<Vec<f64>> {
    let (n, s2) = (spec.n, spec.sigma2);
    let values = match spec.kind {
        EnsembleKind::Goe | EnsembleKind::Gue => {
            let complex = spec.kind == EnsembleKind::Gue;
            let mut upper = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let v = if i == j {
                        Complex64::new(normal(rng, s2), 0.0)
                    } else if j > i {
                        let im = if complex { normal(rng, s2 / 2.0) } else { 0.0 };
                        Complex64::new(normal(rng, s2 / 2.0), im)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    upper.push(v);
                }
            }
            eigenvalues_sym(&HermitianMatrix::from_upper_unchecked(n, |i, j| upper[i * n + j]))?
        }
        EnsembleKind::ChGoe(nu) | EnsembleKind::ChGue(nu) => {
            let complex = matches!(spec.kind, EnsembleKind::ChGue(_));
            let rows = n + nu as usize;
            let m: Vec<Complex64> = (0..rows * n)
                .map(|_| {
                    let re = normal(rng, s2);
                    Complex64::new(re, if complex { normal(rng, s2) } else { 0.0 })
                })
                .collect();
            gram_spectrum(&m, rows, n)?
        }
    };
    checked_sorted(values)
}

/// Sorted configurations observed at increasing positive times.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub configs: Vec<Vec<f64>>,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || !(times[0] > 0.0) || times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("observation times must be positive and strictly increasing"));
    }
    Ok(())
}

/// Eigenvalues of `diag(initial) + Hermitian Brownian motion`: per unit time the
/// diagonal entries gain variance 1 and each off-diagonal real and imaginary
/// part variance 1/2.
pub fn evolve_bm<R: Rng + ?Sized>(initial: &[f64], times: &[f64], rng: &mut R) -> Result<PathSample> {
    check_times(times)?;
    let n = initial.len();
    if n == 0 {
        return Err(Error::domain("empty initial configuration"));
    }
    let mut h: Vec<Complex64> = (0..n * n).map(|k| if k / n == k % n { Complex64::new(initial[k / n], 0.0) } else { Complex64::new(0.0, 0.0) }).collect();
    let mut prev = 0.0;
    let mut configs = Vec::with_capacity(times.len());
    for &t in times {
        let d = t - prev;
        prev = t;
        for i in 0..n {
            h[i * n + i] += normal(rng, d);
            for j in i + 1..n {
                h[i * n + j] += Complex64::new(normal(rng, d / 2.0), normal(rng, d / 2.0));
            }
        }
        let m = HermitianMatrix::from_upper_unchecked(n, |i, j| h[i * n + j]);
        configs.push(checked_sorted(eigenvalues_sym(&m)?)?);
    }
    Ok(PathSample { times: times.to_vec(), configs })
}

/// Eigenvalues of `M(t)^* M(t)` for an `(N + nu) x N` complex matrix started at
/// `diag(sqrt initial)`; per unit time each real and imaginary entry gains variance 1.
pub fn evolve_besq<R: Rng + ?Sized>(nu: u32, initial: &[f64], times: &[f64], rng: &mut R) -> Result<PathSample> {
    check_times(times)?;
    let n = initial.len();
    if n == 0 || initial.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::domain("initial points must be nonnegative"));
    }
    let rows = n + nu as usize;
    let mut m = alloc::vec![Complex64::new(0.0, 0.0); rows * n];
    for (i, &x) in initial.iter().enumerate() {
        m[i * n + i] = Complex64::new(libm::sqrt(x), 0.0);
    }
    let mut prev = 0.0;
    let mut configs = Vec::with_capacity(times.len());
    for &t in times {
        let d = t - prev;
        prev = t;
        for e in m.iter_mut() {
            *e += Complex64::new(normal(rng, d), normal(rng, d));
        }
        configs.push(checked_sorted(gram_spectrum(&m, rows, n)?)?);
    }
    Ok(PathSample { times: times.to_vec(), configs })
}

/// Uniform grid `[lo, hi)` split into `bins` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Window {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(hi > lo) || bins == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::domain("window needs lo < hi and at least one bin"));
        }
        Ok(Self { lo, hi, bins })
    }

    /// `+-6 sqrt(sigma^2 + t_max)`.
    pub fn bm_default(sigma2: f64, t_max: f64, bins: usize) -> Result<Self> {
        let h = 6.0 * libm::sqrt(sigma2 + t_max);
        Self::new(-h, h, bins)
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn index(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return None;
        }
        Some((((x - self.lo) / self.width()) as usize).min(self.bins - 1))
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }

    /// Bin average of `f` by 3-point Gauss-Legendre.
    pub fn average<F: FnMut(f64) -> f64>(&self, i: usize, mut f: F) -> f64 {
        let c = self.center(i);
        let h = 0.5 * self.width();
        gl3().iter().map(|&(x, w)| 0.5 * w * f(c + h * x)).sum()
    }
}

/// `[0, cap)` with `cap` the empirical `q`-quantile of the pooled points times `1 + margin`.
pub fn besq_window(paths: &[PathSample], time_index: usize, q: f64, margin: f64, bins: usize) -> Result<Window> {
    let mut pool: Vec<f64> = paths.iter().filter_map(|p| p.configs.get(time_index)).flatten().copied().collect();
    if pool.is_empty() {
        return Err(Error::domain("no samples at this time"));
    }
    pool.sort_by(f64::total_cmp);
    let k = ((pool.len() - 1) as f64 * q.clamp(0.0, 1.0)) as usize;
    Window::new(0.0, pool[k] * (1.0 + margin), bins)
}

fn gl3() -> [(f64, f64); 3] {
    let a = libm::sqrt(0.6);
    [(-a, 5.0 / 9.0), (0.0, 8.0 / 9.0), (a, 5.0 / 9.0)]
}

/// Per-cell sums over samples of the per-sample counts and their squares.
#[derive(Debug, Clone, PartialEq)]
struct Cells {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    scratch: Vec<(usize, f64)>,
}

impl Cells {
    fn new(len: usize) -> Self {
        Self { sum: alloc::vec![0.0; len], sum_sq: alloc::vec![0.0; len], scratch: Vec::new() }
    }

    fn hit(&mut self, cell: usize) {
        match self.scratch.iter_mut().find(|(c, _)| *c == cell) {
            Some(e) => e.1 += 1.0,
            None => self.scratch.push((cell, 1.0)),
        }
    }

    fn finish_sample(&mut self) {
        for &(c, k) in &self.scratch {
            self.sum[c] += k;
            self.sum_sq[c] += k * k;
        }
        self.scratch.clear();
    }

    fn merge(&mut self, other: &Cells) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
    }

    /// Mean count per sample and its standard error.
    fn mean_se(&self, cell: usize, samples: u64) -> (f64, f64) {
        let m = samples as f64;
        let mean = self.sum[cell] / m;
        let var = if samples > 1 { ((self.sum_sq[cell] - m * mean * mean) / (m - 1.0)).max(0.0) } else { 0.0 };
        (mean, libm::sqrt(var / m))
    }
}

/// Comparison of an estimator against a prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    /// Occupied bins compared.
    pub bins: usize,
    /// Bins whose prediction lies within `k` standard errors.
    pub within: usize,
    pub worst_z: f64,
}

impl Agreement {
    pub fn fraction(&self) -> f64 {
        if self.bins == 0 {
            0.0
        } else {
            self.within as f64 / self.bins as f64
        }
    }

    fn push(&mut self, est: f64, se: f64, pred: f64, k: f64) {
        self.bins += 1;
        let z = if se > 0.0 { (est - pred).abs() / se } else { f64::INFINITY };
        if z <= k {
            self.within += 1;
        }
        self.worst_z = self.worst_z.max(z);
    }
}

/// Density histogram of point positions in one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram1 {
    pub window: Window,
    cells: Cells,
    pub samples: u64,
    /// Points that fell outside the window.
    pub outside: u64,
}

impl Histogram1 {
    pub fn new(window: Window) -> Self {
        Self { window, cells: Cells::new(window.bins), samples: 0, outside: 0 }
    }

    pub fn add_sample(&mut self, points: &[f64]) {
        for &x in points {
            match self.window.index(x) {
                Some(i) => self.cells.hit(i),
                None => self.outside += 1,
            }
        }
        self.cells.finish_sample();
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &Histogram1) -> Result<()> {
        if self.window != other.window {
            return Err(Error::domain("histogram windows differ"));
        }
        self.cells.merge(&other.cells);
        self.samples += other.samples;
        self.outside += other.outside;
        Ok(())
    }

    pub fn count(&self, i: usize) -> f64 {
        self.cells.sum[i]
    }

    /// Density estimate and standard error in cell `i`.
    pub fn density(&self, i: usize) -> (f64, f64) {
        let (m, se) = self.cells.mean_se(i, self.samples);
        let w = self.window.width();
        (m / w, se / w)
    }

    /// `sum density * width`, the mean number of points inside the window.
    pub fn total(&self) -> f64 {
        (0..self.window.bins).map(|i| self.density(i).0).sum::<f64>() * self.window.width()
    }

    /// Rows `(bin_center, density, stderr, count)`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        (0..self.window.bins).map(move |i| {
            let (d, se) = self.density(i);
            (self.window.center(i), d, se, self.count(i))
        })
    }

    /// Compares occupied bins with the bin-averaged prediction `f`.
    pub fn compare<F: FnMut(f64) -> f64>(&self, k: f64, mut f: F) -> Agreement {
        let mut a = Agreement { bins: 0, within: 0, worst_z: 0.0 };
        for i in 0..self.window.bins {
            if self.count(i) == 0.0 {
                continue;
            }
            let (d, se) = self.density(i);
            a.push(d, se, self.window.average(i, &mut f), k);
        }
        a
    }
}

/// Density histogram of point pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2 {
    pub wx: Window,
    pub wy: Window,
    cells: Cells,
    pub samples: u64,
    pub outside: u64,
}

impl Histogram2 {
    pub fn new(wx: Window, wy: Window) -> Self {
        Self { wx, wy, cells: Cells::new(wx.bins * wy.bins), samples: 0, outside: 0 }
    }

    /// Adds one sample given its pairs.
    pub fn add_pairs(&mut self, pairs: impl Iterator<Item = (f64, f64)>) {
        for (x, y) in pairs {
            match (self.wx.index(x), self.wy.index(y)) {
                (Some(i), Some(j)) => self.cells.hit(i * self.wy.bins + j),
                _ => self.outside += 1,
            }
        }
        self.cells.finish_sample();
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &Histogram2) -> Result<()> {
        if self.wx != other.wx || self.wy != other.wy {
            return Err(Error::domain("histogram windows differ"));
        }
        self.cells.merge(&other.cells);
        self.samples += other.samples;
        self.outside += other.outside;
        Ok(())
    }

    pub fn count(&self, i: usize, j: usize) -> f64 {
        self.cells.sum[i * self.wy.bins + j]
    }

    pub fn density(&self, i: usize, j: usize) -> (f64, f64) {
        let (m, se) = self.cells.mean_se(i * self.wy.bins + j, self.samples);
        let a = self.wx.width() * self.wy.width();
        (m / a, se / a)
    }

    /// Rows `(x_center, y_center, density, stderr, count)`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, f64, f64)> + '_ {
        (0..self.wx.bins).flat_map(move |i| {
            (0..self.wy.bins).map(move |j| {
                let (d, se) = self.density(i, j);
                (self.wx.center(i), self.wy.center(j), d, se, self.count(i, j))
            })
        })
    }

    pub fn compare<F: FnMut(f64, f64) -> f64>(&self, k: f64, mut f: F) -> Agreement {
        let mut a = Agreement { bins: 0, within: 0, worst_z: 0.0 };
        for i in 0..self.wx.bins {
            for j in 0..self.wy.bins {
                if self.count(i, j) == 0.0 {
                    continue;
                }
                let (d, se) = self.density(i, j);
                let pred = self.wx.average(i, |x| self.wy.average(j, |y| f(x, y)));
                a.push(d, se, pred, k);
            }
        }
        a
    }
}

/// What [`Estimates`] records.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSpec {
    /// One-point window per observation time.
    pub one_point: Vec<Window>,
    /// Same-time pair window per observation time (ordered pairs of distinct particles).
    pub same_time: Vec<Window>,
    /// Two-time pairs `(i, j, window_i, window_j)` over all particle index pairs.
    pub two_time: Vec<(usize, usize, Window, Window)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimates {
    pub one_point: Vec<Histogram1>,
    pub same_time: Vec<Histogram2>,
    pub two_time: Vec<Histogram2>,
}

impl Estimates {
    pub fn new(spec: &EstimatorSpec) -> Self {
        Self {
            one_point: spec.one_point.iter().map(|&w| Histogram1::new(w)).collect(),
            same_time: spec.same_time.iter().map(|&w| Histogram2::new(w, w)).collect(),
            two_time: spec.two_time.iter().map(|&(_, _, a, b)| Histogram2::new(a, b)).collect(),
        }
    }

    pub fn add_path(&mut self, spec: &EstimatorSpec, path: &PathSample) -> Result<()> {
        let cfg = |i: usize| path.configs.get(i).ok_or_else(|| Error::domain("time index out of range"));
        for (i, h) in self.one_point.iter_mut().enumerate() {
            h.add_sample(cfg(i)?);
        }
        for (i, h) in self.same_time.iter_mut().enumerate() {
            let c = cfg(i)?;
            h.add_pairs((0..c.len()).flat_map(|a| (0..c.len()).filter(move |&b| b != a).map(move |b| (c[a], c[b]))));
        }
        for (h, &(i, j, _, _)) in self.two_time.iter_mut().zip(&spec.two_time) {
            let (ci, cj) = (cfg(i)?, cfg(j)?);
            h.add_pairs(ci.iter().flat_map(|&x| cj.iter().map(move |&y| (x, y))));
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &Estimates) -> Result<()> {
        for (a, b) in self.one_point.iter_mut().zip(&other.one_point) {
            a.merge(b)?;
        }
        for (a, b) in self.same_time.iter_mut().zip(&other.same_time) {
            a.merge(b)?;
        }
        for (a, b) in self.two_time.iter_mut().zip(&other.two_time) {
            a.merge(b)?;
        }
        Ok(())
    }
}

/// Histograms over `paths`; needs at least 1000 paths.
pub fn estimate_correlations(paths: &[PathSample], spec: &EstimatorSpec) -> Result<Estimates> {
    if paths.len() < 1000 {
        return Err(Error::domain("need at least 1000 paths"));
    }
    let mut est = Estimates::new(spec);
    for p in paths {
        est.add_path(spec, p)?;
    }
    Ok(est)
}

/// Output of [`metropolis_chiral`].
#[derive(Debug, Clone, PartialEq)]
pub struct MetropolisRun {
    /// Recorded states, each sorted ascending.
    pub samples: Vec<Vec<f64>>,
    pub acceptance: f64,
    /// Effective sample size of the largest coordinate.
    pub ess: f64,
}

/// Random-walk Metropolis on the positive chamber targeting `mu^(1,a)`.
pub fn metropolis_chiral<R: Rng + ?Sized>(
    n: usize,
    a: f64,
    sigma2: f64,
    samples: usize,
    burn_in: usize,
    step: f64,
    rng: &mut R,
) -> Result<MetropolisRun> {
    if n == 0 || !(a > -1.0) || !(sigma2 > 0.0) || !(step > 0.0) || samples < 2 {
        return Err(Error::domain("metropolis needs N >= 1, a > -1, sigma^2 > 0, step > 0, two samples"));
    }
    let log_target = |x: &[f64]| mu_beta_a_log(1.0, a, sigma2, x).map(|v| v.log_abs).unwrap_or(f64::NEG_INFINITY);
    let mut x: Vec<f64> = (0..n).map(|j| sigma2 * (2.0 * j as f64 + 1.0 + a.max(0.0))).collect();
    let mut lx = log_target(&x);
    let mut out = Vec::with_capacity(samples);
    let mut accepted = 0usize;
    let scale = step * libm::sqrt(sigma2);
    for it in 0..burn_in + samples {
        let mut y: Vec<f64> = x.iter().map(|&v| v + normal(&mut *rng, scale * scale)).collect();
        y.sort_by(f64::total_cmp);
        // Sorting is a symmetric map on proposals for an exchangeable target.
        let ly = if y[0] > 0.0 { log_target(&y) } else { f64::NEG_INFINITY };
        let u: f64 = rng.random();
        if ly > f64::NEG_INFINITY && libm::log(u) < ly - lx {
            x = y;
            lx = ly;
            if it >= burn_in {
                accepted += 1;
            }
        }
        if it >= burn_in {
            out.push(x.clone());
        }
    }
    let trace: Vec<f64> = out.iter().map(|s| s[n - 1]).collect();
    Ok(MetropolisRun { ess: effective_sample_size(&trace), acceptance: accepted as f64 / samples as f64, samples: out })
}

/// Effective sample size with Geyer's initial positive sequence.
pub fn effective_sample_size(trace: &[f64]) -> f64 {
    let m = trace.len();
    if m < 4 {
        return m as f64;
    }
    let mean = trace.iter().sum::<f64>() / m as f64;
    let c = |lag: usize| trace[..m - lag].iter().zip(&trace[lag..]).map(|(a, b)| (a - mean) * (b - mean)).sum::<f64>() / m as f64;
    let c0 = c(0);
    if c0 <= 0.0 {
        return m as f64;
    }
    let mut tau = -1.0;
    let mut lag = 0;
    while lag + 1 < m / 2 {
        let pair = (c(lag) + c(lag + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    m as f64 / tau.max(1.0)
}
