//! Skew 2x2 matrix kernels for noncolliding BM started from the GOE-type law
//! and noncolliding BESQ started from the chiral orthogonal law, their
//! `B`/`C` building blocks, and Pfaffian correlation functions.
//!
//! Conventions (fixed by the numerical oracles in the tests):
//!
//! * `a12(s,x;t,y)` is the finite sum over `k < N/2` minus, for `s < t`, the
//!   backward transition term (`exp(y^2/2(sigma^2+t) - x^2/2(sigma^2+s)) p(t-s, x|y)`
//!   for BM, `p_-(t, y; s, x)` for BESQ). For `s >= t` only the finite sum remains.
//! * `a22(s,x;t,y) = sum_{k >= N/2} [C_{2k+1}(s,x) C_{2k}(t,y) - C_{2k}(s,x) C_{2k+1}(t,y)] / d_k`.
//! * The chiral `a12` uses the same normalizers `d_k^{(nu,kappa)}` as `a11` and `a22`.

mod coeff;
mod column;

use alloc::vec::Vec;

pub use coeff::{coeff_alpha, coeff_b, coeff_beta_even, coeff_beta_odd, ln_d_besq, ln_d_bm, CoeffTables};

use column::Column;

use crate::densities::{p_bm_real, p_meander_minus, BesqParams};
use crate::error::{Error, Result};
use crate::logval::{LogSum, SignedLog, TailMonitor};
use crate::matrixcore::{pfaffian, SkewMatrix};
use crate::SpaceTimePoint;

/// Stopping rule of the infinite series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// Relative tolerance of a term against the running partial sum.
    pub tol: f64,
    /// Consecutive small terms required before stopping.
    pub run: usize,
    /// Hard cap on the series index.
    pub l_max: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { tol: 1e-12, run: 3, l_max: 400 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfKernelParams {
    pub n: usize,
    pub sigma2: f64,
    /// `None` for Brownian motion.
    pub besq: Option<BesqParams>,
    pub truncation: Truncation,
}

impl PfKernelParams {
    pub fn bm(n: usize, sigma2: f64) -> Result<Self> {
        Self::checked(n, sigma2, None)
    }

    pub fn besq(n: usize, sigma2: f64, besq: BesqParams) -> Result<Self> {
        Self::checked(n, sigma2, Some(besq))
    }

    fn checked(n: usize, sigma2: f64, besq: Option<BesqParams>) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::domain("Pfaffian kernels are available for even N only"));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::domain("sigma2 must be positive"));
        }
        Ok(Self { n, sigma2, besq, truncation: Truncation::default() })
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Result<Self> {
        if !(truncation.tol > 0.0) || truncation.run == 0 || truncation.l_max < 2 * self.n {
            return Err(Error::domain("invalid truncation parameters"));
        }
        self.truncation = truncation;
        Ok(self)
    }
}

/// `[[a11, a12], [-a12t, a22]]`, the kernel at `(s,x; t,y)`; `a12t` is `a12`
/// at the swapped arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBlock {
    pub a11: f64,
    pub a12: f64,
    pub a12t: f64,
    pub a22: f64,
}

impl KernelBlock {
    pub fn as_array(&self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [-self.a12t, self.a22]]
    }
}

/// Kernel with its coefficient tables; immutable and shareable across threads.
#[derive(Debug, Clone)]
pub struct PfKernel {
    params: PfKernelParams,
    tables: Option<CoeffTables>,
}

/// Per-call truncation diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TruncationReport {
    /// Most terms used by any series in the evaluation.
    pub max_terms: usize,
}

impl PfKernel {
    pub fn new(params: PfKernelParams) -> Self {
        let tables = params.besq.map(|p| CoeffTables::new(&p, params.n, params.truncation.l_max));
        Self { params, tables }
    }

    pub fn params(&self) -> &PfKernelParams {
        &self.params
    }

    pub fn is_besq(&self) -> bool {
        self.params.besq.is_some()
    }

    fn column(&self, p: SpaceTimePoint) -> Result<Column> {
        if !(p.t > 0.0) || !p.t.is_finite() || !p.x.is_finite() {
            return Err(Error::domain("kernel points need finite x and t > 0"));
        }
        let PfKernelParams { n, sigma2, truncation, .. } = self.params;
        match &self.tables {
            None => Ok(Column::bm(p.t, p.x, sigma2, n, &truncation)),
            Some(tables) => {
                if !(p.x > 0.0) {
                    return Err(Error::domain("the chiral kernel is defined for x > 0"));
                }
                Column::besq(p.t, p.x, sigma2, n, tables)
            }
        }
    }

    fn ln_d(&self, k: usize) -> f64 {
        match &self.tables {
            None => ln_d_bm(k, self.params.sigma2),
            Some(t) => ln_d_besq(k, self.params.sigma2, t.nu, t.kappa),
        }
    }

    /// `sum_{k<N/2} [u_{2k}(1) v_{2k+1}(2) - u_{2k+1}(1) v_{2k}(2)] / d_k` over given vectors.
    fn finite_pair_sum(&self, u: &[SignedLog], v: &[SignedLog]) -> f64 {
        let mut acc = LogSum::new();
        for k in 0..self.params.n / 2 {
            let ln_d = self.ln_d(k);
            let t1 = u[2 * k] * v[2 * k + 1];
            let t2 = u[2 * k + 1] * v[2 * k];
            acc.add(SignedLog::new(t1.log_abs - ln_d, t1.sign));
            acc.add(SignedLog::new(t2.log_abs - ln_d, -t2.sign));
        }
        acc.get().value()
    }

    fn a11(&self, c1: &Column, c2: &Column) -> f64 {
        self.finite_pair_sum(&c1.b, &c2.b)
    }

    fn a12(&self, p1: SpaceTimePoint, c1: &Column, p2: SpaceTimePoint, c2: &mut Column) -> Result<f64> {
        let trunc = self.params.truncation;
        let n = self.params.n;
        let mut cvals = Vec::with_capacity(n);
        for m in 0..n {
            cvals.push(c2.c(m, &trunc, self.tables.as_ref())?);
        }
        // Summand is B_{2k+1}(1) C_{2k}(2) - B_{2k}(1) C_{2k+1}(2), i.e. the
        // pair sum with the roles of the two vectors swapped and negated.
        let finite = -self.finite_pair_sum(&c1.b, &cvals);
        if p1.t < p2.t {
            Ok(finite - self.backward(p1, p2)?)
        } else {
            Ok(finite)
        }
    }

    /// Indicator term of `a12(s,x; t,y)` for `s < t`.
    fn backward(&self, p1: SpaceTimePoint, p2: SpaceTimePoint) -> Result<f64> {
        let s2 = self.params.sigma2;
        match self.params.besq {
            None => {
                let (s, x, t, y) = (p1.t, p1.x, p2.t, p2.x);
                let ln_w = y * y / (2.0 * (s2 + t)) - x * x / (2.0 * (s2 + s));
                Ok(libm::exp(ln_w) * p_bm_real(t - s, x, y))
            }
            Some(b) => p_meander_minus(b.nu(), b.kappa(), p2.t, p1.t, p2.x, p1.x, s2),
        }
    }

    fn a22(&self, c1: &mut Column, c2: &mut Column) -> Result<f64> {
        let trunc = self.params.truncation;
        let tables = self.tables.as_ref();
        let mut acc = LogSum::new();
        let mut mon = TailMonitor::new(trunc.tol, trunc.run);
        let mut k = self.params.n / 2;
        loop {
            if 2 * k + 1 > trunc.l_max {
                return Err(Error::Truncation { what: "a22 series", terms: mon.terms });
            }
            let ln_d = self.ln_d(k);
            let t1 = c1.c(2 * k + 1, &trunc, tables)? * c2.c(2 * k, &trunc, tables)?;
            let t2 = c1.c(2 * k, &trunc, tables)? * c2.c(2 * k + 1, &trunc, tables)?;
            let mut pair = LogSum::new();
            pair.add(t1);
            pair.add(-t2);
            let term = pair.get();
            let term = SignedLog::new(term.log_abs - ln_d, term.sign);
            acc.add(term);
            if mon.push(term, &acc) {
                break;
            }
            k += 1;
        }
        Ok(acc.get().value())
    }

    /// Full block at `(s,x; t,y)`.
    pub fn block(&self, p1: SpaceTimePoint, p2: SpaceTimePoint) -> Result<KernelBlock> {
        let mut c1 = self.column(p1)?;
        let mut c2 = self.column(p2)?;
        self.block_from(p1, &mut c1, p2, &mut c2)
    }

    fn block_from(&self, p1: SpaceTimePoint, c1: &mut Column, p2: SpaceTimePoint, c2: &mut Column) -> Result<KernelBlock> {
        Ok(KernelBlock {
            a11: self.a11(c1, c2),
            a12: self.a12(p1, c1, p2, c2)?,
            a12t: self.a12(p2, c2, p1, c1)?,
            a22: self.a22(c1, c2)?,
        })
    }

    /// One-point function `rho(t, x) = a12(t,x; t,x)`.
    pub fn rho1(&self, p: SpaceTimePoint) -> Result<f64> {
        let mut c = self.column(p)?;
        let c1 = c.clone();
        self.a12(p, &c1, p, &mut c)
    }

    /// Skew matrix of order `2n` from the kernel blocks, with diagnostics.
    pub fn assemble(&self, points: &[SpaceTimePoint]) -> Result<(SkewMatrix, TruncationReport)> {
        let n = points.len();
        if n == 0 {
            return Err(Error::domain("need at least one point"));
        }
        let mut cols: Vec<Column> = points.iter().map(|&p| self.column(p)).collect::<Result<_>>()?;
        let mut m = alloc::vec![0.0; 4 * n * n];
        let dim = 2 * n;
        for j in 0..n {
            let mut cj = cols[j].clone();
            let rho = self.a12(points[j], &cj.clone(), points[j], &mut cj)?;
            cols[j] = cj;
            m[(2 * j) * dim + 2 * j + 1] = rho;
            for k in j + 1..n {
                let (left, right) = cols.split_at_mut(k);
                let (cj, ck) = (&mut left[j], &mut right[0]);
                let blk = self.block_from(points[j], cj, points[k], ck)?;
                let rev = self.block_from(points[k], ck, points[j], cj)?;
                let mismatch = (blk.a11 + rev.a11).abs().max((blk.a22 + rev.a22).abs()).max((blk.a12 - rev.a12t).abs());
                let scale = blk.a11.abs().max(blk.a22.abs()).max(blk.a12.abs()).max(1.0);
                if mismatch > 1e-8 * scale {
                    return Err(Error::SkewConsistency(mismatch));
                }
                let a = blk.as_array();
                for r in 0..2 {
                    for c in 0..2 {
                        m[(2 * j + r) * dim + 2 * k + c] = a[r][c];
                    }
                }
            }
        }
        let skew = SkewMatrix::from_upper(dim, |i, j| m[i * dim + j])?;
        let max_terms = cols.iter().map(|c| c.max_terms).max().unwrap_or(0);
        Ok((skew, TruncationReport { max_terms }))
    }

    /// Pfaffian correlation function at the given points.
    pub fn correlation(&self, points: &[SpaceTimePoint]) -> Result<(SignedLog, TruncationReport)> {
        let (skew, report) = self.assemble(points)?;
        Ok((pfaffian(&skew), report))
    }
}

/// `B_n(s, x; sigma^2)` of the Brownian kernel.
pub fn b_bm(n: usize, s: f64, x: f64, sigma2: f64) -> Result<f64> {
    if !(s >= 0.0) || !(sigma2 > 0.0) {
        return Err(Error::domain("b_bm needs s >= 0 and sigma2 > 0"));
    }
    let trunc = Truncation { l_max: n / 2 + 1, ..Truncation::default() };
    Ok(Column::bm(s, x, sigma2, n + 1, &trunc).b[n].value())
}

/// `C_n(s, x; sigma^2)` of the Brownian kernel; needs `s > 0`.
pub fn c_bm(n: usize, s: f64, x: f64, sigma2: f64, trunc: &Truncation) -> Result<f64> {
    if !(s > 0.0) || !(sigma2 > 0.0) {
        return Err(Error::domain("c_bm needs s > 0 and sigma2 > 0"));
    }
    let mut col = Column::bm(s, x, sigma2, 0, trunc);
    Ok(col.c(n, trunc, None)?.value())
}

/// `B_n^{(nu,kappa)}(s, x; sigma^2)`; `x = 0` only when `nu - kappa/2 >= 0`.
pub fn b_besq(n: usize, s: f64, x: f64, sigma2: f64, besq: &BesqParams) -> Result<f64> {
    if !(s >= 0.0) || !(sigma2 > 0.0) || !(x >= 0.0) {
        return Err(Error::domain("b_besq needs s >= 0, x >= 0 and sigma2 > 0"));
    }
    let tables = CoeffTables::new(besq, n + 1, 2 * n + 2);
    Ok(Column::besq(s, x, sigma2, n + 1, &tables)?.b[n].value())
}

/// `C_n^{(nu,kappa)}(s, x; sigma^2)`; needs `s > 0`.
pub fn c_besq(n: usize, s: f64, x: f64, sigma2: f64, besq: &BesqParams, trunc: &Truncation) -> Result<f64> {
    if !(s > 0.0) || !(sigma2 > 0.0) || !(x >= 0.0) {
        return Err(Error::domain("c_besq needs s > 0, x >= 0 and sigma2 > 0"));
    }
    let tables = CoeffTables::new(besq, 1, trunc.l_max);
    let mut col = Column::besq(s, x, sigma2, 0, &tables)?;
    Ok(col.c(n, trunc, Some(&tables))?.value())
}

/// Kernel block of the Brownian case.
pub fn a_bm(s: f64, x: f64, t: f64, y: f64, params: &PfKernelParams) -> Result<KernelBlock> {
    if params.besq.is_some() {
        return Err(Error::domain("a_bm called with chiral parameters"));
    }
    PfKernel::new(*params).block(SpaceTimePoint::new(s, x), SpaceTimePoint::new(t, y))
}

/// Kernel block of the chiral (squared Bessel) case.
pub fn a_besq(s: f64, x: f64, t: f64, y: f64, params: &PfKernelParams) -> Result<KernelBlock> {
    if params.besq.is_none() {
        return Err(Error::domain("a_besq needs chiral parameters"));
    }
    PfKernel::new(*params).block(SpaceTimePoint::new(s, x), SpaceTimePoint::new(t, y))
}

pub fn assemble_skew(points: &[SpaceTimePoint], kernel: &PfKernel) -> Result<SkewMatrix> {
    kernel.assemble(points).map(|(m, _)| m)
}

pub fn correlation_pf(points: &[SpaceTimePoint], kernel: &PfKernel) -> Result<f64> {
    kernel.correlation(points).map(|(v, _)| v.value())
}

#[cfg(test)]
mod tests;
