//! Numerical core for noncolliding diffusions started from Gaussian-type
//! random matrix ensembles.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its arguments (the Monte Carlo routines take an explicit RNG),
//! so evaluation can be spread across threads by the caller.
//!
//! Module map:
//!
//! * [`specfun`]: Hermite, Laguerre, Gamma, modified Bessel `I_nu`, generalized binomial.
//! * [`matrixcore`]: Pfaffians, determinants, Jacobi eigensolver.
//! * [`densities`]: transition densities, ensemble laws, joint multitime densities.
//! * [`kernels_det`]: contour-integral determinantal kernel for noncolliding BM.
//! * [`kernels_pf`]: 2x2 Pfaffian kernels for GOE-type and chiral starts.
//! * [`mc_sim`]: matrix-valued Brownian motion oracle and histogram estimators.
//! * [`quad`]: Gauss-Legendre rules shared by the above.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod densities;
pub mod error;
pub mod kernels_det;
pub mod kernels_pf;
pub mod logval;
pub mod matrixcore;
pub mod mc_sim;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
pub use logval::SignedLog;

/// Observation point `(t, x)` of a space-time correlation function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimePoint {
    pub t: f64,
    pub x: f64,
}

impl SpaceTimePoint {
    pub const fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }
}
