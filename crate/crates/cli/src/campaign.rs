//! Parallel Monte Carlo campaigns. Paths are grouped in fixed blocks and the
//! block estimators are merged in block order, so results do not depend on
//! the worker count.

use anyhow::{anyhow, Result};
use noncolliding_core::mc_sim::{
    besq_window, evolve_besq, evolve_bm, path_rng, sample_initial, EnsembleSpec, Estimates, EstimatorSpec, PathSample,
};
use rayon::prelude::*;

pub const BLOCK: usize = 512;
/// Path streams at and above this offset are reserved for pilot runs.
const PILOT_STREAM: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dynamics {
    Bm,
    /// Laguerre process with integer index.
    Besq(u32),
}

#[derive(Debug, Clone)]
pub struct CampaignOutput {
    pub estimates: Estimates,
    pub paths: usize,
    /// Paths dropped because the eigensolver failed or produced a tie.
    pub failures: usize,
}

fn simulate(spec: &EnsembleSpec, dynamics: Dynamics, times: &[f64], seed: u64, stream: u64) -> noncolliding_core::Result<PathSample> {
    let mut rng = path_rng(seed, stream);
    let init = sample_initial(spec, &mut rng)?;
    match dynamics {
        Dynamics::Bm => evolve_bm(&init, times, &mut rng),
        Dynamics::Besq(nu) => evolve_besq(nu, &init, times, &mut rng),
    }
}

/// Runs `n_paths` paths on the current rayon pool.
pub fn run(
    spec: &EnsembleSpec,
    dynamics: Dynamics,
    times: &[f64],
    n_paths: usize,
    seed: u64,
    est: &EstimatorSpec,
) -> Result<CampaignOutput> {
    let blocks = n_paths.div_ceil(BLOCK);
    let parts: Vec<(Estimates, usize)> = (0..blocks)
        .into_par_iter()
        .map(|b| -> Result<(Estimates, usize)> {
            let mut e = Estimates::new(est);
            let mut failures = 0;
            for i in b * BLOCK..((b + 1) * BLOCK).min(n_paths) {
                match simulate(spec, dynamics, times, seed, i as u64) {
                    Ok(p) => e.add_path(est, &p)?,
                    Err(_) => failures += 1,
                }
            }
            Ok((e, failures))
        })
        .collect::<Result<_>>()?;
    let mut estimates = Estimates::new(est);
    let mut failures = 0;
    for (e, f) in &parts {
        estimates.merge(e)?;
        failures += f;
    }
    Ok(CampaignOutput { estimates, paths: n_paths, failures })
}

/// Quantile-capped `[0, cap)` windows per time from a pilot run on reserved streams.
pub fn besq_pilot_windows(
    spec: &EnsembleSpec,
    nu: u32,
    times: &[f64],
    pilot: usize,
    seed: u64,
    q: f64,
    bins: usize,
) -> Result<Vec<noncolliding_core::mc_sim::Window>> {
    let paths: Vec<PathSample> = (0..pilot as u64)
        .into_par_iter()
        .filter_map(|i| simulate(spec, Dynamics::Besq(nu), times, seed, PILOT_STREAM + i).ok())
        .collect();
    if paths.is_empty() {
        return Err(anyhow!("pilot run produced no paths"));
    }
    (0..times.len()).map(|k| besq_window(&paths, k, q, 0.05, bins).map_err(Into::into)).collect()
}

/// Runs `f` on a pool of `workers` threads (all cores when `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w.max(1));
    }
    Ok(b.build()?.install(f))
}
