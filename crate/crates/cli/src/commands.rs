//! Subcommand implementations. Each returns the process exit code; errors map to 2.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Subcommand};
use noncolliding_core::densities::{BesqParams, Configuration};
use noncolliding_core::kernels_det::{correlation_det, DetKernelParams, InitialConfig};
use noncolliding_core::kernels_pf::{PfKernel, PfKernelParams, Truncation};
use noncolliding_core::mc_sim::{EnsembleKind, EnsembleSpec, EstimatorSpec, Window};
use noncolliding_core::{SignedLog, SpaceTimePoint};
use rayon::prelude::*;
use serde_json::json;

use crate::campaign::{self, Dynamics};
use crate::checks;
use crate::config::{CommonArgs, Ensemble, FileConfig, Process, RunConfig};
use crate::format::{emit, metadata_line, Csv, GIT_DESCRIBE};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One-point function rho(t, x) on a grid, as CSV.
    Density(DensityArgs),
    /// Correlation function at the points of a file, as JSON.
    Correlate(CorrelateArgs),
    /// Identity and Monte Carlo checks with a JSON report.
    Verify(VerifyArgs),
    /// Monte Carlo histogram tables from matrix-valued diffusions.
    Mc(McArgs),
}

/// Initial configuration for the determinantal kernel instead of an ensemble.
#[derive(Debug, Clone, Default, Args)]
pub struct FixedStart {
    /// Fixed initial points (comma separated); selects the contour-integral kernel.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xi: Option<Vec<f64>>,
    /// Start all particles at the origin; selects the contour-integral kernel.
    #[arg(long)]
    pub delta0: bool,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub start: FixedStart,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub start: FixedStart,
    /// File with one `t x` pair per line (`#` starts a comment).
    #[arg(long)]
    pub points: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Suites to run (comma separated): pf2det, normalization, lemma, shift,
    /// mc-bm, mc-besq, cross, truncation, or all.
    #[arg(long, value_delimiter = ',')]
    pub suite: Option<Vec<String>>,
    /// Cap on Monte Carlo samples and paths.
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Initial ensemble (default: goe for bm, chgoe for besq).
    #[arg(long, value_enum)]
    pub ensemble: Option<Ensemble>,
    /// Observation times (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// One-point bins.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Bins per axis of the same-time pair histogram.
    #[arg(long)]
    pub bins2: Option<usize>,
}

pub fn run(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Density(a) => density(a),
        Command::Correlate(a) => correlate(a),
        Command::Verify(a) => verify(a),
        Command::Mc(a) => mc(a),
    }
}

fn setup(common: &CommonArgs) -> Result<(RunConfig, FileConfig)> {
    let file = FileConfig::load(common.config.as_deref())?;
    let cfg = RunConfig::resolve(common, &file)?;
    Ok((cfg, file))
}

enum Evaluator {
    Pf(PfKernel),
    Det(InitialConfig, DetKernelParams),
}

impl Evaluator {
    fn new(cfg: &RunConfig, start: &FixedStart, file: &FileConfig) -> Result<Self> {
        let xi = start.xi.clone().or_else(|| file.xi.clone());
        let delta0 = start.delta0 || file.delta0.unwrap_or(false);
        if xi.is_some() || delta0 {
            if cfg.process != Process::Bm {
                bail!("fixed starts are available for --process bm only");
            }
            let init = match xi {
                Some(_) if delta0 => bail!("--xi and --delta0 are exclusive"),
                Some(v) => InitialConfig::Atoms(Configuration::new(v)?),
                None => InitialConfig::Delta0(cfg.n),
            };
            return Ok(Evaluator::Det(init, DetKernelParams::default()));
        }
        let trunc = Truncation { tol: cfg.tol, l_max: cfg.l_max, ..Truncation::default() };
        let params = match cfg.process {
            Process::Bm => PfKernelParams::bm(cfg.n, cfg.sigma2)?,
            Process::Besq => PfKernelParams::besq(cfg.n, cfg.sigma2, BesqParams::new(cfg.nu, cfg.a)?)?,
        };
        Ok(Evaluator::Pf(PfKernel::new(params.with_truncation(trunc)?)))
    }

    /// Correlation with the most series terms used (Pfaffian kernels only).
    fn correlation(&self, points: &[SpaceTimePoint]) -> Result<(SignedLog, Option<usize>)> {
        match self {
            Evaluator::Pf(k) => {
                let (v, r) = k.correlation(points)?;
                Ok((v, Some(r.max_terms)))
            }
            Evaluator::Det(init, p) => Ok((correlation_det(init, points, p)?, None)),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Evaluator::Pf(_) => "pfaffian",
            Evaluator::Det(..) => "determinantal",
        }
    }
}

fn common_meta(cfg: &RunConfig) -> Vec<(&'static str, String)> {
    vec![
        ("seed", cfg.seed.to_string()),
        ("process", format!("{:?}", cfg.process).to_lowercase()),
        ("n", cfg.n.to_string()),
        ("sigma2", cfg.sigma2.to_string()),
        ("nu", cfg.nu.to_string()),
        ("a", cfg.a.to_string()),
        ("tol", cfg.tol.to_string()),
        ("l_max", cfg.l_max.to_string()),
    ]
}

fn density(args: DensityArgs) -> Result<i32> {
    let (cfg, file) = setup(&args.common)?;
    let eval = Evaluator::new(&cfg, &args.start, &file)?;
    let t = args.t.or(file.t).ok_or_else(|| anyhow!("--t is required"))?;
    if !(t > 0.0) {
        bail!("--t must be positive");
    }
    let grid = args.grid.or(file.grid).unwrap_or(201);
    if grid < 2 {
        bail!("--grid needs at least two points");
    }
    let shift = args.start.xi.as_ref().or(file.xi.as_ref()).map_or(0.0, |v| v.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    let (lo_default, hi_default) = match cfg.process {
        Process::Bm => {
            let h = 6.0 * (cfg.sigma2 + t).sqrt() + shift;
            (-h, h)
        }
        Process::Besq => {
            let hi = 8.0 * (cfg.sigma2 + 2.0 * t) * (cfg.n as f64 + cfg.nu + 1.0);
            (hi / (2.0 * grid as f64), hi)
        }
    };
    let lo = args.x_min.or(file.x_min).unwrap_or(lo_default);
    let hi = args.x_max.or(file.x_max).unwrap_or(hi_default);
    if !(hi > lo) {
        bail!("--x-max must exceed --x-min");
    }
    let h = (hi - lo) / (grid - 1) as f64;
    let xs: Vec<f64> = (0..grid).map(|i| lo + i as f64 * h).collect();
    let rho = campaign::with_workers(cfg.workers, || {
        xs.par_iter().map(|&x| eval.correlation(&[SpaceTimePoint::new(t, x)]).map(|v| v.0.value())).collect::<Result<Vec<f64>>>()
    })??;
    let integral = h * (rho.iter().sum::<f64>() - 0.5 * (rho[0] + rho[grid - 1]));
    let mut meta = common_meta(&cfg);
    meta.push(("kernel", eval.label().to_string()));
    meta.push(("t", t.to_string()));
    let mut csv = Csv::new(&meta, &["x", "rho"]);
    for (x, r) in xs.iter().zip(&rho) {
        csv.row(&[*x, *r]);
    }
    csv.labelled_row("integral", &[integral]);
    emit(cfg.out.as_deref(), csv.as_str())?;
    Ok(0)
}

/// `t x` or `t,x` per line; blank lines and `#` comments are skipped.
pub fn parse_points(text: &str) -> Result<Vec<SpaceTimePoint>> {
    let mut pts = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if fields.len() != 2 {
            bail!("line {}: expected `t x`", no + 1);
        }
        let t: f64 = fields[0].parse().with_context(|| format!("line {}: bad t", no + 1))?;
        let x: f64 = fields[1].parse().with_context(|| format!("line {}: bad x", no + 1))?;
        pts.push(SpaceTimePoint::new(t, x));
    }
    if pts.is_empty() {
        bail!("no points given");
    }
    Ok(pts)
}

fn correlate(args: CorrelateArgs) -> Result<i32> {
    let (cfg, file) = setup(&args.common)?;
    let eval = Evaluator::new(&cfg, &args.start, &file)?;
    let path = args.points.or(file.points).ok_or_else(|| anyhow!("--points is required"))?;
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let pts = parse_points(&text)?;
    let (v, terms) = eval.correlation(&pts)?;
    let report = json!({
        "git": GIT_DESCRIBE,
        "config": cfg,
        "kernel": eval.label(),
        "points": pts.iter().map(|p| [p.t, p.x]).collect::<Vec<_>>(),
        "value": v.value(),
        "log_abs": v.log_abs,
        "sign": v.sign,
        "truncation": { "max_terms": terms, "tol": cfg.tol, "l_max": cfg.l_max },
    });
    emit(cfg.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    Ok(0)
}

fn verify(args: VerifyArgs) -> Result<i32> {
    let (cfg, file) = setup(&args.common)?;
    let mut suites = args.suite.or(file.suite).unwrap_or_else(|| vec!["all".to_string()]);
    if suites.iter().any(|s| s == "all") {
        suites = checks::SUITES.iter().map(|s| s.to_string()).collect();
    }
    for s in &suites {
        if !checks::SUITES.contains(&s.as_str()) {
            bail!("unknown suite `{s}`");
        }
    }
    let budget = args.budget.or(file.budget).unwrap_or(20_000);
    let results = campaign::with_workers(cfg.workers, || {
        suites.iter().map(|s| (s.clone(), checks::run_suite(s, budget, cfg.seed).unwrap_or_default())).collect::<Vec<_>>()
    })?;
    let mut all_pass = true;
    for (suite, list) in &results {
        for c in list {
            all_pass &= c.pass;
            eprintln!("{} {} [{suite}] {}: measured {:e}, tolerance {:e}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.name, c.measured, c.tolerance);
        }
    }
    let report = json!({
        "git": GIT_DESCRIBE,
        "seed": cfg.seed,
        "budget": budget,
        "suites": results.iter().map(|(s, l)| json!({ "suite": s, "checks": l })).collect::<Vec<_>>(),
        "all_pass": all_pass,
    });
    emit(cfg.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    Ok(if all_pass { 0 } else { 1 })
}

fn mc(args: McArgs) -> Result<i32> {
    let (cfg, file) = setup(&args.common)?;
    let started = Instant::now();
    let ensemble = args.ensemble.or(file.ensemble).unwrap_or(match cfg.process {
        Process::Bm => Ensemble::Goe,
        Process::Besq => Ensemble::Chgoe,
    });
    let nu_int = || -> Result<u32> {
        if cfg.nu >= 0.0 && cfg.nu.fract() == 0.0 && cfg.nu <= 64.0 {
            Ok(cfg.nu as u32)
        } else {
            bail!("matrix models need an integer --nu in [0, 64]")
        }
    };
    let kind = match ensemble {
        Ensemble::Goe => EnsembleKind::Goe,
        Ensemble::Gue => EnsembleKind::Gue,
        Ensemble::Chgoe => EnsembleKind::ChGoe(nu_int()?),
        Ensemble::Chgue => EnsembleKind::ChGue(nu_int()?),
    };
    let dynamics = match cfg.process {
        Process::Bm => Dynamics::Bm,
        Process::Besq => {
            if matches!(kind, EnsembleKind::Goe | EnsembleKind::Gue) {
                bail!("BESQ paths need a chiral (nonnegative) initial ensemble");
            }
            Dynamics::Besq(nu_int()?)
        }
    };
    let spec = EnsembleSpec::new(kind, cfg.n, cfg.sigma2)?;
    let times = args.times.or(file.times).unwrap_or_else(|| vec![0.5, 2.0]);
    let paths = args.paths.or(file.paths).unwrap_or(10_000);
    if paths < 100 {
        bail!("--paths must be at least 100");
    }
    let bins = args.bins.or(file.bins).unwrap_or(48);
    let bins2 = args.bins2.or(file.bins2).unwrap_or(16);
    let out_dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("mc_out"));
    let run = campaign::with_workers(cfg.workers, || -> Result<campaign::CampaignOutput> {
        let (one, two) = match dynamics {
            Dynamics::Bm => {
                let one = times.iter().map(|&t| Window::bm_default(cfg.sigma2, t, bins)).collect::<Result<Vec<_>, _>>()?;
                let two = times
                    .iter()
                    .map(|&t| {
                        let h = 4.0 * (cfg.sigma2 + t).sqrt();
                        Window::new(-h, h, bins2)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                (one, two)
            }
            Dynamics::Besq(nu) => {
                let pilot = (paths / 20).clamp(100, 5000);
                (
                    campaign::besq_pilot_windows(&spec, nu, &times, pilot, cfg.seed, 0.999, bins)?,
                    campaign::besq_pilot_windows(&spec, nu, &times, pilot, cfg.seed, 0.99, bins2)?,
                )
            }
        };
        let est = EstimatorSpec { one_point: one, same_time: two, two_time: vec![] };
        campaign::run(&spec, dynamics, &times, paths, cfg.seed, &est)
    })??;
    let mut meta = common_meta(&cfg);
    meta.push(("ensemble", format!("{ensemble:?}").to_lowercase()));
    meta.push(("paths", paths.to_string()));
    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for (i, &t) in times.iter().enumerate() {
        let mut m = meta.clone();
        m.push(("t", t.to_string()));
        let h1 = &run.estimates.one_point[i];
        let mut csv = Csv::new(&m, &["bin_center", "density", "stderr", "n_samples", "count"]);
        for (c, d, se, count) in h1.rows() {
            csv.row(&[c, d, se, h1.samples as f64, count]);
        }
        emit(Some(&out_dir.join(format!("rho1_t{i}.csv"))), csv.as_str())?;
        let h2 = &run.estimates.same_time[i];
        let mut csv = Csv::new(&m, &["x_center", "y_center", "density", "stderr", "n_samples", "count"]);
        for (x, y, d, se, count) in h2.rows() {
            csv.row(&[x, y, d, se, h2.samples as f64, count]);
        }
        emit(Some(&out_dir.join(format!("rho2_t{i}.csv"))), csv.as_str())?;
    }
    let meta_json = json!({
        "git": GIT_DESCRIBE,
        "seed": cfg.seed,
        "config": cfg,
        "ensemble": ensemble,
        "times": times,
        "paths": paths,
        "failures": run.failures,
        "wall_time_s": started.elapsed().as_secs_f64(),
        "header": metadata_line(&meta).trim_end(),
    });
    emit(Some(&out_dir.join("meta.json")), &(serde_json::to_string_pretty(&meta_json)? + "\n"))?;
    if run.failures as f64 > 1e-3 * paths as f64 {
        eprintln!("eigensolver failures on {} of {paths} paths", run.failures);
        return Ok(2);
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_file_formats() {
        let p = parse_points("# header\n0.5 1.0\n1.5, -2\n\n").unwrap();
        assert_eq!(p, vec![SpaceTimePoint::new(0.5, 1.0), SpaceTimePoint::new(1.5, -2.0)]);
        assert!(parse_points("1 2 3").is_err());
        assert!(parse_points("").is_err());
    }
}
