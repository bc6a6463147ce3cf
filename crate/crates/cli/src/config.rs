//! Flags, the optional TOML file, and their merge (flags win).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Bm,
    Besq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Goe,
    Gue,
    Chgoe,
    Chgue,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum)]
    pub process: Option<Process>,
    /// Number of particles.
    #[arg(long)]
    pub n: Option<usize>,
    /// Variance parameter of the initial ensemble.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Bessel index.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Exponent of the chiral weight x^a e^{-x/2 sigma2}.
    #[arg(long)]
    pub a: Option<f64>,
    /// Series truncation tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Series index cap.
    #[arg(long)]
    pub l_max: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file (directory for `mc`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with defaults for any flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Keys accepted in the TOML file; names match the long flags with `_` for `-`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub process: Option<Process>,
    pub n: Option<usize>,
    pub sigma2: Option<f64>,
    pub nu: Option<f64>,
    pub a: Option<f64>,
    pub tol: Option<f64>,
    pub l_max: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub t: Option<f64>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub grid: Option<usize>,
    pub xi: Option<Vec<f64>>,
    pub delta0: Option<bool>,
    pub points: Option<PathBuf>,
    pub suite: Option<Vec<String>>,
    pub budget: Option<usize>,
    pub ensemble: Option<Ensemble>,
    pub times: Option<Vec<f64>>,
    pub paths: Option<usize>,
    pub bins: Option<usize>,
    pub bins2: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))
            }
        }
    }
}

/// Settings shared by every command after merging.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub process: Process,
    pub n: usize,
    pub sigma2: f64,
    pub nu: f64,
    pub a: f64,
    pub tol: f64,
    pub l_max: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs, file: &FileConfig) -> Result<Self> {
        let cfg = Self {
            process: args.process.or(file.process).unwrap_or(Process::Bm),
            n: args.n.or(file.n).unwrap_or(2),
            sigma2: args.sigma2.or(file.sigma2).unwrap_or(1.0),
            nu: args.nu.or(file.nu).unwrap_or(1.0),
            a: args.a.or(file.a).unwrap_or(0.0),
            tol: args.tol.or(file.tol).unwrap_or(1e-12),
            l_max: args.l_max.or(file.l_max).unwrap_or(400),
            seed: args.seed.or(file.seed).unwrap_or(20240601),
            workers: args.workers.or(file.workers),
            out: args.out.clone().or_else(|| file.out.clone()),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            bail!("--n must be positive");
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            bail!("--sigma2 must be positive");
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            bail!("--tol must lie in (0, 1)");
        }
        if self.workers == Some(0) {
            bail!("--workers must be positive");
        }
        if self.process == Process::Besq && !(self.nu > -1.0 && self.a > -1.0 && self.a <= self.nu) {
            bail!("BESQ needs nu > -1 and -1 < a <= nu");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str("n = 4\nsigma2 = 2.0\nseed = 9").unwrap();
        let args = CommonArgs { n: Some(6), ..Default::default() };
        let cfg = RunConfig::resolve(&args, &file).unwrap();
        assert_eq!((cfg.n, cfg.sigma2, cfg.seed), (6, 2.0, 9));
    }

    #[test]
    fn invalid_values_rejected() {
        let args = CommonArgs { sigma2: Some(-1.0), ..Default::default() };
        assert!(RunConfig::resolve(&args, &FileConfig::default()).is_err());
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
    }
}
