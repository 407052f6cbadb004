//! Validated run configuration shared by the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use mindisc::{Error, Result};

use crate::{Cli, Command};

pub const THREADS_ENV: &str = "MINDISC_THREADS";

/// Overrides of module defaults given on the command line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub eta: Option<f64>,
    pub lambda_e: Option<f64>,
    pub rings: Option<usize>,
    pub max_iters: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub inputs: Vec<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub overrides: Overrides,
    /// `None` leaves the thread count to the pool default.
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let threads = match cli.threads {
            Some(n) => Some(n),
            None => match std::env::var(THREADS_ENV) {
                Ok(s) if !s.trim().is_empty() => Some(
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("{THREADS_ENV}={s:?} is not a thread count")))?,
                ),
                _ => None,
            },
        };
        let none = Overrides::default();
        let cfg = match &cli.command {
            Command::Solve(a) => Self {
                subcommand: "solve",
                inputs: vec![a.problem.clone()],
                output: Some(a.output.clone()),
                seed: a.seed,
                overrides: Overrides { lambda_e: a.lambda_e, rings: a.rings, max_iters: a.max_iters, ..none },
                threads,
            },
            Command::Analyze(a) => Self {
                subcommand: "analyze",
                inputs: [Some(a.solution_dir.clone()), a.config.clone()].into_iter().flatten().collect(),
                output: Some(a.output.clone().unwrap_or_else(|| a.solution_dir.clone())),
                seed: a.seed,
                overrides: Overrides { eta: a.eta, ..none },
                threads,
            },
            Command::Fill(a) => Self {
                subcommand: "fill",
                inputs: vec![a.curve.clone()],
                output: Some(a.output.clone()),
                seed: None,
                overrides: Overrides { eta: a.eta, lambda_e: a.lambda_e, rings: a.rings, ..none },
                threads,
            },
            Command::Areas(a) => Self {
                subcommand: "areas",
                inputs: vec![a.norm.clone()],
                output: None,
                seed: None,
                overrides: none,
                threads,
            },
            Command::Fixtures(a) => Self {
                subcommand: "fixtures",
                inputs: Vec::new(),
                output: Some(a.output.clone()),
                seed: None,
                overrides: Overrides { rings: a.rings, ..none },
                threads,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.threads == Some(0) {
            return Err(Error::Config("thread count must be at least 1".into()));
        }
        let o = &self.overrides;
        if let Some(eta) = o.eta {
            if !(0.0..1.0).contains(&eta) {
                return Err(Error::Config(format!("--eta {eta} not in [0, 1)")));
            }
        }
        if let Some(l) = o.lambda_e {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Config(format!("--lambda-e {l} must be positive")));
            }
        }
        if let Some(r) = o.rings {
            if !(1..=200).contains(&r) {
                return Err(Error::Config(format!("--rings {r} not in [1, 200]")));
            }
        }
        if o.max_iters == Some(0) {
            return Err(Error::Config("--max-iters must be positive".into()));
        }
        for p in &self.inputs {
            if !p.exists() {
                return Err(Error::Config(format!("{}: no such file or directory", p.display())));
            }
        }
        if let Some(dir) = &self.output {
            ensure_writable(dir)?;
        }
        Ok(())
    }
}

fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = fs::metadata(dir).map_err(|e| Error::io(dir, e))?;
    if !meta.is_dir() || meta.permissions().readonly() {
        return Err(Error::Config(format!("{}: output directory is not writable", dir.display())));
    }
    Ok(())
}
