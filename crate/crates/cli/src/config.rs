//! Run settings merged from flags, a `key = value` file and defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use nlev_core::export::{num, Header};
use nlev_core::{BilinearNonlinearity, Kernel, SolveOptions};

/// Bad user input that is not a numerical failure.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

/// Flags shared by every command. Unset flags fall back to the config file, then to defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// gaussian, tent, indicator or file:<path> (two-column `x,a` CSV)
    #[arg(long, global = true)]
    pub kernel: Option<String>,
    #[arg(long, global = true)]
    pub zeta: Option<f64>,
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Grid spacing
    #[arg(long, global = true)]
    pub h: Option<f64>,
    /// Grid half-width
    #[arg(long = "L", global = true)]
    pub half_width: Option<f64>,
    #[arg(long, global = true)]
    pub tol_power: Option<f64>,
    #[arg(long, global = true)]
    pub tol_bisect: Option<f64>,
    #[arg(long, global = true)]
    pub tol_transform: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` settings file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub kernel_selector: String,
    pub zeta: f64,
    pub theta: f64,
    pub eta: f64,
    pub h: f64,
    pub half_width: f64,
    /// Whether the half-width came from a flag or the file rather than the default.
    pub half_width_set: bool,
    pub tol_power: f64,
    pub tol_bisect: f64,
    pub tol_transform: f64,
    pub max_iter: usize,
    pub out: PathBuf,
}

const KEYS: [&str; 12] = [
    "kernel",
    "zeta",
    "theta",
    "eta",
    "h",
    "L",
    "tol_power",
    "tol_bisect",
    "tol_transform",
    "max_iter",
    "out",
    "config",
];

/// Parses `key = value` lines; `#` starts a comment, dashes in keys read as underscores.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| input_error(format!("config line {}: expected key = value", n + 1)))?;
        let key = k.trim().replace('-', "_");
        if key == "config" || !KEYS.contains(&key.as_str()) {
            return Err(input_error(format!("config line {}: unknown key `{}`", n + 1, k.trim())));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn from_file<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|_| input_error(format!("config key `{key}`: cannot parse `{v}`"))))
        .transpose()
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => parse_config(&read(p)?)?,
            None => BTreeMap::new(),
        };
        let half_width = args.half_width.or(from_file(&file, "L")?);
        Ok(Self {
            kernel_selector: args.kernel.clone().or(from_file(&file, "kernel")?).unwrap_or_else(|| "gaussian".into()),
            zeta: args.zeta.or(from_file(&file, "zeta")?).unwrap_or(0.0),
            theta: args.theta.or(from_file(&file, "theta")?).unwrap_or(0.6),
            eta: args.eta.or(from_file(&file, "eta")?).unwrap_or(2.5),
            h: args.h.or(from_file(&file, "h")?).unwrap_or(1e-3),
            half_width: half_width.unwrap_or(10.0),
            half_width_set: half_width.is_some(),
            tol_power: args.tol_power.or(from_file(&file, "tol_power")?).unwrap_or(1e-10),
            tol_bisect: args.tol_bisect.or(from_file(&file, "tol_bisect")?).unwrap_or(1e-8),
            tol_transform: args.tol_transform.or(from_file(&file, "tol_transform")?).unwrap_or(1e-8),
            max_iter: args.max_iter.or(from_file(&file, "max_iter")?).unwrap_or(100_000),
            out: args.out.clone().or(from_file(&file, "out")?).unwrap_or_else(|| PathBuf::from(".")),
        })
    }

    pub fn kernel(&self) -> Result<Kernel> {
        Ok(Kernel::from_selector(&self.kernel_selector)?)
    }

    pub fn params(&self) -> Result<BilinearNonlinearity> {
        Ok(BilinearNonlinearity::new(self.zeta, self.theta, self.eta)?)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            spacing: self.h,
            half_width: self.half_width,
            tol_power: self.tol_power,
            tol_bisect: self.tol_bisect,
            tol_transform: self.tol_transform,
            max_iter: self.max_iter,
        }
    }

    pub fn header(&self, command: &str) -> Header {
        Header::new(command)
            .with("kernel", &self.kernel_selector)
            .with("zeta", num(self.zeta))
            .with("theta", num(self.theta))
            .with("eta", num(self.eta))
            .with("h", num(self.h))
            .with("L", num(self.half_width))
            .with("tol_power", num(self.tol_power))
            .with("tol_bisect", num(self.tol_bisect))
            .with("tol_transform", num(self.tol_transform))
            .with("max_iter", self.max_iter)
    }

    /// Creates the output directory and returns `dir/name`.
    pub fn output(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out)
            .with_context(|| format!("cannot create output directory {}", self.out.display()))?;
        Ok(self.out.join(name))
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| input_error(format!("cannot read config {}: {e}", path.display())))
}
