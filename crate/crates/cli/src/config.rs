//! Run configuration: command-line flags layered over an optional
//! `key=value` file, then validated.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use tavis_core::{AtomCount, FockSpace};

use crate::initial::InitialStateSpec;
use crate::CliError;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Number of atoms (1, 2 or 3).
    #[arg(long, global = true)]
    pub atoms: Option<usize>,
    /// Retained Fock levels.
    #[arg(long, global = true)]
    pub cutoff: Option<usize>,
    /// Top Fock levels excluded from comparisons.
    #[arg(long, global = true)]
    pub guard: Option<usize>,
    /// Atom-field coupling.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub g: Option<f64>,
    /// Field frequency (resonant with the atoms).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t1: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// `<atomic>:fock(<m>)` or `<atomic>:coherent(<re>[+<im>i])`.
    #[arg(long, global = true)]
    pub initial: Option<String>,
    /// CSV output path (stdout if omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Highest odd power searched (3 or 5).
    #[arg(long = "max-power", global = true)]
    pub max_power: Option<usize>,
    /// Plain `key=value` file; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub atoms: AtomCount,
    pub space: FockSpace,
    pub g: f64,
    pub omega: f64,
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
    pub tol: f64,
    pub initial: InitialStateSpec,
    pub out: Option<PathBuf>,
    pub max_power: usize,
}

pub const DEFAULT_CUTOFF: usize = 60;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_STEPS: usize = 500;

const KEYS: [&str; 12] =
    ["atoms", "cutoff", "guard", "g", "omega", "t0", "t1", "steps", "tol", "initial", "out", "max-power"];

/// Parse a `key=value` file; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<HashMap<String, String>, CliError> {
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", lineno + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn from_file<T: FromStr>(file: &HashMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    file.get(key)
        .map(|v| v.parse::<T>().map_err(|_| CliError::Usage(format!("config: bad value `{v}` for `{key}`"))))
        .transpose()
}

fn finite(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Usage(format!("--{name} must be finite")))
    }
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => load(path)?,
            None => HashMap::new(),
        };
        macro_rules! pick {
            ($field:ident, $key:literal) => {
                match self.$field.clone() {
                    Some(v) => Some(v),
                    None => from_file(&file, $key)?,
                }
            };
        }

        let atoms_raw: usize = pick!(atoms, "atoms").unwrap_or(1);
        let atoms = AtomCount::new(atoms_raw).map_err(|e| CliError::Usage(e.to_string()))?;
        let cutoff: usize = pick!(cutoff, "cutoff").unwrap_or(DEFAULT_CUTOFF);
        let guard: usize = pick!(guard, "guard").unwrap_or_else(|| FockSpace::default_guard(cutoff));
        let space = FockSpace::new(cutoff, guard).map_err(|e| CliError::Usage(e.to_string()))?;

        let g = finite("g", pick!(g, "g").unwrap_or(1.0))?;
        let omega = finite("omega", pick!(omega, "omega").unwrap_or(1.0))?;
        let t0 = finite("t0", pick!(t0, "t0").unwrap_or(0.0))?;
        let t1 = finite("t1", pick!(t1, "t1").unwrap_or(10.0))?;
        if t1 < t0 {
            return Err(CliError::Usage(format!("t1 = {t1} precedes t0 = {t0}")));
        }
        let steps: usize = pick!(steps, "steps").unwrap_or(DEFAULT_STEPS);
        if steps == 0 {
            return Err(CliError::Usage("steps must be at least 1".into()));
        }
        let tol = finite("tol", pick!(tol, "tol").unwrap_or(DEFAULT_TOL))?;
        if tol <= 0.0 {
            return Err(CliError::Usage("tol must be positive".into()));
        }
        let initial_raw: Option<String> = pick!(initial, "initial");
        let initial = match initial_raw {
            Some(s) => s.parse::<InitialStateSpec>()?,
            None => InitialStateSpec::excited_vacuum(atoms),
        };
        initial.validate(atoms, space)?;
        let out: Option<PathBuf> = pick!(out, "out");
        let max_power: usize = pick!(max_power, "max-power").unwrap_or(5);
        if max_power != 3 && max_power != 5 {
            return Err(CliError::Usage(format!("max-power must be 3 or 5, got {max_power}")));
        }

        Ok(RunConfig { atoms, space, g, omega, t0, t1, steps, tol, initial, out, max_power })
    }
}

fn load(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_file(&text)
}

impl RunConfig {
    /// `steps + 1` evenly spaced times from `t0` to `t1` inclusive.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |k| self.t0 + (self.t1 - self.t0) * k as f64 / self.steps as f64)
    }
}
