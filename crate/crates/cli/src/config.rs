//! Run metadata file. Algorithm keys keep their conventional names
//! (`J1`, `M0`, `Ls`, ...); `s`, `rad` and `red` are accepted and ignored.

use std::path::{Path, PathBuf};

use mmd_core::dsa::DEFAULT_NUFFT_TOLERANCE;
use mmd_core::rdsa::RdsaConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rdsa1,
    Rdsa2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<toml::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rad: Option<toml::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub red: Option<toml::Value>,
    #[serde(rename = "J1", default = "defaults::j1")]
    pub j1: usize,
    #[serde(rename = "J2", default = "defaults::j2")]
    pub j2: usize,
    #[serde(rename = "M0", default)]
    pub m0: usize,
    #[serde(rename = "M1", default, skip_serializing_if = "Option::is_none")]
    pub m1: Option<usize>,
    #[serde(default = "defaults::block")]
    pub b: usize,
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon2: Option<f64>,
    #[serde(rename = "Ls", default = "defaults::shape_len")]
    pub ls: usize,
    /// Expected signal length, checked when present.
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub len: Option<usize>,

    pub signal: PathBuf,
    pub phases: Vec<PathBuf>,
    /// Nominal `N` per phase; defaults to the rounded phase advance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fundamentals: Option<Vec<f64>>,
    #[serde(default = "defaults::scheme")]
    pub scheme: Scheme,
    /// Bands `l` for which `M_l` approximations are written.
    #[serde(default)]
    pub levels: Vec<usize>,
    #[serde(default = "defaults::nufft_tolerance")]
    pub nufft_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub binary: bool,
}

mod defaults {
    use super::*;

    pub fn j1() -> usize {
        RdsaConfig::default().j1
    }
    pub fn j2() -> usize {
        RdsaConfig::default().j2
    }
    pub fn block() -> usize {
        RdsaConfig::default().block
    }
    pub fn epsilon() -> f64 {
        RdsaConfig::default().epsilon
    }
    pub fn shape_len() -> usize {
        RdsaConfig::default().shape_len
    }
    pub fn scheme() -> Scheme {
        Scheme::Rdsa2
    }
    pub fn nufft_tolerance() -> f64 {
        DEFAULT_NUFFT_TOLERANCE
    }
}

impl RunConfig {
    /// A config with default algorithm settings for the given files.
    pub fn for_files(signal: PathBuf, phases: Vec<PathBuf>) -> Self {
        Self {
            s: None,
            rad: None,
            red: None,
            j1: defaults::j1(),
            j2: defaults::j2(),
            m0: 0,
            m1: None,
            b: defaults::block(),
            epsilon: defaults::epsilon(),
            epsilon1: None,
            epsilon2: None,
            ls: defaults::shape_len(),
            len: None,
            signal,
            phases,
            fundamentals: None,
            scheme: defaults::scheme(),
            levels: Vec::new(),
            nufft_tolerance: defaults::nufft_tolerance(),
            output: None,
            binary: false,
        }
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    /// Loads a config and resolves relative paths against its directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        if !path.exists() {
            return Err(CliError::Validation(format!("{} does not exist", path.display())));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };
        cfg.signal = resolve(&cfg.signal);
        cfg.phases = cfg.phases.iter().map(resolve).collect();
        cfg.output = cfg.output.as_ref().map(resolve);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn algorithm(&self) -> CliResult<RdsaConfig> {
        let cfg = RdsaConfig {
            j1: self.j1,
            j2: self.j2,
            m0: self.m0,
            m1: self.m1,
            block: self.b,
            epsilon: self.epsilon,
            epsilon1: self.epsilon1.unwrap_or(self.epsilon),
            epsilon2: self.epsilon2.unwrap_or(self.epsilon),
            shape_len: self.ls,
            nufft_tolerance: self.nufft_tolerance,
        };
        cfg.validate().map_err(CliError::input)?;
        if self.ls < 2 || self.ls % 2 != 0 {
            return Err(CliError::Validation(format!("Ls must be even and at least 2, got {}", self.ls)));
        }
        if self.phases.is_empty() {
            return Err(CliError::Validation("at least one phase file is required".into()));
        }
        if let Some(f) = &self.fundamentals {
            if f.len() != self.phases.len() {
                return Err(CliError::Validation(format!(
                    "{} fundamentals for {} phases",
                    f.len(),
                    self.phases.len()
                )));
            }
        }
        if self.scheme == Scheme::Rdsa2 && self.m1.is_some() {
            return Err(CliError::Validation("M1 applies to rdsa1 only".into()));
        }
        Ok(cfg)
    }
}
