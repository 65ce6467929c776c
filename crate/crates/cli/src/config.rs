//! Experiment configuration, assembled from defaults, an optional JSON file
//! and command-line flags (flags win).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum System {
    #[serde(rename = "2x2")]
    TwoQubit,
    #[serde(rename = "2x3")]
    QubitQutrit,
}

impl System {
    pub fn dims(self) -> [usize; 2] {
        match self {
            System::TwoQubit => [2, 2],
            System::QubitQutrit => [2, 3],
        }
    }

    pub fn dim(self) -> usize {
        self.dims().iter().product()
    }

    pub fn min_purity(self) -> f64 {
        1.0 / self.dim() as f64
    }
}

impl FromStr for System {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "2x2" => Ok(System::TwoQubit),
            "2x3" => Ok(System::QubitQutrit),
            _ => Err(CliError::Config(format!("unknown system '{s}', expected 2x2 or 2x3"))),
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            System::TwoQubit => "2x2",
            System::QubitQutrit => "2x3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    General,
    X,
    Lx,
    Tgx,
    Mems,
    H,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::General => "general",
            Family::X => "x",
            Family::Lx => "lx",
            Family::Tgx => "tgx",
            Family::Mems => "mems",
            Family::H => "h",
        }
    }
}

impl FromStr for Family {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "general" => Family::General,
            "x" => Family::X,
            "lx" => Family::Lx,
            "tgx" => Family::Tgx,
            "mems" => Family::Mems,
            "h" => Family::H,
            _ => return Err(CliError::Config(format!("unknown family '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: System,
    pub family: Family,
    pub rank: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub budget: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: System::TwoQubit,
            family: Family::General,
            rank: None,
            samples: 10_000,
            seed: 0,
            tol: xlab_core::epuconv::DEFAULT_TOL_C,
            budget: 100_000,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.samples == 0 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        if let Some(r) = self.rank {
            if r == 0 || r > self.system.dim() {
                return Err(CliError::Config(format!("rank {r} invalid for system {}", self.system)));
            }
        }
        match (self.family, self.system) {
            (Family::Lx | Family::Tgx, System::TwoQubit) => {
                return Err(CliError::Config(format!("family {} requires system 2x3", self.family.tag())))
            }
            (Family::X | Family::H, System::QubitQutrit) => {
                return Err(CliError::Config(format!("family {} requires system 2x2", self.family.tag())))
            }
            _ => {}
        }
        if self.tol.is_nan() || self.tol <= 0.0 || self.budget == 0 {
            return Err(CliError::Config("tol must be positive and budget at least 1".into()));
        }
        Ok(())
    }
}

/// Every field optional; mirrors the command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub system: Option<System>,
    pub family: Option<Family>,
    pub rank: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub budget: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<String>,
    pub plot: Option<String>,
    pub format: Option<String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: ConfigFile) -> ConfigFile {
        ConfigFile {
            system: over.system.or(self.system),
            family: over.family.or(self.family),
            rank: over.rank.or(self.rank),
            samples: over.samples.or(self.samples),
            seed: over.seed.or(self.seed),
            tol: over.tol.or(self.tol),
            budget: over.budget.or(self.budget),
            threads: over.threads.or(self.threads),
            out: over.out.or(self.out),
            plot: over.plot.or(self.plot),
            format: over.format.or(self.format),
        }
    }

    pub fn experiment(&self) -> CliResult<ExperimentConfig> {
        let d = ExperimentConfig::default();
        let cfg = ExperimentConfig {
            system: self.system.unwrap_or(d.system),
            family: self.family.unwrap_or(d.family),
            rank: self.rank,
            samples: self.samples.unwrap_or(d.samples),
            seed: self.seed.unwrap_or(d.seed),
            tol: self.tol.unwrap_or(d.tol),
            budget: self.budget.unwrap_or(d.budget),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
