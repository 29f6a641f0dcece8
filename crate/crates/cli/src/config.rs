//! Run configuration: a TOML file with the same keys as the flags, flags winning.

use std::path::{Path, PathBuf};

use epsilon_core::padic::{is_prime, DEFAULT_TABLE_BUDGET};
use epsilon_core::scalar::{BackendMode, DEFAULT_TOLERANCE};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-case cap on summation terms when nothing else is configured.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("p = {0} is not an odd prime")]
    BadPrime(u64),
    #[error("t_max must be at least 1")]
    ZeroLevel,
    #[error("n must lie in 1..=8, got {0}")]
    BadRank(u32),
    #[error("no ranks given")]
    NoRanks,
    #[error("tolerance must be finite and non-negative, got {0}")]
    BadTolerance(f64),
    #[error("budget must be positive")]
    ZeroBudget,
    #[error("character tables mod {p}^{t} exceed the table budget of {budget} entries")]
    TableTooLarge { p: u64, t: u32, budget: u64 },
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
}

/// One verification run. Every sweep is exhaustive, so there is no seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub p: u64,
    pub t_max: u32,
    #[serde(rename = "n")]
    pub n_list: Vec<u32>,
    pub backend: BackendMode,
    pub tolerance: f64,
    /// Per-case cap on summation terms, `φ(p^t)^{n-1}` for Kloosterman sums.
    pub budget: u64,
    /// Largest `a(π)` in the representation sweeps; `t_max` when absent.
    pub max_conductor: Option<u32>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    /// Wall-clock timings make reports differ between runs, so they are opt-in.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 5,
            t_max: 2,
            n_list: vec![2, 3],
            backend: BackendMode::Exact,
            tolerance: DEFAULT_TOLERANCE,
            budget: DEFAULT_BUDGET,
            max_conductor: None,
            out: None,
            csv: None,
            timing: false,
        }
    }
}

/// Keys as they may appear in a config file; all optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub p: Option<u64>,
    pub t_max: Option<u32>,
    pub n: Option<Vec<u32>>,
    pub backend: Option<BackendMode>,
    pub tolerance: Option<f64>,
    pub budget: Option<u64>,
    pub max_conductor: Option<u32>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub timing: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// `self` on top of `base`.
    pub fn apply(&self, base: RunConfig) -> RunConfig {
        RunConfig {
            p: self.p.unwrap_or(base.p),
            t_max: self.t_max.unwrap_or(base.t_max),
            n_list: self.n.clone().unwrap_or(base.n_list),
            backend: self.backend.unwrap_or(base.backend),
            tolerance: self.tolerance.unwrap_or(base.tolerance),
            budget: self.budget.unwrap_or(base.budget),
            max_conductor: self.max_conductor.or(base.max_conductor),
            out: self.out.clone().or(base.out),
            csv: self.csv.clone().or(base.csv),
            timing: self.timing.unwrap_or(base.timing),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.p < 3 || !is_prime(self.p) {
            return Err(ConfigError::BadPrime(self.p));
        }
        if self.t_max == 0 {
            return Err(ConfigError::ZeroLevel);
        }
        if self.n_list.is_empty() {
            return Err(ConfigError::NoRanks);
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n == 0 || n > 8) {
            return Err(ConfigError::BadRank(n));
        }
        if !self.tolerance.is_finite() || self.tolerance < 0.0 {
            return Err(ConfigError::BadTolerance(self.tolerance));
        }
        if self.budget == 0 {
            return Err(ConfigError::ZeroBudget);
        }
        let top = self.t_max.max(self.conductor_bound());
        let too_big = self
            .p
            .checked_pow(top)
            .is_none_or(|m| m > DEFAULT_TABLE_BUDGET);
        if too_big {
            return Err(ConfigError::TableTooLarge {
                p: self.p,
                t: top,
                budget: DEFAULT_TABLE_BUDGET,
            });
        }
        Ok(())
    }

    pub fn conductor_bound(&self) -> u32 {
        self.max_conductor.unwrap_or(self.t_max)
    }

    /// Highest level any Gauss sum of the run lives at.
    pub fn bank_level(&self) -> u32 {
        self.t_max.max(self.conductor_bound())
    }

    /// Exact comparisons ignore the tolerance.
    pub fn effective_tolerance(&self) -> f64 {
        match self.backend {
            BackendMode::Exact => 0.0,
            BackendMode::Float => self.tolerance,
        }
    }

    pub fn ranks(&self) -> Vec<u32> {
        let mut n = self.n_list.clone();
        n.sort_unstable();
        n.dedup();
        n
    }
}
