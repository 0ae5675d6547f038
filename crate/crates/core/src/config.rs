//! Solver settings from a TOML file of `key = value` lines:
//!
//! ```toml
//! ga.population_size = 200
//! ga.mutation_rate = 0.05
//! vns.stall_limit = 2000
//! vns.local_search_mode = "best_improvement"
//! oracle.max_clusters = 8
//! ```
//!
//! Missing keys keep their defaults; unknown keys are rejected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::OracleLimits;
use crate::ga::GaConfig;
use crate::vns::VnsConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("config parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub ga: GaConfig,
    pub vns: VnsConfig,
    pub oracle: OracleLimits,
}

impl SolverConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config values are representable in TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.ga.validate()?;
        self.vns.validate()
    }
}
