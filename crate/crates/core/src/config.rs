//! Toolkit configuration file (TOML) and command-line overrides.
//!
//! Precedence is flag, then file, then built-in default.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::complexity::PenaltyConfig;
use crate::error::{Error, Result};
use crate::sim::SimConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolkitConfig {
    pub penalty: PenaltyConfig,
    pub lexicon_path: Option<PathBuf>,
    pub sim: Option<SimConfig>,
    pub output_dir: PathBuf,
}

impl Default for ToolkitConfig {
    fn default() -> Self {
        ToolkitConfig {
            penalty: PenaltyConfig::default(),
            lexicon_path: None,
            sim: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Penalty values given on the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PenaltyOverrides {
    pub n1: Option<u64>,
    pub n2: Option<u64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub lambda3: Option<f64>,
    pub alpha: Option<f64>,
}

impl PenaltyOverrides {
    pub fn apply(&self, cfg: &mut PenaltyConfig) {
        if let Some(v) = self.n1 {
            cfg.n1 = v;
        }
        if let Some(v) = self.n2 {
            cfg.n2 = v;
        }
        if let Some(v) = self.lambda1 {
            cfg.lambda1 = v;
        }
        if let Some(v) = self.lambda2 {
            cfg.lambda2 = v;
        }
        if let Some(v) = self.lambda3 {
            cfg.lambda3 = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
    }
}

impl ToolkitConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ToolkitConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ToolkitConfig::from_toml_str(&s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    pub fn apply_overrides(&mut self, overrides: &PenaltyOverrides) {
        overrides.apply(&mut self.penalty);
    }

    /// The simulator config, scoring with the toolkit-level `[penalty]` table.
    pub fn sim_config(&self) -> Option<SimConfig> {
        self.sim.clone().map(|sim| SimConfig {
            penalty: self.penalty,
            ..sim
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.penalty.validate()?;
        if let Some(sim) = self.sim_config() {
            sim.validate()?;
        }
        Ok(())
    }
}
