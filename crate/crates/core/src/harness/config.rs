use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::nn::NetworkConfig;
use crate::rl::TrainConfig;
use crate::stages::{StageKind, StageSpec};

/// Everything needed to reproduce a training or evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Seeds the learner's random streams.
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Write a per-step log next to the training log.
    pub step_log: bool,
    /// Gzip the per-step log.
    pub compress_step_log: bool,
    pub stage: StageSpec,
    pub env: EnvConfig,
    pub network: NetworkConfig,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out_dir: PathBuf::from("runs/default"),
            step_log: true,
            compress_step_log: false,
            stage: StageSpec::preset(StageKind::Static, 0),
            env: EnvConfig::default(),
            network: NetworkConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.stage.validate()?;
        self.env.validate()?;
        self.network.validate()?;
        self.train.validate()
    }

    /// Sets the run seed and the stage seed together.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.stage.seed = seed;
    }

    /// Replaces the stage, keeping the current stage seed.
    pub fn set_stage(&mut self, choice: &StageChoice) -> Result<()> {
        let seed = self.stage.seed;
        self.stage = match choice {
            StageChoice::Preset(kind) => StageSpec::preset(*kind, seed),
            StageChoice::File(path) => StageSpec::load(path)?,
        };
        Ok(())
    }
}

/// `--stage` argument: a preset name or a stage file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StageChoice {
    Preset(StageKind),
    File(PathBuf),
}

impl FromStr for StageChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(kind) = s.parse::<StageKind>() {
            return Ok(StageChoice::Preset(kind));
        }
        let path = PathBuf::from(s);
        if path.extension().is_some_and(|e| e == "toml") {
            Ok(StageChoice::File(path))
        } else {
            Err(Error::InvalidStage(format!(
                "{s:?} is neither static, dynamic, semantic nor a .toml stage file"
            )))
        }
    }
}

impl fmt::Display for StageChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StageChoice::Preset(k) => write!(f, "{k}"),
            StageChoice::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip_through_toml() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg.train.learning_rate, 0.00025);
        assert_eq!(cfg.train.batch_size, 64);
        assert_eq!(cfg.train.sync_target_steps, 2000);
        assert_eq!(cfg.env.human_min_dist, 0.7);
    }

    #[test]
    fn partial_overrides() {
        let cfg = RunConfig::from_toml_str("seed = 9\n[train]\ngamma = 0.5\n[env]\nn_beams = 40\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.train.gamma, 0.5);
        assert_eq!(cfg.train.batch_size, 64);
        assert_eq!(cfg.env.n_beams, 40);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml_str("sed = 1").is_err());
        assert!(RunConfig::from_toml_str("[train]\nlearning_rat = 0.1").is_err());
        assert!(RunConfig::from_toml_str("[env]\nbeams = 3").is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(RunConfig::from_toml_str("[train]\ngamma = 1.5").is_err());
        assert!(RunConfig::from_toml_str("[network]\ndropout = 1.0").is_err());
    }

    #[test]
    fn seed_and_stage_overrides() {
        let mut cfg = RunConfig::default();
        cfg.set_seed(7);
        cfg.set_stage(&"semantic".parse().unwrap()).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.stage, StageSpec::preset(StageKind::Semantic, 7));
        assert!("maze".parse::<StageChoice>().is_err());
        assert_eq!(
            "a/b.toml".parse::<StageChoice>().unwrap(),
            StageChoice::File("a/b.toml".into())
        );
    }
}
