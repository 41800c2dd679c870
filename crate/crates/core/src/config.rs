//! Run configuration from a flat `key = value` text file with dotted keys.
//!
//! ```text
//! # comments and blank lines are ignored
//! fusion.mode = fat-overwrite
//! rules.t_liver = 120
//! loss.channel_reduce = max
//! ```
//!
//! Unknown keys, duplicate keys and out-of-range values are errors.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::cvs_rules::{AssessConfig, RuleThresholds};
use crate::fusion::FusionMode;
use crate::roi_estimator::RoiConfig;
use crate::sobel_loss::{ChannelReduce, LossConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("duplicate key '{0}'")]
    DuplicateKey(String),
    #[error("invalid value for '{key}': {msg}")]
    InvalidValue { key: String, msg: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IoPaths {
    pub input_dir: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub truth_dir: Option<PathBuf>,
    pub overlay_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
#[derive(Default)]
pub struct RunConfig {
    pub fusion_mode: FusionMode,
    pub roi: RoiConfig,
    pub rules: RuleThresholds,
    pub loss: LossConfig<f64>,
    pub io: IoPaths,
}


fn value<V: FromStr>(key: &str, raw: &str) -> Result<V, ConfigError>
where
    V::Err: std::fmt::Display,
{
    raw.parse().map_err(|e: V::Err| ConfigError::InvalidValue { key: key.into(), msg: e.to_string() })
}

impl RunConfig {
    pub fn assess_config(&self) -> AssessConfig {
        AssessConfig { roi: self.roi, rules: self.rules }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        text.parse()
    }

    fn set(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        match key {
            "fusion.mode" => self.fusion_mode = value(key, raw)?,
            "roi.k_edge" => self.roi.k_edge = value(key, raw)?,
            "roi.step_deg" => self.roi.step_deg = value(key, raw)?,
            "roi.max_sweep_deg" => self.roi.max_sweep_deg = value(key, raw)?,
            "roi.min_area" => self.roi.min_area = value(key, raw)?,
            "rules.t_liver" => self.rules.t_liver = value(key, raw)?,
            "rules.t_cp" => self.rules.t_cp = value(key, raw)?,
            "rules.min_cluster" => self.rules.min_cluster = value(key, raw)?,
            "loss.lambda" => self.loss.lambda = value(key, raw)?,
            "loss.beta" => self.loss.smooth_l1_beta = value(key, raw)?,
            "loss.channel_reduce" => self.loss.channel_reduce = value::<ChannelReduce>(key, raw)?,
            "io.input_dir" => self.io.input_dir = Some(raw.into()),
            "io.report" => self.io.report = Some(raw.into()),
            "io.truth_dir" => self.io.truth_dir = Some(raw.into()),
            "io.overlay_dir" => self.io.overlay_dir = Some(raw.into()),
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.roi.validate().map_err(|msg| ConfigError::InvalidValue { key: "roi".into(), msg })?;
        if !(self.loss.lambda >= 0.0 && self.loss.lambda.is_finite()) {
            return Err(ConfigError::InvalidValue { key: "loss.lambda".into(), msg: "must be finite and >= 0".into() });
        }
        if !(self.loss.smooth_l1_beta > 0.0 && self.loss.smooth_l1_beta.is_finite()) {
            return Err(ConfigError::InvalidValue { key: "loss.beta".into(), msg: "must be finite and > 0".into() });
        }
        Ok(())
    }
}

impl FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, msg: "expected key = value".into() })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1, msg: "empty key or value".into() });
            }
            if !seen.insert(k.to_string()) {
                return Err(ConfigError::DuplicateKey(k.into()));
            }
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!("".parse::<RunConfig>().unwrap(), RunConfig::default());
    }

    #[test]
    fn overrides() {
        let cfg: RunConfig = "# run\nfusion.mode = fat-overwrite\nrules.t_liver=120\nloss.channel_reduce = max\nio.report = out.jsonl\n"
            .parse()
            .unwrap();
        assert_eq!(cfg.fusion_mode, FusionMode::FatOverwrite);
        assert_eq!(cfg.rules.t_liver, 120);
        assert_eq!(cfg.rules.t_cp, 100);
        assert_eq!(cfg.loss.channel_reduce, ChannelReduce::Max);
        assert_eq!(cfg.io.report, Some(PathBuf::from("out.jsonl")));
    }

    #[test]
    fn rejections() {
        assert!(matches!("rules.t_foo = 1".parse::<RunConfig>(), Err(ConfigError::UnknownKey(_))));
        assert!(matches!("rules.t_cp = 1\nrules.t_cp = 2".parse::<RunConfig>(), Err(ConfigError::DuplicateKey(_))));
        assert!(matches!("rules.t_cp = -1".parse::<RunConfig>(), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!("loss.beta = 0".parse::<RunConfig>(), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!("roi.step_deg = 0".parse::<RunConfig>(), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!("just words".parse::<RunConfig>(), Err(ConfigError::Syntax { line: 1, .. })));
    }
}
