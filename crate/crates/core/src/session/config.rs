use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attribution::ShapConfig;
use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::graph::MultivariateNetwork;
use crate::learn::{LabelDefinition, MlpConfig};
use crate::viz::LayoutOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub attribute: String,
    #[serde(default)]
    pub labeling: LabelDefinition,
}

/// Optional held-out evaluation of Steps 2 and 3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    /// Fraction of each class withheld from training, in [0, 1).
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            holdout_fraction: 0.0,
            seed: 0,
        }
    }
}

/// Everything needed to run Steps 1–4 reproducibly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    /// Session name; also the session directory name.
    pub name: String,
    /// Dataset document path. Relative paths are resolved against the
    /// directory containing the config file.
    pub dataset: PathBuf,
    pub features: FeatureConfig,
    pub output: OutputConfig,
    #[serde(default)]
    pub mlp: MlpConfig,
    /// LDA regularization strength; absent selects the scale-aware default.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub shap: ShapConfig,
    #[serde(default)]
    pub layout: LayoutOptions,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
}

impl SessionConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a config file and resolves `dataset` relative to it.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json_str(&text)?;
        if cfg.dataset.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.dataset = dir.join(&cfg.dataset);
            }
        }
        Ok(cfg)
    }

    /// Checks the config against the dataset before any computation.
    pub fn validate(&self, net: &MultivariateNetwork) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name.starts_with('.') {
            return Err(Error::InvalidArgument(format!("session name {:?} is not a plain directory name", self.name)));
        }
        if !net.schema().contains_key(&self.output.attribute) {
            return Err(Error::UnknownAttribute(self.output.attribute.clone()));
        }
        if self.features.attributes.contains(&self.output.attribute) {
            return Err(Error::InvalidArgument(format!(
                "output attribute {:?} cannot also be an input attribute",
                self.output.attribute
            )));
        }
        if let Some(missing) = self.features.attributes.iter().find(|a| !net.schema().contains_key(*a)) {
            return Err(Error::UnknownAttribute(missing.clone()));
        }
        if !(0.0..1.0).contains(&self.evaluation.holdout_fraction) {
            return Err(Error::InvalidArgument(format!(
                "holdout_fraction must lie in [0, 1), got {}",
                self.evaluation.holdout_fraction
            )));
        }
        if let Some(g) = self.gamma {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::InvalidArgument(format!("gamma must be a finite value >= 0, got {g}")));
            }
        }
        Ok(())
    }
}
