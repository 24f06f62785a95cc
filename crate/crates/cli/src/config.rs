use std::fs;
use std::path::{Path, PathBuf};

use eegimg::classify::ClassifierConfig;
use eegimg::encode::EncodeConfig;
use eegimg::split::validate_ratios;
use eegimg::texture::FeatureConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodeVariant {
    /// One image per trial, replicated across channels.
    #[default]
    Single,
    /// One image per stimulus with a channel per subject.
    Subjects,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fusion {
    /// EEG features alone.
    #[default]
    None,
    Concat,
    Vstack,
    Regression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub ratios: [f64; 3],
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            ratios: [0.7, 0.15, 0.15],
            seed: 0,
        }
    }
}

/// The whole run as one JSON document. Relative paths in a config file are
/// resolved against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub manifest: Option<PathBuf>,
    /// Half-open sample window `[start, end)` applied after ingest.
    pub crop: Option<(usize, usize)>,
    pub zscore: bool,
    pub encode: EncodeConfig,
    pub encode_variant: EncodeVariant,
    /// Also write channel 0 of every tensor as a PNG.
    pub png: bool,
    pub features: FeatureConfig,
    /// Precomputed EEG features; skips encode and texture extraction.
    pub eeg_features: Option<PathBuf>,
    /// Image-modality features keyed by stimulus id.
    pub image_features: Option<PathBuf>,
    pub fusion: Fusion,
    pub ridge_lambda: f64,
    pub classifier: ClassifierConfig,
    pub split: SplitConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            crop: None,
            zscore: false,
            encode: EncodeConfig::default(),
            encode_variant: EncodeVariant::default(),
            png: false,
            features: FeatureConfig::default(),
            eeg_features: None,
            image_features: None,
            fusion: Fusion::default(),
            ridge_lambda: 1e-3,
            classifier: ClassifierConfig::default(),
            split: SplitConfig::default(),
        }
    }
}

fn resolve(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        resolve(base, &mut cfg.manifest);
        resolve(base, &mut cfg.eeg_features);
        resolve(base, &mut cfg.image_features);
        Ok(cfg)
    }

    /// Applies `--seed` to every seeded component.
    pub fn set_seed(&mut self, seed: u64) {
        self.split.seed = seed;
        match &mut self.classifier {
            ClassifierConfig::Softmax(c) => c.seed = seed,
            ClassifierConfig::Svm(c) => c.seed = seed,
            ClassifierConfig::Knn { .. } => {}
        }
    }

    /// Checks values and that every referenced input exists.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        self.encode.validate().map_err(|e| CliError::Config(e.to_string()))?;
        validate_ratios(self.split.ratios).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some((start, end)) = self.crop {
            if start >= end {
                return bad(format!("crop window [{start}, {end}) is empty"));
            }
        }
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return bad(format!("ridge_lambda must be finite and non-negative, got {}", self.ridge_lambda));
        }
        if self.fusion != Fusion::None && self.image_features.is_none() {
            return bad(format!("fusion {:?} needs image_features", self.fusion));
        }
        for path in [&self.manifest, &self.eeg_features, &self.image_features].into_iter().flatten() {
            if !path.exists() {
                return bad(format!("{} does not exist", path.display()));
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form.
    pub fn hash(&self) -> String {
        config_hash(self)
    }
}

pub fn config_hash<T: Serialize>(value: &T) -> String {
    let text = serde_json::to_string(value).expect("config serialises");
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        let cfg: PipelineConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, PipelineConfig::default());
    }

    #[test]
    fn round_trips_through_json() {
        let mut cfg = PipelineConfig {
            crop: Some((20, 460)),
            fusion: Fusion::Concat,
            encode_variant: EncodeVariant::Subjects,
            classifier: ClassifierConfig::Svm(Default::default()),
            ..Default::default()
        };
        cfg.set_seed(9);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<PipelineConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"fusoin": "concat"}"#).is_err());
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"fusion": "late"}"#).is_err());
        let nested = r#"{"classifier": {"kind": "softmax", "learning_rte": 0.1}}"#;
        assert!(serde_json::from_str::<PipelineConfig>(nested).is_err());
    }

    #[test]
    fn classifier_parameters_parse() {
        let cfg: PipelineConfig = serde_json::from_str(r#"{"classifier": {"kind": "knn", "k": 3}}"#).unwrap();
        assert_eq!(cfg.classifier, ClassifierConfig::Knn { k: 3 });
    }

    #[test]
    fn fusion_without_image_features_is_a_config_error() {
        let cfg = PipelineConfig {
            fusion: Fusion::Vstack,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn hash_changes_with_content() {
        let a = PipelineConfig::default();
        let mut b = a.clone();
        b.zscore = true;
        assert_eq!(a.hash(), PipelineConfig::default().hash());
        assert_ne!(a.hash(), b.hash());
    }
}
