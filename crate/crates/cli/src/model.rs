//! Fusion, training and evaluation over feature matrices.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use eegimg::classify::{argmax_rows, evaluate_with_classes, EvalReport, Model};
use eegimg::fusion::{
    apply_scaler, average_subjects, concat_features, fit_scaler, ridge_fit, ridge_predict, vstack_features,
    RidgeModel, ScalerParams,
};
use eegimg::texture::{export_features, import_features, FeatureFormat, FeatureMatrix};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::config::Fusion;
use crate::error::{CliError, Result};
use crate::provenance::{read_json, write_json};
use crate::stages::Context;

/// Rows to train and evaluate on. `targets`, present only for regression
/// fusion, holds the image features aligned row by row with `features`.
#[derive(Debug, Clone)]
pub struct FusedData {
    pub features: FeatureMatrix,
    pub targets: Option<FeatureMatrix>,
}

/// Rows of `image` reordered to follow `ids`; labels must agree with `labels`.
fn align(image: &FeatureMatrix, ids: &[u32], labels: &[u16]) -> Result<FeatureMatrix> {
    let mut by_id = HashMap::new();
    for (row, &id) in image.sample_ids().iter().enumerate() {
        if by_id.insert(id, row).is_some() {
            return Err(CliError::Data(format!("image features list sample {id} twice")));
        }
    }
    let mut rows = Vec::with_capacity(ids.len());
    for (&id, &label) in ids.iter().zip(labels) {
        let &row = by_id
            .get(&id)
            .ok_or_else(|| CliError::Data(format!("no image features for sample {id}")))?;
        if image.labels()[row] != label {
            return Err(CliError::Data(format!(
                "sample {id} is labelled {label} in EEG features but {} in image features",
                image.labels()[row]
            )));
        }
        rows.push(row);
    }
    Ok(image.select_rows(&rows))
}

/// First row of every sample id, in order of appearance.
fn first_per_sample(m: &FeatureMatrix) -> FeatureMatrix {
    let mut seen = std::collections::HashSet::new();
    let rows: Vec<usize> = (0..m.n_rows()).filter(|&i| seen.insert(m.sample_ids()[i])).collect();
    m.select_rows(&rows)
}

fn rows_per_sample(m: &FeatureMatrix) -> Result<usize> {
    let mut counts: HashMap<u32, usize> = HashMap::new();
    for &id in m.sample_ids() {
        *counts.entry(id).or_insert(0) += 1;
    }
    let first = counts.values().next().copied().unwrap_or(1);
    if counts.values().any(|&c| c != first) {
        return Err(CliError::Data("samples have differing numbers of EEG rows".into()));
    }
    Ok(first)
}

/// Combines EEG features with the configured image features and writes the
/// result to `<out>/fuse/`.
pub fn fuse_stage(ctx: &Context, eeg: &FeatureMatrix) -> Result<FusedData> {
    let cfg = &ctx.config;
    let image = match &cfg.image_features {
        Some(path) if cfg.fusion != Fusion::None => Some(import_features(path)?),
        _ => None,
    };
    let fused = match (cfg.fusion, image) {
        (Fusion::None, _) => FusedData {
            features: eeg.clone(),
            targets: None,
        },
        (Fusion::Concat, Some(image)) => {
            let eeg = average_subjects(eeg, rows_per_sample(eeg)?)?;
            let image = align(&image, eeg.sample_ids(), eeg.labels())?;
            FusedData {
                features: concat_features(&eeg, &image)?,
                targets: None,
            }
        }
        (Fusion::Vstack, Some(image)) => {
            let keys = first_per_sample(eeg);
            let image = align(&image, keys.sample_ids(), keys.labels())?;
            FusedData {
                features: vstack_features(eeg, &image)?,
                targets: None,
            }
        }
        (Fusion::Regression, Some(image)) => FusedData {
            targets: Some(align(&image, eeg.sample_ids(), eeg.labels())?),
            features: eeg.clone(),
        },
        (fusion, None) => return Err(CliError::Config(format!("fusion {fusion:?} needs image_features"))),
    };
    let dir = ctx.stage_dir("fuse")?;
    export_features(&fused.features, &dir.join("features.csv"), FeatureFormat::Csv)?;
    let mut manifest = ctx.manifest("fuse", None).artifact("features.csv");
    if let Some(t) = &fused.targets {
        export_features(t, &dir.join("targets.csv"), FeatureFormat::Csv)?;
        manifest = manifest.artifact("targets.csv");
    }
    if let Some(path) = &cfg.image_features {
        manifest = manifest.input(path);
    }
    manifest.write(&dir)?;
    Ok(fused)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeStage {
    pub model: RidgeModel,
    /// Applied to predicted image features before classification.
    pub target_scaler: ScalerParams,
}

/// Everything needed to classify new rows, saved as `model.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub fusion: Fusion,
    pub scaler: ScalerParams,
    pub ridge: Option<RidgeStage>,
    pub classifier: Model,
}

impl TrainedModel {
    /// Scalers are fit on `train` only. For regression fusion the classifier
    /// learns from the true image features of the training stimuli.
    pub fn fit(ctx: &Context, train: &FeatureMatrix, targets: Option<&FeatureMatrix>) -> Result<Self> {
        let cfg = &ctx.config;
        let scaler = fit_scaler(train)?;
        let x = apply_scaler(&scaler, train)?;
        match (cfg.fusion, targets) {
            (Fusion::Regression, Some(y)) => {
                let model = ridge_fit(&x, y, cfg.ridge_lambda)?;
                let stimuli = first_per_sample(y);
                let target_scaler = fit_scaler(&stimuli)?;
                let classifier = Model::fit(&cfg.classifier, &apply_scaler(&target_scaler, &stimuli)?)?;
                Ok(Self {
                    fusion: cfg.fusion,
                    scaler,
                    ridge: Some(RidgeStage { model, target_scaler }),
                    classifier,
                })
            }
            (Fusion::Regression, None) => Err(CliError::Config("regression fusion needs image targets".into())),
            _ => Ok(Self {
                fusion: cfg.fusion,
                scaler,
                ridge: None,
                classifier: Model::fit(&cfg.classifier, &x)?,
            }),
        }
    }

    /// Classifier input for `m`: scaled, and mapped through the ridge model
    /// when present.
    fn inputs(&self, m: &FeatureMatrix) -> Result<Array2<f64>> {
        let x = apply_scaler(&self.scaler, m)?;
        Ok(match &self.ridge {
            Some(r) => apply_scaler(&r.target_scaler, &ridge_predict(&r.model, &x)?)?.data().clone(),
            None => x.data().clone(),
        })
    }

    /// One prediction per row.
    pub fn predict(&self, m: &FeatureMatrix) -> Result<Vec<u16>> {
        Ok(self.classifier.predict(&self.inputs(m)?)?)
    }

    /// Predictions and truth for `m`. Vertically stacked rows are pooled per
    /// sample: mean probabilities when the classifier has them, otherwise a
    /// majority vote with ties to the lowest label.
    pub fn predict_samples(&self, m: &FeatureMatrix) -> Result<(Vec<u16>, Vec<u16>)> {
        if self.fusion != Fusion::Vstack {
            return Ok((self.predict(m)?, m.labels().to_vec()));
        }
        let x = self.inputs(m)?;
        let mut order: Vec<u32> = Vec::new();
        let mut groups: HashMap<u32, Vec<usize>> = HashMap::new();
        for (i, &id) in m.sample_ids().iter().enumerate() {
            groups
                .entry(id)
                .or_insert_with(|| {
                    order.push(id);
                    Vec::new()
                })
                .push(i);
        }
        let truth = order.iter().map(|id| m.labels()[groups[id][0]]).collect();
        let predicted = match self.classifier.predict_proba(&x)? {
            Some(p) => {
                let mut mean = Array2::zeros((order.len(), p.ncols()));
                for (g, id) in order.iter().enumerate() {
                    for &i in &groups[id] {
                        let mut row = mean.row_mut(g);
                        row += &p.row(i);
                    }
                }
                argmax_rows(&mean)
            }
            None => {
                let labels = self.classifier.predict(&x)?;
                order
                    .iter()
                    .map(|id| {
                        let mut votes: BTreeMap<u16, usize> = BTreeMap::new();
                        for &i in &groups[id] {
                            *votes.entry(labels[i]).or_insert(0) += 1;
                        }
                        // BTreeMap iterates labels ascending; keep the first maximum
                        let mut best = (0, 0);
                        for (label, count) in votes {
                            if count > best.1 {
                                best = (label, count);
                            }
                        }
                        best.0
                    })
                    .collect()
            }
        };
        Ok((predicted, truth))
    }

    /// `None` for an empty matrix.
    pub fn evaluate(&self, m: &FeatureMatrix, n_classes: usize) -> Result<Option<EvalReport>> {
        if m.is_empty() {
            return Ok(None);
        }
        let (predicted, truth) = self.predict_samples(m)?;
        Ok(Some(evaluate_with_classes(&predicted, &truth, n_classes)?))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }
}
