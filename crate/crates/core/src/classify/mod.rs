//! Classifiers for the final pipeline stage and their evaluation.

mod eval;
mod knn;
mod softmax;
mod svm;

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::texture::FeatureMatrix;
use crate::{Error, Result};

pub use eval::{evaluate, evaluate_with_classes, EvalReport};
pub use knn::{knn_fit, KnnModel};
pub use softmax::{argmax_rows, softmax_fit, softmax_loss_and_gradient, softmax_proba, SoftmaxConfig, SoftmaxModel};
pub use svm::{kkt_violation, rbf_kernel_matrix, smo_binary, svm_fit, BinarySolution, BinarySvm, SvmConfig, SvmModel};

/// Classifier kind and hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierConfig {
    Knn {
        #[serde(default = "default_k")]
        k: usize,
    },
    Softmax(SoftmaxConfig),
    Svm(SvmConfig),
}

fn default_k() -> usize {
    5
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig::Knn { k: default_k() }
    }
}

/// A fitted classifier. Serialises as JSON tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Knn(KnnModel),
    Softmax(SoftmaxModel),
    Svm(SvmModel),
}

impl Model {
    pub fn fit(config: &ClassifierConfig, train: &FeatureMatrix) -> Result<Self> {
        Ok(match config {
            // k is capped at the training size so tiny splits still fit
            ClassifierConfig::Knn { k } => Model::Knn(knn_fit(train, (*k).min(train.n_rows()).max(1))?),
            ClassifierConfig::Softmax(cfg) => Model::Softmax(softmax_fit(train, cfg)?),
            ClassifierConfig::Svm(cfg) => Model::Svm(svm_fit(train, cfg)?),
        })
    }

    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<u16>> {
        match self {
            Model::Knn(m) => m.predict(x),
            Model::Softmax(m) => m.predict(x),
            Model::Svm(m) => m.predict(x),
        }
    }

    /// Class probabilities, for models that produce them.
    pub fn predict_proba(&self, x: &Array2<f64>) -> Result<Option<Array2<f64>>> {
        match self {
            Model::Softmax(m) => softmax_proba(m, x).map(Some),
            _ => Ok(None),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::format(path, e.to_string()))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }
}
