//! Trial data model, cleaning and per-channel preprocessing.

mod blob;
mod manifest;
mod synth;

use std::collections::HashSet;

use ndarray::{Array2, Axis};

use crate::{Error, Result};

pub use blob::{decode_trial, encode_trial_blob, read_trial, write_trial, BLOB_MAGIC, BLOB_VERSION};
pub use manifest::{ingest, write_trialset, Manifest};
pub use synth::{generate_synthetic, synthetic_stimulus_features, SyntheticSpec};

/// One stimulus-locked EEG recording.
///
/// `data` is `(n_channels, n_samples)`, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub subject_id: u16,
    pub stimulus_id: u32,
    pub class_label: u16,
    pub sample_rate: f32,
    pub data: Array2<f64>,
}

impl Trial {
    pub fn n_channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.data.ncols()
    }
}

/// An ordered, validated collection of trials sharing one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    trials: Vec<Trial>,
    band_tag: String,
    class_names: Vec<String>,
    n_subjects: u16,
}

impl TrialSet {
    /// Builds a set, checking shape consistency, label range, subject range,
    /// finiteness and `(subject_id, stimulus_id)` uniqueness.
    pub fn new(
        trials: Vec<Trial>,
        band_tag: impl Into<String>,
        class_names: Vec<String>,
        n_subjects: u16,
    ) -> Result<Self> {
        if let Some(first) = trials.first() {
            let shape = first.data.dim();
            let mut seen = HashSet::with_capacity(trials.len());
            for (i, t) in trials.iter().enumerate() {
                if t.data.dim() != shape {
                    return Err(Error::Dimension(format!(
                        "trial {i} has shape {:?}, expected {shape:?}",
                        t.data.dim()
                    )));
                }
                if usize::from(t.class_label) >= class_names.len() {
                    return Err(Error::invalid(format!(
                        "trial {i} has class label {} but only {} class names",
                        t.class_label,
                        class_names.len()
                    )));
                }
                if t.subject_id == 0 || t.subject_id > n_subjects {
                    return Err(Error::invalid(format!(
                        "trial {i} has subject id {} outside 1..={n_subjects}",
                        t.subject_id
                    )));
                }
                if !(t.sample_rate.is_finite() && t.sample_rate > 0.0) {
                    return Err(Error::invalid(format!(
                        "trial {i} has invalid sample rate {}",
                        t.sample_rate
                    )));
                }
                if let Some(channel) = first_non_finite_row(&t.data) {
                    return Err(Error::NonFinite { trial: i, channel });
                }
                if !seen.insert((t.subject_id, t.stimulus_id)) {
                    return Err(Error::invalid(format!(
                        "duplicate (subject {}, stimulus {}) at trial {i}",
                        t.subject_id, t.stimulus_id
                    )));
                }
            }
        }
        Ok(Self {
            trials,
            band_tag: band_tag.into(),
            class_names,
            n_subjects,
        })
    }

    pub fn trials(&self) -> &[Trial] {
        &self.trials
    }

    pub fn into_trials(self) -> Vec<Trial> {
        self.trials
    }

    pub fn band_tag(&self) -> &str {
        &self.band_tag
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn n_subjects(&self) -> u16 {
        self.n_subjects
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    /// `(n_channels, n_samples)` shared by every trial, `None` when empty.
    pub fn shape(&self) -> Option<(usize, usize)> {
        self.trials.first().map(|t| t.data.dim())
    }

    /// Applies a fallible per-trial transform, rebuilding the set.
    pub fn try_map<F>(&self, f: F) -> Result<Self>
    where
        F: FnMut(&Trial) -> Result<Trial>,
    {
        let trials = self.trials.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(
            trials,
            self.band_tag.clone(),
            self.class_names.clone(),
            self.n_subjects,
        )
    }

    /// Keeps trials for which `keep` returns true, preserving order and metadata.
    pub fn filter<F>(&self, mut keep: F) -> Self
    where
        F: FnMut(&Trial) -> bool,
    {
        Self {
            trials: self.trials.iter().filter(|t| keep(t)).cloned().collect(),
            band_tag: self.band_tag.clone(),
            class_names: self.class_names.clone(),
            n_subjects: self.n_subjects,
        }
    }
}

fn first_non_finite_row(data: &Array2<f64>) -> Option<usize> {
    data.axis_iter(Axis(0))
        .position(|row| row.iter().any(|v| !v.is_finite()))
}

/// Keeps samples `[start, end)` of every channel.
pub fn crop_window(t: &Trial, start: usize, end: usize) -> Result<Trial> {
    if start >= end || end > t.n_samples() {
        return Err(Error::Range(format!(
            "crop window [{start}, {end}) invalid for {} samples",
            t.n_samples()
        )));
    }
    Ok(Trial {
        data: t.data.slice(ndarray::s![.., start..end]).to_owned(),
        ..t.clone()
    })
}

/// Standardises each channel to zero mean and unit population standard
/// deviation. Constant channels become all zeros.
pub fn zscore_channels(t: &Trial) -> Trial {
    let mut data = t.data.clone();
    zscore_rows_in_place(&mut data);
    Trial { data, ..t.clone() }
}

pub(crate) fn zscore_rows_in_place(data: &mut Array2<f64>) {
    let n = data.ncols() as f64;
    for mut row in data.axis_iter_mut(Axis(0)) {
        let mean = row.sum() / n;
        let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        if std <= 1e-12 * (1.0 + mean.abs()) {
            row.fill(0.0);
        } else {
            row.mapv_inplace(|v| (v - mean) / std);
        }
    }
}

/// Removes every trial of class `label` and re-indexes the remaining labels
/// densely, preserving their relative order.
pub fn drop_class(s: &TrialSet, label: u16) -> Result<TrialSet> {
    if usize::from(label) >= s.n_classes() {
        return Err(Error::invalid(format!(
            "class {label} out of range for {} classes",
            s.n_classes()
        )));
    }
    if !s.trials.iter().any(|t| t.class_label == label) {
        return Err(Error::invalid(format!("class {label} has no trials")));
    }
    let trials = s
        .trials
        .iter()
        .filter(|t| t.class_label != label)
        .map(|t| Trial {
            class_label: if t.class_label > label {
                t.class_label - 1
            } else {
                t.class_label
            },
            ..t.clone()
        })
        .collect();
    let mut class_names = s.class_names.clone();
    class_names.remove(usize::from(label));
    TrialSet::new(trials, s.band_tag.clone(), class_names, s.n_subjects)
}
