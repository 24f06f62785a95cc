use ndarray::{Array2, ArrayView1, Axis};

use crate::{Error, Result};

/// Named feature values for one image or sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    names: Vec<String>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, names: Vec<String>) -> Result<Self> {
        if values.len() != names.len() {
            return Err(Error::Dimension(format!(
                "{} values but {} names",
                values.len(),
                names.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "feature {} is not finite ({})",
                names[i], values[i]
            )));
        }
        Ok(Self { values, names })
    }

    pub fn empty() -> Self {
        Self {
            values: Vec::new(),
            names: Vec::new(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Appends `other`, prefixing its names.
    pub fn extend_prefixed(&mut self, other: FeatureVector, prefix: &str) {
        self.values.extend(other.values);
        self.names
            .extend(other.names.into_iter().map(|n| format!("{prefix}{n}")));
    }

    pub(crate) fn push(&mut self, name: String, value: f64) {
        self.names.push(name);
        self.values.push(value);
    }
}

/// Which modality a feature row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Modality {
    #[default]
    Unspecified,
    Eeg,
    Image,
}

/// Samples by features, with per-row sample id, class label and modality tag.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Array2<f64>,
    sample_ids: Vec<u32>,
    labels: Vec<u16>,
    feature_names: Vec<String>,
    modality: Vec<Modality>,
}

impl FeatureMatrix {
    pub fn new(
        data: Array2<f64>,
        sample_ids: Vec<u32>,
        labels: Vec<u16>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let (n, d) = data.dim();
        if sample_ids.len() != n || labels.len() != n {
            return Err(Error::Dimension(format!(
                "{n} rows but {} sample ids and {} labels",
                sample_ids.len(),
                labels.len()
            )));
        }
        if feature_names.len() != d {
            return Err(Error::Dimension(format!(
                "{d} columns but {} feature names",
                feature_names.len()
            )));
        }
        if let Some(((row, column), _)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { row, column });
        }
        Ok(Self {
            data,
            sample_ids,
            labels,
            feature_names,
            modality: vec![Modality::Unspecified; n],
        })
    }

    /// Stacks feature vectors as rows. Names come from the first vector.
    pub fn from_vectors(vectors: &[FeatureVector], sample_ids: Vec<u32>, labels: Vec<u16>) -> Result<Self> {
        let names = vectors.first().map(|v| v.names.clone()).unwrap_or_default();
        let d = names.len();
        let mut data = Array2::zeros((vectors.len(), d));
        for (i, v) in vectors.iter().enumerate() {
            if v.names != names {
                return Err(Error::Dimension(format!(
                    "feature vector {i} has a different layout ({} features, expected {d})",
                    v.len()
                )));
            }
            data.row_mut(i).assign(&ArrayView1::from(&v.values[..]));
        }
        Self::new(data, sample_ids, labels, names)
    }

    /// Default column names `f0..f{d-1}`.
    pub fn default_names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("f{i}")).collect()
    }

    pub fn with_modality(mut self, modality: Modality) -> Self {
        self.modality.fill(modality);
        self
    }

    pub(crate) fn with_modalities(mut self, modality: Vec<Modality>) -> Self {
        assert_eq!(modality.len(), self.n_rows());
        self.modality = modality;
        self
    }

    /// Same ids, labels and modality tags with new values.
    pub fn with_data(&self, data: Array2<f64>, feature_names: Vec<String>) -> Result<Self> {
        if data.nrows() != self.n_rows() {
            return Err(Error::Dimension(format!(
                "replacement has {} rows, expected {}",
                data.nrows(),
                self.n_rows()
            )));
        }
        Ok(Self::new(data, self.sample_ids.clone(), self.labels.clone(), feature_names)?
            .with_modalities(self.modality.clone()))
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    pub fn sample_ids(&self) -> &[u32] {
        &self.sample_ids
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn modality(&self) -> &[Modality] {
        &self.modality
    }

    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows() == 0
    }

    /// `max(label) + 1`, or 0 when empty.
    pub fn n_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| usize::from(m) + 1)
    }

    /// Rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self {
            data: self.data.select(Axis(0), indices),
            sample_ids: indices.iter().map(|&i| self.sample_ids[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            modality: indices.iter().map(|&i| self.modality[i]).collect(),
        }
    }

    /// Columns `[start, end)`.
    pub fn select_columns(&self, start: usize, end: usize) -> Self {
        Self {
            data: self.data.slice(ndarray::s![.., start..end]).to_owned(),
            sample_ids: self.sample_ids.clone(),
            labels: self.labels.clone(),
            feature_names: self.feature_names[start..end].to_vec(),
            modality: self.modality.clone(),
        }
    }
}
