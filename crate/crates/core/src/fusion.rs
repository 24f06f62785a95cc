//! Multi-modal fusion over feature matrices: subject averaging, standard
//! scaling, side-by-side concatenation, vertical stacking and a ridge map
//! from one modality's features to the other's.

use std::collections::HashMap;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::linalg::solve_spd;
use crate::texture::{FeatureMatrix, Modality};
use crate::{Error, Result};

/// Collapses the rows sharing a sample id into their mean, one row per id in
/// order of first appearance.
pub fn average_subjects(m: &FeatureMatrix, subjects_per_stimulus: usize) -> Result<FeatureMatrix> {
    if subjects_per_stimulus == 0 {
        return Err(Error::invalid("subjects_per_stimulus must be at least 1"));
    }
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
    let mut data = Array2::zeros((order.len(), m.n_features()));
    let mut labels = Vec::with_capacity(order.len());
    let mut modality = Vec::with_capacity(order.len());
    for (g, id) in order.iter().enumerate() {
        let rows = &groups[id];
        if rows.len() != subjects_per_stimulus {
            return Err(Error::invalid(format!(
                "sample {id} has {} rows, expected {subjects_per_stimulus}",
                rows.len()
            )));
        }
        let label = m.labels()[rows[0]];
        if rows.iter().any(|&r| m.labels()[r] != label) {
            return Err(Error::invalid(format!("sample {id} has conflicting labels")));
        }
        let mut acc = data.row_mut(g);
        for &r in rows {
            acc += &m.row(r);
        }
        acc /= rows.len() as f64;
        labels.push(label);
        modality.push(m.modality()[rows[0]]);
    }
    Ok(FeatureMatrix::new(data, order, labels, m.feature_names().to_vec())?.with_modalities(modality))
}

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn fit_scaler(train: &FeatureMatrix) -> Result<ScalerParams> {
    if train.is_empty() {
        return Err(Error::invalid("cannot fit a scaler on an empty matrix"));
    }
    let x = train.data();
    let mean = x.mean_axis(Axis(0)).expect("non-empty");
    let std = x.std_axis(Axis(0), 0.0);
    Ok(ScalerParams {
        mean: mean.to_vec(),
        std: std.to_vec(),
    })
}

/// `(x - mean) / std` per column; columns with (near) zero spread become 0.
pub fn apply_scaler(p: &ScalerParams, m: &FeatureMatrix) -> Result<FeatureMatrix> {
    if p.mean.len() != m.n_features() || p.std.len() != m.n_features() {
        return Err(Error::Dimension(format!(
            "scaler fitted on {} features, matrix has {}",
            p.mean.len(),
            m.n_features()
        )));
    }
    let mut data = m.data().clone();
    for (j, mut col) in data.axis_iter_mut(Axis(1)).enumerate() {
        let (mu, sd) = (p.mean[j], p.std[j]);
        if sd <= 1e-12 * (1.0 + mu.abs()) {
            col.fill(0.0);
        } else {
            col.mapv_inplace(|v| (v - mu) / sd);
        }
    }
    m.with_data(data, m.feature_names().to_vec())
}

/// Row `i` of the result is `a_i` followed by `b_i`. Sample ids and labels
/// must agree row by row.
pub fn concat_features(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<FeatureMatrix> {
    if a.n_rows() != b.n_rows() {
        return Err(Error::Dimension(format!(
            "cannot concatenate {} and {} rows",
            a.n_rows(),
            b.n_rows()
        )));
    }
    if let Some(i) = (0..a.n_rows())
        .find(|&i| a.sample_ids()[i] != b.sample_ids()[i] || a.labels()[i] != b.labels()[i])
    {
        return Err(Error::invalid(format!(
            "row {i} misaligned: sample {} label {} vs sample {} label {}",
            a.sample_ids()[i],
            a.labels()[i],
            b.sample_ids()[i],
            b.labels()[i]
        )));
    }
    let data = ndarray::concatenate(Axis(1), &[a.data().view(), b.data().view()])
        .expect("row counts checked");
    let mut names = a.feature_names().to_vec();
    names.extend_from_slice(b.feature_names());
    FeatureMatrix::new(data, a.sample_ids().to_vec(), a.labels().to_vec(), names)
}

/// Appends the rows of `b` below those of `a`. Rows keep their modality
/// tag; untagged rows of `a` are tagged EEG and untagged rows of `b` image.
pub fn vstack_features(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<FeatureMatrix> {
    let tag = |m: &FeatureMatrix, default: Modality| -> Vec<Modality> {
        m.modality()
            .iter()
            .map(|&t| if t == Modality::Unspecified { default } else { t })
            .collect()
    };
    if b.is_empty() {
        return Ok(a.clone().with_modalities(tag(a, Modality::Eeg)));
    }
    if a.is_empty() {
        return Ok(b.clone().with_modalities(tag(b, Modality::Image)));
    }
    if a.n_features() != b.n_features() {
        return Err(Error::Dimension(format!(
            "cannot stack {}-wide and {}-wide features",
            a.n_features(),
            b.n_features()
        )));
    }
    let data = ndarray::concatenate(Axis(0), &[a.data().view(), b.data().view()])
        .expect("widths checked");
    let ids = [a.sample_ids(), b.sample_ids()].concat();
    let labels = [a.labels(), b.labels()].concat();
    let mut modality = tag(a, Modality::Eeg);
    modality.extend(tag(b, Modality::Image));
    Ok(FeatureMatrix::new(data, ids, labels, a.feature_names().to_vec())?.with_modalities(modality))
}

/// Linear map `x -> x W + b`; the last row of `weights` is the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub weights: Array2<f64>,
    pub lambda: f64,
    pub output_names: Vec<String>,
}

impl RidgeModel {
    pub fn d_in(&self) -> usize {
        self.weights.nrows() - 1
    }

    pub fn d_out(&self) -> usize {
        self.weights.ncols()
    }

    fn split(&self) -> (ndarray::ArrayView2<'_, f64>, ndarray::ArrayView1<'_, f64>) {
        let d = self.d_in();
        (self.weights.slice(ndarray::s![..d, ..]), self.weights.row(d))
    }

    /// `||X W + b - Y||^2 + lambda ||W||^2` with the bias unpenalised.
    pub fn objective(&self, x: &Array2<f64>, y: &Array2<f64>) -> f64 {
        let (w, b) = self.split();
        let resid = x.dot(&w) + b - y;
        resid.iter().map(|r| r * r).sum::<f64>() + self.lambda * w.iter().map(|v| v * v).sum::<f64>()
    }
}

/// Ridge regression via the normal equations on centred data, so the bias
/// is left unpenalised. `lambda = 0` needs a full-rank design.
pub fn ridge_fit(x: &FeatureMatrix, y: &FeatureMatrix, lambda: f64) -> Result<RidgeModel> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    if x.n_rows() != y.n_rows() {
        return Err(Error::Dimension(format!(
            "ridge inputs have {} and {} rows",
            x.n_rows(),
            y.n_rows()
        )));
    }
    if x.is_empty() {
        return Err(Error::invalid("cannot fit ridge on zero rows"));
    }
    let (xd, yd) = (x.data(), y.data());
    let x_mean = xd.mean_axis(Axis(0)).expect("non-empty");
    let y_mean = yd.mean_axis(Axis(0)).expect("non-empty");
    let xc = xd - &x_mean;
    let yc = yd - &y_mean;
    let mut gram = xc.t().dot(&xc);
    gram.diag_mut().mapv_inplace(|v| v + lambda);
    let rhs = xc.t().dot(&yc);
    let w = solve_spd(gram.view(), rhs.view())?;
    let bias: Array1<f64> = &y_mean - &x_mean.dot(&w);
    let mut weights = Array2::zeros((x.n_features() + 1, y.n_features()));
    weights.slice_mut(ndarray::s![..x.n_features(), ..]).assign(&w);
    weights.row_mut(x.n_features()).assign(&bias);
    if weights.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(RidgeModel {
        weights,
        lambda,
        output_names: y.feature_names().to_vec(),
    })
}

/// Applies the map, carrying over `x`'s ids, labels and modality tags.
pub fn ridge_predict(m: &RidgeModel, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    if x.n_features() != m.d_in() {
        return Err(Error::Dimension(format!(
            "ridge model expects {} features, got {}",
            m.d_in(),
            x.n_features()
        )));
    }
    let (w, b) = m.split();
    let out = x.data().dot(&w) + b;
    x.with_data(out, m.output_names.clone())
}
