//! Multinomial logistic regression trained by full-batch gradient descent.

use ndarray::{s, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::texture::FeatureMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SoftmaxConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// L2 strength on the non-bias weights.
    pub l2: f64,
    /// Stop once the gradient's max-abs entry drops below this.
    pub tolerance: f64,
    /// Recorded for provenance; initial weights are zero.
    pub seed: u64,
}

impl Default for SoftmaxConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            epochs: 500,
            l2: 1e-4,
            tolerance: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxModel {
    /// `(d + 1) x C`; the last row is the bias.
    pub weights: Array2<f64>,
    pub config: SoftmaxConfig,
    /// Training objective before each update, then at the final weights.
    pub loss_history: Vec<f64>,
}

impl SoftmaxModel {
    pub fn n_classes(&self) -> usize {
        self.weights.ncols()
    }

    pub fn n_features(&self) -> usize {
        self.weights.nrows() - 1
    }

    /// Row-wise class scores `x W + b`.
    pub fn decision_values(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n_features() {
            return Err(Error::Dimension(format!(
                "softmax trained on {} features, got {}",
                self.n_features(),
                x.ncols()
            )));
        }
        Ok(scores(&self.weights, x.view()))
    }

    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<u16>> {
        Ok(argmax_rows(&self.decision_values(x)?))
    }
}

fn scores(w: &Array2<f64>, x: ArrayView2<'_, f64>) -> Array2<f64> {
    let d = w.nrows() - 1;
    x.dot(&w.slice(s![..d, ..])) + w.row(d)
}

/// Index of the largest entry per row, ties to the lowest index.
pub fn argmax_rows(values: &Array2<f64>) -> Vec<u16> {
    values
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best as u16
        })
        .collect()
}

/// Numerically stable row-wise softmax, in place.
fn softmax_in_place(z: &mut Array2<f64>) {
    for mut row in z.axis_iter_mut(Axis(0)) {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}

/// Class probabilities; each row sums to one.
pub fn softmax_proba(m: &SoftmaxModel, x: &Array2<f64>) -> Result<Array2<f64>> {
    let mut z = m.decision_values(x)?;
    softmax_in_place(&mut z);
    Ok(z)
}

/// Mean cross-entropy plus `(l2 / 2) ||W||^2` over the non-bias rows, and
/// its gradient with respect to the full weight matrix.
pub fn softmax_loss_and_gradient(
    weights: &Array2<f64>,
    x: ArrayView2<'_, f64>,
    labels: &[u16],
    l2: f64,
) -> (f64, Array2<f64>) {
    let n = x.nrows() as f64;
    let d = weights.nrows() - 1;
    let mut p = scores(weights, x);
    let mut loss = 0.0;
    for (mut row, &y) in p.axis_iter_mut(Axis(0)).zip(labels) {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let lse = max + row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - row[usize::from(y)];
        row.mapv_inplace(|v| (v - lse).exp());
        row[usize::from(y)] -= 1.0;
    }
    loss /= n;
    let w = weights.slice(s![..d, ..]);
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();

    // p now holds (probabilities - one_hot)
    let mut grad = Array2::zeros(weights.dim());
    let mut gw = grad.slice_mut(s![..d, ..]);
    gw.assign(&(x.t().dot(&p) / n));
    gw.scaled_add(l2, &w);
    grad.row_mut(d).assign(&(p.sum_axis(Axis(0)) / n));
    (loss, grad)
}

/// Fits from zero weights. Labels must cover `0..C` with `C >= 2`.
pub fn softmax_fit(train: &FeatureMatrix, config: &SoftmaxConfig) -> Result<SoftmaxModel> {
    let n_classes = dense_class_count(train.labels())?;
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::invalid("learning_rate must be positive"));
    }
    if !(config.l2 >= 0.0 && config.l2.is_finite()) {
        return Err(Error::invalid("l2 must be nonnegative"));
    }
    let x = train.data().view();
    let mut weights = Array2::zeros((train.n_features() + 1, n_classes));
    let mut loss_history = Vec::with_capacity(config.epochs + 1);
    for _ in 0..config.epochs {
        let (loss, grad) = softmax_loss_and_gradient(&weights, x, train.labels(), config.l2);
        loss_history.push(loss);
        let grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if grad_norm < config.tolerance {
            break;
        }
        weights.scaled_add(-config.learning_rate, &grad);
    }
    let (loss, _) = softmax_loss_and_gradient(&weights, x, train.labels(), config.l2);
    loss_history.push(loss);
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::invalid("softmax diverged; lower the learning rate"));
    }
    Ok(SoftmaxModel {
        weights,
        config: config.clone(),
        loss_history,
    })
}

/// `C` when the labels are exactly `{0, .., C-1}` with `C >= 2`.
pub(crate) fn dense_class_count(labels: &[u16]) -> Result<usize> {
    let c = labels.iter().max().map_or(0, |&m| usize::from(m) + 1);
    let mut seen = vec![false; c];
    for &l in labels {
        seen[usize::from(l)] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::invalid(format!(
            "labels are not dense: class {missing} has no training rows"
        )));
    }
    if c < 2 {
        return Err(Error::invalid("at least two classes are required"));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn fm(data: Array2<f64>, labels: Vec<u16>) -> FeatureMatrix {
        let n = data.nrows() as u32;
        let d = data.ncols();
        FeatureMatrix::new(data, (0..n).collect(), labels, FeatureMatrix::default_names(d)).unwrap()
    }

    #[test]
    fn zero_weights_are_uniform() {
        let m = SoftmaxModel {
            weights: Array2::zeros((3, 4)),
            config: SoftmaxConfig::default(),
            loss_history: vec![],
        };
        let p = softmax_proba(&m, &array![[1.0, -2.0], [100.0, 3.0]]).unwrap();
        assert!(p.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn separable_blobs() {
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let t = i as f64 * 0.1;
            let (cx, l) = if i % 2 == 0 { (-3.0, 0) } else { (3.0, 1) };
            data.extend([cx + t.sin() * 0.5, t.cos() * 0.5]);
            labels.push(l);
        }
        let train = fm(Array2::from_shape_vec((40, 2), data).unwrap(), labels.clone());
        let m = softmax_fit(&train, &SoftmaxConfig::default()).unwrap();
        assert_eq!(m.predict(train.data()).unwrap(), labels);
        let p = softmax_proba(&m, train.data()).unwrap();
        for row in p.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn non_dense_labels_rejected() {
        let train = fm(array![[0.0], [1.0]], vec![0, 2]);
        assert!(softmax_fit(&train, &SoftmaxConfig::default()).is_err());
        let single = fm(array![[0.0], [1.0]], vec![0, 0]);
        assert!(softmax_fit(&single, &SoftmaxConfig::default()).is_err());
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax_rows(&array![[1.0, 3.0, 3.0], [2.0, 2.0, 2.0]]), vec![1, 0]);
    }
}
