use std::cmp::Ordering;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::texture::FeatureMatrix;
use crate::{Error, Result};

/// Brute-force Euclidean k-nearest-neighbour classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub train: Array2<f64>,
    pub labels: Vec<u16>,
}

pub fn knn_fit(train: &FeatureMatrix, k: usize) -> Result<KnnModel> {
    if train.is_empty() {
        return Err(Error::invalid("kNN needs at least one training row"));
    }
    if k == 0 || k > train.n_rows() {
        return Err(Error::invalid(format!(
            "k = {k} must be in 1..={}",
            train.n_rows()
        )));
    }
    Ok(KnnModel {
        k,
        train: train.data().clone(),
        labels: train.labels().to_vec(),
    })
}

fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KnnModel {
    /// Training-row indices of the `k` nearest rows, closest first; equal
    /// distances favour the lower index.
    pub fn neighbors(&self, query: ArrayView1<'_, f64>) -> Vec<usize> {
        let mut scored: Vec<(f64, usize)> = self
            .train
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, row)| (squared_distance(row, query), i))
            .collect();
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        if self.k < scored.len() {
            scored.select_nth_unstable_by(self.k - 1, by_distance);
            scored.truncate(self.k);
        }
        scored.sort_unstable_by(by_distance);
        scored.into_iter().map(|(_, i)| i).collect()
    }

    /// Majority label among the neighbours; vote ties go to the lowest label.
    pub fn predict_one(&self, query: ArrayView1<'_, f64>) -> u16 {
        let mut votes: Vec<(u16, usize)> = Vec::new();
        for i in self.neighbors(query) {
            let label = self.labels[i];
            match votes.iter_mut().find(|(l, _)| *l == label) {
                Some((_, n)) => *n += 1,
                None => votes.push((label, 1)),
            }
        }
        votes
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(l, _)| l)
            .expect("k >= 1")
    }

    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<u16>> {
        if x.ncols() != self.train.ncols() {
            return Err(Error::Dimension(format!(
                "kNN trained on {} features, got {}",
                self.train.ncols(),
                x.ncols()
            )));
        }
        Ok(x.rows().into_iter().map(|q| self.predict_one(q)).collect())
    }
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
    fn exact_match_with_k1() {
        let m = knn_fit(&fm(array![[0.0, 0.0], [5.0, 5.0], [9.0, 1.0]], vec![2, 0, 1]), 1).unwrap();
        assert_eq!(m.predict(&array![[5.0, 5.0], [9.0, 1.0]]).unwrap(), vec![0, 1]);
    }

    #[test]
    fn majority_of_three() {
        // distances 1, 2, 3 from the origin
        let m = knn_fit(&fm(array![[1.0], [-2.0], [3.0]], vec![0, 0, 1]), 3).unwrap();
        assert_eq!(m.predict(&array![[0.0]]).unwrap(), vec![0]);
    }

    #[test]
    fn ties_prefer_low_index_then_low_label() {
        // two rows at equal distance; lower index wins the single slot
        let m = knn_fit(&fm(array![[1.0], [-1.0]], vec![3, 1]), 1).unwrap();
        assert_eq!(m.predict(&array![[0.0]]).unwrap(), vec![3]);
        // one vote each: lowest label
        let m = knn_fit(&fm(array![[1.0], [-1.0]], vec![3, 1]), 2).unwrap();
        assert_eq!(m.predict(&array![[0.0]]).unwrap(), vec![1]);
    }

    #[test]
    fn fit_errors() {
        let empty = fm(Array2::zeros((0, 2)), vec![]);
        assert!(knn_fit(&empty, 1).is_err());
        let one = fm(array![[1.0]], vec![0]);
        assert!(knn_fit(&one, 2).is_err());
        assert!(knn_fit(&one, 0).is_err());
        let m = knn_fit(&one, 1).unwrap();
        assert!(m.predict(&array![[1.0, 2.0]]).is_err());
    }
}
