//! One-vs-rest RBF support vector machines trained with simplified SMO.
//!
//! Each binary machine pairs a KKT-violating multiplier `alpha_i` with a
//! second multiplier drawn from a seeded RNG and solves the two-variable
//! subproblem analytically. Training ends after `max_passes` consecutive
//! sweeps with no update (or `max_iter` sweeps in total).

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::softmax::argmax_rows;
use crate::texture::FeatureMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    /// Box constraint.
    pub c: f64,
    /// RBF width; `None` means `1 / n_features`.
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_passes: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: None,
            tol: 1e-3,
            max_passes: 20,
            max_iter: 10_000,
            seed: 0,
        }
    }
}

/// Dual coefficients of one class-vs-rest machine, aligned with
/// [`SvmModel::support`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub alpha: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub c: f64,
    pub gamma: f64,
    /// Training rows with a nonzero multiplier in at least one machine.
    pub support: Array2<f64>,
    pub support_labels: Vec<u16>,
    /// One machine per class, indexed by label.
    pub machines: Vec<BinarySvm>,
}

#[inline]
fn rbf(gamma: f64, a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    let d2: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

pub fn rbf_kernel_matrix(gamma: f64, x: &Array2<f64>) -> Array2<f64> {
    let n = x.nrows();
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        k[[i, i]] = 1.0;
        for j in 0..i {
            let v = rbf(gamma, x.row(i), x.row(j));
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    k
}

/// Result of training one binary machine on the full training set.
#[derive(Debug, Clone)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
}

/// Trains one binary machine on targets `y` in `{-1, +1}`.
/// Pins values within rounding distance of a bound onto it, so that a
/// multiplier is never classed as free by accident.
fn snap(a: f64, c: f64) -> f64 {
    let eps = 1e-12 * c;
    if a < eps {
        0.0
    } else if a > c - eps {
        c
    } else {
        a
    }
}

struct Smo<'a> {
    kernel: &'a Array2<f64>,
    y: &'a [f64],
    c: f64,
    alpha: Vec<f64>,
    bias: f64,
    err: Vec<f64>,
}

impl Smo<'_> {
    /// Joint update of `alpha[i]` and `alpha[j]`. Returns false when the pair
    /// cannot make progress.
    fn step(&mut self, i: usize, j: usize) -> bool {
        let (k, y, c) = (self.kernel, self.y, self.c);
        let (e_i, e_j) = (self.err[i], self.err[j]);
        let (a_i, a_j) = (self.alpha[i], self.alpha[j]);
        let (lo, hi) = if y[i] != y[j] {
            ((a_j - a_i).max(0.0), (c + a_j - a_i).min(c))
        } else {
            ((a_i + a_j - c).max(0.0), (a_i + a_j).min(c))
        };
        if lo >= hi {
            return false;
        }
        let eta = 2.0 * k[[i, j]] - k[[i, i]] - k[[j, j]];
        if eta >= 0.0 {
            return false;
        }
        let new_j = (a_j - y[j] * (e_i - e_j) / eta).clamp(lo, hi);
        if (new_j - a_j).abs() < 1e-5 * (new_j + a_j + 1e-5) {
            return false;
        }
        let new_i = snap(a_i + y[i] * y[j] * (a_j - new_j), c);
        let new_j = snap(new_j, c);
        let (d_i, d_j) = (new_i - a_i, new_j - a_j);
        let b1 = self.bias - e_i - y[i] * d_i * k[[i, i]] - y[j] * d_j * k[[i, j]];
        let b2 = self.bias - e_j - y[i] * d_i * k[[i, j]] - y[j] * d_j * k[[j, j]];
        let new_b = if new_i > 0.0 && new_i < c {
            b1
        } else if new_j > 0.0 && new_j < c {
            b2
        } else {
            0.5 * (b1 + b2)
        };
        let d_b = new_b - self.bias;
        self.alpha[i] = new_i;
        self.alpha[j] = new_j;
        self.bias = new_b;
        for (m, e) in self.err.iter_mut().enumerate() {
            *e += y[i] * d_i * k[[i, m]] + y[j] * d_j * k[[j, m]] + d_b;
        }
        true
    }

    /// Re-centres the bias on the mean over free multipliers, which demand
    /// `y f = 1` exactly.
    fn refresh_bias(&mut self) {
        let free: Vec<usize> = (0..self.alpha.len()).filter(|&i| self.alpha[i] > 0.0 && self.alpha[i] < self.c).collect();
        if free.is_empty() {
            return;
        }
        let shift = -free.iter().map(|&i| self.err[i]).sum::<f64>() / free.len() as f64;
        self.bias += shift;
        self.err.iter_mut().for_each(|e| *e += shift);
    }
}

/// Trains one binary machine on targets `y` in `{-1, +1}`.
///
/// Each KKT-violating `i` is paired with a random `j`; if that pair makes no
/// progress the remaining partners are tried in order from a random offset.
pub fn smo_binary(kernel: &Array2<f64>, y: &[f64], cfg: &SvmConfig, rng: &mut ChaCha8Rng) -> BinarySolution {
    let n = y.len();
    let mut s = Smo {
        kernel,
        y,
        c: cfg.c,
        alpha: vec![0.0; n],
        bias: 0.0,
        // f(x_i) - y_i with alpha = 0, b = 0
        err: y.iter().map(|&t| -t).collect(),
    };
    let mut passes = 0;
    let mut iter = 0;
    while passes < cfg.max_passes && iter < cfg.max_iter && n > 1 {
        let mut changed = 0;
        for i in 0..n {
            let r_i = y[i] * s.err[i];
            if !((r_i < -cfg.tol && s.alpha[i] < s.c) || (r_i > cfg.tol && s.alpha[i] > 0.0)) {
                continue;
            }
            let offset = rng.random_range(0..n - 1);
            let stepped = (0..n - 1).any(|t| {
                let mut j = (offset + t) % (n - 1);
                if j >= i {
                    j += 1;
                }
                s.step(i, j)
            });
            if stepped {
                changed += 1;
            }
        }
        s.refresh_bias();
        passes = if changed == 0 { passes + 1 } else { 0 };
        iter += 1;
    }
    BinarySolution { alpha: s.alpha, bias: s.bias }
}

/// Largest KKT violation of a binary solution:
/// `alpha = 0` needs `y f >= 1`, `0 < alpha < C` needs `y f = 1` and
/// `alpha = C` needs `y f <= 1`.
pub fn kkt_violation(kernel: &Array2<f64>, y: &[f64], sol: &BinarySolution, c: f64) -> f64 {
    let n = y.len();
    (0..n)
        .map(|i| {
            let f: f64 = (0..n).map(|j| sol.alpha[j] * y[j] * kernel[[i, j]]).sum::<f64>() + sol.bias;
            let margin = y[i] * f;
            let a = sol.alpha[i];
            if a <= 0.0 {
                (1.0 - margin).max(0.0)
            } else if a >= c {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            }
        })
        .fold(0.0, f64::max)
}

pub fn svm_fit(train: &FeatureMatrix, cfg: &SvmConfig) -> Result<SvmModel> {
    let n_classes = super::softmax::dense_class_count(train.labels())?;
    if !(cfg.c > 0.0 && cfg.c.is_finite()) {
        return Err(Error::invalid("SVM box constraint C must be positive"));
    }
    let gamma = cfg
        .gamma
        .unwrap_or(1.0 / train.n_features().max(1) as f64);
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("SVM gamma must be positive"));
    }
    let x = train.data();
    let kernel = rbf_kernel_matrix(gamma, x);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let solutions: Vec<BinarySolution> = (0..n_classes)
        .map(|k| {
            let y: Vec<f64> = train
                .labels()
                .iter()
                .map(|&l| if usize::from(l) == k { 1.0 } else { -1.0 })
                .collect();
            smo_binary(&kernel, &y, cfg, &mut rng)
        })
        .collect();

    let keep: Vec<usize> = (0..train.n_rows())
        .filter(|&i| solutions.iter().any(|s| s.alpha[i] > 0.0))
        .collect();
    let machines = solutions
        .iter()
        .map(|s| BinarySvm {
            alpha: keep.iter().map(|&i| s.alpha[i]).collect(),
            bias: s.bias,
        })
        .collect();
    Ok(SvmModel {
        c: cfg.c,
        gamma,
        support: x.select(ndarray::Axis(0), &keep),
        support_labels: keep.iter().map(|&i| train.labels()[i]).collect(),
        machines,
    })
}

impl SvmModel {
    pub fn n_features(&self) -> usize {
        self.support.ncols()
    }

    /// `n x C` matrix of one-vs-rest decision values.
    pub fn decision_values(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n_features() && !self.support.is_empty() {
            return Err(Error::Dimension(format!(
                "SVM trained on {} features, got {}",
                self.n_features(),
                x.ncols()
            )));
        }
        let mut out = Array2::zeros((x.nrows(), self.machines.len()));
        for (q, query) in x.rows().into_iter().enumerate() {
            let k: Vec<f64> = self
                .support
                .rows()
                .into_iter()
                .map(|s| rbf(self.gamma, s, query))
                .collect();
            for (c, m) in self.machines.iter().enumerate() {
                let f: f64 = m
                    .alpha
                    .iter()
                    .zip(&self.support_labels)
                    .zip(&k)
                    .map(|((a, &l), kv)| {
                        let y = if usize::from(l) == c { 1.0 } else { -1.0 };
                        a * y * kv
                    })
                    .sum();
                out[[q, c]] = f + m.bias;
            }
        }
        Ok(out)
    }

    /// Argmax of decision values, ties to the lowest label.
    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<u16>> {
        Ok(argmax_rows(&self.decision_values(x)?))
    }
}
