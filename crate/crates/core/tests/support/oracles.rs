//! Reference implementations that share no code path with the library.
//! Used by the core integration tests and by the acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeMap;

/// Exhaustive kNN: full stable sort of every distance, BTreeMap vote count.
pub fn knn_oracle(train: &[Vec<f64>], labels: &[u16], query: &[f64], k: usize) -> u16 {
    let mut all: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut d = 0.0;
            for j in 0..row.len() {
                let diff = row[j] - query[j];
                d += diff * diff;
            }
            (d, i)
        })
        .collect();
    // stable: equal distances stay in index order
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut votes: BTreeMap<u16, usize> = BTreeMap::new();
    for &(_, i) in all.iter().take(k) {
        *votes.entry(labels[i]).or_insert(0) += 1;
    }
    let mut best = (u16::MAX, 0usize);
    for (&label, &count) in &votes {
        if count > best.1 {
            best = (label, count);
        }
    }
    best.0
}

/// LBP histogram by building each code as a binary string.
pub fn lbp_oracle(img: &[Vec<u8>]) -> Vec<f64> {
    let rows = img.len();
    let cols = img[0].len();
    let mut hist = vec![0.0; 256];
    let mut total = 0.0;
    for r in 1..rows - 1 {
        for c in 1..cols - 1 {
            let center = img[r][c];
            let ring = [
                img[r - 1][c - 1],
                img[r - 1][c],
                img[r - 1][c + 1],
                img[r][c + 1],
                img[r + 1][c + 1],
                img[r + 1][c],
                img[r + 1][c - 1],
                img[r][c - 1],
            ];
            let bits: String = ring.iter().map(|&v| if v >= center { '1' } else { '0' }).collect();
            hist[usize::from_str_radix(&bits, 2).unwrap()] += 1.0;
            total += 1.0;
        }
    }
    hist.iter().map(|h| h / total).collect()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Hu invariants from raw moments of the mass-normalised image, shifted to
/// central moments by binomial expansion.
pub fn hu_oracle(img: &[Vec<u8>]) -> [f64; 7] {
    let mass: f64 = img.iter().flatten().map(|&v| f64::from(v)).sum();
    let raw = |p: i32, q: i32| -> f64 {
        let mut m = 0.0;
        for (y, row) in img.iter().enumerate() {
            for (x, &v) in row.iter().enumerate() {
                m += (x as f64).powi(p) * (y as f64).powi(q) * f64::from(v) / mass;
            }
        }
        m
    };
    let m00 = raw(0, 0);
    let xc = raw(1, 0) / m00;
    let yc = raw(0, 1) / m00;
    let central = |p: u32, q: u32| -> f64 {
        let mut mu = 0.0;
        for k in 0..=p {
            for l in 0..=q {
                mu += binomial(p, k)
                    * binomial(q, l)
                    * (-xc).powi((p - k) as i32)
                    * (-yc).powi((q - l) as i32)
                    * raw(k as i32, l as i32);
            }
        }
        mu
    };
    let eta = |p: u32, q: u32| central(p, q) / m00.powf(1.0 + f64::from(p + q) / 2.0);
    let (n20, n02, n11) = (eta(2, 0), eta(0, 2), eta(1, 1));
    let (n30, n03, n21, n12) = (eta(3, 0), eta(0, 3), eta(2, 1), eta(1, 2));
    [
        n20 + n02,
        (n20 - n02).powi(2) + 4.0 * n11.powi(2),
        (n30 - 3.0 * n12).powi(2) + (3.0 * n21 - n03).powi(2),
        (n30 + n12).powi(2) + (n21 + n03).powi(2),
        (n30 - 3.0 * n12) * (n30 + n12) * ((n30 + n12).powi(2) - 3.0 * (n21 + n03).powi(2))
            + (3.0 * n21 - n03) * (n21 + n03) * (3.0 * (n30 + n12).powi(2) - (n21 + n03).powi(2)),
        (n20 - n02) * ((n30 + n12).powi(2) - (n21 + n03).powi(2))
            + 4.0 * n11 * (n30 + n12) * (n21 + n03),
        (3.0 * n21 - n03) * (n30 + n12) * ((n30 + n12).powi(2) - 3.0 * (n21 + n03).powi(2))
            - (n30 - 3.0 * n12) * (n21 + n03) * (3.0 * (n30 + n12).powi(2) - (n21 + n03).powi(2)),
    ]
}

/// Softmax objective written out per sample with explicit loops:
/// mean cross-entropy plus `(l2 / 2)` times the squared non-bias weights.
/// `w[j][c]`, with row `d` holding the bias.
pub fn softmax_objective_oracle(w: &[Vec<f64>], x: &[Vec<f64>], y: &[u16], l2: f64) -> f64 {
    let d = x[0].len();
    let classes = w[0].len();
    let mut total = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let z: Vec<f64> = (0..classes)
            .map(|c| (0..d).map(|j| row[j] * w[j][c]).sum::<f64>() + w[d][c])
            .collect();
        let denom: f64 = z.iter().map(|v| v.exp()).sum();
        total -= (z[usize::from(label)].exp() / denom).ln();
    }
    let mut reg = 0.0;
    for row in &w[..d] {
        for v in row {
            reg += v * v;
        }
    }
    total / x.len() as f64 + 0.5 * l2 * reg
}

/// Central finite-difference gradient of `f` at `w`.
pub fn finite_difference(w: &[Vec<f64>], step: f64, f: impl Fn(&[Vec<f64>]) -> f64) -> Vec<Vec<f64>> {
    let mut grad = vec![vec![0.0; w[0].len()]; w.len()];
    let mut probe = w.to_vec();
    for i in 0..w.len() {
        for j in 0..w[0].len() {
            probe[i][j] = w[i][j] + step;
            let up = f(&probe);
            probe[i][j] = w[i][j] - step;
            let down = f(&probe);
            probe[i][j] = w[i][j];
            grad[i][j] = (up - down) / (2.0 * step);
        }
    }
    grad
}

/// Gradient descent on `||X W + 1 b - Y||^2 + lambda ||W||^2` from zero,
/// with a step from the Frobenius bound on the Hessian. Returns the
/// `(d + 1) x m` weights, bias last.
pub fn ridge_gd_oracle(x: &[Vec<f64>], y: &[Vec<f64>], lambda: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let d = x[0].len();
    let m = y[0].len();
    let aug: Vec<Vec<f64>> = x.iter().map(|r| r.iter().copied().chain([1.0]).collect()).collect();
    let frob: f64 = aug.iter().flatten().map(|v| v * v).sum();
    let step = 1.0 / (2.0 * (frob + lambda));
    let mut w = vec![vec![0.0; m]; d + 1];
    for _ in 0..2_000_000 {
        let mut grad = vec![vec![0.0; m]; d + 1];
        for i in 0..n {
            for c in 0..m {
                let pred: f64 = (0..=d).map(|j| aug[i][j] * w[j][c]).sum();
                let r = pred - y[i][c];
                for j in 0..=d {
                    grad[j][c] += 2.0 * aug[i][j] * r;
                }
            }
        }
        for j in 0..d {
            for c in 0..m {
                grad[j][c] += 2.0 * lambda * w[j][c];
            }
        }
        let norm = grad.iter().flatten().fold(0.0f64, |a, g| a.max(g.abs()));
        for j in 0..=d {
            for c in 0..m {
                w[j][c] -= step * grad[j][c];
            }
        }
        if norm < 1e-11 {
            break;
        }
    }
    w
}
