//! Hu's seven moment invariants.
//!
//! Pixel intensities are first divided by the total mass, so the invariants
//! are unaffected by uniform brightness scaling as well as by translation
//! and rotation.

use super::FeatureVector;
use crate::encode::EncodedTensor;
use crate::{Error, Result};

/// Normalised central moments up to third order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralMoments {
    pub eta20: f64,
    pub eta02: f64,
    pub eta11: f64,
    pub eta30: f64,
    pub eta03: f64,
    pub eta21: f64,
    pub eta12: f64,
}

/// Moments of a single-channel image with `x` = column and `y` = row.
pub fn central_moments(img: &EncodedTensor) -> Result<CentralMoments> {
    if img.channels() != 1 {
        return Err(Error::invalid(format!("hu_moments expects 1 channel, got {}", img.channels())));
    }
    let mass: f64 = img.pixels().iter().map(|&p| f64::from(p)).sum();
    if mass == 0.0 {
        return Err(Error::invalid("image has no pixel mass"));
    }
    let cols = img.cols();
    let weight = |i: usize| f64::from(img.pixels()[i]) / mass;
    let (mut m00, mut xbar, mut ybar) = (0.0, 0.0, 0.0);
    for (i, &p) in img.pixels().iter().enumerate() {
        if p == 0 {
            continue;
        }
        let w = weight(i);
        m00 += w;
        xbar += w * (i % cols) as f64;
        ybar += w * (i / cols) as f64;
    }
    xbar /= m00;
    ybar /= m00;
    let mut mu = [[0.0f64; 4]; 4];
    for (i, &p) in img.pixels().iter().enumerate() {
        if p == 0 {
            continue;
        }
        let w = weight(i);
        let x = (i % cols) as f64 - xbar;
        let y = (i / cols) as f64 - ybar;
        let (x2, y2) = (x * x, y * y);
        mu[2][0] += w * x2;
        mu[0][2] += w * y2;
        mu[1][1] += w * x * y;
        mu[3][0] += w * x2 * x;
        mu[0][3] += w * y2 * y;
        mu[2][1] += w * x2 * y;
        mu[1][2] += w * x * y2;
    }
    let eta = |p: usize, q: usize| mu[p][q] / m00.powf(1.0 + (p + q) as f64 / 2.0);
    Ok(CentralMoments {
        eta20: eta(2, 0),
        eta02: eta(0, 2),
        eta11: eta(1, 1),
        eta30: eta(3, 0),
        eta03: eta(0, 3),
        eta21: eta(2, 1),
        eta12: eta(1, 2),
    })
}

/// The seven invariants before log scaling.
pub fn hu_invariants(img: &EncodedTensor) -> Result<[f64; 7]> {
    let CentralMoments {
        eta20: n20,
        eta02: n02,
        eta11: n11,
        eta30: n30,
        eta03: n03,
        eta21: n21,
        eta12: n12,
    } = central_moments(img)?;
    let a = n30 + n12;
    let b = n21 + n03;
    let c = n30 - 3.0 * n12;
    let d = 3.0 * n21 - n03;
    Ok([
        n20 + n02,
        (n20 - n02).powi(2) + 4.0 * n11 * n11,
        c * c + d * d,
        a * a + b * b,
        c * a * (a * a - 3.0 * b * b) + d * b * (3.0 * a * a - b * b),
        (n20 - n02) * (a * a - b * b) + 4.0 * n11 * a * b,
        d * a * (a * a - 3.0 * b * b) - c * b * (3.0 * a * a - b * b),
    ])
}

/// `sign(h) * log10(|h| + 1e-30)`, with `sign(0) = 0`.
pub fn log_scale(h: f64) -> f64 {
    if h == 0.0 {
        0.0
    } else {
        h.signum() * (h.abs() + 1e-30).log10()
    }
}

/// Log-scaled Hu invariants named `hu1..hu7`.
pub fn hu_moments(img: &EncodedTensor) -> Result<FeatureVector> {
    let h = hu_invariants(img)?;
    FeatureVector::new(
        h.iter().map(|&v| log_scale(v)).collect(),
        (1..=7).map(|i| format!("hu{i}")).collect(),
    )
}
