//! Texture descriptors for encoded tensors and the feature-matrix formats.

mod glcm;
mod hu;
mod io;
mod lbp;
mod matrix;

use serde::{Deserialize, Serialize};

use crate::encode::EncodedTensor;
use crate::{Error, Result};

pub use glcm::{glcm, haralick, Angle, Glcm, HARALICK_NAMES};
pub use hu::{central_moments, hu_invariants, hu_moments, log_scale, CentralMoments};
pub use io::{export_features, import_features, FeatureFormat, FEATURE_MAGIC};
pub use lbp::{lbp_code, lbp_histogram};
pub use matrix::{FeatureMatrix, FeatureVector, Modality};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub glcm: bool,
    pub hu: bool,
    pub lbp: bool,
    pub levels: usize,
    pub distance: usize,
    /// Extract from every channel and concatenate, rather than channel 0 only.
    pub per_channel: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            glcm: true,
            hu: true,
            lbp: true,
            levels: 32,
            distance: 1,
            per_channel: false,
        }
    }
}

impl FeatureConfig {
    /// Length of the vector `extract_all` returns for one plane.
    pub fn plane_len(&self) -> usize {
        usize::from(self.glcm) * Angle::ALL.len() * HARALICK_NAMES.len()
            + usize::from(self.hu) * 7
            + usize::from(self.lbp) * 256
    }
}

/// Haralick statistics at all four angles, then Hu moments, then the LBP
/// histogram, for one single-channel image.
pub fn extract_all(img: &EncodedTensor, cfg: &FeatureConfig) -> Result<FeatureVector> {
    if img.channels() != 1 {
        return Err(Error::invalid(format!(
            "extract_all expects 1 channel, got {}",
            img.channels()
        )));
    }
    let mut out = FeatureVector::empty();
    if cfg.glcm {
        glcm::check_levels(cfg.levels)?;
        let bins = glcm::quantize_levels(img, cfg.levels);
        for angle in Angle::ALL {
            let g = glcm::glcm_from_bins(&bins, cfg.distance, angle, cfg.levels)?;
            for (name, v) in HARALICK_NAMES.iter().zip(haralick(&g).values()) {
                out.push(format!("glcm_a{}_{name}", angle.degrees()), *v);
            }
        }
    }
    if cfg.hu {
        out.extend_prefixed(hu_moments(img)?, "");
    }
    if cfg.lbp {
        out.extend_prefixed(lbp_histogram(img)?, "");
    }
    Ok(out)
}

/// Features of a possibly multi-channel tensor. With `per_channel` each
/// plane's vector is appended with a `ch{c}_` prefix.
pub fn extract_tensor(img: &EncodedTensor, cfg: &FeatureConfig) -> Result<FeatureVector> {
    if !cfg.per_channel {
        return extract_all(&img.channel(0), cfg);
    }
    let mut out = FeatureVector::empty();
    for c in 0..img.channels() {
        out.extend_prefixed(extract_all(&img.channel(c), cfg)?, &format!("ch{c}_"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn varied(rows: usize, cols: usize) -> EncodedTensor {
        EncodedTensor::from_plane(&Array2::from_shape_fn((rows, cols), |(r, c)| {
            ((r * 37 + c * 11 + r * c) % 256) as u8
        }))
    }

    #[test]
    fn default_length_is_283() {
        let v = extract_all(&varied(12, 10), &FeatureConfig::default()).unwrap();
        assert_eq!(v.len(), 283);
        assert_eq!(FeatureConfig::default().plane_len(), 283);
        assert_eq!(v.names()[0], "glcm_a0_contrast");
        assert_eq!(v.names()[20], "hu1");
        assert_eq!(v.names()[282], "lbp255");
    }

    #[test]
    fn without_lbp_is_27() {
        let cfg = FeatureConfig {
            lbp: false,
            ..FeatureConfig::default()
        };
        assert_eq!(extract_all(&varied(8, 8), &cfg).unwrap().len(), 27);
    }

    #[test]
    fn constant_image_is_finite() {
        let img = EncodedTensor::from_plane(&Array2::from_elem((16, 16), 128u8));
        let v = extract_all(&img, &FeatureConfig::default()).unwrap();
        assert!(v.values().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn per_channel_concatenates() {
        let base = varied(9, 9);
        let img = crate::encode::replicate_channels(&base, 2).unwrap();
        let cfg = FeatureConfig {
            per_channel: true,
            ..FeatureConfig::default()
        };
        let v = extract_tensor(&img, &cfg).unwrap();
        assert_eq!(v.len(), 566);
        assert_eq!(v.values()[..283], v.values()[283..]);
        assert!(v.names()[283].starts_with("ch1_"));
        let first = extract_tensor(&img, &FeatureConfig::default()).unwrap();
        assert_eq!(first.len(), 283);
    }
}
