//! Grayscale image tensors built from EEG trials.
//!
//! Each electrode's min-max normalised, 8-bit quantised row is repeated
//! `stretch_factor` times, so a 128-channel, 440-sample trial with the
//! default factor of 4 becomes a 512x440 plane.

mod io;
mod resize;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::trial::Trial;
use crate::{Error, Result};

pub use io::{decode_tensor, encode_tensor_bytes, read_tensor, write_png, write_tensor, TENSOR_MAGIC, TENSOR_VERSION};
pub use resize::resize_bilinear;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationScope {
    /// One min/max over the whole trial.
    #[default]
    PerTrial,
    /// Independent min/max per channel row.
    PerChannel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncodeConfig {
    /// Pixel rows per electrode.
    pub stretch_factor: usize,
    pub normalization_scope: NormalizationScope,
    /// Channel count of the single-trial variant.
    pub replicate_to: usize,
    pub resize_to: Option<(usize, usize)>,
}

impl Default for EncodeConfig {
    fn default() -> Self {
        Self {
            stretch_factor: 4,
            normalization_scope: NormalizationScope::PerTrial,
            replicate_to: 3,
            resize_to: None,
        }
    }
}

impl EncodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stretch_factor == 0 {
            return Err(Error::invalid("stretch_factor must be at least 1"));
        }
        if self.replicate_to == 0 {
            return Err(Error::invalid("replicate_to must be at least 1"));
        }
        if matches!(self.resize_to, Some((r, c)) if r == 0 || c == 0) {
            return Err(Error::invalid("resize_to dimensions must be at least 1"));
        }
        Ok(())
    }
}

/// An 8-bit image, row-major with channels last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedTensor {
    rows: usize,
    cols: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl EncodedTensor {
    pub fn new(rows: usize, cols: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if rows.checked_mul(cols).and_then(|n| n.checked_mul(channels)) != Some(pixels.len()) {
            return Err(Error::Dimension(format!(
                "{} pixels cannot form a {rows}x{cols}x{channels} tensor",
                pixels.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            channels,
            pixels,
        })
    }

    pub fn from_plane(plane: &Array2<u8>) -> Self {
        let (rows, cols) = plane.dim();
        Self {
            rows,
            cols,
            channels: 1,
            pixels: plane.iter().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.channels)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, channel: usize) -> u8 {
        self.pixels[(row * self.cols + col) * self.channels + channel]
    }

    /// Copies one channel out as a 2-D array.
    pub fn plane(&self, channel: usize) -> Array2<u8> {
        assert!(channel < self.channels, "channel {channel} out of range");
        Array2::from_shape_fn((self.rows, self.cols), |(r, c)| self.get(r, c, channel))
    }

    /// One channel as a single-channel tensor.
    pub fn channel(&self, channel: usize) -> EncodedTensor {
        if self.channels == 1 {
            return self.clone();
        }
        EncodedTensor::from_plane(&self.plane(channel))
    }
}

/// Affine map of the trial onto `[0, 1]`. A zero range maps to 0.5.
pub fn minmax_normalize(t: &Trial, scope: NormalizationScope) -> Array2<f64> {
    let mut out = t.data.clone();
    match scope {
        NormalizationScope::PerTrial => {
            let (lo, hi) = min_max(out.iter().copied());
            rescale(out.iter_mut(), lo, hi);
        }
        NormalizationScope::PerChannel => {
            for mut row in out.axis_iter_mut(Axis(0)) {
                let (lo, hi) = min_max(row.iter().copied());
                rescale(row.iter_mut(), lo, hi);
            }
        }
    }
    out
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn rescale<'a>(values: impl Iterator<Item = &'a mut f64>, lo: f64, hi: f64) {
    let range = hi - lo;
    if range > 0.0 {
        values.for_each(|v| *v = ((*v - lo) / range).clamp(0.0, 1.0));
    } else {
        values.for_each(|v| *v = 0.5);
    }
}

/// `round(255 * v)`, half away from zero.
pub fn quantize_u8(m: &Array2<f64>) -> Result<Array2<u8>> {
    let mut out = Array2::zeros(m.dim());
    for ((idx, &v), o) in m.indexed_iter().zip(out.iter_mut()) {
        *o = quantize_value(v).ok_or_else(|| {
            Error::Range(format!("value {v} at {idx:?} is outside [0, 1]"))
        })?;
    }
    Ok(out)
}

#[inline]
fn quantize_value(v: f64) -> Option<u8> {
    // f64::round rounds half away from zero
    (0.0..=1.0).contains(&v).then(|| (255.0 * v).round() as u8)
}

/// Encodes one trial as a single-channel tensor of
/// `n_channels * stretch_factor` rows by `n_samples` columns.
pub fn encode_trial(t: &Trial, cfg: &EncodeConfig) -> Result<EncodedTensor> {
    cfg.validate()?;
    let quantized = quantize_u8(&minmax_normalize(t, cfg.normalization_scope))?;
    let (channels, samples) = quantized.dim();
    let f = cfg.stretch_factor;
    let mut pixels = Vec::with_capacity(channels * f * samples);
    for row in quantized.rows() {
        let row = row.as_slice().expect("owned array rows are contiguous");
        for _ in 0..f {
            pixels.extend_from_slice(row);
        }
    }
    EncodedTensor::new(channels * f, samples, 1, pixels)
}

/// Clones a single-channel tensor into `k` identical channels.
pub fn replicate_channels(img: &EncodedTensor, k: usize) -> Result<EncodedTensor> {
    if img.channels != 1 {
        return Err(Error::invalid(format!(
            "replicate_channels expects 1 channel, got {}",
            img.channels
        )));
    }
    if k == 0 {
        return Err(Error::invalid("replication count must be at least 1"));
    }
    let pixels = img
        .pixels
        .iter()
        .flat_map(|&p| std::iter::repeat_n(p, k))
        .collect();
    EncodedTensor::new(img.rows, img.cols, k, pixels)
}

/// Stacks the encodings of one stimulus' trials as channels, ordered by
/// ascending subject id.
pub fn stack_subjects(trials: &[&Trial], cfg: &EncodeConfig) -> Result<EncodedTensor> {
    let first = trials
        .first()
        .ok_or_else(|| Error::invalid("stack_subjects needs at least one trial"))?;
    for t in trials {
        if t.stimulus_id != first.stimulus_id {
            return Err(Error::invalid(format!(
                "mixed stimulus ids {} and {}",
                first.stimulus_id, t.stimulus_id
            )));
        }
        if t.data.dim() != first.data.dim() {
            return Err(Error::Dimension(format!(
                "trial shapes {:?} and {:?} differ",
                first.data.dim(),
                t.data.dim()
            )));
        }
    }
    let mut ordered: Vec<&Trial> = trials.to_vec();
    ordered.sort_by_key(|t| t.subject_id);
    if let Some(w) = ordered.windows(2).find(|w| w[0].subject_id == w[1].subject_id) {
        return Err(Error::invalid(format!(
            "duplicate subject id {} for stimulus {}",
            w[0].subject_id, first.stimulus_id
        )));
    }
    let planes = ordered
        .iter()
        .map(|t| encode_trial(t, cfg))
        .collect::<Result<Vec<_>>>()?;
    let (rows, cols) = (planes[0].rows, planes[0].cols);
    let k = planes.len();
    let mut pixels = vec![0u8; rows * cols * k];
    for (c, plane) in planes.iter().enumerate() {
        for (i, &p) in plane.pixels.iter().enumerate() {
            pixels[i * k + c] = p;
        }
    }
    EncodedTensor::new(rows, cols, k, pixels)
}

/// Single-trial variant: encode, replicate to `cfg.replicate_to` channels,
/// then resize when `cfg.resize_to` is set.
pub fn encode_single(t: &Trial, cfg: &EncodeConfig) -> Result<EncodedTensor> {
    let img = replicate_channels(&encode_trial(t, cfg)?, cfg.replicate_to)?;
    Ok(match cfg.resize_to {
        Some((r, c)) => resize_bilinear(&img, r, c)?,
        None => img,
    })
}

/// Subject-channel variant: stack, then resize when `cfg.resize_to` is set.
pub fn encode_stacked(trials: &[&Trial], cfg: &EncodeConfig) -> Result<EncodedTensor> {
    let img = stack_subjects(trials, cfg)?;
    Ok(match cfg.resize_to {
        Some((r, c)) => resize_bilinear(&img, r, c)?,
        None => img,
    })
}
