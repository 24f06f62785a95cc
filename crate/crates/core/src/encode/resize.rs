use super::EncodedTensor;
use crate::{Error, Result};

/// Per-channel bilinear resampling with half-pixel centre alignment: output
/// pixel `i` samples the source at `(i + 0.5) * in / out - 0.5`, clamped to
/// the image. Results are rounded half away from zero.
pub fn resize_bilinear(img: &EncodedTensor, rows: usize, cols: usize) -> Result<EncodedTensor> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("resize target must be at least 1x1"));
    }
    if img.rows == 0 || img.cols == 0 {
        return Err(Error::invalid("cannot resize an empty image"));
    }
    if (rows, cols) == (img.rows, img.cols) {
        return Ok(img.clone());
    }
    let ys = axis_taps(img.rows, rows);
    let xs = axis_taps(img.cols, cols);
    let ch = img.channels;
    let mut pixels = Vec::with_capacity(rows * cols * ch);
    for &(y0, y1, wy) in &ys {
        for &(x0, x1, wx) in &xs {
            for c in 0..ch {
                let p00 = f64::from(img.get(y0, x0, c));
                let p01 = f64::from(img.get(y0, x1, c));
                let p10 = f64::from(img.get(y1, x0, c));
                let p11 = f64::from(img.get(y1, x1, c));
                let top = p00 + (p01 - p00) * wx;
                let bottom = p10 + (p11 - p10) * wx;
                let v = top + (bottom - top) * wy;
                pixels.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    EncodedTensor::new(rows, cols, ch, pixels)
}

/// For each output index: the two source indices and the weight of the second.
fn axis_taps(len_in: usize, len_out: usize) -> Vec<(usize, usize, f64)> {
    let scale = len_in as f64 / len_out as f64;
    let last = (len_in - 1) as f64;
    (0..len_out)
        .map(|i| {
            let src = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, last);
            let lo = src.floor() as usize;
            let hi = (lo + 1).min(len_in - 1);
            (lo, hi, src - lo as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn constant_stays_constant() {
        let img = EncodedTensor::from_plane(&Array2::from_elem((512, 440), 77u8));
        let out = resize_bilinear(&img, 224, 224).unwrap();
        assert_eq!(out.shape(), (224, 224, 1));
        assert!(out.pixels().iter().all(|&p| p == 77));
    }

    #[test]
    fn same_size_is_identity() {
        let img = EncodedTensor::new(3, 4, 2, (0..24).map(|v| v as u8 * 10).collect()).unwrap();
        assert_eq!(resize_bilinear(&img, 3, 4).unwrap(), img);
    }

    #[test]
    fn upsample_ramp_by_hand() {
        // scale 0.5: sources at -0.25, 0.25, 0.75, 1.25 clamp to 0, 0.25, 0.75, 1
        let img = EncodedTensor::from_plane(&array![[0u8, 0], [255, 255]]);
        let out = resize_bilinear(&img, 4, 4).unwrap().plane(0);
        let expected_rows = [0u8, 64, 191, 255];
        for c in 0..4 {
            for r in 0..4 {
                assert_eq!(out[[r, c]], expected_rows[r]);
            }
            for r in 1..4 {
                assert!(out[[r, c]] >= out[[r - 1, c]]);
            }
        }
    }

    #[test]
    fn downsample_keeps_channel_count() {
        let img = EncodedTensor::new(8, 6, 3, (0..144).map(|v| v as u8).collect()).unwrap();
        let out = resize_bilinear(&img, 4, 3).unwrap();
        assert_eq!(out.shape(), (4, 3, 3));
        assert!(resize_bilinear(&img, 0, 3).is_err());
    }
}
