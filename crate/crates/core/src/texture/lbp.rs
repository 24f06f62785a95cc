//! Basic 8-neighbour, radius-1 local binary patterns.

use super::FeatureVector;
use crate::encode::EncodedTensor;
use crate::{Error, Result};

/// Neighbour offsets `(d_row, d_col)` clockwise from the top-left. The first
/// neighbour supplies the most significant bit.
const NEIGHBORS: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
];

/// Pattern code of an interior pixel; a neighbour at least as bright as the
/// centre sets its bit.
#[inline]
pub fn lbp_code(img: &EncodedTensor, row: usize, col: usize) -> u8 {
    let center = img.get(row, col, 0);
    NEIGHBORS.iter().fold(0u8, |code, &(dr, dc)| {
        let r = (row as isize + dr) as usize;
        let c = (col as isize + dc) as usize;
        (code << 1) | u8::from(img.get(r, c, 0) >= center)
    })
}

/// 256-bin histogram of interior pattern codes, normalised to sum 1.
pub fn lbp_histogram(img: &EncodedTensor) -> Result<FeatureVector> {
    if img.channels() != 1 {
        return Err(Error::invalid(format!("lbp expects 1 channel, got {}", img.channels())));
    }
    if img.rows() < 3 || img.cols() < 3 {
        return Err(Error::Dimension(format!(
            "LBP needs at least 3x3 pixels, got {}x{}",
            img.rows(),
            img.cols()
        )));
    }
    let mut counts = [0u64; 256];
    for r in 1..img.rows() - 1 {
        for c in 1..img.cols() - 1 {
            counts[usize::from(lbp_code(img, r, c))] += 1;
        }
    }
    let total = ((img.rows() - 2) * (img.cols() - 2)) as f64;
    FeatureVector::new(
        counts.iter().map(|&n| n as f64 / total).collect(),
        (0..256).map(|b| format!("lbp{b:03}")).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn constant_image_is_all_ones_pattern() {
        let img = EncodedTensor::from_plane(&Array2::from_elem((5, 7), 9u8));
        let h = lbp_histogram(&img).unwrap();
        assert_eq!(h.values()[255], 1.0);
        assert_eq!(h.values().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn bright_center_is_zero_pattern() {
        let img = EncodedTensor::from_plane(&array![[0u8, 0, 0], [0, 255, 0], [0, 0, 0]]);
        assert_eq!(lbp_histogram(&img).unwrap().values()[0], 1.0);
    }

    #[test]
    fn bit_order_is_clockwise_from_top_left() {
        // only the top-left neighbour is bright enough
        let img = EncodedTensor::from_plane(&array![[9u8, 0, 0], [0, 5, 0], [0, 0, 0]]);
        assert_eq!(lbp_code(&img, 1, 1), 0b1000_0000);
        // only the left neighbour
        let img = EncodedTensor::from_plane(&array![[0u8, 0, 0], [9, 5, 0], [0, 0, 0]]);
        assert_eq!(lbp_code(&img, 1, 1), 0b0000_0001);
    }

    #[test]
    fn too_small() {
        let img = EncodedTensor::from_plane(&Array2::zeros((2, 9)));
        assert!(lbp_histogram(&img).is_err());
    }
}
