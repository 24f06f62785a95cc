//! Gray-level co-occurrence matrices and Haralick statistics.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::FeatureVector;
use crate::encode::EncodedTensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Angle {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Angle {
    pub const ALL: [Angle; 4] = [Angle::Deg0, Angle::Deg45, Angle::Deg90, Angle::Deg135];

    pub fn degrees(self) -> u32 {
        match self {
            Angle::Deg0 => 0,
            Angle::Deg45 => 45,
            Angle::Deg90 => 90,
            Angle::Deg135 => 135,
        }
    }

    /// `(d_row, d_col)` for a pixel distance; rows grow downwards.
    fn offset(self, distance: usize) -> (isize, isize) {
        let d = distance as isize;
        match self {
            Angle::Deg0 => (0, d),
            Angle::Deg45 => (-d, d),
            Angle::Deg90 => (-d, 0),
            Angle::Deg135 => (-d, -d),
        }
    }
}

/// A symmetric, normalised co-occurrence matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Glcm {
    levels: usize,
    matrix: Array2<f64>,
    distance: usize,
    angle: Angle,
}

impl Glcm {
    /// Wraps an existing matrix, checking shape, symmetry and unit mass.
    pub fn from_matrix(matrix: Array2<f64>, distance: usize, angle: Angle) -> Result<Self> {
        let (r, c) = matrix.dim();
        if r != c || r < 2 {
            return Err(Error::Dimension(format!("GLCM must be square with >= 2 levels, got {r}x{c}")));
        }
        if matrix.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
            return Err(Error::invalid("GLCM entries must be finite and nonnegative"));
        }
        if (matrix.sum() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("GLCM entries must sum to 1"));
        }
        for i in 0..r {
            for j in 0..i {
                if (matrix[[i, j]] - matrix[[j, i]]).abs() > 1e-12 {
                    return Err(Error::invalid("GLCM must be symmetric"));
                }
            }
        }
        Ok(Self {
            levels: r,
            matrix,
            distance,
            angle,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn angle(&self) -> Angle {
        self.angle
    }
}

pub(crate) fn check_levels(levels: usize) -> Result<()> {
    if !(2..=256).contains(&levels) {
        return Err(Error::invalid(format!("GLCM levels must be in [2, 256], got {levels}")));
    }
    Ok(())
}

/// Pixel value `v` falls in bin `floor(v * levels / 256)`.
pub(crate) fn quantize_levels(img: &EncodedTensor, levels: usize) -> Array2<u16> {
    Array2::from_shape_fn((img.rows(), img.cols()), |(r, c)| {
        ((usize::from(img.get(r, c, 0)) * levels / 256).min(levels - 1)) as u16
    })
}

/// Co-occurrence matrix of a single-channel image for one offset, counting
/// each pair in both directions.
pub fn glcm(img: &EncodedTensor, distance: usize, angle: Angle, levels: usize) -> Result<Glcm> {
    if img.channels() != 1 {
        return Err(Error::invalid(format!("glcm expects 1 channel, got {}", img.channels())));
    }
    check_levels(levels)?;
    glcm_from_bins(&quantize_levels(img, levels), distance, angle, levels)
}

pub(crate) fn glcm_from_bins(
    bins: &Array2<u16>,
    distance: usize,
    angle: Angle,
    levels: usize,
) -> Result<Glcm> {
    if distance == 0 {
        return Err(Error::invalid("GLCM distance must be at least 1"));
    }
    let (rows, cols) = bins.dim();
    let (dr, dc) = angle.offset(distance);
    let reach_r = dr.unsigned_abs();
    let reach_c = dc.unsigned_abs();
    if rows <= reach_r || cols <= reach_c {
        return Err(Error::Dimension(format!(
            "{rows}x{cols} image too small for distance {distance} at {} degrees",
            angle.degrees()
        )));
    }
    let mut counts = vec![0u64; levels * levels];
    // first pixel ranges so that (r + dr, c + dc) stays inside
    let (r0, r1) = if dr < 0 { (reach_r, rows) } else { (0, rows - reach_r) };
    let (c0, c1) = if dc < 0 { (reach_c, cols) } else { (0, cols - reach_c) };
    for r in r0..r1 {
        let rn = (r as isize + dr) as usize;
        for c in c0..c1 {
            let cn = (c as isize + dc) as usize;
            let a = usize::from(bins[[r, c]]);
            let b = usize::from(bins[[rn, cn]]);
            counts[a * levels + b] += 1;
            counts[b * levels + a] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    let matrix = Array2::from_shape_fn((levels, levels), |(i, j)| {
        counts[i * levels + j] as f64 / total as f64
    });
    Ok(Glcm {
        levels,
        matrix,
        distance,
        angle,
    })
}

pub const HARALICK_NAMES: [&str; 5] = ["contrast", "correlation", "energy", "homogeneity", "entropy"];

/// Contrast, correlation, energy (angular second moment), homogeneity and
/// entropy (natural log, `0 ln 0 = 0`). Correlation is 0 when a marginal
/// variance vanishes.
pub fn haralick(g: &Glcm) -> FeatureVector {
    let p = &g.matrix;
    let (mut contrast, mut energy, mut homogeneity, mut entropy) = (0.0, 0.0, 0.0, 0.0);
    let (mut mean_i, mut mean_j) = (0.0, 0.0);
    for ((i, j), &v) in p.indexed_iter() {
        if v == 0.0 {
            continue;
        }
        let d = i as f64 - j as f64;
        contrast += v * d * d;
        energy += v * v;
        homogeneity += v / (1.0 + d * d);
        entropy -= v * v.ln();
        mean_i += v * i as f64;
        mean_j += v * j as f64;
    }
    let (mut var_i, mut var_j, mut cov) = (0.0, 0.0, 0.0);
    for ((i, j), &v) in p.indexed_iter() {
        if v == 0.0 {
            continue;
        }
        let di = i as f64 - mean_i;
        let dj = j as f64 - mean_j;
        var_i += v * di * di;
        var_j += v * dj * dj;
        cov += v * di * dj;
    }
    let correlation = if var_i <= 1e-15 || var_j <= 1e-15 {
        0.0
    } else {
        (cov / (var_i * var_j).sqrt()).clamp(-1.0, 1.0)
    };
    let values = vec![contrast, correlation, energy, homogeneity, entropy.max(0.0)];
    let names = HARALICK_NAMES.iter().map(|s| s.to_string()).collect();
    FeatureVector::new(values, names).expect("haralick statistics are finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn plane(a: Array2<u8>) -> EncodedTensor {
        EncodedTensor::from_plane(&a)
    }

    #[test]
    fn constant_image_is_point_mass() {
        let img = plane(Array2::from_elem((5, 6), 200u8));
        for angle in Angle::ALL {
            let g = glcm(&img, 1, angle, 8).unwrap();
            // 200 * 8 / 256 = 6.25 -> bin 6
            assert_eq!(g.matrix()[[6, 6]], 1.0);
            assert_eq!(g.matrix().sum(), 1.0);
            let h = haralick(&g);
            assert_eq!(h.values(), [0.0, 0.0, 1.0, 1.0, 0.0]);
        }
    }

    #[test]
    fn single_pair() {
        let img = plane(array![[0u8, 255]]);
        let g = glcm(&img, 1, Angle::Deg0, 2).unwrap();
        assert_eq!(g.matrix(), &array![[0.0, 0.5], [0.5, 0.0]]);
        assert!(glcm(&img, 1, Angle::Deg90, 2).is_err());
        assert!(glcm(&img, 2, Angle::Deg0, 2).is_err());
    }

    #[test]
    fn checkerboard_horizontal_pairs_are_off_diagonal() {
        let img = plane(Array2::from_shape_fn((4, 4), |(r, c)| if (r + c) % 2 == 0 { 0 } else { 255 }));
        let g = glcm(&img, 1, Angle::Deg0, 2).unwrap();
        // 12 horizontal pairs, all mixed, counted both ways
        assert_eq!(g.matrix()[[0, 1]] + g.matrix()[[1, 0]], 1.0);
        assert_eq!(g.matrix()[[0, 0]] + g.matrix()[[1, 1]], 0.0);
        assert_eq!(haralick(&g).values()[0], 1.0);
        // diagonal neighbours on a checkerboard share colour
        let d = glcm(&img, 1, Angle::Deg45, 2).unwrap();
        assert_eq!(d.matrix()[[0, 0]] + d.matrix()[[1, 1]], 1.0);
    }

    #[test]
    fn uniform_glcm_statistics() {
        let g = Glcm::from_matrix(Array2::from_elem((2, 2), 0.25), 1, Angle::Deg0).unwrap();
        let h = haralick(&g);
        assert_eq!(h.values()[2], 0.25);
        approx::assert_abs_diff_eq!(h.values()[4], 4f64.ln(), epsilon = 1e-12);
        assert_eq!(h.values()[0], 0.5);
        assert_eq!(h.values()[1], 0.0);
        assert_eq!(h.values()[3], 0.75);
    }

    #[test]
    fn level_bounds() {
        let img = plane(Array2::zeros((3, 3)));
        assert!(glcm(&img, 1, Angle::Deg0, 1).is_err());
        assert!(glcm(&img, 1, Angle::Deg0, 257).is_err());
        assert!(glcm(&img, 1, Angle::Deg0, 256).is_ok());
    }

    #[test]
    fn from_matrix_validates() {
        assert!(Glcm::from_matrix(array![[0.5, 0.25], [0.0, 0.25]], 1, Angle::Deg0).is_err());
        assert!(Glcm::from_matrix(array![[0.5, 0.0], [0.0, 0.25]], 1, Angle::Deg0).is_err());
    }

    fn image_strategy() -> impl Strategy<Value = EncodedTensor> {
        (2usize..24, 2usize..24).prop_flat_map(|(r, c)| {
            proptest::collection::vec(any::<u8>(), r * c)
                .prop_map(move |px| EncodedTensor::new(r, c, 1, px).unwrap())
        })
    }

    proptest! {
        #[test]
        fn glcm_is_symmetric_unit_mass(img in image_strategy(), levels in 2usize..40, angle in 0usize..4) {
            let g = glcm(&img, 1, Angle::ALL[angle], levels).unwrap();
            prop_assert!((g.matrix().sum() - 1.0).abs() <= 1e-9);
            prop_assert_eq!(g.matrix(), &g.matrix().t().to_owned());
            let h = haralick(&g);
            let v = h.values();
            prop_assert!(v[2] > 0.0 && v[2] <= 1.0);
            prop_assert!(v[3] > 0.0 && v[3] <= 1.0);
            prop_assert!(v[4] >= 0.0);
            prop_assert!((-1.0..=1.0).contains(&v[1]));
        }
    }
}
