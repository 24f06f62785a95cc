//! Dense symmetric positive-definite solves.

use ndarray::{Array2, ArrayView2};

use crate::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
///
/// A pivot at or below `1e-12 * max(diag)` is treated as singular.
pub fn cholesky(a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!("cholesky of non-square {:?}", a.dim())));
    }
    let scale = (0..n).map(|i| a[[i, i]].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if d.is_nan() || d <= 1e-12 * scale {
            return Err(Error::Singular);
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in j + 1..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    Ok(l)
}

/// Solves `A X = B` for symmetric positive-definite `A`.
pub fn solve_spd(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if b.nrows() != n {
        return Err(Error::Dimension(format!(
            "right-hand side has {} rows, system has {n}",
            b.nrows()
        )));
    }
    let l = cholesky(a)?;
    let mut x = b.to_owned();
    for col in 0..x.ncols() {
        // forward: L y = b
        for i in 0..n {
            let mut s = x[[i, col]];
            for k in 0..i {
                s -= l[[i, k]] * x[[k, col]];
            }
            x[[i, col]] = s / l[[i, i]];
        }
        // backward: L^T x = y
        for i in (0..n).rev() {
            let mut s = x[[i, col]];
            for k in i + 1..n {
                s -= l[[k, i]] * x[[k, col]];
            }
            x[[i, col]] = s / l[[i, i]];
        }
    }
    Ok(x)
}
