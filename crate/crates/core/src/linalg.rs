//! Small dense linear-algebra helpers shared by the identification and
//! control modules.

use nalgebra::DMatrix;

/// Largest eigenvalue magnitude of a square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    assert!(m.is_square(), "spectral radius of a non-square matrix");
    if m.nrows() == 0 {
        return 0.0;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Moore-Penrose pseudoinverse via SVD with a relative singular-value cutoff.
pub fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = smax * (m.nrows().max(m.ncols()) as f64) * f64::EPSILON;
    svd.pseudo_inverse(tol)
        .expect("SVD computed with both U and V^T")
}

/// `(M + M^T) / 2`
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Ratio of largest to smallest singular value; `+inf` when the smallest is
/// numerically zero relative to the largest.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return f64::INFINITY;
    }
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax == 0.0 || smin <= smax * 1e-10 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

pub fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Population variance of a slice. Returns 0 for an empty slice.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_radius_of_rotation_scaled() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        assert!((spectral_radius(&m) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pinv_of_tall_matrix_is_left_inverse() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 1.0, 3.0, -1.0]);
        let p = pinv(&m);
        let eye = &p * &m;
        assert!((eye - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn condition_of_singular_is_infinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(condition_number(&m).is_infinite());
    }

    #[test]
    fn variance_is_population() {
        assert_eq!(variance(&[4.0, 6.0]), 1.0);
    }
}
