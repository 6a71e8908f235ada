use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Least-squares solution by SVD; singular values below a relative cutoff
/// are treated as zero, so rank-deficient designs get the minimum-norm fit.
pub fn lstsq(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = smax * (x.nrows().max(x.ncols()) as f64) * f64::EPSILON;
    svd.solve(y, eps.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Numerical(e.to_string()))
}

/// Design with a leading intercept column followed by `cols`.
pub fn with_intercept(cols: &[&[f64]], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, cols.len() + 1, |i, j| if j == 0 { 1.0 } else { cols[j - 1][i] })
}

/// Residual sum of squares of the intercept-plus-`cols` OLS fit.
pub fn ols_rss(y: &[f64], cols: &[&[f64]]) -> Result<f64> {
    let n = y.len();
    let x = with_intercept(cols, n);
    let yv = DVector::from_column_slice(y);
    let beta = lstsq(&x, &yv)?;
    Ok((&yv - &x * beta).norm_squared())
}

pub fn total_ss(y: &[f64]) -> f64 {
    let m = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| (v - m).powi(2)).sum()
}

/// Solves the symmetric positive (semi)definite system `a x = b`, by
/// Cholesky when possible and by pseudo-inverse otherwise. Also returns the
/// inverse used.
pub fn spd_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Ok(ch.inverse());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.pseudo_inverse(smax * a.nrows() as f64 * f64::EPSILON)
        .map_err(|e| Error::Numerical(e.to_string()))
}
