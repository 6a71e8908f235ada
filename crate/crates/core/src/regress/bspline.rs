use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const DEGREE: usize = 3;

/// Clamped cubic knot vector for a basis of dimension `k`: boundary knots
/// at the data range, `k - 4` interior knots at evenly spaced quantiles.
pub fn quantile_knots(x: &[f64], k: usize) -> Result<Vec<f64>> {
    if k < DEGREE + 1 {
        return Err(Error::InvalidInput(format!("spline basis needs at least 4 functions, got {k}")));
    }
    let mut s: Vec<f64> = x.to_vec();
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("spline covariate has non-finite values".into()));
    }
    s.sort_by(f64::total_cmp);
    let (a, b) = match (s.first(), s.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        _ => return Err(Error::ConstantInput("spline covariate has no spread".into())),
    };
    let m = k - DEGREE - 1;
    let mut t = vec![a; DEGREE + 1];
    for j in 1..=m {
        let pos = j as f64 / (m + 1) as f64 * (s.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(s.len() - 1);
        let q = s[lo] + (pos - lo as f64) * (s[hi] - s[lo]);
        t.push(q.clamp(a, b));
    }
    t.extend(std::iter::repeat_n(b, DEGREE + 1));
    Ok(t)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Cubic B-spline basis (rows = points) on a clamped knot vector. Points
/// outside the boundary knots are clamped to them.
pub fn bspline_basis(x: &[f64], knots: &[f64]) -> DMatrix<f64> {
    let k = knots.len() - DEGREE - 1;
    let (a, b) = (knots[0], knots[knots.len() - 1]);
    let mut out = DMatrix::zeros(x.len(), k);
    for (i, &xv) in x.iter().enumerate() {
        let xv = xv.clamp(a, b);
        // span index mu with t[mu] <= x < t[mu+1], the last non-empty span at x = b
        let mut mu = DEGREE;
        for j in DEGREE..k {
            if knots[j] <= xv && knots[j] < knots[j + 1] {
                mu = j;
            }
        }
        let mut n = vec![0.0; DEGREE + 1];
        n[0] = 1.0;
        for d in 1..=DEGREE {
            let mut next = vec![0.0; DEGREE + 1];
            for r in 0..=d {
                let j = mu + r - d;
                let mut v = 0.0;
                if r >= 1 {
                    v += ratio(xv - knots[j], knots[j + d] - knots[j]) * n[r - 1];
                }
                if r < d {
                    v += ratio(knots[j + d + 1] - xv, knots[j + d + 1] - knots[j + 1]) * n[r];
                }
                next[r] = v;
            }
            n = next;
        }
        for r in 0..=DEGREE {
            out[(i, mu - DEGREE + r)] = n[r];
        }
    }
    out
}

/// `D'D` for the second-order difference matrix on `k` coefficients.
pub fn difference_penalty(k: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(k.saturating_sub(2), k);
    for r in 0..k.saturating_sub(2) {
        d[(r, r)] = 1.0;
        d[(r, r + 1)] = -2.0;
        d[(r, r + 2)] = 1.0;
    }
    d.transpose() * d
}

/// Orthonormal `k x (k-1)` basis of the null space of the column sums of
/// `basis`, so `basis * Z` sums to zero over the data.
pub fn sum_to_zero(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let k = basis.ncols();
    let c: DVector<f64> = basis.row_sum().transpose();
    let norm = c.norm();
    let v = if norm > 0.0 { c / norm } else { DVector::from_fn(k, |i, _| if i == 0 { 1.0 } else { 0.0 }) };
    let mut u = v.clone();
    u[0] -= 1.0;
    let un = u.norm();
    let h = if un < 1e-14 {
        DMatrix::identity(k, k)
    } else {
        let u = u / un;
        DMatrix::identity(k, k) - 2.0 * &u * u.transpose()
    };
    h.columns(1, k - 1).into_owned()
}
