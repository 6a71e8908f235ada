use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::function::erf::erfc;

use super::bspline::{bspline_basis, difference_penalty, quantile_knots, sum_to_zero};
use super::linalg::spd_inverse;
use super::{standardize, CbgTable};
use crate::corpus::PoiCategory;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DesignOptions {
    /// Marginal basis dimension of the spatial tensor smooth.
    pub knots: usize,
    pub spatial: bool,
    pub group: bool,
    /// Indicator columns for the modal POI category of each CBG.
    pub category_controls: bool,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            knots: 8,
            spatial: true,
            group: true,
            category_controls: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyBlock {
    pub name: String,
    pub start: usize,
    pub len: usize,
    pub penalty: DMatrix<f64>,
}

/// Model matrix: intercept, unpenalized linear terms, then penalized blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    /// Names of the intercept and linear columns, `x` columns `0..n_linear`.
    pub linear_names: Vec<String>,
    pub blocks: Vec<PenaltyBlock>,
}

impl Design {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_linear(&self) -> usize {
        self.linear_names.len()
    }

    fn total_penalty(&self, lambdas: &[f64]) -> DMatrix<f64> {
        let p = self.x.ncols();
        let mut s = DMatrix::zeros(p, p);
        for (b, &l) in self.blocks.iter().zip(lambdas) {
            let mut view = s.view_mut((b.start, b.start), (b.len, b.len));
            view += &b.penalty * l;
        }
        s
    }
}

fn row_kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ka, kb) = (a.ncols(), b.ncols());
    DMatrix::from_fn(a.nrows(), ka * kb, |i, c| a[(i, c / kb)] * b[(i, c % kb)])
}

/// Removes from `t` its projection onto the column space of `p`.
fn residualize(t: &DMatrix<f64>, p: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = p.clone().svd(true, false);
    let u = svd.u.expect("requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = smax * (p.nrows().max(p.ncols()) as f64) * f64::EPSILON;
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol)
        .collect();
    let q = u.select_columns(&keep);
    t - &q * (q.transpose() * t)
}

/// Spatial tensor interaction over (lat, lng): row-wise product of the
/// centred marginal bases, made orthogonal to the intercept and both
/// marginal main effects. Penalty is the tensor-sum difference penalty
/// plus a ridge on its null space.
fn tensor_block(lat: &[f64], lng: &[f64], k: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let b1 = bspline_basis(lat, &quantile_knots(lat, k)?);
    let b2 = bspline_basis(lng, &quantile_knots(lng, k)?);
    let (z1, z2) = (sum_to_zero(&b1), sum_to_zero(&b2));
    let (m1, m2) = (&b1 * &z1, &b2 * &z2);
    let n = lat.len();
    let mut main = DMatrix::zeros(n, 1 + m1.ncols() + m2.ncols());
    main.column_mut(0).fill(1.0);
    main.columns_mut(1, m1.ncols()).copy_from(&m1);
    main.columns_mut(1 + m1.ncols(), m2.ncols()).copy_from(&m2);
    let t = residualize(&row_kron(&m1, &m2), &main);

    let d = difference_penalty(k);
    let s1 = z1.transpose() * &d * &z1;
    let s2 = z2.transpose() * &d * &z2;
    let (k1, k2) = (s1.nrows(), s2.nrows());
    let s = s1.kronecker(&DMatrix::identity(k2, k2)) + DMatrix::identity(k1, k1).kronecker(&s2);
    let eig = s.clone().symmetric_eigen();
    let emax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let null: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] < 1e-8 * emax)
        .collect();
    let u0 = eig.eigenvectors.select_columns(&null);
    let shrink = &u0 * u0.transpose();

    let gram = (t.transpose() * &t).norm();
    let mut penalty = &s / s.norm();
    if !null.is_empty() {
        penalty += &shrink / shrink.norm();
    }
    Ok((t, penalty * gram.max(1.0)))
}

pub fn build_design(table: &CbgTable, variables: &[&str], opts: DesignOptions) -> Result<Design> {
    let n = table.len();
    if n < variables.len() + 3 {
        return Err(Error::InvalidInput(format!(
            "{n} rows is too few for {} linear terms",
            variables.len()
        )));
    }
    let mut lin_cols: Vec<Vec<f64>> = Vec::new();
    let mut linear_names = vec!["(Intercept)".to_string()];
    for &v in variables {
        lin_cols.push(standardize(&table.column(v)?).map_err(|_| {
            Error::ConstantInput(format!("variable `{v}` is constant over the modelled CBGs"))
        })?);
        linear_names.push(v.to_string());
    }
    if opts.category_controls {
        let present: Vec<PoiCategory> = PoiCategory::ALL
            .into_iter()
            .filter(|c| table.rows.iter().any(|r| r.category == Some(*c)))
            .collect();
        for &c in present.iter().skip(1) {
            lin_cols.push(table.rows.iter().map(|r| f64::from(r.category == Some(c))).collect());
            linear_names.push(format!("category[{c}]"));
        }
    }

    let mut blocks_x: Vec<(String, DMatrix<f64>, DMatrix<f64>)> = Vec::new();
    if opts.spatial {
        let lat: Vec<f64> = table.rows.iter().map(|r| r.lat).collect();
        let lng: Vec<f64> = table.rows.iter().map(|r| r.lng).collect();
        let (t, s) = tensor_block(&lat, &lng, opts.knots)?;
        blocks_x.push(("ti(lat,lng)".into(), t, s));
    }
    if opts.group {
        let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
        for r in &table.rows {
            let next = ids.len();
            ids.entry(r.cbsa_id.as_str()).or_insert(next);
        }
        if ids.len() >= 2 {
            let g = ids.len();
            let m = DMatrix::from_fn(n, g, |i, j| f64::from(ids[table.rows[i].cbsa_id.as_str()] == j));
            blocks_x.push(("s(CBSA)".into(), m, DMatrix::identity(g, g)));
        }
    }

    let p = linear_names.len() + blocks_x.iter().map(|b| b.1.ncols()).sum::<usize>();
    let mut x = DMatrix::zeros(n, p);
    x.column_mut(0).fill(1.0);
    for (j, c) in lin_cols.iter().enumerate() {
        x.column_mut(j + 1).copy_from_slice(c);
    }
    let mut start = linear_names.len();
    let mut blocks = Vec::new();
    for (name, m, s) in blocks_x {
        x.columns_mut(start, m.ncols()).copy_from(&m);
        blocks.push(PenaltyBlock {
            name,
            start,
            len: m.ncols(),
            penalty: s,
        });
        start += m.ncols();
    }
    Ok(Design {
        x,
        y: DVector::from_iterator(n, table.rows.iter().map(|r| r.sentiment)),
        linear_names,
        blocks,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearTerm {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
    pub stars: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothTerm {
    pub name: String,
    pub lambda: f64,
    pub edf: f64,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GamFit {
    pub n: usize,
    pub coefficients: Vec<LinearTerm>,
    pub smooths: Vec<SmoothTerm>,
    pub edf_total: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub gcv: f64,
    pub rss: f64,
    pub tss: f64,
    pub ess: f64,
    /// `2 b'Sb`; closes `tss = ess + rss + penalty_ss`.
    pub penalty_ss: f64,
    pub sigma2: f64,
    pub converged: bool,
    pub iterations: usize,
    #[serde(skip)]
    pub beta: Vec<f64>,
    #[serde(skip)]
    pub fitted: Vec<f64>,
}

pub fn significance_stars(p: f64) -> &'static str {
    match p {
        p if p < 0.001 => "***",
        p if p < 0.01 => "**",
        p if p < 0.05 => "*",
        _ => "",
    }
}

struct Evaluated {
    beta: DVector<f64>,
    ainv: DMatrix<f64>,
    fitted: DVector<f64>,
    rss: f64,
    edf: DVector<f64>,
    gcv: f64,
}

struct Fitter<'a> {
    d: &'a Design,
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
}

impl<'a> Fitter<'a> {
    fn new(d: &'a Design) -> Self {
        let xt = d.x.transpose();
        Fitter {
            d,
            xtx: &xt * &d.x,
            xty: &xt * &d.y,
        }
    }

    fn eval(&self, lambdas: &[f64]) -> Result<Evaluated> {
        let s = self.d.total_penalty(lambdas);
        let ainv = spd_inverse(&(&self.xtx + &s))?;
        let beta = &ainv * &self.xty;
        let fitted = &self.d.x * &beta;
        let rss = (&self.d.y - &fitted).norm_squared();
        let f = &ainv * &self.xtx;
        let edf = f.diagonal();
        let n = self.d.n() as f64;
        let tr = edf.sum();
        let gcv = if tr < n { n * rss / (n - tr).powi(2) } else { f64::INFINITY };
        Ok(Evaluated {
            beta,
            ainv,
            fitted,
            rss,
            edf,
            gcv,
        })
    }

    fn gcv_at(&self, log_l: &[f64]) -> Result<f64> {
        let l: Vec<f64> = log_l.iter().map(|v| 10f64.powf(*v)).collect();
        Ok(self.eval(&l)?.gcv)
    }
}

const LOG_LAMBDA_RANGE: (f64, f64) = (-6.0, 10.0);

/// Fits with smoothing parameters chosen by GCV: coordinate search over
/// log10 lambda per block, a coarse grid followed by local refinement,
/// repeated until a sweep changes nothing or `max_sweeps` is reached.
pub fn fit_gam(design: &Design, max_sweeps: usize) -> Result<GamFit> {
    let fitter = Fitter::new(design);
    let nb = design.blocks.len();
    let mut log_l = vec![0.0; nb];
    let mut best = fitter.gcv_at(&log_l)?;
    let mut converged = nb == 0;
    let mut sweeps = 0;
    while !converged && sweeps < max_sweeps.max(1) {
        sweeps += 1;
        let mut changed = false;
        for b in 0..nb {
            let start = log_l[b];
            let mut trial = log_l.clone();
            let (lo, hi) = LOG_LAMBDA_RANGE;
            let mut v = lo;
            while v <= hi + 1e-9 {
                trial[b] = v;
                let g = fitter.gcv_at(&trial)?;
                if g < best {
                    best = g;
                    log_l[b] = v;
                }
                v += 0.5;
            }
            let mut step = 0.25;
            while step >= 1.0 / 64.0 {
                for dir in [-1.0, 1.0] {
                    let mut trial = log_l.clone();
                    trial[b] = (log_l[b] + dir * step).clamp(lo, hi);
                    let g = fitter.gcv_at(&trial)?;
                    if g < best {
                        best = g;
                        log_l[b] = trial[b];
                    }
                }
                step /= 2.0;
            }
            if (log_l[b] - start).abs() > 1e-12 {
                changed = true;
            }
        }
        converged = !changed;
    }
    if !converged {
        log::warn!("smoothing parameter search stopped after {sweeps} sweeps without converging");
    }
    let lambdas: Vec<f64> = log_l.iter().map(|v| 10f64.powf(*v)).collect();
    let mut fit = finish(design, &fitter, &lambdas)?;
    fit.converged = converged;
    fit.iterations = sweeps;
    Ok(fit)
}

/// Fits with the given smoothing parameters, one per penalty block.
pub fn fit_gam_fixed(design: &Design, lambdas: &[f64]) -> Result<GamFit> {
    if lambdas.len() != design.blocks.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} smoothing parameters, got {}",
            design.blocks.len(),
            lambdas.len()
        )));
    }
    if lambdas.iter().any(|l| l.is_nan() || *l < 0.0) {
        return Err(Error::InvalidInput("smoothing parameters must be non-negative".into()));
    }
    finish(design, &Fitter::new(design), lambdas)
}

fn finish(design: &Design, fitter: &Fitter, lambdas: &[f64]) -> Result<GamFit> {
    let e = fitter.eval(lambdas)?;
    let n = design.n();
    let nf = n as f64;
    let edf_total = e.edf.sum();
    let ybar = design.y.mean();
    let tss = design.y.iter().map(|v| (v - ybar).powi(2)).sum::<f64>();
    let ess = e.fitted.iter().map(|v| (v - ybar).powi(2)).sum::<f64>();
    let s = design.total_penalty(lambdas);
    let penalty_ss = 2.0 * (e.beta.transpose() * &s * &e.beta)[(0, 0)];
    let resid_df = nf - edf_total;
    let sigma2 = if resid_df > 0.0 { e.rss / resid_df } else { f64::NAN };
    let r2 = if tss > 0.0 { 1.0 - e.rss / tss } else { f64::NAN };
    let adj = if resid_df > 0.0 { 1.0 - (1.0 - r2) * (nf - 1.0) / resid_df } else { f64::NAN };
    let coefficients = design
        .linear_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let se = (sigma2 * e.ainv[(j, j)]).max(0.0).sqrt();
            let z = e.beta[j] / se;
            let p = if z.is_finite() { erfc(z.abs() / std::f64::consts::SQRT_2) } else { f64::NAN };
            LinearTerm {
                name: name.clone(),
                estimate: e.beta[j],
                std_error: se,
                z,
                p_value: p,
                stars: significance_stars(p),
            }
        })
        .collect();
    let smooths = design
        .blocks
        .iter()
        .zip(lambdas)
        .map(|(b, &l)| SmoothTerm {
            name: b.name.clone(),
            lambda: l,
            edf: e.edf.rows(b.start, b.len).sum(),
            dim: b.len,
        })
        .collect();
    Ok(GamFit {
        n,
        coefficients,
        smooths,
        edf_total,
        r_squared: r2,
        adj_r_squared: adj,
        gcv: e.gcv,
        rss: e.rss,
        tss,
        ess,
        penalty_ss,
        sigma2,
        converged: true,
        iterations: 0,
        beta: e.beta.iter().copied().collect(),
        fitted: e.fitted.iter().copied().collect(),
    })
}
