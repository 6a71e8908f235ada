//! One-vs-rest L2 logistic regression with deterministic batch solvers.
//!
//! Each binary problem minimizes `C * sum(log(1 + exp(-y z))) + ||w||^2 / 2`
//! (intercept unpenalized).

use std::fmt;
use std::str::FromStr;

use super::grid::Params;
use super::tfidf::SparseVec;
use super::{AttitudeLabel, LinearModel};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    /// Full-batch gradient descent with backtracking line search.
    Gd,
    Lbfgs,
    NewtonCg,
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(Solver::Gd),
            "lbfgs" => Ok(Solver::Lbfgs),
            "newton-cg" => Ok(Solver::NewtonCg),
            "sag" | "saga" => Err(Error::InvalidInput(format!(
                "solver `{s}` is stochastic; use gd, lbfgs or newton-cg"
            ))),
            other => Err(Error::InvalidInput(format!("unknown solver `{other}`"))),
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Gd => "gd",
            Solver::Lbfgs => "lbfgs",
            Solver::NewtonCg => "newton-cg",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticParams {
    pub c: f64,
    pub max_iter: usize,
    pub solver: Solver,
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            c: 1.0,
            max_iter: 100,
            solver: Solver::Lbfgs,
            tol: 1e-4,
        }
    }
}

impl LogisticParams {
    pub fn from_params(p: &Params) -> Result<LogisticParams> {
        p.check_keys("logistic", &["C", "max_iter", "solver", "tol"])?;
        let d = LogisticParams::default();
        let out = LogisticParams {
            c: p.f64_or("C", d.c)?,
            max_iter: p.usize_or("max_iter", d.max_iter)?,
            solver: p.str_or("solver", "lbfgs")?.parse()?,
            tol: p.f64_or("tol", d.tol)?,
        };
        if out.c.is_nan() || out.c <= 0.0 {
            return Err(Error::InvalidInput("C must be positive".into()));
        }
        Ok(out)
    }
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Binary problem; parameter vector is `[w_0 .. w_{d-1}, b]`.
struct Problem<'a> {
    x: &'a [SparseVec],
    y: Vec<f64>,
    c: f64,
    d: usize,
}

impl Problem<'_> {
    fn margins(&self, theta: &[f64]) -> Vec<f64> {
        let b = theta[self.d];
        self.x
            .iter()
            .map(|xi| b + xi.iter().map(|&(j, v)| theta[j] * v).sum::<f64>())
            .collect()
    }

    fn value_grad(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let z = self.margins(theta);
        let mut g = theta.to_vec();
        g[self.d] = 0.0;
        let mut f = 0.5 * dot(&theta[..self.d], &theta[..self.d]);
        for ((xi, &yi), &zi) in self.x.iter().zip(&self.y).zip(&z) {
            f += self.c * softplus(-yi * zi);
            let coef = -self.c * yi * sigmoid(-yi * zi);
            for &(j, v) in xi {
                g[j] += coef * v;
            }
            g[self.d] += coef;
        }
        (f, g)
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let z = self.margins(theta);
        let mut f = 0.5 * dot(&theta[..self.d], &theta[..self.d]);
        for (&yi, &zi) in self.y.iter().zip(&z) {
            f += self.c * softplus(-yi * zi);
        }
        f
    }

    /// Hessian-vector product at the point whose margins are `z`.
    fn hess_vec(&self, z: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        out[self.d] = 0.0;
        for (xi, &zi) in self.x.iter().zip(z) {
            let s = sigmoid(zi);
            let xv = v[self.d] + xi.iter().map(|&(j, val)| v[j] * val).sum::<f64>();
            let coef = self.c * s * (1.0 - s) * xv;
            for &(j, val) in xi {
                out[j] += coef * val;
            }
            out[self.d] += coef;
        }
        out
    }
}

/// Backtracking Armijo search along `dir`; returns the accepted step or
/// `None` if no decrease was found.
fn armijo(p: &Problem<'_>, theta: &[f64], f0: f64, g: &[f64], dir: &[f64], t0: f64) -> Option<(f64, Vec<f64>)> {
    let slope = dot(g, dir);
    if slope >= 0.0 {
        return None;
    }
    let mut t = t0;
    for _ in 0..60 {
        let cand: Vec<f64> = theta.iter().zip(dir).map(|(a, d)| a + t * d).collect();
        if p.value(&cand) <= f0 + 1e-4 * t * slope {
            return Some((t, cand));
        }
        t *= 0.5;
    }
    None
}

fn solve_gd(p: &Problem<'_>, params: &LogisticParams) -> Vec<f64> {
    let mut theta = vec![0.0; p.d + 1];
    let mut step = 1.0;
    for _ in 0..params.max_iter {
        let (f, g) = p.value_grad(&theta);
        if norm_inf(&g) <= params.tol {
            break;
        }
        let dir: Vec<f64> = g.iter().map(|x| -x).collect();
        match armijo(p, &theta, f, &g, &dir, step * 2.0) {
            Some((t, next)) => {
                step = t;
                theta = next;
            }
            None => break,
        }
    }
    theta
}

fn solve_lbfgs(p: &Problem<'_>, params: &LogisticParams) -> Vec<f64> {
    const MEMORY: usize = 10;
    let mut theta = vec![0.0; p.d + 1];
    let (mut f, mut g) = p.value_grad(&theta);
    let mut hist: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    for it in 0..params.max_iter {
        if norm_inf(&g) <= params.tol {
            break;
        }
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.last() {
            let gamma = dot(s, y) / dot(y, y);
            for qi in &mut q {
                *qi *= gamma;
            }
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|x| -x).collect();
        let t0 = if it == 0 { 1.0 / norm_inf(&g).max(1.0) } else { 1.0 };
        let mut step = armijo(p, &theta, f, &g, &dir, t0);
        if step.is_none() {
            hist.clear();
            dir = g.iter().map(|x| -x).collect();
            step = armijo(p, &theta, f, &g, &dir, 1.0 / norm_inf(&g).max(1.0));
        }
        let Some((_, next)) = step else { break };
        let (f_next, g_next) = p.value_grad(&next);
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if hist.len() == MEMORY {
                hist.remove(0);
            }
            hist.push((s, y, 1.0 / sy));
        }
        theta = next;
        f = f_next;
        g = g_next;
    }
    theta
}

fn solve_newton_cg(p: &Problem<'_>, params: &LogisticParams) -> Vec<f64> {
    let n = p.d + 1;
    let mut theta = vec![0.0; n];
    for _ in 0..params.max_iter {
        let (f, g) = p.value_grad(&theta);
        let gnorm = norm_inf(&g);
        if gnorm <= params.tol {
            break;
        }
        let z = p.margins(&theta);
        // truncated conjugate gradient on H d = -g
        let g1: f64 = g.iter().map(|x| x.abs()).sum();
        let eps = 0.5f64.min(g1.sqrt()) * g1;
        let mut d = vec![0.0; n];
        let mut r: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut pdir = r.clone();
        let mut rr = dot(&r, &r);
        for _ in 0..(2 * n).max(20) {
            if r.iter().map(|x| x.abs()).sum::<f64>() <= eps {
                break;
            }
            let hp = p.hess_vec(&z, &pdir);
            let curv = dot(&pdir, &hp);
            if curv <= 0.0 {
                if d.iter().all(|&x| x == 0.0) {
                    d = pdir.clone();
                }
                break;
            }
            let a = rr / curv;
            for i in 0..n {
                d[i] += a * pdir[i];
                r[i] -= a * hp[i];
            }
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                pdir[i] = r[i] + beta * pdir[i];
            }
        }
        match armijo(p, &theta, f, &g, &d, 1.0) {
            Some((_, next)) => theta = next,
            None => break,
        }
    }
    theta
}

pub(crate) fn train(x: &[SparseVec], dim: usize, labels: &[AttitudeLabel], params: &LogisticParams) -> LinearModel {
    let mut weights = Vec::with_capacity(4);
    let mut intercepts = Vec::with_capacity(4);
    for class in AttitudeLabel::ALL {
        let p = Problem {
            x,
            y: labels
                .iter()
                .map(|&l| if l == class { 1.0 } else { -1.0 })
                .collect(),
            c: params.c,
            d: dim,
        };
        let theta = match params.solver {
            Solver::Gd => solve_gd(&p, params),
            Solver::Lbfgs => solve_lbfgs(&p, params),
            Solver::NewtonCg => solve_newton_cg(&p, params),
        };
        intercepts.push(theta[dim]);
        weights.push(theta[..dim].to_vec());
    }
    LinearModel {
        weights,
        intercepts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Vec<SparseVec>, Vec<AttitudeLabel>) {
        // one indicator feature per class, plus a shared bias feature
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (c, l) in AttitudeLabel::ALL.iter().enumerate() {
            for k in 0..5 {
                x.push(vec![(c, 1.0 + 0.1 * k as f64), (4, 0.5)]);
                y.push(*l);
            }
        }
        (x, y)
    }

    #[test]
    fn all_solvers_separate_the_toy_set() {
        let (x, y) = toy();
        for solver in [Solver::Gd, Solver::Lbfgs, Solver::NewtonCg] {
            let p = LogisticParams {
                c: 10.0,
                solver,
                ..Default::default()
            };
            let m = train(&x, 5, &y, &p);
            let acc = x.iter().zip(&y).filter(|(xi, yi)| m.predict_one(xi) == **yi).count();
            assert_eq!(acc, y.len(), "{solver}");
        }
    }

    #[test]
    fn solvers_agree_on_the_optimum() {
        let (x, y) = toy();
        let mk = |solver| LogisticParams {
            c: 1.0,
            max_iter: 500,
            solver,
            tol: 1e-9,
        };
        let a = train(&x, 5, &y, &mk(Solver::Lbfgs));
        let b = train(&x, 5, &y, &mk(Solver::NewtonCg));
        for c in 0..4 {
            for j in 0..5 {
                assert!((a.weights[c][j] - b.weights[c][j]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn stochastic_solvers_are_rejected() {
        assert!("saga".parse::<Solver>().is_err());
        assert_eq!("newton-cg".parse::<Solver>().unwrap(), Solver::NewtonCg);
    }
}
