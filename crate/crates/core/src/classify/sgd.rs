//! One-vs-rest linear SVM trained by plain stochastic gradient descent on
//! the hinge loss.
//!
//! Step size follows the inverse-scaling "optimal" schedule
//! `eta_t = 1 / (alpha * (t0 + t))`; L1 is applied with cumulative
//! truncation on the features touched by each sample. An epoch loop stops
//! early after five epochs without a `tol * n` improvement in summed loss.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::grid::Params;
use super::tfidf::SparseVec;
use super::{AttitudeLabel, LinearModel};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Penalty {
    L2,
    L1,
    ElasticNet,
}

impl FromStr for Penalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(Penalty::L2),
            "l1" => Ok(Penalty::L1),
            "elasticnet" => Ok(Penalty::ElasticNet),
            other => Err(Error::InvalidInput(format!("unknown penalty `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgdParams {
    pub alpha: f64,
    pub max_iter: usize,
    pub penalty: Penalty,
    pub l1_ratio: f64,
    pub tol: f64,
}

impl Default for SgdParams {
    fn default() -> Self {
        SgdParams {
            alpha: 1e-4,
            max_iter: 1000,
            penalty: Penalty::L2,
            l1_ratio: 0.15,
            tol: 1e-3,
        }
    }
}

impl SgdParams {
    pub fn from_params(p: &Params) -> Result<SgdParams> {
        p.check_keys("sgd", &["alpha", "max_iter", "penalty", "l1_ratio", "tol"])?;
        let d = SgdParams::default();
        let out = SgdParams {
            alpha: p.f64_or("alpha", d.alpha)?,
            max_iter: p.usize_or("max_iter", d.max_iter)?,
            penalty: p.str_or("penalty", "l2")?.parse()?,
            l1_ratio: p.f64_or("l1_ratio", d.l1_ratio)?,
            tol: p.f64_or("tol", d.tol)?,
        };
        if out.alpha.is_nan() || out.alpha <= 0.0 || !(0.0..=1.0).contains(&out.l1_ratio) {
            return Err(Error::InvalidInput("alpha must be > 0 and l1_ratio in [0, 1]".into()));
        }
        Ok(out)
    }

    fn l1_share(&self) -> f64 {
        match self.penalty {
            Penalty::L2 => 0.0,
            Penalty::L1 => 1.0,
            Penalty::ElasticNet => self.l1_ratio,
        }
    }
}

const NO_CHANGE_EPOCHS: usize = 5;

fn train_binary(x: &[SparseVec], y: &[f64], dim: usize, p: &SgdParams, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    let n = x.len();
    let l1 = p.l1_share();
    let mut v = vec![0.0; dim];
    let mut wscale = 1.0;
    let mut b = 0.0;
    let mut u = 0.0;
    let mut q = vec![0.0; dim];
    let typw = (1.0 / p.alpha.sqrt()).sqrt();
    let t0 = 1.0 / (typw * p.alpha);
    let mut t = 1.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    let mut stale = 0;
    for _ in 0..p.max_iter {
        order.shuffle(rng);
        let mut sumloss = 0.0;
        for &i in &order {
            let eta = 1.0 / (p.alpha * (t0 + t - 1.0));
            let score = wscale * x[i].iter().map(|&(j, val)| v[j] * val).sum::<f64>() + b;
            let m = y[i] * score;
            if m < 1.0 {
                sumloss += 1.0 - m;
                let step = eta * y[i];
                for &(j, val) in &x[i] {
                    v[j] += step * val / wscale;
                }
                b += step;
            }
            if l1 < 1.0 {
                wscale *= (1.0 - (1.0 - l1) * eta * p.alpha).max(0.0);
                if wscale < 1e-9 {
                    for vj in &mut v {
                        *vj *= wscale;
                    }
                    wscale = 1.0;
                }
            }
            if l1 > 0.0 {
                u += l1 * eta * p.alpha;
                for &(j, _) in &x[i] {
                    let z = v[j] * wscale;
                    let w = if z > 0.0 {
                        (z - (u + q[j])).max(0.0)
                    } else if z < 0.0 {
                        (z + (u - q[j])).min(0.0)
                    } else {
                        0.0
                    };
                    q[j] += w - z;
                    v[j] = w / wscale;
                }
            }
            t += 1.0;
        }
        if sumloss > best - p.tol * n as f64 {
            stale += 1;
        } else {
            stale = 0;
        }
        best = best.min(sumloss);
        if stale >= NO_CHANGE_EPOCHS {
            break;
        }
    }
    (v.into_iter().map(|x| x * wscale).collect(), b)
}

pub(crate) fn train(x: &[SparseVec], dim: usize, labels: &[AttitudeLabel], p: &SgdParams, seed: u64) -> LinearModel {
    let mut weights = Vec::with_capacity(4);
    let mut intercepts = Vec::with_capacity(4);
    for class in AttitudeLabel::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(class.index() as u64);
        let y: Vec<f64> = labels
            .iter()
            .map(|&l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let (w, b) = train_binary(x, &y, dim, p, &mut rng);
        weights.push(w);
        intercepts.push(b);
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
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (c, l) in AttitudeLabel::ALL.iter().enumerate() {
            for k in 0..6 {
                x.push(vec![(c, 1.0), (4 + k % 3, 0.3)]);
                y.push(*l);
            }
        }
        (x, y)
    }

    #[test]
    fn each_penalty_fits_the_toy_set() {
        let (x, y) = toy();
        for penalty in [Penalty::L2, Penalty::L1, Penalty::ElasticNet] {
            let p = SgdParams {
                alpha: 1e-3,
                max_iter: 200,
                penalty,
                ..Default::default()
            };
            let m = train(&x, 7, &y, &p, 7);
            let hits = x.iter().zip(&y).filter(|(xi, yi)| m.predict_one(xi) == **yi).count();
            assert_eq!(hits, y.len(), "{penalty:?}");
        }
    }

    #[test]
    fn seeded_runs_are_identical() {
        let (x, y) = toy();
        let p = SgdParams::default();
        assert_eq!(train(&x, 7, &y, &p, 3), train(&x, 7, &y, &p, 3));
    }
}
