//! Random forest of CART trees (Gini impurity, sqrt feature subsampling,
//! optional bootstrap) with majority voting.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::{ParamValue, Params};
use super::tfidf::SparseVec;
use super::{argmax, AttitudeLabel};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ForestParams {
    pub n_estimators: usize,
    /// `None` grows until leaves are pure or too small.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 100,
            max_depth: None,
            min_samples_leaf: 1,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn from_params(p: &Params) -> Result<ForestParams> {
        p.check_keys("forest", &["n_estimators", "max_depth", "min_samples_leaf", "bootstrap"])?;
        let max_depth = match p.get("max_depth") {
            None => None,
            Some(ParamValue::Str(s)) if s == "none" => None,
            Some(_) => Some(p.usize_or("max_depth", 0)?),
        };
        let out = ForestParams {
            n_estimators: p.usize_or("n_estimators", 100)?,
            max_depth,
            min_samples_leaf: p.usize_or("min_samples_leaf", 1)?,
            bootstrap: p.bool_or("bootstrap", true)?,
        };
        if out.n_estimators == 0 || out.min_samples_leaf == 0 || out.max_depth == Some(0) {
            return Err(Error::InvalidInput(
                "n_estimators, max_depth and min_samples_leaf must be positive".into(),
            ));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

fn feature_value(x: &SparseVec, j: usize) -> f64 {
    match x.binary_search_by_key(&j, |&(k, _)| k) {
        Ok(i) => x[i].1,
        Err(_) => 0.0,
    }
}

impl Tree {
    pub fn predict_class(&self, x: &SparseVec) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if feature_value(x, feature) <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, at: usize) -> usize {
            match t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(t, left).max(walk(t, right)),
            }
        }
        walk(self, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn predict_one(&self, x: &SparseVec) -> AttitudeLabel {
        let mut votes = [0.0; 4];
        for t in &self.trees {
            votes[t.predict_class(x)] += 1.0;
        }
        AttitudeLabel::from_index(argmax(&votes))
    }
}

fn gini(counts: &[usize; 4], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize; 4]) -> usize {
    let f: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    argmax(&f)
}

struct Builder<'a> {
    /// Column-major dense features: `cols[j][i]`.
    cols: &'a [Vec<f64>],
    y: &'a [usize],
    params: &'a ForestParams,
    mtry: usize,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    weighted: f64,
}

impl Builder<'_> {
    fn best_split(&self, samples: &[usize], rng: &mut ChaCha8Rng) -> Option<BestSplit> {
        let leaf = self.params.min_samples_leaf;
        let n = samples.len();
        let mut features: Vec<usize> = (0..self.cols.len()).collect();
        features.shuffle(rng);
        let mut best: Option<BestSplit> = None;
        let mut visited = 0;
        let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
        for j in features {
            if visited == self.mtry {
                break;
            }
            pairs.clear();
            pairs.extend(samples.iter().map(|&i| (self.cols[j][i], self.y[i])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pairs[0].0 == pairs[n - 1].0 {
                // constant here; does not count toward the feature budget
                continue;
            }
            visited += 1;
            let mut right = [0usize; 4];
            for &(_, c) in &pairs {
                right[c] += 1;
            }
            let mut left = [0usize; 4];
            for k in 0..n - 1 {
                let c = pairs[k].1;
                left[c] += 1;
                right[c] -= 1;
                let nl = k + 1;
                let nr = n - nl;
                if pairs[k].0 == pairs[k + 1].0 || nl < leaf || nr < leaf {
                    continue;
                }
                let w = nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr);
                if best.as_ref().is_none_or(|b| w < b.weighted) {
                    best = Some(BestSplit {
                        feature: j,
                        threshold: 0.5 * (pairs[k].0 + pairs[k + 1].0),
                        weighted: w,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, samples: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let mut counts = [0usize; 4];
        for &i in samples {
            counts[self.y[i]] += 1;
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            class: majority(&counts),
        });
        let n = samples.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_left = self.params.max_depth.is_none_or(|d| depth < d);
        if pure || !depth_left || n < 2 * self.params.min_samples_leaf.max(1) {
            return id;
        }
        let Some(split) = self.best_split(samples, rng) else {
            return id;
        };
        if split.weighted >= n as f64 * gini(&counts, n) - 1e-12 {
            return id;
        }
        let col = &self.cols[split.feature];
        let (l, r): (Vec<usize>, Vec<usize>) = samples.iter().partition(|&&i| col[i] <= split.threshold);
        let left = self.grow(&l, depth + 1, rng);
        let right = self.grow(&r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

pub(crate) fn train(x: &[SparseVec], dim: usize, labels: &[AttitudeLabel], params: &ForestParams, seed: u64) -> Forest {
    let n = x.len();
    let mut cols = vec![vec![0.0; n]; dim];
    for (i, row) in x.iter().enumerate() {
        for &(j, v) in row {
            cols[j][i] = v;
        }
    }
    let y: Vec<usize> = labels.iter().map(|l| l.index()).collect();
    let mtry = ((dim as f64).sqrt() as usize).max(1);
    let mut trees = Vec::with_capacity(params.n_estimators);
    for t in 0..params.n_estimators {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let samples: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let mut b = Builder {
            cols: &cols,
            y: &y,
            params,
            mtry,
            nodes: Vec::new(),
        };
        if !samples.is_empty() {
            b.grow(&samples, 0, &mut rng);
        } else {
            b.nodes.push(Node::Leaf { class: 0 });
        }
        trees.push(Tree { nodes: b.nodes });
    }
    Forest { trees }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_limit_is_respected() {
        let x: Vec<SparseVec> = (0..40).map(|i| vec![(0, i as f64), (1, (i % 7) as f64)]).collect();
        let y: Vec<AttitudeLabel> = (0..40).map(|i| AttitudeLabel::from_index(i % 4)).collect();
        let p = ForestParams {
            n_estimators: 5,
            max_depth: Some(3),
            ..Default::default()
        };
        let f = train(&x, 2, &y, &p, 1);
        assert!(f.trees.iter().all(|t| t.depth() <= 3));
        assert_eq!(f, train(&x, 2, &y, &p, 1));
    }

    #[test]
    fn deep_tree_memorizes_distinct_points() {
        let x: Vec<SparseVec> = (0..20).map(|i| vec![(0, i as f64)]).collect();
        let y: Vec<AttitudeLabel> = (0..20).map(|i| AttitudeLabel::from_index((i * 7) % 4)).collect();
        let p = ForestParams {
            n_estimators: 1,
            bootstrap: false,
            ..Default::default()
        };
        let f = train(&x, 1, &y, &p, 0);
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(f.predict_one(xi), *yi);
        }
    }
}
