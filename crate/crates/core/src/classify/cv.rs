use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::grid::Params;
use super::tfidf::{SparseVec, TfidfConfig, TfidfModel};
use super::{train_classifier, AttitudeLabel, ModelKind};
use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Folds {
    pub k: usize,
    /// Validation fold of each example.
    pub assignment: Vec<usize>,
    /// Classes with fewer members than `k`; some folds miss them.
    pub relaxed: Vec<AttitudeLabel>,
}

impl Folds {
    pub fn validation(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn training(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] != fold).collect()
    }
}

/// Stratified K-fold split. Each class is shuffled with its own seeded
/// stream, then dealt round-robin; the deal continues where the previous
/// class stopped so fold sizes differ by at most one.
pub fn stratified_folds(labels: &[AttitudeLabel], k: usize, seed: u64) -> Result<Folds> {
    if k < 2 {
        return Err(Error::InvalidInput("K must be at least 2".into()));
    }
    if labels.len() < k {
        return Err(Error::InvalidInput(format!(
            "{} examples cannot fill {k} folds",
            labels.len()
        )));
    }
    let mut assignment = vec![0; labels.len()];
    let mut relaxed = Vec::new();
    let mut offset = 0;
    for class in AttitudeLabel::ALL {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.is_empty() {
            continue;
        }
        if idx.len() < k {
            warn!("class {class} has {} members, fewer than K={k}; stratification relaxed", idx.len());
            relaxed.push(class);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(class.index() as u64);
        idx.shuffle(&mut rng);
        for (r, &i) in idx.iter().enumerate() {
            assignment[i] = (offset + r) % k;
        }
        offset += idx.len();
    }
    Ok(Folds {
        k,
        assignment,
        relaxed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvPoint {
    pub params: Params,
    pub fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvReport {
    pub kind: ModelKind,
    pub folds: Folds,
    pub points: Vec<CvPoint>,
    pub best: usize,
}

impl CvReport {
    pub fn best_point(&self) -> &CvPoint {
        &self.points[self.best]
    }
}

struct FoldData {
    train: Vec<usize>,
    valid: Vec<usize>,
    x: Vec<SparseVec>,
    dim: usize,
}

/// Grid search by stratified K-fold cross-validation. TF-IDF is refit on
/// each training part. The point with the highest mean validation accuracy
/// wins; ties go to the lexicographically smallest hyperparameter tuple.
#[allow(clippy::too_many_arguments)]
pub fn cross_validate(
    kind: ModelKind,
    grid: &[Params],
    texts: &[&str],
    labels: &[AttitudeLabel],
    k: usize,
    tfidf: &TfidfConfig,
    seed: u64,
    exec: Exec,
) -> Result<CvReport> {
    if !kind.is_trainable() {
        return Err(Error::InvalidInput(format!("the {kind} kind has no hyperparameters to search")));
    }
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty hyperparameter grid".into()));
    }
    if texts.len() != labels.len() {
        return Err(Error::InvalidInput("texts and labels differ in length".into()));
    }
    let folds = stratified_folds(labels, k, seed)?;
    let data: Vec<Result<FoldData>> = exec.map_range(k, |f| {
        let train = folds.training(f);
        let valid = folds.validation(f);
        let train_texts: Vec<&str> = train.iter().map(|&i| texts[i]).collect();
        let model = TfidfModel::fit(&train_texts, tfidf)?;
        Ok(FoldData {
            x: texts.iter().map(|t| model.transform(t)).collect(),
            dim: model.dim(),
            train,
            valid,
        })
    });
    let data: Vec<FoldData> = data.into_iter().collect::<Result<_>>()?;
    let jobs = grid.len() * k;
    let acc: Vec<Result<f64>> = exec.map_range(jobs, |job| {
        let (p, f) = (job / k, job % k);
        let d = &data[f];
        let xs: Vec<SparseVec> = d.train.iter().map(|&i| d.x[i].clone()).collect();
        let ys: Vec<AttitudeLabel> = d.train.iter().map(|&i| labels[i]).collect();
        let model = train_classifier(kind, &xs, d.dim, &ys, &grid[p], seed)?;
        let hits = d
            .valid
            .iter()
            .filter(|&&i| model.predict_features(&d.x[i]) == Some(labels[i]))
            .count();
        Ok(hits as f64 / d.valid.len().max(1) as f64)
    });
    let acc: Vec<f64> = acc.into_iter().collect::<Result<_>>()?;
    let points: Vec<CvPoint> = grid
        .iter()
        .enumerate()
        .map(|(p, params)| {
            let fold_accuracy = acc[p * k..(p + 1) * k].to_vec();
            let mean_accuracy = fold_accuracy.iter().sum::<f64>() / k as f64;
            CvPoint {
                params: params.clone(),
                fold_accuracy,
                mean_accuracy,
            }
        })
        .collect();
    let mut best = 0;
    for (i, pt) in points.iter().enumerate().skip(1) {
        let b = &points[best];
        if pt.mean_accuracy > b.mean_accuracy
            || (pt.mean_accuracy == b.mean_accuracy && pt.params < b.params)
        {
            best = i;
        }
    }
    Ok(CvReport {
        kind,
        folds,
        points,
        best,
    })
}
