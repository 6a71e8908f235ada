use serde::Serialize;

use super::linalg::{ols_rss, total_ss};
use crate::error::{Error, Result};

pub const DEFAULT_VIF_THRESHOLD: f64 = 5.0;

/// `1 - R^2` at or below this is treated as exact collinearity.
const COLLINEAR_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VifStep {
    pub dropped: String,
    /// `None` when the variable was exactly collinear with the others.
    pub vif: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VifReport {
    pub threshold: f64,
    pub initial: Vec<(String, Option<f64>)>,
    pub steps: Vec<VifStep>,
    pub kept: Vec<String>,
    pub final_vif: Vec<(String, Option<f64>)>,
}

/// VIF of every column: `1 / (1 - R^2)` from regressing it on the others
/// with an intercept. `None` marks an infinite VIF.
pub fn vif_values(columns: &[&[f64]]) -> Result<Vec<Option<f64>>> {
    if columns.len() < 2 {
        return Ok(vec![Some(1.0); columns.len()]);
    }
    (0..columns.len())
        .map(|j| {
            let others: Vec<&[f64]> = columns
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, c)| *c)
                .collect();
            let tss = total_ss(columns[j]);
            if tss == 0.0 {
                return Ok(None);
            }
            let one_minus_r2 = ols_rss(columns[j], &others)? / tss;
            Ok((one_minus_r2 > COLLINEAR_TOL).then(|| 1.0 / one_minus_r2))
        })
        .collect()
}

fn worse(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(x), Some(y)) => x >= y,
    }
}

/// Drops the highest-VIF variable, recomputes, and repeats until every VIF
/// is at or below `threshold`. Ties go against the later column.
pub fn vif_filter(columns: &[&[f64]], names: &[String], threshold: f64) -> Result<VifReport> {
    if columns.len() != names.len() {
        return Err(Error::InvalidInput("vif_filter: names and columns differ".into()));
    }
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::InvalidInput("VIF threshold must be positive".into()));
    }
    let mut keep: Vec<usize> = (0..columns.len()).collect();
    let initial = vif_values(columns)?;
    let mut current = initial.clone();
    let mut steps = Vec::new();
    loop {
        let mut worst: Option<usize> = None;
        for (pos, &v) in current.iter().enumerate() {
            if v.is_some_and(|x| x <= threshold) {
                continue;
            }
            if worst.is_none_or(|w| worse(v, current[w])) {
                worst = Some(pos);
            }
        }
        let Some(pos) = worst else { break };
        steps.push(VifStep {
            dropped: names[keep[pos]].clone(),
            vif: current[pos],
        });
        keep.remove(pos);
        let cols: Vec<&[f64]> = keep.iter().map(|&k| columns[k]).collect();
        current = vif_values(&cols)?;
    }
    let label = |idx: &[usize], v: &[Option<f64>]| idx.iter().zip(v).map(|(&k, &x)| (names[k].clone(), x)).collect();
    let all: Vec<usize> = (0..columns.len()).collect();
    Ok(VifReport {
        threshold,
        initial: label(&all, &initial),
        steps,
        kept: keep.iter().map(|&k| names[k].clone()).collect(),
        final_vif: label(&keep, &current),
    })
}
