use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::linalg::{ols_rss, total_ss};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Backward,
    Forward,
    Both,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "backward" => Ok(Direction::Backward),
            "forward" => Ok(Direction::Forward),
            "both" => Ok(Direction::Both),
            other => Err(Error::InvalidInput(format!("unknown stepwise direction `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "action", content = "variable", rename_all = "lowercase")]
pub enum StepAction {
    Start,
    Drop(String),
    Add(String),
}

impl fmt::Display for StepAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepAction::Start => f.write_str("start"),
            StepAction::Drop(v) => write!(f, "- {v}"),
            StepAction::Add(v) => write!(f, "+ {v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepwiseStep {
    pub action: StepAction,
    pub aic: f64,
    pub variables: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepwiseResult {
    pub direction: Direction,
    pub selected: Vec<String>,
    pub trace: Vec<StepwiseStep>,
}

/// Gaussian AIC of an OLS fit, `n ln(RSS/n) + 2k` with `k` counting the
/// intercept. RSS is floored at a tiny fraction of the total sum of squares
/// so perfect fits stay finite.
pub fn aic(y: &[f64], cols: &[&[f64]]) -> Result<f64> {
    let n = y.len() as f64;
    let floor = (total_ss(y) * 1e-12).max(f64::MIN_POSITIVE);
    let rss = ols_rss(y, cols)?.max(floor);
    Ok(n * (rss / n).ln() + 2.0 * (cols.len() + 1) as f64)
}

fn aic_of(y: &[f64], columns: &[&[f64]], set: &[usize]) -> Result<f64> {
    let cols: Vec<&[f64]> = set.iter().map(|&k| columns[k]).collect();
    aic(y, &cols)
}

/// Greedy AIC selection. Each step takes the single move with the lowest
/// AIC and only if it strictly improves; ties go to the earlier column.
pub fn stepwise_aic(y: &[f64], columns: &[&[f64]], names: &[String], direction: Direction) -> Result<StepwiseResult> {
    if columns.len() != names.len() {
        return Err(Error::InvalidInput("stepwise: names and columns differ".into()));
    }
    if columns.iter().any(|c| c.len() != y.len()) {
        return Err(Error::InvalidInput("stepwise: column length differs from response".into()));
    }
    if y.len() < 3 {
        return Err(Error::InvalidInput("stepwise needs at least three rows".into()));
    }
    let mut set: Vec<usize> = match direction {
        Direction::Forward => Vec::new(),
        _ => (0..columns.len()).collect(),
    };
    let mut current = aic_of(y, columns, &set)?;
    let vars = |set: &[usize]| set.iter().map(|&k| names[k].clone()).collect::<Vec<_>>();
    let mut trace = vec![StepwiseStep {
        action: StepAction::Start,
        aic: current,
        variables: vars(&set),
    }];
    loop {
        let mut best: Option<(f64, Vec<usize>, StepAction)> = None;
        let mut consider = |cand: Vec<usize>, action: StepAction| -> Result<()> {
            let a = aic_of(y, columns, &cand)?;
            if best.as_ref().is_none_or(|(b, _, _)| a < *b) {
                best = Some((a, cand, action));
            }
            Ok(())
        };
        if direction != Direction::Forward {
            for pos in 0..set.len() {
                let mut cand = set.clone();
                let k = cand.remove(pos);
                consider(cand, StepAction::Drop(names[k].clone()))?;
            }
        }
        if direction != Direction::Backward {
            for k in (0..columns.len()).filter(|k| !set.contains(k)) {
                let mut cand = set.clone();
                cand.push(k);
                cand.sort_unstable();
                consider(cand, StepAction::Add(names[k].clone()))?;
            }
        }
        match best {
            Some((a, cand, action)) if a < current => {
                current = a;
                set = cand;
                trace.push(StepwiseStep {
                    action,
                    aic: a,
                    variables: vars(&set),
                });
            }
            _ => break,
        }
    }
    Ok(StepwiseResult {
        direction,
        selected: vars(&set),
        trace,
    })
}
