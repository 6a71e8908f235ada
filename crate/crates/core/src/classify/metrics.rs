use serde::Serialize;

use super::AttitudeLabel;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub label: AttitudeLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Rows are true labels, columns predicted labels.
    pub confusion: [[usize; 4]; 4],
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_f1: f64,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn evaluate_labels(truth: &[AttitudeLabel], predicted: &[AttitudeLabel]) -> Result<MetricsReport> {
    if truth.is_empty() {
        return Err(Error::InvalidInput("evaluation set is empty".into()));
    }
    if truth.len() != predicted.len() {
        return Err(Error::InvalidInput(format!(
            "{} true labels but {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    let mut confusion = [[0usize; 4]; 4];
    for (t, p) in truth.iter().zip(predicted) {
        confusion[t.index()][p.index()] += 1;
    }
    let per_class: Vec<ClassMetrics> = AttitudeLabel::ALL
        .iter()
        .map(|&label| {
            let c = label.index();
            let tp = confusion[c][c];
            let predicted_c: usize = (0..4).map(|r| confusion[r][c]).sum();
            let support: usize = confusion[c].iter().sum();
            let precision = ratio(tp, predicted_c);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                label,
                precision,
                recall,
                f1,
                support,
            }
        })
        .collect();
    let trace: usize = (0..4).map(|i| confusion[i][i]).sum();
    let macro_f1 = per_class.iter().map(|m| m.f1).sum::<f64>() / 4.0;
    Ok(MetricsReport {
        confusion,
        per_class,
        accuracy: ratio(trace, truth.len()),
        macro_f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use AttitudeLabel::*;

    #[test]
    fn perfect_and_constant_predictors() {
        let truth = [Positive, Neutral, Negative, Unrelated];
        let r = evaluate_labels(&truth, &truth).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert!(r.per_class.iter().all(|m| m.f1 == 1.0));
        let r = evaluate_labels(&truth, &[Positive; 4]).unwrap();
        assert_eq!(r.accuracy, 0.25);
        assert_eq!(r.per_class[1].f1, 0.0);
        assert!(evaluate_labels(&[], &[]).is_err());
    }
}
