use serde::Serialize;

use crate::regress::pearson;

/// A region with its scored-sentence count, mean sentiment and factors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRegion {
    pub region_id: String,
    pub n_reviews: usize,
    pub sentiment: f64,
    pub factors: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub threshold: usize,
    pub n_regions: usize,
    /// Pearson r per factor; `None` below three regions or when undefined.
    pub r: Vec<Option<f64>>,
}

/// Between-region correlation of sentiment with each factor as the minimum
/// review count rises. Threshold 0 keeps every region with at least one
/// scored sentence.
pub fn sensitivity_sweep(regions: &[SweepRegion], n_factors: usize, max_threshold: usize) -> Vec<SweepRow> {
    (0..=max_threshold)
        .map(|t| {
            let kept: Vec<&SweepRegion> = regions.iter().filter(|r| r.n_reviews >= t.max(1)).collect();
            let y: Vec<f64> = kept.iter().map(|r| r.sentiment).collect();
            let r = (0..n_factors)
                .map(|j| {
                    if kept.len() < 3 {
                        return None;
                    }
                    let x: Vec<f64> = kept.iter().map(|r| r.factors[j]).collect();
                    pearson(&x, &y).ok().map(|c| c.r)
                })
                .collect();
            SweepRow {
                threshold: t,
                n_regions: kept.len(),
                r,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_and_missing_cells() {
        let regions: Vec<SweepRegion> = (0..5)
            .map(|i| SweepRegion {
                region_id: format!("r{i}"),
                n_reviews: i * 10,
                sentiment: i as f64,
                factors: vec![2.0 * i as f64],
            })
            .collect();
        let rows = sensitivity_sweep(&regions, 1, 50);
        assert_eq!(rows[0].n_regions, 4);
        assert_eq!(rows[1].n_regions, 4);
        assert_eq!(rows[11].n_regions, 3);
        assert!(rows[11].r[0].is_some());
        assert_eq!(rows[21].n_regions, 2);
        assert_eq!(rows[21].r[0], None);
    }
}
