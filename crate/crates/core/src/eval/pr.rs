use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    /// Scores `>= threshold` are predicted positive. The leading point uses `+∞`.
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    /// Average precision: `Σ (Rₖ − Rₖ₋₁)·Pₖ` over the threshold steps.
    pub auc: f64,
    pub positives: usize,
    pub n: usize,
}

impl PrCurve {
    pub fn prevalence(&self) -> f64 {
        self.positives as f64 / self.n as f64
    }
}

/// Sweeps the threshold over the distinct scores from high to low. Tied
/// scores enter together as one step. The curve starts at `(recall 0,
/// precision 1)`.
pub fn pr_curve(scores: &[f64], labels: &[bool]) -> Result<PrCurve> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: scores.len(),
            found: labels.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Config("NaN score".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return Err(Error::NoPositives("<pr curve>".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![PrPoint {
        threshold: f64::INFINITY,
        recall: 0.0,
        precision: 1.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut prev_recall = 0.0;
    let mut k = 0;
    while k < order.len() {
        let threshold = scores[order[k]];
        while k < order.len() && scores[order[k]] == threshold {
            if labels[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let recall = tp as f64 / positives as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        auc += (recall - prev_recall) * precision;
        prev_recall = recall;
        points.push(PrPoint {
            threshold,
            recall,
            precision,
        });
    }
    Ok(PrCurve {
        points,
        auc,
        positives,
        n: scores.len(),
    })
}

pub const RECALL_GRID_STEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroPr {
    pub auc: f64,
    /// `(recall, mean precision)` on the grid `0.00, 0.01, …, 1.00`.
    pub mean_curve: Vec<(f64, f64)>,
}

/// Precision at `recall` taken from the first curve point at or to the right of it.
pub fn precision_at(curve: &PrCurve, recall: f64) -> f64 {
    curve
        .points
        .iter()
        .find(|p| p.recall >= recall - 1e-12)
        .map_or(0.0, |p| p.precision)
}

/// Unweighted mean of the per-curve AUCs, and the mean interpolated curve.
pub fn macro_pr(curves: &[&PrCurve]) -> Result<MacroPr> {
    if curves.is_empty() {
        return Err(Error::Empty("PR curves"));
    }
    let n = curves.len() as f64;
    let auc = curves.iter().map(|c| c.auc).sum::<f64>() / n;
    let mean_curve = (0..=RECALL_GRID_STEPS)
        .map(|s| {
            let r = s as f64 / RECALL_GRID_STEPS as f64;
            (
                r,
                curves.iter().map(|c| precision_at(c, r)).sum::<f64>() / n,
            )
        })
        .collect();
    Ok(MacroPr { auc, mean_curve })
}
