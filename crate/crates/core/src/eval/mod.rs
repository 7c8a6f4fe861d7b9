//! Cross-validated PR curves and classification metrics.

mod classify;
mod cv;
mod folds;
mod pr;

pub use classify::{
    classification_report, standard_error, topk_baseline, BarrierReport, ClassificationReport,
    Confusion, TopKBaseline,
};
pub use cv::{cross_val_scores, CvScores};
pub use folds::{stratified_folds, BarrierFolds, Fold, FoldPlan, DEFAULT_MAX_FOLDS};
pub use pr::{macro_pr, pr_curve, precision_at, MacroPr, PrCurve, PrPoint, RECALL_GRID_STEPS};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::BarrierModel;
use crate::survey_data::{BarrierCatalog, LabeledDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEvaluation {
    pub model: String,
    pub threshold: f64,
    /// `None` for barriers the plan skips.
    pub curves: Vec<Option<PrCurve>>,
    pub macro_pr: MacroPr,
    pub report: ClassificationReport,
}

/// Runs cross-validation for `model`, then builds per-barrier PR curves and
/// a classification report at the model's decision threshold.
pub fn evaluate_model(
    model: &dyn BarrierModel,
    data: &LabeledDataset,
    catalog: &BarrierCatalog,
    plan: &FoldPlan,
) -> Result<ModelEvaluation> {
    let scores = cross_val_scores(model, data, catalog, plan)?;
    let threshold = model.threshold(catalog.len());
    let mut curves = Vec::with_capacity(catalog.len());
    let mut predictions = Vec::with_capacity(catalog.len());
    for (b, column) in scores.columns.iter().enumerate() {
        match column {
            Some(s) => {
                curves.push(Some(pr_curve(s, &data.column(b))?));
                predictions.push(Some(s.iter().map(|&v| v > threshold).collect()));
            }
            None => {
                curves.push(None);
                predictions.push(None);
            }
        }
    }
    let present: Vec<&PrCurve> = curves.iter().flatten().collect();
    let macro_pr = macro_pr(&present)?;
    let report = classification_report(catalog, &predictions, data, plan)?;
    Ok(ModelEvaluation {
        model: model.name().to_string(),
        threshold,
        curves,
        macro_pr,
        report,
    })
}

/// Top-`k` baseline scored on the same folds, restricted to its `k` barriers.
pub fn baseline_report(
    catalog: &BarrierCatalog,
    data: &LabeledDataset,
    plan: &FoldPlan,
    k: usize,
) -> Result<(TopKBaseline, ClassificationReport)> {
    let base = topk_baseline(catalog, k)?;
    let full = classification_report(catalog, &base.predictions(data.len()), data, plan)?;
    let codes: Vec<&str> = base
        .barriers
        .iter()
        .filter(|&&b| plan.barriers[b].is_some())
        .map(|&b| catalog.code(b))
        .collect();
    let report = full.restricted(&codes)?;
    Ok((base, report))
}
