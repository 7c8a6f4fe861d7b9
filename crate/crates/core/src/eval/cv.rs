use std::collections::HashMap;

use rayon::prelude::*;

use super::folds::FoldPlan;
use crate::error::{Error, Result};
use crate::models::BarrierModel;
use crate::survey_data::{BarrierCatalog, LabeledDataset};

/// Out-of-fold scores: `columns[b][i]` is example `i`'s score for barrier
/// `b` from the model whose training rows excluded `i`. `None` marks a
/// barrier the plan skips.
#[derive(Debug, Clone, PartialEq)]
pub struct CvScores {
    pub columns: Vec<Option<Vec<f64>>>,
}

struct FitJob {
    train: Vec<usize>,
    /// (barrier, fold) pairs trained on exactly these rows.
    uses: Vec<(usize, usize)>,
}

/// Trains one model per distinct training set of `plan` and scores the
/// matching test rows. Models that serve all barriers at once ([`BarrierModel::joint`])
/// are fitted once per shared training set.
pub fn cross_val_scores(
    model: &dyn BarrierModel,
    data: &LabeledDataset,
    catalog: &BarrierCatalog,
    plan: &FoldPlan,
) -> Result<CvScores> {
    if plan.n_barriers() != data.n_barriers() || catalog.len() != data.n_barriers() {
        return Err(Error::Dimension {
            expected: data.n_barriers(),
            found: plan.n_barriers(),
        });
    }
    let mut jobs: Vec<FitJob> = Vec::new();
    let mut by_rows: HashMap<&[usize], usize> = HashMap::new();
    for (b, folds) in plan.barriers.iter().enumerate() {
        let Some(folds) = folds else { continue };
        let mut covered = vec![false; data.len()];
        for (f, fold) in folds.folds.iter().enumerate() {
            for &i in &fold.test {
                covered[i] = true;
            }
            let slot = if model.joint() {
                by_rows.get(fold.train.as_slice()).copied()
            } else {
                None
            };
            match slot {
                Some(j) => jobs[j].uses.push((b, f)),
                None => {
                    if model.joint() {
                        by_rows.insert(fold.train.as_slice(), jobs.len());
                    }
                    jobs.push(FitJob {
                        train: fold.train.clone(),
                        uses: vec![(b, f)],
                    });
                }
            }
        }
        if covered.iter().any(|c| !c) {
            return Err(Error::Config(format!(
                "fold plan for `{}` does not cover every example",
                catalog.code(b)
            )));
        }
    }

    let prepared = model.prepare(data)?;
    let results: Vec<Vec<(usize, usize, f64)>> = jobs
        .par_iter()
        .map(|job| {
            let barriers: Vec<usize> = job.uses.iter().map(|&(b, _)| b).collect();
            let (b0, f0) = job.uses[0];
            let scorer = prepared
                .fit(&job.train, &barriers)
                .map_err(|e| Error::Fold {
                    barrier: catalog.code(b0).to_string(),
                    fold: f0,
                    source: Box::new(e),
                })?;
            let mut out = Vec::new();
            for &(b, f) in &job.uses {
                let fold = &plan.barriers[b].as_ref().expect("planned").folds[f];
                for &i in &fold.test {
                    let s = scorer
                        .score(&data.features[i], b)
                        .map_err(|e| Error::Fold {
                            barrier: catalog.code(b).to_string(),
                            fold: f,
                            source: Box::new(e),
                        })?;
                    out.push((b, i, s));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut columns: Vec<Option<Vec<f64>>> = plan
        .barriers
        .iter()
        .map(|f| f.as_ref().map(|_| vec![f64::NAN; data.len()]))
        .collect();
    for (b, i, s) in results.into_iter().flatten() {
        columns[b].as_mut().expect("planned")[i] = s;
    }
    Ok(CvScores { columns })
}
