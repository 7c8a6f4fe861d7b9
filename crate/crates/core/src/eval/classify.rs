use serde::{Deserialize, Serialize};

use super::folds::FoldPlan;
use crate::error::{Error, Result};
use crate::survey_data::{BarrierCatalog, DemographicProfile, LabeledDataset};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fneg: usize,
}

impl Confusion {
    pub fn tally(predictions: &[bool], labels: &[bool]) -> Self {
        let mut c = Self::default();
        for (&p, &l) in predictions.iter().zip(labels) {
            match (p, l) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fneg += 1,
            }
        }
        c
    }

    fn add(&mut self, o: Confusion) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.tn += o.tn;
        self.fneg += o.fneg;
    }

    pub fn n(&self) -> usize {
        self.tp + self.fp + self.tn + self.fneg
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.n())
    }

    /// `0` when nothing is predicted positive.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// `0` when there are no positives.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fneg)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Sample standard deviation over `√len`. Zero for fewer than two values.
pub fn standard_error(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub barrier: String,
    pub index: usize,
    pub confusion: Confusion,
    /// Pooled over all test folds.
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    /// Computed from the per-fold metrics.
    pub accuracy_se: f64,
    pub precision_se: f64,
    pub recall_se: f64,
    pub folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub barriers: Vec<BarrierReport>,
    pub macro_accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    /// Standard error across barriers.
    pub macro_accuracy_se: f64,
    pub macro_precision_se: f64,
    pub macro_recall_se: f64,
}

impl ClassificationReport {
    pub fn get(&self, code: &str) -> Option<&BarrierReport> {
        self.barriers.iter().find(|b| b.barrier == code)
    }

    /// Macro averages restricted to `codes`.
    pub fn restricted(&self, codes: &[&str]) -> Result<ClassificationReport> {
        let barriers = codes
            .iter()
            .map(|c| {
                self.get(c)
                    .cloned()
                    .ok_or_else(|| Error::UnknownBarrier(c.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(assemble(barriers))
    }
}

fn assemble(barriers: Vec<BarrierReport>) -> ClassificationReport {
    let col = |f: fn(&BarrierReport) -> f64| -> Vec<f64> { barriers.iter().map(f).collect() };
    let mean = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let acc = col(|b| b.accuracy);
    let prec = col(|b| b.precision);
    let rec = col(|b| b.recall);
    ClassificationReport {
        macro_accuracy: mean(&acc),
        macro_precision: mean(&prec),
        macro_recall: mean(&rec),
        macro_accuracy_se: standard_error(&acc),
        macro_precision_se: standard_error(&prec),
        macro_recall_se: standard_error(&rec),
        barriers,
    }
}

/// Scores every barrier the plan covers. `predictions[b][i]` is the
/// out-of-fold prediction for example `i`; folds only decide how the
/// standard errors are split.
pub fn classification_report(
    catalog: &BarrierCatalog,
    predictions: &[Option<Vec<bool>>],
    data: &LabeledDataset,
    plan: &FoldPlan,
) -> Result<ClassificationReport> {
    if predictions.len() != catalog.len() || plan.n_barriers() != catalog.len() {
        return Err(Error::Dimension {
            expected: catalog.len(),
            found: predictions.len(),
        });
    }
    let mut out = Vec::new();
    for (b, (pred, folds)) in predictions.iter().zip(&plan.barriers).enumerate() {
        let (Some(pred), Some(folds)) = (pred, folds) else {
            continue;
        };
        if pred.len() != data.len() {
            return Err(Error::Dimension {
                expected: data.len(),
                found: pred.len(),
            });
        }
        let labels = data.column(b);
        let mut total = Confusion::default();
        let mut per_fold = Vec::with_capacity(folds.fold_count());
        for fold in &folds.folds {
            let p: Vec<bool> = fold.test.iter().map(|&i| pred[i]).collect();
            let l: Vec<bool> = fold.test.iter().map(|&i| labels[i]).collect();
            let c = Confusion::tally(&p, &l);
            total.add(c);
            per_fold.push(c);
        }
        let se =
            |f: fn(&Confusion) -> f64| standard_error(&per_fold.iter().map(f).collect::<Vec<_>>());
        out.push(BarrierReport {
            barrier: catalog.code(b).to_string(),
            index: b,
            confusion: total,
            accuracy: total.accuracy(),
            precision: total.precision(),
            recall: total.recall(),
            accuracy_se: se(Confusion::accuracy),
            precision_se: se(Confusion::precision),
            recall_se: se(Confusion::recall),
            folds: folds.fold_count(),
        });
    }
    Ok(assemble(out))
}

/// Marks the `k` most frequent catalog barriers positive for everyone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopKBaseline {
    pub k: usize,
    /// Catalog indices, most frequent first.
    pub barriers: Vec<usize>,
    n_barriers: usize,
}

impl TopKBaseline {
    pub fn predict(&self, _profile: &DemographicProfile) -> Vec<bool> {
        self.mask()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n_barriers];
        for &b in &self.barriers {
            m[b] = true;
        }
        m
    }

    pub fn predictions(&self, n: usize) -> Vec<Option<Vec<bool>>> {
        self.mask()
            .into_iter()
            .map(|on| Some(vec![on; n]))
            .collect()
    }
}

pub fn topk_baseline(catalog: &BarrierCatalog, k: usize) -> Result<TopKBaseline> {
    if k > catalog.len() {
        return Err(Error::Config(format!(
            "baseline k = {k} exceeds the {} catalog barriers",
            catalog.len()
        )));
    }
    let mut order: Vec<usize> = (0..catalog.len()).collect();
    order.sort_by(|&a, &b| {
        catalog.barriers[b]
            .raw_count
            .cmp(&catalog.barriers[a].raw_count)
            .then(a.cmp(&b))
    });
    order.truncate(k);
    Ok(TopKBaseline {
        k,
        barriers: order,
        n_barriers: catalog.len(),
    })
}
