use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Format, Manifest, RunDir};
use crate::error::Result;
use crate::eval::{
    baseline_report, evaluate_model, ClassificationReport, FoldPlan, ModelEvaluation,
    DEFAULT_MAX_FOLDS,
};
use crate::models::{BarrierModel, ModelParams, ModelRegistry};
use crate::survey_data::{
    default_exceptions, filter_barriers, load_barrier_survey, BarrierCatalog, FeatureSchema,
    LabeledDataset, DEFAULT_MIN_COUNT,
};

/// Where the barrier survey lives and how it is filtered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataSpec {
    pub barrier_survey: PathBuf,
    pub schema: FeatureSchema,
    pub min_count: usize,
    pub exceptions: BTreeSet<String>,
}

impl Default for DataSpec {
    fn default() -> Self {
        Self {
            barrier_survey: PathBuf::from("barrier_survey.csv"),
            schema: FeatureSchema::default(),
            min_count: DEFAULT_MIN_COUNT,
            exceptions: default_exceptions(),
        }
    }
}

pub(crate) struct LoadedData {
    pub catalog: BarrierCatalog,
    pub data: LabeledDataset,
}

impl DataSpec {
    pub(crate) fn load(&self, run: &mut RunDir) -> Result<LoadedData> {
        run.input(&self.barrier_survey)?;
        let records = load_barrier_survey(&self.barrier_survey, &self.schema)?;
        let catalog = filter_barriers(&records, self.min_count, &self.exceptions)?;
        let data =
            LabeledDataset::from_records(&catalog.restrict(&records), &self.schema, &catalog)?;
        Ok(LoadedData { catalog, data })
    }
}

/// Stratified per-barrier folds for per-barrier models; one shared `k`-fold
/// split for joint models so a single fit serves every barrier.
pub fn fold_plan(
    model: &dyn BarrierModel,
    data: &LabeledDataset,
    max_folds: usize,
    joint_folds: usize,
    seed: u64,
) -> Result<FoldPlan> {
    if model.joint() {
        FoldPlan::shared_kfold(data, joint_folds, seed)
    } else {
        FoldPlan::stratified(data, max_folds, seed)
    }
}

fn default_joint_folds() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainCommandConfig {
    pub seed: u64,
    pub data: DataSpec,
    /// Registered model name.
    pub model: String,
    pub params: ModelParams,
    pub cross_validate: bool,
    pub max_folds: usize,
    #[serde(default = "default_joint_folds")]
    pub joint_folds: usize,
}

impl Default for TrainCommandConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            data: DataSpec::default(),
            model: "svm".into(),
            params: ModelParams::default(),
            cross_validate: true,
            max_folds: DEFAULT_MAX_FOLDS,
            joint_folds: default_joint_folds(),
        }
    }
}

fn seeded_params(params: &ModelParams, seed: u64) -> ModelParams {
    let mut p = *params;
    p.mlp_train.seed = seed;
    p
}

/// Trains `config.model` on the full survey and saves `model.json`, plus a
/// cross-validated report unless disabled.
pub fn run_train(
    command: &str,
    config: &TrainCommandConfig,
    out: &Path,
    format: Format,
) -> Result<Manifest> {
    let mut run = RunDir::create(out, format, command, config.seed)?;
    let loaded = config.data.load(&mut run)?;
    let schema = &config.data.schema;
    let params = seeded_params(&config.params, config.seed);
    let model = ModelRegistry::standard().build(&config.model, &params, schema.encoded_dim())?;
    let trained = model.train(&loaded.data, &loaded.catalog, schema)?;
    trained.save(&run.output("model.json", "barrier-model/v1"))?;
    if config.cross_validate {
        let plan = fold_plan(
            model.as_ref(),
            &loaded.data,
            config.max_folds,
            config.joint_folds,
            config.seed,
        )?;
        let eval = evaluate_model(model.as_ref(), &loaded.data, &loaded.catalog, &plan)?;
        write_evaluations(&mut run, &loaded.catalog, &[eval], None)?;
    }
    run.finish(config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalCommandConfig {
    pub seed: u64,
    pub data: DataSpec,
    pub models: Vec<String>,
    pub params: ModelParams,
    /// Adds the always-predict-top-`k` baseline when set.
    pub baseline_k: Option<usize>,
    pub max_folds: usize,
    #[serde(default = "default_joint_folds")]
    pub joint_folds: usize,
}

impl Default for EvalCommandConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            data: DataSpec::default(),
            models: vec!["svm".into()],
            params: ModelParams::default(),
            baseline_k: Some(5),
            max_folds: DEFAULT_MAX_FOLDS,
            joint_folds: default_joint_folds(),
        }
    }
}

/// Cross-validates every listed model and writes PR curves, the
/// classification report and a summary.
pub fn run_eval(config: &EvalCommandConfig, out: &Path, format: Format) -> Result<Manifest> {
    let mut run = RunDir::create(out, format, "eval", config.seed)?;
    let loaded = config.data.load(&mut run)?;
    let dim = config.data.schema.encoded_dim();
    let params = seeded_params(&config.params, config.seed);
    let registry = ModelRegistry::standard();
    let mut evals = Vec::new();
    for name in &config.models {
        let model = registry.build(name, &params, dim)?;
        let plan = fold_plan(
            model.as_ref(),
            &loaded.data,
            config.max_folds,
            config.joint_folds,
            config.seed,
        )?;
        evals.push(evaluate_model(
            model.as_ref(),
            &loaded.data,
            &loaded.catalog,
            &plan,
        )?);
    }
    let baseline = match config.baseline_k {
        Some(k) => {
            let plan = FoldPlan::stratified(&loaded.data, config.max_folds, config.seed)?;
            let (base, report) = baseline_report(&loaded.catalog, &loaded.data, &plan, k)?;
            let codes = base
                .barriers
                .iter()
                .map(|&b| loaded.catalog.code(b).to_string())
                .collect();
            Some(Baseline { k, codes, report })
        }
        None => None,
    };
    write_evaluations(&mut run, &loaded.catalog, &evals, baseline.as_ref())?;
    run.finish(config)
}

pub(crate) struct Baseline {
    k: usize,
    codes: Vec<String>,
    report: ClassificationReport,
}

#[derive(Serialize)]
struct ModelSummary<'a> {
    threshold: f64,
    macro_auc: f64,
    auc: BTreeMap<&'a str, f64>,
    /// Barriers without enough positives to cross-validate.
    skipped: Vec<&'a str>,
    macro_accuracy: f64,
    macro_precision: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    top_k: Option<TopKSummary>,
}

#[derive(Serialize)]
struct TopKSummary {
    macro_accuracy: f64,
    macro_precision: f64,
}

#[derive(Serialize)]
struct BaselineSummary<'a> {
    k: usize,
    barriers: &'a [String],
    macro_accuracy: f64,
    macro_precision: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    models: BTreeMap<&'a str, ModelSummary<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<BaselineSummary<'a>>,
}

#[derive(Serialize)]
struct FullReport<'a> {
    evaluations: &'a [ModelEvaluation],
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<&'a ClassificationReport>,
}

fn report_rows(model: &str, report: &ClassificationReport, rows: &mut Vec<Vec<String>>) {
    for b in &report.barriers {
        rows.push(vec![
            model.to_string(),
            b.barrier.clone(),
            b.accuracy.to_string(),
            b.accuracy_se.to_string(),
            b.precision.to_string(),
            b.precision_se.to_string(),
            b.recall.to_string(),
            b.recall_se.to_string(),
            b.folds.to_string(),
        ]);
    }
    rows.push(vec![
        model.to_string(),
        "macro".into(),
        report.macro_accuracy.to_string(),
        report.macro_accuracy_se.to_string(),
        report.macro_precision.to_string(),
        report.macro_precision_se.to_string(),
        report.macro_recall.to_string(),
        report.macro_recall_se.to_string(),
        String::new(),
    ]);
}

pub(crate) fn write_evaluations(
    run: &mut RunDir,
    catalog: &BarrierCatalog,
    evals: &[ModelEvaluation],
    baseline: Option<&Baseline>,
) -> Result<()> {
    let top_codes: Option<Vec<&str>> = baseline.map(|b| {
        b.report
            .barriers
            .iter()
            .map(|r| r.barrier.as_str())
            .collect()
    });
    let mut models = BTreeMap::new();
    for e in evals {
        let mut auc = BTreeMap::new();
        let mut skipped = Vec::new();
        for (b, c) in e.curves.iter().enumerate() {
            match c {
                Some(c) => {
                    auc.insert(catalog.code(b), c.auc);
                }
                None => skipped.push(catalog.code(b)),
            }
        }
        let top_k = match &top_codes {
            Some(codes) => {
                let r = e.report.restricted(codes)?;
                Some(TopKSummary {
                    macro_accuracy: r.macro_accuracy,
                    macro_precision: r.macro_precision,
                })
            }
            None => None,
        };
        models.insert(
            e.model.as_str(),
            ModelSummary {
                threshold: e.threshold,
                macro_auc: e.macro_pr.auc,
                auc,
                skipped,
                macro_accuracy: e.report.macro_accuracy,
                macro_precision: e.report.macro_precision,
                top_k,
            },
        );
    }
    let summary = Summary {
        models,
        baseline: baseline.map(|b| BaselineSummary {
            k: b.k,
            barriers: &b.codes,
            macro_accuracy: b.report.macro_accuracy,
            macro_precision: b.report.macro_precision,
        }),
    };
    run.write_json("summary.json", "eval-summary/v1", &summary)?;

    match run.format {
        Format::Json => run.write_json(
            "evaluation.json",
            "evaluation/v1",
            &FullReport {
                evaluations: evals,
                baseline: baseline.map(|b| &b.report),
            },
        ),
        Format::Csv => {
            let mut curve_rows = Vec::new();
            let mut macro_rows = Vec::new();
            let mut class_rows = Vec::new();
            for e in evals {
                for (b, c) in e.curves.iter().enumerate() {
                    for p in c.iter().flat_map(|c| &c.points) {
                        curve_rows.push(vec![
                            e.model.clone(),
                            catalog.code(b).to_string(),
                            p.threshold.to_string(),
                            p.recall.to_string(),
                            p.precision.to_string(),
                        ]);
                    }
                }
                for &(r, p) in &e.macro_pr.mean_curve {
                    macro_rows.push(vec![e.model.clone(), r.to_string(), p.to_string()]);
                }
                report_rows(&e.model, &e.report, &mut class_rows);
            }
            if let Some(b) = baseline {
                report_rows(&format!("baseline-top{}", b.k), &b.report, &mut class_rows);
            }
            run.write_csv(
                "pr_curves.csv",
                "pr-curves/v1",
                &["model", "barrier", "threshold", "recall", "precision"],
                &curve_rows,
            )?;
            run.write_csv(
                "macro_pr.csv",
                "macro-pr/v1",
                &["model", "recall", "precision"],
                &macro_rows,
            )?;
            run.write_csv(
                "classification.csv",
                "classification/v1",
                &[
                    "model",
                    "barrier",
                    "accuracy",
                    "accuracy_se",
                    "precision",
                    "precision_se",
                    "recall",
                    "recall_se",
                    "folds",
                ],
                &class_rows,
            )
        }
    }
}
