//! Barrier models behind a common interface, registered by name.
//!
//! A [`BarrierModel`] is prepared once per dataset (so expensive shared work
//! such as a Gram matrix happens once) and then fitted on arbitrary row
//! subsets by cross-validation. Registered names: `svm` (cubic polynomial
//! kernel), `svm-rbf`, `mlp`, `frequency` (training prevalence, the
//! constant-score baseline).

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::{
    init_mlp, train_mlp, Architecture, MlpModel, MlpRanker, TrainConfig, MLP_FORMAT_VERSION,
};
use crate::survey_data::{BarrierCatalog, DemographicProfile, FeatureSchema, LabeledDataset};
use crate::svm::{
    decision_value, ranked, train_barriers, train_ovr_dataset, BinarySvmModel, KernelMatrix,
    KernelSpec, OvrConfig, OvrModel, SmoSettings,
};

/// Scores barriers for encoded profiles. Higher means more likely.
pub trait BarrierScorer: Send + Sync {
    fn score(&self, x: &[f64], barrier: usize) -> Result<f64>;
}

pub trait PreparedModel: Sync {
    /// Fits on `rows`; the scorer must answer for every barrier in `barriers`.
    fn fit(&self, rows: &[usize], barriers: &[usize]) -> Result<Box<dyn BarrierScorer>>;
}

pub trait BarrierModel: Send + Sync {
    fn name(&self) -> &str;

    /// Score above which a barrier is predicted present.
    fn threshold(&self, n_barriers: usize) -> f64;

    fn prepare<'a>(&'a self, data: &'a LabeledDataset) -> Result<Box<dyn PreparedModel + 'a>>;

    /// Whether one fit serves all barriers, letting cross-validation share
    /// fits across barriers with identical training rows.
    fn joint(&self) -> bool {
        false
    }

    /// Fits on the whole dataset and returns a saveable ranker.
    fn train(
        &self,
        _data: &LabeledDataset,
        _catalog: &BarrierCatalog,
        _schema: &FeatureSchema,
    ) -> Result<TrainedModel> {
        Err(Error::Config(format!(
            "model `{}` has no saveable form",
            self.name()
        )))
    }
}

/// Hyperparameters shared by the registered models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelParams {
    pub c: f64,
    pub degree: u32,
    pub coef0: f64,
    /// Kernel gamma; `1/dim` when absent.
    pub gamma: Option<f64>,
    pub smo: SmoSettings,
    pub mlp_architecture: Architecture,
    pub mlp_train: TrainConfig,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            degree: 3,
            coef0: 1.0,
            gamma: None,
            smo: SmoSettings::default(),
            mlp_architecture: Architecture::default(),
            mlp_train: TrainConfig::default(),
        }
    }
}

impl ModelParams {
    fn gamma(&self, dim: usize) -> f64 {
        self.gamma.unwrap_or(1.0 / dim.max(1) as f64)
    }

    pub fn polynomial(&self, dim: usize) -> OvrConfig {
        OvrConfig {
            kernel: KernelSpec::Polynomial {
                degree: self.degree,
                gamma: self.gamma(dim),
                coef0: self.coef0,
            },
            c: self.c,
            smo: self.smo,
        }
    }

    pub fn rbf(&self, dim: usize) -> OvrConfig {
        OvrConfig {
            kernel: KernelSpec::Rbf {
                gamma: self.gamma(dim),
            },
            c: self.c,
            smo: self.smo,
        }
    }
}

pub struct SvmBarrierModel {
    name: &'static str,
    pub config: OvrConfig,
}

impl SvmBarrierModel {
    pub fn new(name: &'static str, config: OvrConfig) -> Self {
        Self { name, config }
    }
}

struct PreparedSvm<'a> {
    data: &'a LabeledDataset,
    gram: KernelMatrix,
    config: OvrConfig,
}

struct SvmScorer {
    models: HashMap<usize, BinarySvmModel>,
}

impl BarrierScorer for SvmScorer {
    fn score(&self, x: &[f64], barrier: usize) -> Result<f64> {
        let m = self
            .models
            .get(&barrier)
            .ok_or_else(|| Error::UnknownBarrier(format!("#{barrier} (not fitted)")))?;
        decision_value(m, x)
    }
}

impl PreparedModel for PreparedSvm<'_> {
    fn fit(&self, rows: &[usize], barriers: &[usize]) -> Result<Box<dyn BarrierScorer>> {
        let gram = self.gram.select(rows);
        let models = train_barriers(self.data, rows, &gram, barriers, &self.config)?;
        Ok(Box::new(SvmScorer {
            models: barriers.iter().copied().zip(models).collect(),
        }))
    }
}

impl BarrierModel for SvmBarrierModel {
    fn name(&self) -> &str {
        self.name
    }

    fn threshold(&self, _: usize) -> f64 {
        0.0
    }

    fn train(
        &self,
        data: &LabeledDataset,
        catalog: &BarrierCatalog,
        schema: &FeatureSchema,
    ) -> Result<TrainedModel> {
        Ok(TrainedModel::Svm(train_ovr_dataset(
            data,
            catalog,
            schema,
            &self.config,
        )?))
    }

    fn prepare<'a>(&'a self, data: &'a LabeledDataset) -> Result<Box<dyn PreparedModel + 'a>> {
        Ok(Box::new(PreparedSvm {
            data,
            gram: KernelMatrix::compute(&self.config.kernel, &data.features)?,
            config: self.config,
        }))
    }
}

pub struct MlpBarrierModel {
    pub architecture: Architecture,
    pub train: TrainConfig,
}

struct PreparedMlp<'a> {
    data: &'a LabeledDataset,
    model: &'a MlpBarrierModel,
}

struct MlpScorer(MlpModel);

impl BarrierScorer for MlpScorer {
    fn score(&self, x: &[f64], barrier: usize) -> Result<f64> {
        Ok(self.0.forward(x)?[barrier])
    }
}

/// Multi-hot targets as 0/1 reals.
pub fn targets(labels: &[Vec<bool>]) -> Vec<Vec<f64>> {
    labels
        .iter()
        .map(|l| l.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
        .collect()
}

impl MlpBarrierModel {
    pub fn fit_rows(&self, data: &LabeledDataset, rows: &[usize]) -> Result<MlpModel> {
        let dim = data.features.first().map_or(0, Vec::len);
        let net = init_mlp(
            dim,
            data.n_barriers(),
            self.architecture,
            self.train.init_scale,
            self.train.seed,
        )?;
        let xs: Vec<Vec<f64>> = rows.iter().map(|&r| data.features[r].clone()).collect();
        let labels: Vec<Vec<bool>> = rows.iter().map(|&r| data.labels[r].clone()).collect();
        Ok(train_mlp(&net, &xs, &targets(&labels), &self.train)?.0)
    }
}

impl PreparedModel for PreparedMlp<'_> {
    fn fit(&self, rows: &[usize], _: &[usize]) -> Result<Box<dyn BarrierScorer>> {
        Ok(Box::new(MlpScorer(self.model.fit_rows(self.data, rows)?)))
    }
}

impl BarrierModel for MlpBarrierModel {
    fn name(&self) -> &str {
        "mlp"
    }

    /// Above the uniform softmax share.
    fn threshold(&self, n_barriers: usize) -> f64 {
        1.0 / n_barriers.max(1) as f64
    }

    fn prepare<'a>(&'a self, data: &'a LabeledDataset) -> Result<Box<dyn PreparedModel + 'a>> {
        Ok(Box::new(PreparedMlp { data, model: self }))
    }

    fn train(
        &self,
        data: &LabeledDataset,
        catalog: &BarrierCatalog,
        schema: &FeatureSchema,
    ) -> Result<TrainedModel> {
        let rows: Vec<usize> = (0..data.len()).collect();
        Ok(TrainedModel::Mlp(MlpRanker {
            format_version: MLP_FORMAT_VERSION,
            schema_hash: schema.hash(),
            barriers: catalog.codes().map(str::to_string).collect(),
            network: self.fit_rows(data, &rows)?,
        }))
    }

    fn joint(&self) -> bool {
        true
    }
}

/// A fitted ranker as saved to disk, tagged by family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum TrainedModel {
    Svm(OvrModel),
    Mlp(MlpRanker),
}

impl TrainedModel {
    pub fn barriers(&self) -> &[String] {
        match self {
            TrainedModel::Svm(m) => &m.barriers,
            TrainedModel::Mlp(m) => &m.barriers,
        }
    }

    fn schema_hash(&self) -> &str {
        match self {
            TrainedModel::Svm(m) => &m.schema_hash,
            TrainedModel::Mlp(m) => &m.schema_hash,
        }
    }

    /// All barriers for `profile`, highest score first, catalog order on ties.
    pub fn rank(
        &self,
        schema: &FeatureSchema,
        profile: &DemographicProfile,
    ) -> Result<Vec<(String, f64)>> {
        let x = schema.encode(profile)?;
        let scores = match self {
            TrainedModel::Svm(m) => m.scores(&x)?,
            TrainedModel::Mlp(m) => m.network.forward(&x)?,
        };
        Ok(ranked(self.barriers(), &scores))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Loads a model and checks it was trained under `schema`.
    pub fn load(path: &std::path::Path, schema: &FeatureSchema) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text)?;
        if m.schema_hash() != schema.hash() {
            return Err(Error::SchemaMismatch {
                expected: m.schema_hash().to_string(),
                found: schema.hash(),
            });
        }
        Ok(m)
    }
}

/// Scores every profile with the barrier's training prevalence.
pub struct FrequencyModel;

struct PreparedFrequency<'a>(&'a LabeledDataset);

struct FrequencyScorer(Vec<f64>);

impl BarrierScorer for FrequencyScorer {
    fn score(&self, _: &[f64], barrier: usize) -> Result<f64> {
        self.0
            .get(barrier)
            .copied()
            .ok_or_else(|| Error::UnknownBarrier(format!("#{barrier}")))
    }
}

impl PreparedModel for PreparedFrequency<'_> {
    fn fit(&self, rows: &[usize], _: &[usize]) -> Result<Box<dyn BarrierScorer>> {
        if rows.is_empty() {
            return Err(Error::Empty("training rows"));
        }
        let b = self.0.n_barriers();
        let prevalence = (0..b)
            .map(|k| {
                rows.iter().filter(|&&r| self.0.labels[r][k]).count() as f64 / rows.len() as f64
            })
            .collect();
        Ok(Box::new(FrequencyScorer(prevalence)))
    }
}

impl BarrierModel for FrequencyModel {
    fn name(&self) -> &str {
        "frequency"
    }

    fn threshold(&self, _: usize) -> f64 {
        0.5
    }

    fn prepare<'a>(&'a self, data: &'a LabeledDataset) -> Result<Box<dyn PreparedModel + 'a>> {
        Ok(Box::new(PreparedFrequency(data)))
    }

    fn joint(&self) -> bool {
        true
    }
}

type ModelBuilder = fn(&ModelParams, usize) -> Box<dyn BarrierModel>;

/// Barrier models by name.
pub struct ModelRegistry {
    builders: BTreeMap<&'static str, ModelBuilder>,
}

impl ModelRegistry {
    pub fn empty() -> Self {
        Self {
            builders: BTreeMap::new(),
        }
    }

    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register("svm", |p, dim| {
            Box::new(SvmBarrierModel::new("svm", p.polynomial(dim)))
        });
        r.register("svm-rbf", |p, dim| {
            Box::new(SvmBarrierModel::new("svm-rbf", p.rbf(dim)))
        });
        r.register("mlp", |p, _| {
            Box::new(MlpBarrierModel {
                architecture: p.mlp_architecture,
                train: p.mlp_train,
            })
        });
        r.register("frequency", |_, _| Box::new(FrequencyModel));
        r
    }

    pub fn register(&mut self, name: &'static str, builder: ModelBuilder) {
        self.builders.insert(name, builder);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    /// Builds model `name` for inputs of width `dim`.
    pub fn build(
        &self,
        name: &str,
        params: &ModelParams,
        dim: usize,
    ) -> Result<Box<dyn BarrierModel>> {
        let b = self
            .builders
            .get(name)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "barrier model",
                name: name.to_string(),
                available: self.names().join(", "),
            })?;
        Ok(b(params, dim))
    }
}
