use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binary::{class_weights, decision_value, train_on_gram, BinarySvmModel};
use super::kernel::{KernelMatrix, KernelSpec};
use super::smo::SmoSettings;
use crate::error::{Error, Result};
use crate::survey_data::{
    BarrierCatalog, BarrierSurveyRecord, DemographicProfile, FeatureSchema, LabeledDataset,
};

pub const OVR_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OvrConfig {
    pub kernel: KernelSpec,
    pub c: f64,
    pub smo: SmoSettings,
}

impl OvrConfig {
    /// Cubic polynomial kernel with `gamma = 1/dim`, `coef0 = 1`, `C = 1`.
    pub fn polynomial(dim: usize) -> Self {
        Self {
            kernel: KernelSpec::polynomial_default(dim),
            c: 1.0,
            smo: SmoSettings::default(),
        }
    }

    pub fn rbf(dim: usize) -> Self {
        Self {
            kernel: KernelSpec::rbf_default(dim),
            ..Self::polynomial(dim)
        }
    }
}

/// One weighted binary SVM per catalog barrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvrModel {
    pub format_version: u32,
    pub schema_hash: String,
    /// Barrier codes in catalog order; `models[i]` scores `barriers[i]`.
    pub barriers: Vec<String>,
    pub kernel: KernelSpec,
    pub c: f64,
    pub models: Vec<BinarySvmModel>,
}

/// Trains the barrier models for `barriers` on `rows` of `data`, reusing `gram`
/// (the Gram matrix of `rows`).
pub(crate) fn train_barriers(
    data: &LabeledDataset,
    rows: &[usize],
    gram: &KernelMatrix,
    barriers: &[usize],
    config: &OvrConfig,
) -> Result<Vec<BinarySvmModel>> {
    let x: Vec<&[f64]> = rows.iter().map(|&r| data.features[r].as_slice()).collect();
    barriers
        .par_iter()
        .map(|&b| {
            let labels: Vec<bool> = rows.iter().map(|&r| data.labels[r][b]).collect();
            let n_pos = labels.iter().filter(|&&l| l).count();
            let weights = class_weights(n_pos, labels.len() - n_pos)?;
            train_on_gram(
                gram,
                &x,
                &labels,
                weights,
                config.kernel,
                config.c,
                &config.smo,
            )
        })
        .collect()
}

pub fn train_ovr_dataset(
    data: &LabeledDataset,
    catalog: &BarrierCatalog,
    schema: &FeatureSchema,
    config: &OvrConfig,
) -> Result<OvrModel> {
    if data.is_empty() {
        return Err(Error::Empty("training set"));
    }
    for (b, code) in catalog.codes().enumerate() {
        match data.positives(b) {
            0 => return Err(Error::NoPositives(code.to_string())),
            p if p == data.len() => {
                return Err(Error::Config(format!(
                    "barrier `{code}` has no negative examples"
                )))
            }
            _ => {}
        }
    }
    let gram = KernelMatrix::compute(&config.kernel, &data.features)?;
    let rows: Vec<usize> = (0..data.len()).collect();
    let barriers: Vec<usize> = (0..catalog.len()).collect();
    let models = train_barriers(data, &rows, &gram, &barriers, config)?;
    Ok(OvrModel {
        format_version: OVR_FORMAT_VERSION,
        schema_hash: schema.hash(),
        barriers: catalog.codes().map(str::to_string).collect(),
        kernel: config.kernel,
        c: config.c,
        models,
    })
}

/// Labels each record `+1` for a barrier it lists and `−1` otherwise, with
/// class weights from that barrier's counts.
pub fn train_ovr(
    records: &[BarrierSurveyRecord],
    catalog: &BarrierCatalog,
    schema: &FeatureSchema,
    config: &OvrConfig,
) -> Result<OvrModel> {
    let data = LabeledDataset::from_records(records, schema, catalog)?;
    train_ovr_dataset(&data, catalog, schema, config)
}

impl OvrModel {
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.models.iter().map(|m| decision_value(m, x)).collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_vec_pretty(self)?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    /// Loads a model and checks it was trained under `schema`.
    pub fn load(path: &Path, schema: &FeatureSchema) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let model: OvrModel = serde_json::from_slice(&bytes)?;
        model.verify_schema(schema)?;
        Ok(model)
    }

    pub fn verify_schema(&self, schema: &FeatureSchema) -> Result<()> {
        let found = schema.hash();
        if found != self.schema_hash {
            return Err(Error::SchemaMismatch {
                expected: self.schema_hash.clone(),
                found,
            });
        }
        Ok(())
    }
}

/// Orders `codes` by score descending; equal scores keep catalog order.
pub fn ranked(codes: &[String], scores: &[f64]) -> Vec<(String, f64)> {
    crate::rank_desc(scores)
        .into_iter()
        .map(|i| (codes[i].clone(), scores[i]))
        .collect()
}

/// All catalog barriers for `profile`, highest decision value first.
pub fn rank_barriers(
    model: &OvrModel,
    schema: &FeatureSchema,
    profile: &DemographicProfile,
) -> Result<Vec<(String, f64)>> {
    let x = schema.encode(profile)?;
    Ok(ranked(&model.barriers, &model.scores(&x)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey_data::{BarrierEntry, FeatureDef};
    use std::collections::BTreeSet;

    fn schema() -> FeatureSchema {
        FeatureSchema {
            features: vec![FeatureDef::ordinal("a", 4), FeatureDef::ordinal("b", 4)],
        }
    }

    fn record(a: u32, b: u32, codes: &[&str]) -> BarrierSurveyRecord {
        BarrierSurveyRecord {
            profile: DemographicProfile::new(&schema(), vec![a, b]).unwrap(),
            barriers: codes.iter().map(|c| c.to_string()).collect(),
        }
    }

    fn catalog(codes: &[&str]) -> BarrierCatalog {
        BarrierCatalog::new(
            codes
                .iter()
                .map(|c| BarrierEntry {
                    code: c.to_string(),
                    raw_count: 1,
                })
                .collect(),
            BTreeSet::new(),
        )
        .unwrap()
    }

    fn records() -> Vec<BarrierSurveyRecord> {
        let mut out = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                let mut codes = vec![];
                if a >= 2 {
                    codes.push("x");
                }
                if b >= 2 {
                    codes.push("y");
                }
                if codes.is_empty() {
                    codes.push("z");
                }
                out.push(record(a, b, &codes));
            }
        }
        out
    }

    #[test]
    fn no_positive_barrier_named() {
        let cat = catalog(&["x", "ghost"]);
        match train_ovr(&records(), &cat, &schema(), &OvrConfig::polynomial(2)) {
            Err(Error::NoPositives(code)) => assert_eq!(code, "ghost"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ranking_is_permutation_and_tracks_signal() {
        let cat = catalog(&["x", "y", "z"]);
        let model = train_ovr(&records(), &cat, &schema(), &OvrConfig::polynomial(2)).unwrap();
        assert_eq!(model.models.len(), 3);
        for m in &model.models {
            m.check_dual_feasibility(1e-8).unwrap();
        }
        let p = DemographicProfile::new(&schema(), vec![3, 0]).unwrap();
        let r = rank_barriers(&model, &schema(), &p).unwrap();
        let mut codes: Vec<&str> = r.iter().map(|(c, _)| c.as_str()).collect();
        assert_eq!(codes[0], "x");
        codes.sort();
        assert_eq!(codes, ["x", "y", "z"]);
    }

    #[test]
    fn identical_models_rank_in_catalog_order() {
        let codes: Vec<String> = ["c", "a", "b"].iter().map(|s| s.to_string()).collect();
        let r = ranked(&codes, &[0.5, 0.5, 0.5]);
        assert_eq!(
            r.iter().map(|(c, _)| c.as_str()).collect::<Vec<_>>(),
            ["c", "a", "b"]
        );
    }

    #[test]
    fn schema_hash_checked_on_load() {
        let cat = catalog(&["x", "y", "z"]);
        let model = train_ovr(&records(), &cat, &schema(), &OvrConfig::rbf(2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        model.save(&path).unwrap();
        assert_eq!(OvrModel::load(&path, &schema()).unwrap(), model);
        let other = FeatureSchema {
            features: vec![FeatureDef::ordinal("a", 5), FeatureDef::ordinal("b", 4)],
        };
        assert!(matches!(
            OvrModel::load(&path, &other),
            Err(Error::SchemaMismatch { .. })
        ));
    }
}
