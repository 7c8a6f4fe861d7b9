use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Format, Manifest, RunDir};
use crate::error::Result;
use crate::models::TrainedModel;
use crate::select::{select_interventions, BarrierInterventionMap};
use crate::survey_data::{
    compute_effectiveness, load_intervention_survey, load_profiles, FeatureSchema, PreferenceScale,
    DEFAULT_INTERVENTIONS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectCommandConfig {
    pub seed: u64,
    /// Profiles to rank; columns outside the schema are ignored.
    pub profiles: PathBuf,
    pub schema: FeatureSchema,
    /// A model written by a train command.
    pub model: PathBuf,
    /// Intervention survey the effectiveness statistics come from.
    pub interventions: PathBuf,
    pub scale: PreferenceScale,
    pub n_interventions: usize,
    /// Barrier→intervention map; a synthetic map over the model's barriers when absent.
    pub map: Option<PathBuf>,
    pub limit: usize,
}

impl Default for SelectCommandConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            profiles: PathBuf::from("profiles.csv"),
            schema: FeatureSchema::default(),
            model: PathBuf::from("model.json"),
            interventions: PathBuf::from("intervention_survey.csv"),
            scale: PreferenceScale::default(),
            n_interventions: DEFAULT_INTERVENTIONS,
            map: None,
            limit: 5,
        }
    }
}

#[derive(Serialize)]
struct Selection {
    profile: usize,
    barriers: Vec<(String, f64)>,
    interventions: Vec<usize>,
}

/// Ranks barriers for every profile and orders the matching interventions.
pub fn run_select(config: &SelectCommandConfig, out: &Path, format: Format) -> Result<Manifest> {
    let mut run = RunDir::create(out, format, "select", config.seed)?;
    let schema = &config.schema;
    run.input(&config.model)?;
    let model = TrainedModel::load(&config.model, schema)?;
    run.input(&config.interventions)?;
    let records = load_intervention_survey(
        &config.interventions,
        schema,
        &config.scale,
        config.n_interventions,
    )?;
    let stats = compute_effectiveness(&records, config.n_interventions)?;
    let map = match &config.map {
        Some(path) => {
            run.input(path)?;
            BarrierInterventionMap::load(path)?
        }
        None => BarrierInterventionMap::synthetic(
            model.barriers().iter().map(String::as_str),
            config.n_interventions,
        )?,
    };
    run.input(&config.profiles)?;
    let profiles = load_profiles(&config.profiles, schema)?;

    let selections = profiles
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let barriers = model.rank(schema, p)?;
            let interventions = select_interventions(&barriers, &map, &stats, config.limit)?;
            Ok(Selection {
                profile: i,
                barriers,
                interventions,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    match format {
        Format::Json => run.write_json("selections.json", "selections/v1", &selections)?,
        Format::Csv => {
            let mut picks = Vec::new();
            let mut ranks = Vec::new();
            for s in &selections {
                for (pos, &id) in s.interventions.iter().enumerate() {
                    picks.push(vec![
                        s.profile.to_string(),
                        pos.to_string(),
                        id.to_string(),
                        stats.mean(id).to_string(),
                    ]);
                }
                for (rank, (code, score)) in s.barriers.iter().enumerate() {
                    ranks.push(vec![
                        s.profile.to_string(),
                        rank.to_string(),
                        code.clone(),
                        score.to_string(),
                    ]);
                }
            }
            run.write_csv(
                "selections.csv",
                "selections/v1",
                &["profile", "position", "intervention_id", "mean_shift"],
                &picks,
            )?;
            run.write_csv(
                "rankings.csv",
                "rankings/v1",
                &["profile", "rank", "barrier", "score"],
                &ranks,
            )?;
        }
    }
    run.finish(config)
}
