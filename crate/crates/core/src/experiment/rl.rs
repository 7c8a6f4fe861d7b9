use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Format, Manifest, RunDir};
use crate::error::Result;
use crate::human_sim::{make_contrastive_spec, EffectTable, HumanModelSpec};
use crate::rl::{run_experiment, AnnealingSchedule, RlExperimentConfig};
use crate::survey_data::synthetic::{draw_catalog, CatalogParams};
use crate::survey_data::{
    compute_effectiveness, load_intervention_survey, FeatureSchema, PreferenceScale,
    DEFAULT_INTERVENTIONS,
};

fn default_interventions() -> usize {
    DEFAULT_INTERVENTIONS
}

/// Where the simulated respondents' effect table comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "from", rename_all = "snake_case")]
pub enum EffectSource {
    /// A catalog drawn from the run seed.
    Generated {
        #[serde(default)]
        params: CatalogParams,
    },
    /// An effect-table CSV.
    Table { path: PathBuf },
    /// Measured shifts of an intervention survey CSV.
    Survey {
        path: PathBuf,
        #[serde(default)]
        schema: FeatureSchema,
        #[serde(default)]
        scale: PreferenceScale,
        #[serde(default = "default_interventions")]
        n_interventions: usize,
    },
    /// Demographic-aware table whose cells prefer different interventions.
    Contrastive,
}

impl Default for EffectSource {
    fn default() -> Self {
        EffectSource::Generated {
            params: CatalogParams::default(),
        }
    }
}

impl EffectSource {
    fn table(&self, seed: u64, run: &mut RunDir) -> Result<EffectTable> {
        match self {
            EffectSource::Generated { params } => EffectTable::from_catalog(&draw_catalog(
                params,
                &mut ChaCha8Rng::seed_from_u64(seed),
            )?),
            EffectSource::Table { path } => {
                run.input(path)?;
                EffectTable::load(path)
            }
            EffectSource::Survey {
                path,
                schema,
                scale,
                n_interventions,
            } => {
                run.input(path)?;
                let records = load_intervention_survey(path, schema, scale, *n_interventions)?;
                EffectTable::from_stats(&compute_effectiveness(&records, *n_interventions)?)
            }
            EffectSource::Contrastive => Ok(make_contrastive_spec(seed)?.table),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RlCommandConfig {
    pub seed: u64,
    /// Registered response model name.
    pub human: String,
    pub source: EffectSource,
    /// Whether the agent conditions on the respondent's cell.
    pub agent_aware: bool,
    pub episodes: usize,
    pub episode_length: usize,
    pub schedule: AnnealingSchedule,
    pub q_init: f64,
    pub gamma: f64,
    pub record_steps: bool,
    /// Episodes averaged for the converged reward.
    pub tail_episodes: usize,
}

impl Default for RlCommandConfig {
    fn default() -> Self {
        let base = RlExperimentConfig::default();
        Self {
            seed: 0,
            human: "deterministic".into(),
            source: EffectSource::default(),
            agent_aware: false,
            episodes: base.episodes,
            episode_length: base.episode_length,
            schedule: base.schedule,
            q_init: base.q_init,
            gamma: base.gamma,
            record_steps: false,
            tail_episodes: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RlSummary {
    pub episodes: usize,
    pub tail_mean: f64,
    pub final_std: f64,
    /// Best reachable mean: the mean of per-cell maxima for a cell-aware
    /// agent, the best cell-averaged mean otherwise.
    pub target: f64,
    pub tail_ratio: f64,
    pub greedy_policy: Vec<usize>,
    pub best_per_cell: Vec<usize>,
    pub final_epsilon: f64,
}

/// Trains the agent against the configured respondents and writes the
/// learning curve, final Q-table, effect table and a summary.
pub fn run_rl(
    config: &RlCommandConfig,
    out: &Path,
    format: Format,
) -> Result<(Manifest, RlSummary)> {
    let mut run = RunDir::create(out, format, "rl", config.seed)?;
    let table = config.source.table(config.seed, &mut run)?;
    let experiment = RlExperimentConfig {
        human: HumanModelSpec::new(&config.human, table),
        demographic_aware: config.agent_aware,
        episodes: config.episodes,
        episode_length: config.episode_length,
        seed: config.seed,
        schedule: config.schedule,
        q_init: config.q_init,
        gamma: config.gamma,
        record_steps: config.record_steps,
    };
    let result = run_experiment(&experiment)?;
    let table = &experiment.human.table;
    let target = if config.agent_aware {
        table.mean_of_cell_maxima()
    } else {
        table.max_of_cell_averaged_means()
    };
    let tail_mean = result.curve.tail_mean(config.tail_episodes);
    let summary = RlSummary {
        episodes: result.curve.len(),
        tail_mean,
        final_std: *result.curve.std.last().expect("at least one episode"),
        target,
        tail_ratio: tail_mean / target,
        greedy_policy: result.q.greedy_policy(),
        best_per_cell: table.row_argmax(),
        final_epsilon: config
            .schedule
            .epsilon((config.episodes * config.episode_length) as u64),
    };

    match format {
        Format::Csv => {
            let path = run.output("curve.csv", "learning-curve/v1");
            result
                .curve
                .write_csv(crate::experiment::create_file(&path)?)?;
        }
        Format::Json => run.write_json("curve.json", "learning-curve/v1", &result.curve)?,
    }
    if config.record_steps {
        let rows: Vec<Vec<String>> = result
            .steps
            .iter()
            .map(|s| {
                vec![
                    s.t.to_string(),
                    s.cell.to_string(),
                    s.state.to_string(),
                    s.action.to_string(),
                    s.reward.to_string(),
                    s.epsilon.to_string(),
                    s.alpha.to_string(),
                ]
            })
            .collect();
        run.write_csv(
            "steps.csv",
            "rl-steps/v1",
            &["t", "cell", "state", "action", "reward", "epsilon", "alpha"],
            &rows,
        )?;
    }
    run.write_json("q_table.json", "q-table/v1", &result.q)?;
    table.save(&run.output("effect_table.csv", "effect-table/v1"))?;
    run.write_json("summary.json", "rl-summary/v1", &summary)?;
    Ok((run.finish(config)?, summary))
}
