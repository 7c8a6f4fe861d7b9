//! Seeded synthetic survey data with planted demographic → barrier structure.
//!
//! Barrier labels are independent Bernoulli draws with probability
//! `logistic(logit(base_rate) + Σ weight · encoded_feature)`. Intervention
//! shifts are Gaussian around a ground-truth catalog whose means are drawn
//! from a population with mean 5.52 and standard deviation 2.9, clamped to
//! `[0.275, 13.10]` preference units.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::effectiveness::DEFAULT_INTERVENTIONS;
use super::records::{BarrierSurveyRecord, InterventionRecord, PreferenceScale};
use super::schema::{DemographicProfile, FeatureKind, FeatureSchema};
use crate::error::{Error, Result};
use crate::human_sim::{DemographicCell, N_CELLS};

pub const POPULATION_MEAN_SHIFT: f64 = 5.52;
pub const POPULATION_SD_SHIFT: f64 = 2.9;
pub const MIN_MEAN_SHIFT: f64 = 0.275;
pub const MAX_MEAN_SHIFT: f64 = 13.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedBarrier {
    pub code: String,
    /// Mention probability for a respondent whose encoded features are all zero.
    pub base_rate: f64,
}

/// Additive logit contribution of one encoded feature column to one barrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierLink {
    pub barrier: String,
    pub feature: String,
    /// Answer level for categorical features (selects the one-hot column).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogParams {
    pub count: usize,
    pub population_mean: f64,
    pub population_sd: f64,
    pub min_mean: f64,
    pub max_mean: f64,
    pub min_variance: f64,
    pub max_variance: f64,
    /// Optional per-cell mean table (`cells × count`), overriding `means`
    /// when drawing intervention-survey shifts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_means: Option<Vec<Vec<f64>>>,
}

impl Default for CatalogParams {
    fn default() -> Self {
        Self {
            count: DEFAULT_INTERVENTIONS,
            population_mean: POPULATION_MEAN_SHIFT,
            population_sd: POPULATION_SD_SHIFT,
            min_mean: MIN_MEAN_SHIFT,
            max_mean: MAX_MEAN_SHIFT,
            min_variance: 4.0,
            max_variance: 36.0,
            cell_means: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceParams {
    pub scale: PreferenceScale,
    /// Pre-intervention answers are drawn uniformly from `[pre_min, pre_max]`.
    pub pre_min: f64,
    pub pre_max: f64,
}

impl Default for PreferenceParams {
    fn default() -> Self {
        Self {
            scale: PreferenceScale::default(),
            pre_min: 35.0,
            pre_max: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticGenConfig {
    pub seed: u64,
    pub n_records: usize,
    pub n_intervention_records: usize,
    pub schema: FeatureSchema,
    pub barriers: Vec<PlantedBarrier>,
    pub links: Vec<BarrierLink>,
    pub catalog: CatalogParams,
    pub preference: PreferenceParams,
    /// Upper bound on redraws of a record that came out with no barrier.
    pub max_redraws: usize,
}

impl Default for SyntheticGenConfig {
    fn default() -> Self {
        let barriers = [
            ("cost_upfront", 0.65),
            ("charging", 0.10),
            ("range", 0.12),
            ("battery_life", 0.08),
            ("cost_ownership", 0.20),
            ("charging_time", 0.05),
            ("reliability", 0.04),
            ("maintenance", 0.12),
            ("safety", 0.03),
            ("infrastructure", 0.04),
            ("availability", 0.045),
            ("resale_value", 0.09),
            ("performance", 0.035),
            ("cold_weather", 0.03),
            ("unfamiliarity", 0.07),
            ("environmental_doubt", 0.02),
            ("towing_capacity", 0.01),
            ("power_outage", 0.002),
        ]
        .into_iter()
        .map(|(code, base_rate)| PlantedBarrier {
            code: code.to_string(),
            base_rate,
        })
        .collect();
        let link = |barrier: &str, feature: &str, level: Option<u32>, weight: f64| BarrierLink {
            barrier: barrier.to_string(),
            feature: feature.to_string(),
            level,
            weight,
        };
        let links = vec![
            link("cost_upfront", "income_bracket", None, -2.5),
            link("charging", "housing", Some(2), 2.0),
            link("charging", "charging_available", None, -2.0),
            link("charging", "renter", None, 1.5),
            link("charging", "urban_rural", Some(0), 1.0),
            link("range", "drives_long_distance", None, 2.0),
            link("range", "urban_rural", Some(2), 1.5),
            link("battery_life", "age_bracket", None, 3.0),
            link("cost_ownership", "income_bracket", None, -3.0),
            link("charging_time", "drives_commute", None, 2.5),
            link("reliability", "drives_off_road", None, 2.5),
            link("maintenance", "education", None, -3.0),
            link("safety", "household_size", None, 3.0),
            link("infrastructure", "urban_rural", Some(2), 2.5),
            link("availability", "urban_rural", Some(2), 2.5),
            link("resale_value", "age_bracket", None, -3.0),
            link("performance", "employed", None, 2.5),
            link("cold_weather", "drives_long_distance", None, 2.5),
            link("unfamiliarity", "prefers_bev", None, -3.0),
            link("environmental_doubt", "political_leaning", Some(2), 2.5),
            link("towing_capacity", "drives_off_road", None, 3.0),
            link("power_outage", "housing", Some(1), 2.0),
        ];
        Self {
            seed: 0,
            n_records: 500,
            n_intervention_records: 4136,
            schema: FeatureSchema::default(),
            barriers,
            links,
            catalog: CatalogParams::default(),
            preference: PreferenceParams::default(),
            max_redraws: 1000,
        }
    }
}

impl SyntheticGenConfig {
    /// Same config with every link weight multiplied by `factor`.
    pub fn with_link_scale(mut self, factor: f64) -> Self {
        for l in &mut self.links {
            l.weight *= factor;
        }
        self
    }

    pub fn barrier_codes(&self) -> Vec<&str> {
        self.barriers.iter().map(|b| b.code.as_str()).collect()
    }
}

/// Ground-truth effect of every intervention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionCatalog {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_means: Option<Vec<Vec<f64>>>,
}

impl InterventionCatalog {
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    /// Index of the largest mean, lowest index on ties.
    pub fn argmax(&self) -> usize {
        crate::argmax(&self.means)
    }

    pub fn max_mean(&self) -> f64 {
        self.means[self.argmax()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub barrier_records: Vec<BarrierSurveyRecord>,
    pub intervention_records: Vec<InterventionRecord>,
    pub catalog: InterventionCatalog,
}

struct ResolvedLink {
    barrier: usize,
    column: usize,
    weight: f64,
}

fn resolve_links(config: &SyntheticGenConfig) -> Result<Vec<ResolvedLink>> {
    let schema = &config.schema;
    config
        .links
        .iter()
        .map(|l| {
            let barrier = config
                .barriers
                .iter()
                .position(|b| b.code == l.barrier)
                .ok_or_else(|| Error::UnknownBarrier(l.barrier.clone()))?;
            let fi = schema.index_of(&l.feature).ok_or_else(|| Error::Schema {
                feature: l.feature.clone(),
                message: "link references unknown feature".into(),
            })?;
            let def = &schema.features[fi];
            let offset = schema.encoded_offset(fi);
            let column = match (def.kind, l.level) {
                (FeatureKind::Ordinal, None) => offset,
                (FeatureKind::Categorical, Some(level)) if level < def.cardinality => {
                    offset + level as usize
                }
                _ => {
                    return Err(Error::Schema {
                        feature: l.feature.clone(),
                        message: "categorical links need a valid level; ordinal links take none"
                            .into(),
                    })
                }
            };
            if !l.weight.is_finite() {
                return Err(Error::Config(format!(
                    "non-finite weight on link {}→{}",
                    l.feature, l.barrier
                )));
            }
            Ok(ResolvedLink {
                barrier,
                column,
                weight: l.weight,
            })
        })
        .collect()
}

fn validate(config: &SyntheticGenConfig) -> Result<()> {
    config.schema.validate()?;
    if config.n_records == 0 {
        return Err(Error::Config("n_records must be positive".into()));
    }
    if config.barriers.is_empty() {
        return Err(Error::Config("no planted barriers".into()));
    }
    let codes: BTreeSet<&str> = config.barriers.iter().map(|b| b.code.as_str()).collect();
    if codes.len() != config.barriers.len() {
        return Err(Error::Config("duplicate planted barrier code".into()));
    }
    if let Some(b) = config
        .barriers
        .iter()
        .find(|b| !(0.0..=1.0).contains(&b.base_rate))
    {
        return Err(Error::Config(format!(
            "base rate of `{}` outside [0, 1]",
            b.code
        )));
    }
    let c = &config.catalog;
    if c.count == 0 {
        return Err(Error::Config(
            "catalog needs at least one intervention".into(),
        ));
    }
    if !(c.min_mean <= c.max_mean) || !(0.0 <= c.min_variance && c.min_variance <= c.max_variance) {
        return Err(Error::Config(
            "catalog ranges are inverted or negative".into(),
        ));
    }
    if !(c.population_sd >= 0.0) {
        return Err(Error::Config("population_sd must be non-negative".into()));
    }
    if let Some(table) = &c.cell_means {
        if table.len() != N_CELLS || table.iter().any(|row| row.len() != c.count) {
            return Err(Error::Config(format!(
                "cell_means must be {N_CELLS} × {}",
                c.count
            )));
        }
    }
    let p = &config.preference;
    if !(p.scale.min <= p.pre_min && p.pre_min <= p.pre_max && p.pre_max <= p.scale.max) {
        return Err(Error::Config(
            "pre-answer range must lie inside the preference scale".into(),
        ));
    }
    Ok(())
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn mention_probability(base_rate: f64, logit_offset: f64) -> f64 {
    if base_rate <= 0.0 {
        0.0
    } else if base_rate >= 1.0 {
        1.0
    } else {
        logistic((base_rate / (1.0 - base_rate)).ln() + logit_offset)
    }
}

fn random_profile(schema: &FeatureSchema, rng: &mut impl Rng) -> DemographicProfile {
    let answers = schema
        .features
        .iter()
        .map(|f| rng.random_range(0..f.cardinality))
        .collect();
    DemographicProfile::new(schema, answers).expect("drawn within cardinality")
}

/// Draws the ground-truth intervention catalog.
pub fn draw_catalog(params: &CatalogParams, rng: &mut impl Rng) -> Result<InterventionCatalog> {
    let normal = Normal::new(params.population_mean, params.population_sd)
        .map_err(|e| Error::Config(format!("catalog population: {e}")))?;
    let mut means = Vec::with_capacity(params.count);
    let mut variances = Vec::with_capacity(params.count);
    for _ in 0..params.count {
        means.push(normal.sample(rng).clamp(params.min_mean, params.max_mean));
        variances.push(if params.max_variance > params.min_variance {
            rng.random_range(params.min_variance..=params.max_variance)
        } else {
            params.min_variance
        });
    }
    Ok(InterventionCatalog {
        means,
        variances,
        cell_means: params.cell_means.clone(),
    })
}

pub fn generate_synthetic(config: &SyntheticGenConfig) -> Result<SyntheticData> {
    validate(config)?;
    let links = resolve_links(config)?;
    let schema = &config.schema;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let catalog = draw_catalog(&config.catalog, &mut rng)?;

    let mut barrier_records = Vec::with_capacity(config.n_records);
    for _ in 0..config.n_records {
        let mut attempts = 0;
        let record = loop {
            if attempts == config.max_redraws.max(1) {
                return Err(Error::DegenerateGenerator { attempts });
            }
            attempts += 1;
            let profile = random_profile(schema, &mut rng);
            let x = schema.encode(&profile)?;
            let mut offsets = vec![0.0; config.barriers.len()];
            for l in &links {
                offsets[l.barrier] += l.weight * x[l.column];
            }
            let barriers: BTreeSet<String> = config
                .barriers
                .iter()
                .zip(&offsets)
                .filter(|(b, &off)| rng.random::<f64>() < mention_probability(b.base_rate, off))
                .map(|(b, _)| b.code.clone())
                .collect();
            if !barriers.is_empty() {
                break BarrierSurveyRecord { profile, barriers };
            }
        };
        barrier_records.push(record);
    }

    let pref = &config.preference;
    let mut intervention_records = Vec::with_capacity(config.n_intervention_records);
    for _ in 0..config.n_intervention_records {
        let profile = random_profile(schema, &mut rng);
        let id = rng.random_range(0..catalog.len());
        let mean = match &catalog.cell_means {
            Some(table) => table[DemographicCell::from_profile(schema, &profile)?.index()][id],
            None => catalog.means[id],
        };
        let shift = Normal::new(mean, catalog.variances[id].sqrt())
            .map_err(|e| Error::Config(format!("intervention {id}: {e}")))?
            .sample(&mut rng);
        let pre = if pref.scale.integer {
            rng.random_range(pref.pre_min.ceil() as i64..=pref.pre_max.floor() as i64) as f64
        } else {
            rng.random_range(pref.pre_min..=pref.pre_max)
        };
        let post = pref.scale.clamp(pre + shift);
        intervention_records.push(InterventionRecord {
            profile,
            intervention_id: id,
            pre,
            post,
        });
    }

    Ok(SyntheticData {
        barrier_records,
        intervention_records,
        catalog,
    })
}
