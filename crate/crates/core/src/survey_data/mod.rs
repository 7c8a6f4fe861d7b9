//! Survey data model: questionnaire schema, coded survey records, the
//! barrier filtering rule, intervention effectiveness statistics and the
//! seeded synthetic generator.

mod catalog;
mod effectiveness;
mod records;
mod schema;
pub mod synthetic;

pub use catalog::{
    default_exceptions, filter_barriers, BarrierCatalog, BarrierEntry, LabeledDataset,
    DEFAULT_MIN_COUNT,
};
pub use effectiveness::{
    compute_effectiveness, EffectStat, InterventionStats, DEFAULT_INTERVENTIONS,
};
pub use records::{
    load_barrier_survey, load_intervention_survey, load_profiles, read_barrier_survey,
    read_intervention_survey, read_profiles, save_barrier_survey, save_intervention_survey,
    write_barrier_survey, write_intervention_survey, BarrierSurveyRecord, InterventionRecord,
    PreferenceScale,
};
pub use schema::{DemographicProfile, FeatureDef, FeatureKind, FeatureSchema};
pub use synthetic::{generate_synthetic, InterventionCatalog, SyntheticData, SyntheticGenConfig};
