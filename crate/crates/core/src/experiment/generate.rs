use super::{Format, Manifest, RunDir};
use crate::error::Result;
use crate::human_sim::EffectTable;
use crate::select::BarrierInterventionMap;
use crate::survey_data::synthetic::{generate_synthetic, SyntheticGenConfig};
use crate::survey_data::{save_barrier_survey, save_intervention_survey};

/// Writes a synthetic barrier survey, intervention survey, the ground-truth
/// intervention catalog and effect table, and a barrier→intervention map.
pub fn run_generate(
    config: &SyntheticGenConfig,
    out: &std::path::Path,
    format: Format,
) -> Result<Manifest> {
    let data = generate_synthetic(config)?;
    let mut run = RunDir::create(out, format, "generate", config.seed)?;
    let schema = &config.schema;
    save_barrier_survey(
        &run.output("barrier_survey.csv", "barrier-survey/v1"),
        schema,
        &data.barrier_records,
    )?;
    save_intervention_survey(
        &run.output("intervention_survey.csv", "intervention-survey/v1"),
        schema,
        &data.intervention_records,
    )?;
    run.write_json("catalog.json", "intervention-catalog/v1", &data.catalog)?;
    EffectTable::from_catalog(&data.catalog)?
        .save(&run.output("effect_table.csv", "effect-table/v1"))?;
    let map = BarrierInterventionMap::synthetic(config.barrier_codes(), data.catalog.len())?;
    map.save(&run.output("barrier_map.json", "barrier-map/v1"))?;
    run.write_json("schema.json", "feature-schema/v1", schema)?;
    run.finish(config)
}
