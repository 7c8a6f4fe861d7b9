#![allow(dead_code)]

pub mod gradcheck;
pub mod pr_oracle;
pub mod qp_oracle;

use nudgeopt_core::eval::FoldPlan;
use nudgeopt_core::survey_data::synthetic::{generate_synthetic, SyntheticGenConfig};
use nudgeopt_core::survey_data::{
    default_exceptions, filter_barriers, BarrierCatalog, LabeledDataset,
};

pub struct Prepared {
    pub catalog: BarrierCatalog,
    pub data: LabeledDataset,
}

/// Generator output filtered and encoded the way the commands do it.
pub fn prepare(config: &SyntheticGenConfig) -> Prepared {
    let d = generate_synthetic(config).unwrap();
    let catalog = filter_barriers(&d.barrier_records, 10, &default_exceptions()).unwrap();
    let data = LabeledDataset::from_records(
        &catalog.restrict(&d.barrier_records),
        &config.schema,
        &catalog,
    )
    .unwrap();
    Prepared { catalog, data }
}

pub fn stratified(p: &Prepared, seed: u64) -> FoldPlan {
    FoldPlan::stratified(&p.data, 20, seed).unwrap()
}
