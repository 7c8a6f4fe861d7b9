use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::records::BarrierSurveyRecord;
use super::schema::FeatureSchema;
use crate::error::{Error, Result};

pub const DEFAULT_MIN_COUNT: usize = 10;

pub fn default_exceptions() -> BTreeSet<String> {
    BTreeSet::from(["power_outage".to_string()])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarrierEntry {
    pub code: String,
    pub raw_count: usize,
}

/// Filtered barrier list. Position in `barriers` is the label index used by
/// every model and report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarrierCatalog {
    pub barriers: Vec<BarrierEntry>,
    pub exceptions: BTreeSet<String>,
}

impl BarrierCatalog {
    pub fn new(barriers: Vec<BarrierEntry>, exceptions: BTreeSet<String>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for b in &barriers {
            if !seen.insert(b.code.as_str()) {
                return Err(Error::Config(format!(
                    "duplicate barrier code `{}`",
                    b.code
                )));
            }
        }
        Ok(Self {
            barriers,
            exceptions,
        })
    }

    pub fn len(&self) -> usize {
        self.barriers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.barriers.is_empty()
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.barriers.iter().map(|b| b.code.as_str())
    }

    pub fn code(&self, index: usize) -> &str {
        &self.barriers[index].code
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.barriers.iter().position(|b| b.code == code)
    }

    /// Multi-hot label vector in catalog order; codes outside the catalog are ignored.
    pub fn labels(&self, record: &BarrierSurveyRecord) -> Vec<bool> {
        self.barriers
            .iter()
            .map(|b| record.barriers.contains(&b.code))
            .collect()
    }

    /// Drops codes that did not survive filtering.
    pub fn restrict(&self, records: &[BarrierSurveyRecord]) -> Vec<BarrierSurveyRecord> {
        records
            .iter()
            .map(|r| BarrierSurveyRecord {
                profile: r.profile.clone(),
                barriers: r
                    .barriers
                    .iter()
                    .filter(|c| self.index_of(c).is_some())
                    .cloned()
                    .collect(),
            })
            .collect()
    }
}

/// Keeps barriers mentioned at least `min_count` times, plus any mentioned
/// exception code. Entries are ordered by raw count descending, then code.
pub fn filter_barriers(
    records: &[BarrierSurveyRecord],
    min_count: usize,
    exceptions: &BTreeSet<String>,
) -> Result<BarrierCatalog> {
    if records.is_empty() {
        return Err(Error::Empty("barrier survey records"));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        for code in &r.barriers {
            *counts.entry(code.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<BarrierEntry> = counts
        .into_iter()
        .filter(|&(code, n)| n >= min_count || exceptions.contains(code))
        .map(|(code, raw_count)| BarrierEntry {
            code: code.to_string(),
            raw_count,
        })
        .collect();
    // BTreeMap iteration already sorted by code; stable sort keeps that as tie-break.
    kept.sort_by_key(|b| std::cmp::Reverse(b.raw_count));
    BarrierCatalog::new(kept, exceptions.clone())
}

/// Encoded features plus multi-hot labels, ready for the models.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<Vec<bool>>,
}

impl LabeledDataset {
    pub fn from_records(
        records: &[BarrierSurveyRecord],
        schema: &FeatureSchema,
        catalog: &BarrierCatalog,
    ) -> Result<Self> {
        let features = records
            .iter()
            .map(|r| schema.encode(&r.profile))
            .collect::<Result<Vec<_>>>()?;
        let labels = records.iter().map(|r| catalog.labels(r)).collect();
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn n_barriers(&self) -> usize {
        self.labels.first().map_or(0, Vec::len)
    }

    pub fn column(&self, barrier: usize) -> Vec<bool> {
        self.labels.iter().map(|l| l[barrier]).collect()
    }

    pub fn positives(&self, barrier: usize) -> usize {
        self.labels.iter().filter(|l| l[barrier]).count()
    }
}
