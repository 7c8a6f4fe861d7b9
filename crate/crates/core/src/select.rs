//! Turning a ranked barrier list into an intervention presentation order.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survey_data::{BarrierCatalog, InterventionStats};

/// Barrier code to the interventions that address it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BarrierInterventionMap {
    pub entries: BTreeMap<String, Vec<usize>>,
}

impl BarrierInterventionMap {
    /// Three interventions per barrier spread over the catalog. Stands in
    /// for an expert-authored map.
    pub fn synthetic<'a>(
        codes: impl IntoIterator<Item = &'a str>,
        n_interventions: usize,
    ) -> Result<Self> {
        if n_interventions == 0 {
            return Err(Error::Empty("interventions"));
        }
        let entries = codes
            .into_iter()
            .enumerate()
            .map(|(i, code)| {
                let mut ids = vec![
                    (2 * i) % n_interventions,
                    (2 * i + 1) % n_interventions,
                    (7 * i + 3) % n_interventions,
                ];
                let mut seen = BTreeSet::new();
                ids.retain(|id| seen.insert(*id));
                (code.to_string(), ids)
            })
            .collect();
        Ok(Self { entries })
    }

    pub fn get(&self, code: &str) -> Result<&[usize]> {
        self.entries
            .get(code)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownBarrier(code.to_string()))
    }

    /// Every catalog barrier has at least one intervention and every id is
    /// below `n_interventions`.
    pub fn validate(&self, catalog: &BarrierCatalog, n_interventions: usize) -> Result<()> {
        for code in catalog.codes() {
            if self.get(code)?.is_empty() {
                return Err(Error::Config(format!(
                    "barrier `{code}` maps to no interventions"
                )));
            }
        }
        for ids in self.entries.values() {
            if let Some(&id) = ids.iter().find(|&&id| id >= n_interventions) {
                return Err(Error::UnknownIntervention {
                    index: id,
                    count: n_interventions,
                });
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Interventions grouped by barrier rank, each group sorted by measured mean
/// shift descending then id. Later repeats are dropped and the list is cut to
/// `limit`.
pub fn select_interventions(
    ranked: &[(String, f64)],
    map: &BarrierInterventionMap,
    stats: &InterventionStats,
    limit: usize,
) -> Result<Vec<usize>> {
    if limit == 0 {
        return Err(Error::Config("selection limit must be at least 1".into()));
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (code, _) in ranked {
        let mut ids = map.get(code)?.to_vec();
        if let Some(&id) = ids.iter().find(|&&id| id >= stats.len()) {
            return Err(Error::UnknownIntervention {
                index: id,
                count: stats.len(),
            });
        }
        ids.sort_by(|&a, &b| stats.mean(b).total_cmp(&stats.mean(a)).then(a.cmp(&b)));
        for id in ids {
            if seen.insert(id) {
                out.push(id);
            }
        }
    }
    out.truncate(limit);
    Ok(out)
}
