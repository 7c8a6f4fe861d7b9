use serde::{Deserialize, Serialize};

use super::records::InterventionRecord;
use crate::error::{Error, Result};

pub const DEFAULT_INTERVENTIONS: usize = 35;

/// Measured preference shift of one intervention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectStat {
    pub mean_shift: f64,
    /// Population variance of the shift.
    pub var_shift: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionStats {
    pub interventions: Vec<EffectStat>,
}

impl InterventionStats {
    pub fn len(&self) -> usize {
        self.interventions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interventions.is_empty()
    }

    pub fn mean(&self, id: usize) -> f64 {
        self.interventions[id].mean_shift
    }
}

/// Per-intervention mean and population variance of `post - pre`.
///
/// Shifts are sorted before summation, so the result is bit-identical under
/// any permutation of `records`.
pub fn compute_effectiveness(
    records: &[InterventionRecord],
    n_interventions: usize,
) -> Result<InterventionStats> {
    let mut shifts: Vec<Vec<f64>> = vec![Vec::new(); n_interventions];
    for r in records {
        let slot = shifts
            .get_mut(r.intervention_id)
            .ok_or(Error::UnknownIntervention {
                index: r.intervention_id,
                count: n_interventions,
            })?;
        slot.push(r.shift());
    }
    let missing: Vec<usize> = (0..n_interventions)
        .filter(|&i| shifts[i].is_empty())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingInterventions(missing));
    }
    let interventions = shifts
        .into_iter()
        .map(|mut s| {
            s.sort_by(f64::total_cmp);
            let n = s.len();
            let mean = s.iter().sum::<f64>() / n as f64;
            let var = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            EffectStat {
                mean_shift: mean,
                var_shift: var,
                n,
            }
        })
        .collect();
    Ok(InterventionStats { interventions })
}
