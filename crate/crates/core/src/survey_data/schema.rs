use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// How an answer index is turned into model input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// Ordered answers, scaled to `index / (cardinality - 1)` in `[0, 1]`.
    Ordinal,
    /// Unordered answers, one-hot expanded.
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    pub cardinality: u32,
    pub kind: FeatureKind,
}

impl FeatureDef {
    pub fn ordinal(name: &str, cardinality: u32) -> Self {
        Self {
            name: name.to_string(),
            cardinality,
            kind: FeatureKind::Ordinal,
        }
    }

    pub fn categorical(name: &str, cardinality: u32) -> Self {
        Self {
            name: name.to_string(),
            cardinality,
            kind: FeatureKind::Categorical,
        }
    }

    fn encoded_width(&self) -> usize {
        match self.kind {
            FeatureKind::Ordinal => 1,
            FeatureKind::Categorical => self.cardinality as usize,
        }
    }
}

/// Ordered list of questionnaire features.
///
/// Column order in survey files and the layout of the encoded feature vector
/// both follow `features`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub features: Vec<FeatureDef>,
}

impl Default for FeatureSchema {
    /// The 15-item demographic questionnaire.
    fn default() -> Self {
        use FeatureDef as F;
        Self {
            features: vec![
                F::categorical("housing", 3), // house, townhouse, apartment
                F::ordinal("renter", 2),
                F::ordinal("charging_available", 2),
                F::categorical("urban_rural", 3), // urban, suburban, rural
                F::ordinal("age_bracket", 6),
                F::ordinal("education", 5),
                F::ordinal("household_size", 5),
                F::ordinal("employed", 2),
                F::ordinal("income_bracket", 6),
                F::categorical("political_leaning", 3),
                F::categorical("gender", 2),
                F::ordinal("prefers_bev", 2),
                F::ordinal("drives_commute", 2),
                F::ordinal("drives_long_distance", 2),
                F::ordinal("drives_off_road", 2),
            ],
        }
    }
}

impl FeatureSchema {
    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::Empty("feature schema"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for f in &self.features {
            if f.cardinality == 0 {
                return Err(Error::Schema {
                    feature: f.name.clone(),
                    message: "cardinality must be at least 1".into(),
                });
            }
            if f.name == "barriers" || !seen.insert(f.name.as_str()) {
                return Err(Error::Schema {
                    feature: f.name.clone(),
                    message: "duplicate or reserved feature name".into(),
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Width of the encoded numeric vector.
    pub fn encoded_dim(&self) -> usize {
        self.features.iter().map(FeatureDef::encoded_width).sum()
    }

    /// Offset of feature `index` inside the encoded vector.
    pub fn encoded_offset(&self, index: usize) -> usize {
        self.features[..index]
            .iter()
            .map(FeatureDef::encoded_width)
            .sum()
    }

    /// Hex SHA-256 of the canonical JSON form. Stored in model files so that
    /// a model is never applied to data encoded under a different schema.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("schema serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn encode(&self, profile: &DemographicProfile) -> Result<Vec<f64>> {
        self.check(profile)?;
        let mut out = Vec::with_capacity(self.encoded_dim());
        for (f, &a) in self.features.iter().zip(&profile.answers) {
            match f.kind {
                FeatureKind::Ordinal if f.cardinality == 1 => out.push(0.0),
                FeatureKind::Ordinal => out.push(a as f64 / (f.cardinality - 1) as f64),
                FeatureKind::Categorical => {
                    out.extend((0..f.cardinality).map(|k| if k == a { 1.0 } else { 0.0 }))
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`encode`](Self::encode). Rejects vectors that no valid
    /// profile encodes to.
    pub fn decode(&self, encoded: &[f64]) -> Result<DemographicProfile> {
        if encoded.len() != self.encoded_dim() {
            return Err(Error::Dimension {
                expected: self.encoded_dim(),
                found: encoded.len(),
            });
        }
        let mut answers = Vec::with_capacity(self.len());
        let mut at = 0;
        for f in &self.features {
            let bad = |message: &str| Error::Schema {
                feature: f.name.clone(),
                message: message.to_string(),
            };
            match f.kind {
                FeatureKind::Ordinal => {
                    let v = encoded[at];
                    let steps = (f.cardinality.max(2) - 1) as f64;
                    let idx = (v * steps).round();
                    if !(0.0..=steps).contains(&idx) || (idx / steps - v).abs() > 1e-9 {
                        return Err(bad("value is not on the ordinal grid"));
                    }
                    if f.cardinality == 1 && idx != 0.0 {
                        return Err(bad("single-level feature must encode to 0"));
                    }
                    answers.push(idx as u32);
                    at += 1;
                }
                FeatureKind::Categorical => {
                    let width = f.cardinality as usize;
                    let slice = &encoded[at..at + width];
                    let hot: Vec<usize> = (0..width).filter(|&k| slice[k] == 1.0).collect();
                    if hot.len() != 1 || slice.iter().any(|&v| v != 0.0 && v != 1.0) {
                        return Err(bad("expected exactly one hot entry"));
                    }
                    answers.push(hot[0] as u32);
                    at += width;
                }
            }
        }
        DemographicProfile::new(self, answers)
    }

    fn check(&self, profile: &DemographicProfile) -> Result<()> {
        if profile.answers.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: profile.answers.len(),
            });
        }
        for (f, &a) in self.features.iter().zip(&profile.answers) {
            if a >= f.cardinality {
                return Err(Error::Schema {
                    feature: f.name.clone(),
                    message: format!("answer {a} outside cardinality {}", f.cardinality),
                });
            }
        }
        Ok(())
    }
}

/// One respondent's questionnaire answers, as answer indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DemographicProfile {
    answers: Vec<u32>,
}

impl DemographicProfile {
    pub fn new(schema: &FeatureSchema, answers: Vec<u32>) -> Result<Self> {
        let p = Self { answers };
        schema.check(&p)?;
        Ok(p)
    }

    pub fn answers(&self) -> &[u32] {
        &self.answers
    }

    pub fn answer(&self, feature: usize) -> u32 {
        self.answers[feature]
    }
}
