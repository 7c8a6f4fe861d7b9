//! Stateless simulated respondents used to train the intervention agent.
//!
//! A response model maps `(cell, intervention)` to a preference shift. The
//! deterministic model always returns the tabulated mean; the stochastic one
//! draws from `Normal(mean, variance)`. A table with one row ignores the cell;
//! a table with [`N_CELLS`] rows is demographic-aware.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survey_data::synthetic::{draw_catalog, CatalogParams, InterventionCatalog};
use crate::survey_data::{DemographicProfile, FeatureSchema, InterventionStats};

pub const N_GENDERS: usize = 2;
pub const N_AGE_GROUPS: usize = 2;
pub const N_CELLS: usize = N_GENDERS * N_AGE_GROUPS;

/// One of the four gender × age-group combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DemographicCell {
    pub gender: u8,
    pub age_group: u8,
}

impl DemographicCell {
    pub fn new(gender: usize, age_group: usize) -> Result<Self> {
        if gender >= N_GENDERS || age_group >= N_AGE_GROUPS {
            return Err(Error::Config(format!(
                "cell ({gender}, {age_group}) outside 2 × 2 grid"
            )));
        }
        Ok(Self {
            gender: gender as u8,
            age_group: age_group as u8,
        })
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < N_CELLS, "cell index {index} out of range");
        Self {
            gender: (index / N_AGE_GROUPS) as u8,
            age_group: (index % N_AGE_GROUPS) as u8,
        }
    }

    pub fn index(self) -> usize {
        self.gender as usize * N_AGE_GROUPS + self.age_group as usize
    }

    pub fn all() -> impl Iterator<Item = Self> {
        (0..N_CELLS).map(Self::from_index)
    }

    /// Cell of a questionnaire profile: `gender` answer as-is, `age_bracket`
    /// split into the lower and upper half of its levels.
    pub fn from_profile(schema: &FeatureSchema, profile: &DemographicProfile) -> Result<Self> {
        let lookup = |name: &str| {
            schema.index_of(name).ok_or_else(|| Error::Schema {
                feature: name.to_string(),
                message: "required to place a respondent in a demographic cell".into(),
            })
        };
        let g = lookup("gender")?;
        let a = lookup("age_bracket")?;
        if schema.features[g].cardinality as usize != N_GENDERS {
            return Err(Error::Schema {
                feature: "gender".into(),
                message: format!("cell grid needs cardinality {N_GENDERS}"),
            });
        }
        let age_card = schema.features[a].cardinality;
        let age_group = usize::from(profile.answer(a) * 2 >= age_card);
        Self::new(profile.answer(g) as usize, age_group)
    }
}

/// Uniform over the four cells.
pub fn sample_cell(rng: &mut (impl Rng + ?Sized)) -> DemographicCell {
    DemographicCell::from_index(rng.random_range(0..N_CELLS))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub mean: f64,
    pub variance: f64,
}

/// Preference-shift parameters, one row for a non-aware model or one row per
/// cell for a demographic-aware model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectTable {
    rows: Vec<Vec<Effect>>,
}

impl EffectTable {
    pub fn new(rows: Vec<Vec<Effect>>) -> Result<Self> {
        if rows.len() != 1 && rows.len() != N_CELLS {
            return Err(Error::Config(format!(
                "effect table needs 1 or {N_CELLS} rows, got {}",
                rows.len()
            )));
        }
        let width = rows[0].len();
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::Config(
                "effect table rows must be non-empty and equally long".into(),
            ));
        }
        if rows
            .iter()
            .flatten()
            .any(|e| !e.mean.is_finite() || !(e.variance >= 0.0))
        {
            return Err(Error::Config(
                "effect means must be finite and variances non-negative".into(),
            ));
        }
        Ok(Self { rows })
    }

    pub fn from_catalog(catalog: &InterventionCatalog) -> Result<Self> {
        let row = |means: &[f64]| {
            means
                .iter()
                .zip(&catalog.variances)
                .map(|(&mean, &variance)| Effect { mean, variance })
                .collect::<Vec<_>>()
        };
        match &catalog.cell_means {
            Some(cells) => Self::new(cells.iter().map(|m| row(m)).collect()),
            None => Self::new(vec![row(&catalog.means)]),
        }
    }

    pub fn from_stats(stats: &InterventionStats) -> Result<Self> {
        Self::new(vec![stats
            .interventions
            .iter()
            .map(|s| Effect {
                mean: s.mean_shift,
                variance: s.var_shift,
            })
            .collect()])
    }

    pub fn demographic_aware(&self) -> bool {
        self.rows.len() == N_CELLS
    }

    pub fn n_interventions(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<Effect>] {
        &self.rows
    }

    pub fn effect(&self, cell: DemographicCell, intervention: usize) -> Result<Effect> {
        let row = if self.demographic_aware() {
            cell.index()
        } else {
            0
        };
        self.rows[row]
            .get(intervention)
            .copied()
            .ok_or(Error::UnknownIntervention {
                index: intervention,
                count: self.n_interventions(),
            })
    }

    /// Mean effect per intervention averaged over cells (uniform cell weights).
    pub fn cell_averaged_means(&self) -> Vec<f64> {
        (0..self.n_interventions())
            .map(|j| self.rows.iter().map(|r| r[j].mean).sum::<f64>() / self.rows.len() as f64)
            .collect()
    }

    /// Average over cells of the best mean within each cell.
    pub fn mean_of_cell_maxima(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|e| e.mean).fold(f64::NEG_INFINITY, f64::max))
            .sum::<f64>()
            / self.rows.len() as f64
    }

    /// Best achievable mean without knowing the cell.
    pub fn max_of_cell_averaged_means(&self) -> f64 {
        self.cell_averaged_means()
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Argmax intervention per row, lowest index on ties.
    pub fn row_argmax(&self) -> Vec<usize> {
        self.rows
            .iter()
            .map(|r| crate::argmax(&r.iter().map(|e| e.mean).collect::<Vec<_>>()))
            .collect()
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let aware = self.demographic_aware();
        if aware {
            w.write_record([
                "cell_gender",
                "cell_age",
                "intervention_id",
                "mean",
                "variance",
            ])?;
        } else {
            w.write_record(["intervention_id", "mean", "variance"])?;
        }
        for (ri, row) in self.rows.iter().enumerate() {
            let cell = DemographicCell::from_index(ri);
            for (j, e) in row.iter().enumerate() {
                let mut rec = Vec::with_capacity(5);
                if aware {
                    rec.push(cell.gender.to_string());
                    rec.push(cell.age_group.to_string());
                }
                rec.extend([j.to_string(), e.mean.to_string(), e.variance.to_string()]);
                w.write_record(&rec)?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv(input: impl Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let aware = match header
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>()
            .as_slice()
        {
            ["cell_gender", "cell_age", "intervention_id", "mean", "variance"] => true,
            ["intervention_id", "mean", "variance"] => false,
            _ => {
                return Err(Error::MalformedRow {
                    row: 0,
                    column: "header".into(),
                    message: format!("unexpected effect-table header {header:?}"),
                })
            }
        };
        let mut entries: BTreeMap<(usize, usize), Effect> = BTreeMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec?;
            let field = |k: usize| -> Result<&str> { Ok(rec.get(k).unwrap_or("").trim()) };
            let parse_idx = |k: usize| -> Result<usize> {
                field(k)?.parse().map_err(|_| Error::MalformedRow {
                    row,
                    column: header[k].clone(),
                    message: "expected a non-negative integer".into(),
                })
            };
            let parse_f = |k: usize| -> Result<f64> {
                field(k)?.parse().map_err(|_| Error::MalformedRow {
                    row,
                    column: header[k].clone(),
                    message: "expected a number".into(),
                })
            };
            let (cell, base) = if aware {
                (
                    DemographicCell::new(parse_idx(0)?, parse_idx(1)?)?.index(),
                    2,
                )
            } else {
                (0, 0)
            };
            let id = parse_idx(base)?;
            let effect = Effect {
                mean: parse_f(base + 1)?,
                variance: parse_f(base + 2)?,
            };
            if entries.insert((cell, id), effect).is_some() {
                return Err(Error::MalformedRow {
                    row,
                    column: "intervention_id".into(),
                    message: "duplicate entry".into(),
                });
            }
        }
        let n_rows = if aware { N_CELLS } else { 1 };
        let width = entries.keys().map(|&(_, j)| j + 1).max().unwrap_or(0);
        let mut rows = vec![Vec::with_capacity(width); n_rows];
        for (r, row) in rows.iter_mut().enumerate() {
            for j in 0..width {
                row.push(*entries.get(&(r, j)).ok_or_else(|| Error::MalformedRow {
                    row: 0,
                    column: "intervention_id".into(),
                    message: format!("table has no entry for row {r}, intervention {j}"),
                })?);
            }
        }
        Self::new(rows)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(File::create(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(File::open(path).map_err(|e| Error::io(path, e))?)
    }
}

/// A simulated respondent. Implementations hold no history: a response
/// depends only on the arguments and the caller's rng.
pub trait HumanModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn table(&self) -> &EffectTable;
    fn respond(
        &self,
        cell: DemographicCell,
        intervention: usize,
        rng: &mut dyn RngCore,
    ) -> Result<f64>;
}

/// Always returns the tabulated mean shift.
pub struct DeterministicHuman {
    table: EffectTable,
}

impl DeterministicHuman {
    pub fn new(table: EffectTable) -> Self {
        Self { table }
    }
}

impl HumanModel for DeterministicHuman {
    fn name(&self) -> &'static str {
        "deterministic"
    }

    fn table(&self) -> &EffectTable {
        &self.table
    }

    fn respond(
        &self,
        cell: DemographicCell,
        intervention: usize,
        _rng: &mut dyn RngCore,
    ) -> Result<f64> {
        Ok(self.table.effect(cell, intervention)?.mean)
    }
}

/// Draws the shift from `Normal(mean, variance)`; negative shifts are kept.
pub struct StochasticHuman {
    table: EffectTable,
}

impl StochasticHuman {
    pub fn new(table: EffectTable) -> Self {
        Self { table }
    }
}

impl HumanModel for StochasticHuman {
    fn name(&self) -> &'static str {
        "stochastic"
    }

    fn table(&self) -> &EffectTable {
        &self.table
    }

    fn respond(
        &self,
        cell: DemographicCell,
        intervention: usize,
        rng: &mut dyn RngCore,
    ) -> Result<f64> {
        let e = self.table.effect(cell, intervention)?;
        let normal =
            Normal::new(e.mean, e.variance.sqrt()).map_err(|err| Error::Config(err.to_string()))?;
        Ok(normal.sample(rng))
    }
}

/// Serializable description of a simulated respondent population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanModelSpec {
    /// Registry name of the response model.
    pub kind: String,
    pub table: EffectTable,
}

impl HumanModelSpec {
    pub fn new(kind: &str, table: EffectTable) -> Self {
        Self {
            kind: kind.to_string(),
            table,
        }
    }

    pub fn demographic_aware(&self) -> bool {
        self.table.demographic_aware()
    }

    pub fn build(&self) -> Result<Box<dyn HumanModel>> {
        HumanModelRegistry::standard().build(self)
    }
}

type HumanBuilder = fn(EffectTable) -> Box<dyn HumanModel>;

/// Response models by name.
pub struct HumanModelRegistry {
    builders: BTreeMap<&'static str, HumanBuilder>,
}

impl HumanModelRegistry {
    pub fn empty() -> Self {
        Self {
            builders: BTreeMap::new(),
        }
    }

    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register("deterministic", |t| Box::new(DeterministicHuman::new(t)));
        r.register("stochastic", |t| Box::new(StochasticHuman::new(t)));
        r
    }

    pub fn register(&mut self, name: &'static str, builder: HumanBuilder) {
        self.builders.insert(name, builder);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    pub fn build(&self, spec: &HumanModelSpec) -> Result<Box<dyn HumanModel>> {
        let builder =
            self.builders
                .get(spec.kind.as_str())
                .ok_or_else(|| Error::UnknownStrategy {
                    kind: "human model",
                    name: spec.kind.clone(),
                    available: self.names().join(", "),
                })?;
        Ok(builder(spec.table.clone()))
    }
}

/// Upper bound for non-featured entries of the contrastive table.
const CONTRASTIVE_BASE_CAP: f64 = 9.0;

/// A demographic-aware table in which each cell has its own best
/// intervention, so that knowing the cell is worth at least one preference
/// unit over the best cell-blind choice.
///
/// Base means come from the survey-calibrated catalog population, capped at
/// 9. Each cell then gets a distinct featured intervention with mean in
/// `[12, 13.10]` for that cell and `[0.275, 2]` for the other cells.
pub fn make_contrastive_spec(seed: u64) -> Result<HumanModelSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = CatalogParams::default();
    let base = draw_catalog(&params, &mut rng)?;
    let n = base.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let featured = &order[..N_CELLS];

    let mut rows: Vec<Vec<Effect>> = (0..N_CELLS)
        .map(|_| {
            base.means
                .iter()
                .zip(&base.variances)
                .map(|(&m, &v)| Effect {
                    mean: m.min(CONTRASTIVE_BASE_CAP),
                    variance: v,
                })
                .collect()
        })
        .collect();
    for (cell, &star) in featured.iter().enumerate() {
        for (r, row) in rows.iter_mut().enumerate() {
            row[star].mean = if r == cell {
                rng.random_range(12.0..=params.max_mean)
            } else {
                rng.random_range(params.min_mean..=2.0)
            };
        }
    }
    let table = EffectTable::new(rows)?;

    let argmax = table.row_argmax();
    assert_eq!(
        argmax, featured,
        "featured intervention must be each cell's argmax"
    );
    let gap = table.mean_of_cell_maxima() - table.max_of_cell_averaged_means();
    assert!(
        gap >= 1.0,
        "contrastive gap {gap} below one preference unit"
    );
    Ok(HumanModelSpec::new("deterministic", table))
}
