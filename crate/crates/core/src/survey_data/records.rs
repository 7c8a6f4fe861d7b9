use std::collections::BTreeSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::schema::{DemographicProfile, FeatureSchema};
use crate::error::{Error, Result};

pub const BARRIERS_COLUMN: &str = "barriers";

/// One respondent of the barrier survey with their coded barriers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarrierSurveyRecord {
    pub profile: DemographicProfile,
    pub barriers: BTreeSet<String>,
}

/// One respondent of the intervention survey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionRecord {
    pub profile: DemographicProfile,
    pub intervention_id: usize,
    pub pre: f64,
    pub post: f64,
}

impl InterventionRecord {
    pub fn shift(&self) -> f64 {
        self.post - self.pre
    }
}

/// Bounds of the BEV preference question.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreferenceScale {
    pub min: f64,
    pub max: f64,
    /// Answers are whole numbers.
    pub integer: bool,
}

impl Default for PreferenceScale {
    fn default() -> Self {
        Self {
            min: 0.0,
            max: 100.0,
            integer: true,
        }
    }
}

impl PreferenceScale {
    pub fn contains(&self, v: f64) -> bool {
        v.is_finite() && v >= self.min && v <= self.max && (!self.integer || v.fract() == 0.0)
    }

    pub fn clamp(&self, v: f64) -> f64 {
        let v = if self.integer { v.round() } else { v };
        v.clamp(self.min, self.max)
    }
}

fn open(path: &Path) -> Result<impl Read> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

fn malformed(row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::MalformedRow {
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

/// Maps schema features onto CSV header positions.
struct Columns {
    features: Vec<usize>,
    header: Vec<String>,
}

impl Columns {
    fn resolve(
        header: &csv::StringRecord,
        schema: &FeatureSchema,
        extra: &[&str],
        allow_unknown: bool,
    ) -> Result<(Self, Vec<usize>)> {
        let header: Vec<String> = header.iter().map(str::to_string).collect();
        let find = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema {
                    feature: name.to_string(),
                    message: "column missing from header".into(),
                })
        };
        let features = schema
            .features
            .iter()
            .map(|f| find(&f.name))
            .collect::<Result<Vec<_>>>()?;
        let extra = extra.iter().map(|c| find(c)).collect::<Result<Vec<_>>>()?;
        if !allow_unknown && header.len() != features.len() + extra.len() {
            let known: BTreeSet<&str> = schema
                .features
                .iter()
                .map(|f| f.name.as_str())
                .chain(extra.iter().map(|&i| header[i].as_str()))
                .collect();
            let unknown = header.iter().find(|h| !known.contains(h.as_str())).cloned();
            return Err(Error::Schema {
                feature: unknown.unwrap_or_default(),
                message: "unexpected column".into(),
            });
        }
        Ok((Self { features, header }, extra))
    }

    fn profile(
        &self,
        schema: &FeatureSchema,
        rec: &csv::StringRecord,
        row: usize,
    ) -> Result<DemographicProfile> {
        let mut answers = Vec::with_capacity(self.features.len());
        for (f, &col) in schema.features.iter().zip(&self.features) {
            let raw = rec.get(col).unwrap_or("").trim();
            let a: u32 = raw.parse().map_err(|_| {
                malformed(
                    row,
                    &self.header[col],
                    format!("`{raw}` is not an answer index"),
                )
            })?;
            if a >= f.cardinality {
                return Err(Error::Schema {
                    feature: f.name.clone(),
                    message: format!(
                        "row {row}: answer {a} outside cardinality {}",
                        f.cardinality
                    ),
                });
            }
            answers.push(a);
        }
        DemographicProfile::new(schema, answers)
    }
}

fn reader(input: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input)
}

/// Parses a barrier survey. Row numbers in errors are 1-based data rows.
pub fn read_barrier_survey(
    input: impl Read,
    schema: &FeatureSchema,
) -> Result<Vec<BarrierSurveyRecord>> {
    schema.validate()?;
    let mut rdr = reader(input);
    let (cols, extra) = Columns::resolve(rdr.headers()?, schema, &[BARRIERS_COLUMN], false)?;
    let barrier_col = extra[0];
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| malformed(row, "*", e.to_string()))?;
        let profile = cols.profile(schema, &rec, row)?;
        let barriers: BTreeSet<String> = rec
            .get(barrier_col)
            .unwrap_or("")
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        if barriers.is_empty() {
            return Err(malformed(row, BARRIERS_COLUMN, "no barriers listed"));
        }
        out.push(BarrierSurveyRecord { profile, barriers });
    }
    Ok(out)
}

pub fn load_barrier_survey(
    path: &Path,
    schema: &FeatureSchema,
) -> Result<Vec<BarrierSurveyRecord>> {
    read_barrier_survey(open(path)?, schema)
}

pub fn write_barrier_survey(
    out: impl Write,
    schema: &FeatureSchema,
    records: &[BarrierSurveyRecord],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = schema.features.iter().map(|f| f.name.as_str()).collect();
    header.push(BARRIERS_COLUMN);
    w.write_record(&header)?;
    for r in records {
        let mut row: Vec<String> = r.profile.answers().iter().map(u32::to_string).collect();
        row.push(r.barriers.iter().cloned().collect::<Vec<_>>().join(";"));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn save_barrier_survey(
    path: &Path,
    schema: &FeatureSchema,
    records: &[BarrierSurveyRecord],
) -> Result<()> {
    write_barrier_survey(create(path)?, schema, records)
}

pub fn read_intervention_survey(
    input: impl Read,
    schema: &FeatureSchema,
    scale: &PreferenceScale,
    n_interventions: usize,
) -> Result<Vec<InterventionRecord>> {
    schema.validate()?;
    let mut rdr = reader(input);
    let (cols, extra) = Columns::resolve(
        rdr.headers()?,
        schema,
        &["intervention_id", "pre", "post"],
        false,
    )?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| malformed(row, "*", e.to_string()))?;
        let profile = cols.profile(schema, &rec, row)?;
        let field = |k: usize| rec.get(extra[k]).unwrap_or("").trim();
        let intervention_id: usize = field(0).parse().map_err(|_| {
            malformed(
                row,
                "intervention_id",
                format!("`{}` is not an index", field(0)),
            )
        })?;
        if intervention_id >= n_interventions {
            return Err(malformed(
                row,
                "intervention_id",
                format!("{intervention_id} outside [0, {n_interventions})"),
            ));
        }
        let pref = |k: usize, name: &str| -> Result<f64> {
            let v: f64 = field(k)
                .parse()
                .map_err(|_| malformed(row, name, format!("`{}` is not a number", field(k))))?;
            if !scale.contains(v) {
                return Err(malformed(
                    row,
                    name,
                    format!("{v} outside preference scale"),
                ));
            }
            Ok(v)
        };
        let pre = pref(1, "pre")?;
        let post = pref(2, "post")?;
        out.push(InterventionRecord {
            profile,
            intervention_id,
            pre,
            post,
        });
    }
    Ok(out)
}

pub fn load_intervention_survey(
    path: &Path,
    schema: &FeatureSchema,
    scale: &PreferenceScale,
    n_interventions: usize,
) -> Result<Vec<InterventionRecord>> {
    read_intervention_survey(open(path)?, schema, scale, n_interventions)
}

pub fn write_intervention_survey(
    out: impl Write,
    schema: &FeatureSchema,
    records: &[InterventionRecord],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = schema.features.iter().map(|f| f.name.as_str()).collect();
    header.extend(["intervention_id", "pre", "post"]);
    w.write_record(&header)?;
    for r in records {
        let mut row: Vec<String> = r.profile.answers().iter().map(u32::to_string).collect();
        row.push(r.intervention_id.to_string());
        row.push(r.pre.to_string());
        row.push(r.post.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn save_intervention_survey(
    path: &Path,
    schema: &FeatureSchema,
    records: &[InterventionRecord],
) -> Result<()> {
    write_intervention_survey(create(path)?, schema, records)
}

/// Reads profiles for ranking requests. Columns outside the schema are ignored.
pub fn read_profiles(input: impl Read, schema: &FeatureSchema) -> Result<Vec<DemographicProfile>> {
    schema.validate()?;
    let mut rdr = reader(input);
    let (cols, _) = Columns::resolve(rdr.headers()?, schema, &[], true)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| malformed(i + 1, "*", e.to_string()))?;
        out.push(cols.profile(schema, &rec, i + 1)?);
    }
    Ok(out)
}

pub fn load_profiles(path: &Path, schema: &FeatureSchema) -> Result<Vec<DemographicProfile>> {
    read_profiles(open(path)?, schema)
}
