//! Text serialization of step functions: `{"field", "level", "values"}` with
//! complex values written as `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{DyadicStep, ScalarField, SpaceError, StepValues};

#[derive(Serialize, Deserialize)]
struct StepRecord {
    field: ScalarField,
    level: u32,
    values: RecordValues,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RecordValues {
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

impl From<&DyadicStep> for StepRecord {
    fn from(f: &DyadicStep) -> Self {
        let values = match f.values() {
            StepValues::Real(v) => RecordValues::Real(v.clone()),
            StepValues::Complex(v) => RecordValues::Complex(v.iter().map(|z| [z.re, z.im]).collect()),
        };
        StepRecord { field: f.field(), level: f.level(), values }
    }
}

impl TryFrom<StepRecord> for DyadicStep {
    type Error = SpaceError;

    fn try_from(r: StepRecord) -> Result<Self, Self::Error> {
        match (r.field, r.values) {
            (ScalarField::Real, RecordValues::Real(v)) => DyadicStep::real(r.level, v),
            (ScalarField::Complex, RecordValues::Complex(v)) => {
                DyadicStep::complex(r.level, v.into_iter().map(|[a, b]| Complex64::new(a, b)).collect())
            }
            (ScalarField::Complex, RecordValues::Real(_)) => {
                Err(SpaceError::Record("complex field needs [re, im] pairs".into()))
            }
            (ScalarField::Real, RecordValues::Complex(_)) => {
                Err(SpaceError::Record("real field needs plain numbers".into()))
            }
        }
    }
}

impl Serialize for DyadicStep {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        StepRecord::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DyadicStep {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let record = StepRecord::deserialize(deserializer)?;
        DyadicStep::try_from(record).map_err(serde::de::Error::custom)
    }
}

impl DyadicStep {
    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("step records always serialize")
    }

    pub fn from_text(text: &str) -> Result<Self, SpaceError> {
        serde_json::from_str(text).map_err(|e| SpaceError::Record(e.to_string()))
    }
}
