//! Text form of a step-function disintegration:
//! `{"p", "field", "nodes": [[...], ...], "vectors": [step, ...]}`.

use serde::{Deserialize, Serialize};

use super::{Disintegration, DisintegrationError, FiniteTree, Node};
use crate::spaces::{DyadicStep, PNorm, ScalarField, StepSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisintegrationRecord {
    pub p: PNorm,
    pub field: ScalarField,
    pub nodes: Vec<Node>,
    pub vectors: Vec<DyadicStep>,
}

impl From<&Disintegration<StepSpace>> for DisintegrationRecord {
    fn from(d: &Disintegration<StepSpace>) -> Self {
        let (nodes, vectors) = d.iter().map(|(n, v)| (n.clone(), v.clone())).unzip();
        Self { p: d.exponent(), field: d.space().field, nodes, vectors }
    }
}

impl TryFrom<DisintegrationRecord> for Disintegration<StepSpace> {
    type Error = DisintegrationError;

    fn try_from(r: DisintegrationRecord) -> Result<Self, Self::Error> {
        if r.nodes.len() != r.vectors.len() {
            return Err(DisintegrationError::Record(format!(
                "{} nodes but {} vectors",
                r.nodes.len(),
                r.vectors.len()
            )));
        }
        for v in &r.vectors {
            r.field.ensure_same(v.field())?;
        }
        let tree = FiniteTree::new(r.nodes.iter().cloned())?;
        let assign = r.nodes.into_iter().zip(r.vectors).collect();
        Disintegration::new(StepSpace::new(r.p, r.field), tree, assign, r.p)
    }
}

impl Disintegration<StepSpace> {
    pub fn to_text(&self) -> String {
        serde_json::to_string(&DisintegrationRecord::from(self)).expect("records always serialize")
    }

    pub fn from_text(text: &str) -> Result<Self, DisintegrationError> {
        let r: DisintegrationRecord =
            serde_json::from_str(text).map_err(|e| DisintegrationError::Record(e.to_string()))?;
        r.try_into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let p = PNorm::new(1.5).unwrap();
        let d = Disintegration::from_fn(StepSpace::real(p), FiniteTree::binary(2), p, |n| {
            let k = n.binary_value().unwrap() as usize;
            DyadicStep::indicator(n.len() as u32, k, k + 1).unwrap()
        });
        let text = d.to_text();
        assert!(text.starts_with(r#"{"p":1.5,"field":"real","nodes":[[],[0],[0,0]"#));
        let back = Disintegration::from_text(&text).unwrap();
        assert_eq!(back.tree(), d.tree());
        for (n, v) in d.iter() {
            assert_eq!(back.vector(n), Some(v));
        }
    }

    #[test]
    fn malformed_records() {
        let one = r#"{"field":"real","level":0,"values":[1.0]}"#;
        let missing_root = format!(r#"{{"p":1.0,"field":"real","nodes":[[0]],"vectors":[{one}]}}"#);
        assert_eq!(Disintegration::from_text(&missing_root).unwrap_err(), DisintegrationError::MissingRoot);
        let short = r#"{"p":1.0,"field":"real","nodes":[[]],"vectors":[]}"#;
        assert!(matches!(Disintegration::from_text(short), Err(DisintegrationError::Record(_))));
        let bad_p = format!(r#"{{"p":0.5,"field":"real","nodes":[[]],"vectors":[{one}]}}"#);
        assert!(Disintegration::from_text(&bad_p).is_err());
    }
}
