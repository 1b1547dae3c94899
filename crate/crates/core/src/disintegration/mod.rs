//! Trees of integer sequences and formal disintegrations.
//!
//! A [`Disintegration`] assigns a vector of some normed space to each node of
//! a [`FiniteTree`]. The checks here test the defining properties
//! (summative, formally separating on incomparable nodes, never zero), and
//! [`lift_isomorphism`] turns a norm-matching tree isomorphism between two
//! disintegrations into a linear isometry of their spans.

mod iso;
mod map;
mod record;
mod tree;
mod weighted;

use thiserror::Error;

use crate::spaces::SpaceError;

pub use iso::{lift_isomorphism, tree_isomorphism_check, IsoReport, LiftOptions, LiftedMap, TreeIso};
pub use map::{
    collapse_to_leaves, summation_relation, Disintegration, NonzeroReport, SeparatingReport, SummativeReport,
    ANTICHAIN_CAP, PAIR_CAP,
};
pub use record::DisintegrationRecord;
pub use tree::{FiniteTree, Node};
pub use weighted::WeightedSequenceSpace;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DisintegrationError {
    #[error("tree does not contain the empty sequence")]
    MissingRoot,
    #[error("node {0} is present but its parent is not")]
    NotPrefixClosed(Node),
    #[error("cannot parse node `{0}`")]
    Parse(String),
    #[error("no vector assigned to node {0}")]
    MissingVector(Node),
    #[error("vector assigned to node {0}, which is not in the tree")]
    ExtraVector(Node),
    #[error("no coefficient for node {0}")]
    MissingCoefficient(Node),
    #[error("node {0} is not in the tree")]
    UnknownNode(Node),
    #[error("tree map is not an isomorphism: {0}")]
    NotIsomorphism(String),
    #[error("lifting hypothesis fails: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("malformed record: {0}")]
    Record(String),
}
