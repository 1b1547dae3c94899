//! Exact finite models of real and complex L^p([0,1]).
//!
//! Elements are [`DyadicStep`] functions: constant on each cell
//! `[k 2^-n, (k+1) 2^-n)` of a dyadic partition. Every operation the rest of
//! the crate needs (norms, pointwise lattice operations, disjointness tests)
//! is computed exactly on the cell values, refining to a common level when two
//! operands live on different partitions.

mod formal;
mod record;
mod step;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use formal::{
    check_formal_disjointness, coefficient_tuples, formal_residual, is_formally_disjoint, FormalDisjointness,
};
pub(crate) use step::random_disc;
pub use step::{disjointify, is_disjointly_supported, DyadicStep, StepValues, MAX_LEVEL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("exponent p = {0} is outside [1, inf)")]
    InvalidExponent(f64),
    #[error("level {level} needs {expected} values, got {got}")]
    LengthMismatch { level: u32, expected: usize, got: usize },
    #[error("level {0} exceeds the maximum supported level {MAX_LEVEL}")]
    LevelTooLarge(u32),
    #[error("cannot refine from level {from} to coarser level {to}")]
    CoarserRefinement { from: u32, to: u32 },
    #[error("cell range {start}..{end} is not inside level {level}")]
    CellRange { level: u32, start: usize, end: usize },
    #[error("mixed-field operation: {0} and {1}")]
    FieldMismatch(ScalarField, ScalarField),
    #[error("lattice operations require real vectors")]
    ComplexLattice,
    #[error("non-real scalar {0} applied to a real vector")]
    ComplexScalar(Complex64),
    #[error("values must be finite")]
    NonFinite,
    #[error("vector length mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("malformed record: {0}")]
    Record(String),
}

/// The scalar field a vector space is defined over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarField {
    Real,
    Complex,
}

impl ScalarField {
    pub fn ensure_same(self, other: ScalarField) -> Result<ScalarField, SpaceError> {
        if self == other {
            Ok(self)
        } else {
            Err(SpaceError::FieldMismatch(self, other))
        }
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Real => f.write_str("real"),
            ScalarField::Complex => f.write_str("complex"),
        }
    }
}

impl std::str::FromStr for ScalarField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real" | "R" => Ok(ScalarField::Real),
            "complex" | "C" => Ok(ScalarField::Complex),
            other => Err(format!("unknown field `{other}` (expected real or complex)")),
        }
    }
}

/// An exponent `p >= 1` of an L^p norm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PNorm(f64);

impl PNorm {
    pub const ONE: PNorm = PNorm(1.0);
    pub const TWO: PNorm = PNorm(2.0);

    pub fn new(p: f64) -> Result<Self, SpaceError> {
        if p.is_finite() && p >= 1.0 {
            Ok(PNorm(p))
        } else {
            Err(SpaceError::InvalidExponent(p))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PNorm {
    type Error = SpaceError;

    fn try_from(p: f64) -> Result<Self, Self::Error> {
        PNorm::new(p)
    }
}

impl From<PNorm> for f64 {
    fn from(p: PNorm) -> f64 {
        p.0
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A normed space whose vectors can be combined linearly.
///
/// This is the "norm oracle" used by the formal-disjointness tests and by
/// disintegrations: anything that can form `y + alpha x` and measure a norm.
pub trait NormedSpace: Clone + fmt::Debug {
    type Vector: Clone + fmt::Debug;

    fn field(&self) -> ScalarField;

    fn norm(&self, v: &Self::Vector) -> f64;

    fn zero(&self) -> Self::Vector;

    /// `y <- y + alpha x`.
    fn axpy(&self, alpha: Complex64, x: &Self::Vector, y: &mut Self::Vector) -> Result<(), SpaceError>;

    fn linear_combination(&self, terms: &[(Complex64, &Self::Vector)]) -> Result<Self::Vector, SpaceError> {
        let mut acc = self.zero();
        for (alpha, v) in terms {
            self.axpy(*alpha, v, &mut acc)?;
        }
        Ok(acc)
    }
}

/// L^p([0,1]) realized on dyadic step functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSpace {
    pub p: PNorm,
    pub field: ScalarField,
}

impl StepSpace {
    pub fn new(p: PNorm, field: ScalarField) -> Self {
        Self { p, field }
    }

    pub fn real(p: PNorm) -> Self {
        Self::new(p, ScalarField::Real)
    }
}

impl NormedSpace for StepSpace {
    type Vector = DyadicStep;

    fn field(&self) -> ScalarField {
        self.field
    }

    fn norm(&self, v: &DyadicStep) -> f64 {
        v.lp_norm(self.p)
    }

    fn zero(&self) -> DyadicStep {
        DyadicStep::zero(0, self.field)
    }

    fn axpy(&self, alpha: Complex64, x: &DyadicStep, y: &mut DyadicStep) -> Result<(), SpaceError> {
        self.field.ensure_same(x.field())?;
        *y = y.axpy(alpha, x)?;
        Ok(())
    }
}

/// Checks that a scalar may multiply vectors over `field`.
pub(crate) fn check_scalar(field: ScalarField, alpha: Complex64) -> Result<(), SpaceError> {
    if field == ScalarField::Real && alpha.im != 0.0 {
        Err(SpaceError::ComplexScalar(alpha))
    } else {
        Ok(())
    }
}
