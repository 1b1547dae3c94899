//! Computational companion to the stable-variable embedding of sequence
//! spaces into Lebesgue spaces.
//!
//! * [`spaces`]: exact dyadic step-function models of real and complex L^p.
//! * [`stable`]: symmetric r-stable samplers and empirical moment/CF checks.
//! * [`embedding`]: the isometric embedding of l^r into L^p built from
//!   independent stable columns, and the dyadic disintegration of L^r.
//! * [`disintegration`]: trees of integer sequences, summative and formally
//!   separating maps, leaf collapse and isomorphism lifting.
//! * [`logic`]: a continuous-logic kernel (formulas, parser, quantifier
//!   evaluation, the theories `T_n`) over finite Banach-lattice models.
//! * [`complexify`]: complexified lattices, the theta-supremum modulus and the
//!   abstract complex L^p checks.

pub mod complexify;
pub mod disintegration;
pub mod embedding;
pub mod logic;
pub mod spaces;
pub mod stable;

pub use num_complex::Complex64;
pub use spaces::{DyadicStep, NormedSpace, PNorm, ScalarField, SpaceError, StepSpace};
