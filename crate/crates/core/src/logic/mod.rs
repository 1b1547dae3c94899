//! Continuous logic over finite-dimensional Banach lattices.
//!
//! Truth values live in `[0, 1]` and a sentence holds when its value is 0.
//! Models are `R^d` with a weighted `p`-norm and the metric `d(x, y) = ½||x - y||`,
//! so the unit ball has diameter 1. Quantifiers range over the unit ball and
//! are evaluated numerically (see [`eval`]).

mod ast;
mod eval;
mod language;
mod model;
mod syntax;
mod theory;

use thiserror::Error;

pub use ast::{subscripts_ok, Connective, Formula, Quantifier, Scalar, Term, SUBSCRIPT_SLACK};
pub use eval::{eval, eval_with, QuantifierBudget, TruthValue};
pub use language::{Language, Modulus, Symbol, SymbolKind};
pub use model::{calibrate_weights, ComplexReading, Interpretation, LatticeModel, BALL_SLACK};
pub use syntax::{parse_formula, parse_term};
pub use theory::{
    axioms_t_lp_real, build_tn_model, build_tn_model_exact, build_tn_model_mc, check_theory, constant_name,
    gamma_sentence, phi_sentence, psi_sentence, rational_grid, sentences_phi_psi_gamma, t_lp_grid, theory_tn,
    NamedSentence, PhiPsiGrid, SentenceResult, Theory, TheoryReport, TnMode, TnModel, DEFAULT_MAX_DENOMINATOR,
};

use crate::spaces::SpaceError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogicError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("subscripts at byte {pos} violate |s| + |t| <= 1: s = {s}, t = {t}")]
    Subscript { pos: usize, s: f64, t: f64 },
    #[error("{name} does not take {got} arguments")]
    Arity { name: String, got: usize },
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("symbol {0} is not in the language of the interpretation")]
    UnknownSymbol(String),
    #[error("expected dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("{0}")]
    Constraint(String),
    #[error("need {needed} basis vectors, got {got}")]
    InsufficientBasis { needed: usize, got: usize },
    #[error("line {line}: {source}")]
    TheoryLine { line: usize, source: Box<LogicError> },
    #[error(transparent)]
    Space(#[from] SpaceError),
}
