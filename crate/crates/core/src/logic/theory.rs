use std::collections::BTreeSet;

use serde::Serialize;

use super::ast::{subscripts_ok, Connective, Formula, Scalar, Term};
use super::eval::{eval, QuantifierBudget};
use super::model::{calibrate_weights, Interpretation, LatticeModel};
use super::{parse_formula, LogicError};
use crate::disintegration::{FiniteTree, Node};
use crate::embedding::EmbeddedBasis;
use crate::spaces::{PNorm, ScalarField};

/// Default largest denominator of the rational scalar grids.
pub const DEFAULT_MAX_DENOMINATOR: u64 = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedSentence {
    pub name: String,
    pub formula: Formula,
}

/// A finite list of named sentences; on disk one `name: formula` per line,
/// with `#` comments.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Theory {
    pub sentences: Vec<NamedSentence>,
}

impl Theory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn push(&mut self, name: impl Into<String>, formula: Formula) {
        self.sentences.push(NamedSentence { name: name.into(), formula });
    }

    pub fn extend<I: IntoIterator<Item = NamedSentence>>(&mut self, it: I) {
        self.sentences.extend(it);
    }

    pub fn parse(text: &str) -> Result<Self, LogicError> {
        let mut th = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let wrap = |e: LogicError| LogicError::TheoryLine { line: i + 1, source: Box::new(e) };
            let (name, body) = line
                .split_once(':')
                .ok_or_else(|| wrap(LogicError::Syntax { pos: 0, msg: "expected 'name: formula'".into() }))?;
            let formula = parse_formula(body).map_err(wrap)?;
            if !formula.is_sentence() {
                let free: Vec<String> = formula.free_vars().into_iter().collect();
                return Err(wrap(LogicError::UnboundVariable(free.join(", "))));
            }
            th.push(name.trim(), formula);
        }
        Ok(th)
    }

    pub fn to_text(&self) -> String {
        self.sentences.iter().map(|s| format!("{}: {}\n", s.name, s.formula)).collect()
    }

    pub fn constants(&self) -> BTreeSet<String> {
        self.sentences.iter().flat_map(|s| s.formula.constants()).collect()
    }
}

/// Reduced fractions `a / b` with `b <= max_den` in `[lo, hi]`, ascending.
pub fn rational_grid(max_den: u64, lo: f64, hi: f64) -> Vec<Scalar> {
    let mut out: Vec<Scalar> = Vec::new();
    for den in 1..=max_den.max(1) {
        let start = (lo * den as f64).ceil() as i64;
        let end = (hi * den as f64).floor() as i64;
        for num in start..=end {
            let s = Scalar::ratio(num, den).expect("positive denominator");
            if s == Scalar::Ratio(num, den) {
                out.push(s);
            }
        }
    }
    out.sort_by(|a, b| a.value().total_cmp(&b.value()));
    out
}

/// `(s, t)` with `0 <= s <= 1` and `0 <= t <= 1 - s` on the rational grid.
pub fn t_lp_grid(max_den: u64) -> Vec<(Scalar, Scalar)> {
    let values = rational_grid(max_den, 0.0, 1.0);
    let mut out = Vec::new();
    for &s in &values {
        for &t in &values {
            if s.value() + t.value() <= 1.0 + 1e-12 {
                out.push((s, t));
            }
        }
    }
    out
}

/// Scalars for the `Φ` (`|s| <= 1/2`) and `Ψ` (`|s| + |t| <= 1`) families.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiPsiGrid {
    pub phi: Vec<Scalar>,
    pub psi: Vec<(Scalar, Scalar)>,
}

impl PhiPsiGrid {
    pub fn rational(max_den: u64) -> Self {
        let phi = rational_grid(max_den, -0.5, 0.5);
        let all = rational_grid(max_den, -1.0, 1.0);
        let mut psi = Vec::new();
        for &s in &all {
            for &t in &all {
                if subscripts_ok(s, t) {
                    psi.push((s, t));
                }
            }
        }
        Self { phi, psi }
    }

    pub fn empty() -> Self {
        Self { phi: Vec::new(), psi: Vec::new() }
    }
}

pub fn constant_name(sigma: &Node) -> String {
    let bits: String = sigma.entries().iter().map(|b| b.to_string()).collect();
    format!("c_{bits}")
}

fn bits(sigma: &Node) -> Result<String, LogicError> {
    if sigma.entries().iter().any(|&b| b > 1) {
        return Err(LogicError::Constraint(format!("{sigma} is not a binary sequence")));
    }
    Ok(sigma.entries().iter().map(|b| b.to_string()).collect())
}

fn pow(r: Scalar, f: Formula) -> Formula {
    Formula::Apply(Connective::Pow(r), vec![f])
}

fn real_scalar(x: f64) -> Scalar {
    Scalar::Decimal(x)
}

/// `sup_{x0,x1} ≤(||s x0⁺||^p + ||t x1⁺||^p, ||s x0⁺ + t x1⁺||^p)` for each grid point.
pub fn axioms_t_lp_real(p: f64, grid: &[(Scalar, Scalar)]) -> Result<Vec<NamedSentence>, LogicError> {
    PNorm::new(p)?;
    let pexp = real_scalar(p);
    grid.iter()
        .map(|&(s, t)| {
            if s.value() < 0.0 || t.value() < 0.0 || s.value() + t.value() > 1.0 + 1e-12 {
                return Err(LogicError::Constraint(format!(
                    "grid point ({s}, {t}) is outside 0 <= s <= 1, 0 <= t <= 1 - s"
                )));
            }
            let x0 = Term::pos(Term::var("x0"));
            let x1 = Term::pos(Term::var("x1"));
            let lhs = Formula::Apply(
                Connective::Affine { bias: Scalar::ZERO, coeffs: vec![Scalar::ONE, Scalar::ONE] },
                vec![
                    pow(pexp, Formula::Norm(Term::scaled(s, x0.clone())?)),
                    pow(pexp, Formula::Norm(Term::scaled(t, x1.clone())?)),
                ],
            );
            let rhs = pow(pexp, Formula::Norm(Term::combine(s, x0, t, x1)?));
            let body = Formula::Apply(Connective::Leq, vec![lhs, rhs]);
            Ok(NamedSentence { name: format!("TLp({s}, {t})"), formula: Formula::sup("x0", Formula::sup("x1", body)) })
        })
        .collect()
}

/// `Φ_{σ,s} = d(s c_σ, s c_{σ0} + s c_{σ1})`.
pub fn phi_sentence(sigma: &Node, s: Scalar) -> Result<NamedSentence, LogicError> {
    let b = bits(sigma)?;
    if s.value().abs() > 0.5 + 1e-12 {
        return Err(LogicError::Constraint(format!("Phi needs |s| <= 1/2, got {s}")));
    }
    let c = |n: &Node| Term::Const(constant_name(n));
    let f = Formula::Dist(Term::scaled(s, c(sigma))?, Term::combine(s, c(&sigma.child(0)), s, c(&sigma.child(1)))?);
    Ok(NamedSentence { name: format!("Phi({b}; {s})"), formula: f })
}

/// `Ψ_{σ,s,t} = | ||s c_{σ0} + t c_{σ1}||^r - |s|^r ||c_{σ0}||^r - |t|^r ||c_{σ1}||^r |`.
pub fn psi_sentence(sigma: &Node, s: Scalar, t: Scalar, r: f64) -> Result<NamedSentence, LogicError> {
    let b = bits(sigma)?;
    if !subscripts_ok(s, t) {
        return Err(LogicError::Constraint(format!("Psi needs |s| + |t| <= 1, got {s}, {t}")));
    }
    let rs = real_scalar(r);
    let c0 = Term::Const(constant_name(&sigma.child(0)));
    let c1 = Term::Const(constant_name(&sigma.child(1)));
    let mixed = pow(rs, Formula::Norm(Term::combine(s, c0.clone(), t, c1.clone())?));
    let parts = Formula::Apply(
        Connective::Affine {
            bias: Scalar::ZERO,
            coeffs: vec![real_scalar(s.value().abs().powf(r)), real_scalar(t.value().abs().powf(r))],
        },
        vec![pow(rs, Formula::Norm(c0)), pow(rs, Formula::Norm(c1))],
    );
    Ok(NamedSentence {
        name: format!("Psi({b}; {s}, {t})"),
        formula: Formula::Apply(Connective::AbsDiff, vec![mixed, parts]),
    })
}

/// `Γ_σ = | ||c_σ|| - 2^{-|σ|/r} |`.
pub fn gamma_sentence(sigma: &Node, r: f64) -> Result<NamedSentence, LogicError> {
    let b = bits(sigma)?;
    let target = 2f64.powf(-(sigma.len() as f64) / r);
    Ok(NamedSentence {
        name: format!("Gamma({b})"),
        formula: Formula::Apply(
            Connective::AbsDiff,
            vec![Formula::Norm(Term::Const(constant_name(sigma))), Formula::Num(real_scalar(target))],
        ),
    })
}

/// All `Φ_{σ,s}`, `Ψ_{σ,s,t}` over the grid, then `Γ_σ`.
pub fn sentences_phi_psi_gamma(sigma: &Node, r: f64, grid: &PhiPsiGrid) -> Result<Vec<NamedSentence>, LogicError> {
    let mut out = Vec::new();
    for &s in &grid.phi {
        out.push(phi_sentence(sigma, s)?);
    }
    for &(s, t) in &grid.psi {
        out.push(psi_sentence(sigma, s, t, r)?);
    }
    out.push(gamma_sentence(sigma, r)?);
    Ok(out)
}

/// `T_n` with the given grids: the `T_{L^p(R)}` schema, then `Φ` for
/// `|σ| < n`, `Ψ` and `Γ` for `|σ| <= n`.
///
/// `Φ` stops below the last level because the model of [`build_tn_model`]
/// has `c_σ ≠ 0 = c_{σ0} + c_{σ1}` at `|σ| = n`.
pub fn theory_tn(n: usize, p: f64, r: f64, t_lp: &[(Scalar, Scalar)], grid: &PhiPsiGrid) -> Result<Theory, LogicError> {
    let mut th = Theory::new();
    th.extend(axioms_t_lp_real(p, t_lp)?);
    for sigma in FiniteTree::binary(n).nodes() {
        if sigma.len() < n {
            for &s in &grid.phi {
                th.sentences.push(phi_sentence(sigma, s)?);
            }
        }
        for &(s, t) in &grid.psi {
            th.sentences.push(psi_sentence(sigma, s, t, r)?);
        }
        th.sentences.push(gamma_sentence(sigma, r)?);
    }
    Ok(th)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TnMode {
    Exact,
    Mc,
}

/// The model of `T_n`: `c_σ = 2^{-n/r} f_{ν(σ)}` at `|σ| = n`, sums of
/// children above, and `0` below, with `ν(σ)` the integer with binary digits `σ`.
#[derive(Debug, Clone)]
pub struct TnModel {
    pub n: usize,
    pub r: f64,
    pub p: f64,
    pub mode: TnMode,
    pub interp: Interpretation,
    /// Largest relative change of a measure weight made by calibration.
    pub calibration_shift: Option<f64>,
}

/// Builds the constants from leaf vectors `f_0, ..., f_{2^n - 1}`.
pub fn build_tn_model(n: usize, r: f64, model: LatticeModel, basis: &[Vec<f64>]) -> Result<Interpretation, LogicError> {
    let needed = 1usize << n;
    if basis.len() < needed {
        return Err(LogicError::InsufficientBasis { needed, got: basis.len() });
    }
    if let Some(f) = basis.iter().find(|f| f.len() != model.dim()) {
        return Err(LogicError::Dimension { expected: model.dim(), got: f.len() });
    }
    let mut interp = Interpretation::new(model);
    for (node, v) in tn_constants(n, r, basis) {
        interp.set_constant(&constant_name(&node), v)?;
    }
    for k in 0..(needed * 2) {
        interp.set_zero_constant(&constant_name(&node_at(n + 1, k)));
    }
    Ok(interp)
}

/// Nodes of the binary tree of depth `n` with their vectors: scaled leaves
/// and sums of children above them.
fn tn_constants(n: usize, r: f64, basis: &[Vec<f64>]) -> Vec<(Node, Vec<f64>)> {
    let scale = 2f64.powf(-(n as f64) / r);
    let mut out = Vec::new();
    let mut level: Vec<Vec<f64>> = basis[..1usize << n].iter().map(|f| f.iter().map(|x| scale * x).collect()).collect();
    for depth in (0..=n).rev() {
        let next = level
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => a.iter().zip(b).map(|(x, y)| x + y).collect(),
                [a] => a.clone(),
                _ => unreachable!("chunks of two"),
            })
            .collect();
        out.extend(level.into_iter().enumerate().map(|(k, v)| (node_at(depth, k), v)));
        level = next;
    }
    out
}

/// The binary node of length `depth` whose integer reading is `k`.
fn node_at(depth: usize, k: usize) -> Node {
    Node::new((0..depth).map(|j| ((k >> (depth - 1 - j)) & 1) as u32).collect())
}

/// The exact model in `L^r[0,1]` itself (`p = r`): `f_j = 2^{n/r} 1_{J_j}` on
/// the dyadic cells of level `n`, so that `c_σ = 1_{J_σ}`.
pub fn build_tn_model_exact(n: usize, r: f64) -> Result<TnModel, LogicError> {
    let pn = PNorm::new(r)?;
    if !(1.0..=2.0).contains(&r) {
        return Err(LogicError::Constraint(format!("r = {r} is outside [1, 2]")));
    }
    let level = u32::try_from(n).map_err(|_| LogicError::Constraint("depth too large".into()))?;
    if level > crate::spaces::MAX_LEVEL {
        return Err(LogicError::Constraint(format!("depth {n} exceeds {}", crate::spaces::MAX_LEVEL)));
    }
    let model = LatticeModel::dyadic(pn, level)?;
    let d = model.dim();
    let height = 2f64.powf(n as f64 / r);
    let basis: Vec<Vec<f64>> = (0..d).map(|j| (0..d).map(|i| if i == j { height } else { 0.0 }).collect()).collect();
    Ok(TnModel {
        n,
        r,
        p: r,
        mode: TnMode::Exact,
        interp: build_tn_model(n, r, model, &basis)?,
        calibration_shift: None,
    })
}

/// The Monte Carlo model: the columns of a real embedded basis, each
/// renormalized to empirical norm 1, inside `L^p` of the empirical measure.
///
/// With `calibrate`, the empirical measure is then reweighted (minimal
/// Euclidean change) so that every `||c_σ||` equals `2^{-|σ|/r}`; the result is
/// still `L^p` of a measure, so `T_{L^p(R)}` and `Φ` are unaffected while `Γ`
/// holds up to rounding. `Ψ` keeps the Monte Carlo error.
pub fn build_tn_model_mc(n: usize, basis: &EmbeddedBasis, calibrate: bool) -> Result<TnModel, LogicError> {
    if basis.field != ScalarField::Real {
        return Err(LogicError::InvalidModel("the lattice model needs a real basis".into()));
    }
    let needed = 1usize << n;
    if basis.m() < needed {
        return Err(LogicError::InsufficientBasis { needed, got: basis.m() });
    }
    let model = LatticeModel::empirical(basis.p, basis.n_samples)?;
    let columns: Vec<Vec<f64>> = basis.basis[..needed]
        .iter()
        .map(|sv| {
            let x = sv.samples.as_real().expect("real basis");
            let norm = model.norm(x);
            x.iter().map(|v| v / norm).collect()
        })
        .collect();
    let r = basis.r;
    let mut model = model;
    let mut shift = None;
    if calibrate {
        let constants = tn_constants(n, r, &columns);
        let constraints: Vec<(&[f64], f64)> =
            constants.iter().map(|(s, v)| (v.as_slice(), 2f64.powf(-(s.len() as f64) / r))).collect();
        let calibrated = calibrate_weights(&model, &constraints)?;
        shift = Some(
            calibrated.weights().iter().zip(model.weights()).map(|(a, b)| (a / b - 1.0).abs()).fold(0.0, f64::max),
        );
        model = calibrated;
    }
    let interp = build_tn_model(n, r, model, &columns)?;
    Ok(TnModel { n, r, p: basis.p.get(), mode: TnMode::Mc, interp, calibration_shift: shift })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceResult {
    pub name: String,
    pub sentence: String,
    pub value: f64,
    pub bracket: [f64; 2],
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryReport {
    pub pass: bool,
    pub tol: f64,
    pub max_value: f64,
    pub worst: Option<String>,
    pub sentences: Vec<SentenceResult>,
}

impl TheoryReport {
    /// Largest value among sentences whose name starts with `prefix`.
    pub fn max_value_of(&self, prefix: &str) -> f64 {
        self.sentences
            .iter()
            .filter(|s| s.name.starts_with(prefix))
            .map(|s| if s.error.is_some() { f64::INFINITY } else { s.value })
            .fold(0.0, f64::max)
    }

    pub fn count_of(&self, prefix: &str) -> usize {
        self.sentences.iter().filter(|s| s.name.starts_with(prefix)).count()
    }
}

/// Evaluates every sentence; the theory passes iff every value is `<= tol`.
/// Evaluation errors are recorded as failing sentences.
pub fn check_theory(interp: &Interpretation, theory: &Theory, budget: &QuantifierBudget, tol: f64) -> TheoryReport {
    let mut results = Vec::with_capacity(theory.len());
    let mut max_value = 0.0f64;
    let mut worst = None;
    for s in &theory.sentences {
        let res = match eval(&s.formula, interp, budget) {
            Ok(tv) => SentenceResult {
                name: s.name.clone(),
                sentence: s.formula.to_string(),
                value: tv.value,
                bracket: [tv.lower, tv.upper],
                pass: tv.value <= tol,
                error: None,
            },
            Err(e) => SentenceResult {
                name: s.name.clone(),
                sentence: s.formula.to_string(),
                value: f64::NAN,
                bracket: [f64::NAN, f64::NAN],
                pass: false,
                error: Some(e.to_string()),
            },
        };
        let v = if res.error.is_some() { f64::INFINITY } else { res.value };
        if v > max_value || (worst.is_none() && !res.pass) {
            max_value = max_value.max(v);
            worst = Some(res.name.clone());
        }
        results.push(res);
    }
    TheoryReport { pass: results.iter().all(|r| r.pass), tol, max_value, worst, sentences: results }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(bits: &str) -> Node {
        bits.parse().unwrap()
    }

    #[test]
    fn grids() {
        let g = rational_grid(2, -1.0, 1.0);
        let v: Vec<f64> = g.iter().map(|s| s.value()).collect();
        assert_eq!(v, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(rational_grid(8, 0.0, 1.0).len(), 23);
        let g = PhiPsiGrid::rational(8);
        assert_eq!(g.phi.len(), 23);
        assert!(g.psi.iter().all(|&(s, t)| subscripts_ok(s, t)));
        assert!(t_lp_grid(8).iter().all(|(s, t)| s.value() + t.value() <= 1.0));
        assert!(axioms_t_lp_real(1.0, &[]).unwrap().is_empty());
    }

    #[test]
    fn phi_psi_gamma_shapes() {
        let half = Scalar::Ratio(1, 2);
        let grid = PhiPsiGrid { phi: vec![half], psi: vec![] };
        let s = sentences_phi_psi_gamma(&Node::root(), 2.0, &grid).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].formula.to_string(), "d(1/2*c_, 1/2*c_0 + 1/2*c_1)");
        let g = gamma_sentence(&node("01"), 2.0).unwrap();
        assert_eq!(g.formula.to_string(), "absdiff(norm(c_01), 0.5)");
        assert!(phi_sentence(&Node::root(), Scalar::Decimal(0.6)).is_err());
        assert!(psi_sentence(&Node::root(), half, Scalar::Ratio(3, 4), 2.0).is_err());
        assert!(axioms_t_lp_real(1.0, &[(half, Scalar::Ratio(3, 4))]).is_err());
        assert!(gamma_sentence(&node("2"), 2.0).is_err());
    }

    #[test]
    fn theory_text_round_trip() {
        let th = theory_tn(1, 1.5, 1.5, &t_lp_grid(2), &PhiPsiGrid::rational(2)).unwrap();
        let back = Theory::parse(&format!("# comment\n\n{}", th.to_text())).unwrap();
        assert_eq!(back, th);
        match Theory::parse("a: norm(c)\nb: norm(x\n") {
            Err(LogicError::TheoryLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(Theory::parse("no colon here").is_err());
    }

    #[test]
    fn t_lp_discriminates_l1_from_l2() {
        let half = Scalar::Ratio(1, 2);
        let mut th = Theory::new();
        th.extend(axioms_t_lp_real(1.0, &[(half, half)]).unwrap());
        let budget = QuantifierBudget::default();
        let l1 = Interpretation::new(LatticeModel::lp(PNorm::new(1.0).unwrap(), 2).unwrap());
        let l2 = Interpretation::new(LatticeModel::lp(PNorm::new(2.0).unwrap(), 2).unwrap());
        let r1 = check_theory(&l1, &th, &budget, 1e-12);
        let r2 = check_theory(&l2, &th, &budget, 1e-12);
        let s1 = &r1.sentences[0];
        assert!(r1.pass);
        assert!(s1.value <= s1.bracket[1] - s1.bracket[0] + 1e-15);
        // x0 = e1, x1 = e2: 1/2 + 1/2 - sqrt(2)/2
        assert!(r2.sentences[0].value >= 1.0 - 0.5f64.sqrt() - 1e-9, "{:?}", r2.sentences[0]);
        assert!(!r2.pass);
    }

    #[test]
    fn t0_on_the_model() {
        let m = build_tn_model_exact(0, 2.0).unwrap();
        let th = theory_tn(0, 2.0, 2.0, &t_lp_grid(2), &PhiPsiGrid::rational(2)).unwrap();
        let rep = check_theory(&m.interp, &th, &QuantifierBudget::default(), 1e-12);
        assert!(rep.pass, "{:?}", rep.worst);
        assert_eq!(m.interp.constant("c_").unwrap(), vec![1.0]);
    }

    #[test]
    fn tn_exact_is_satisfied() {
        for r in [1.0, 1.5, 2.0] {
            let m = build_tn_model_exact(2, r).unwrap();
            let th = theory_tn(2, r, r, &t_lp_grid(2), &PhiPsiGrid::rational(4)).unwrap();
            let rep = check_theory(&m.interp, &th, &QuantifierBudget { samples: 64, ..Default::default() }, 1e-12);
            assert!(rep.pass, "r = {r}: {:?} {}", rep.worst, rep.max_value);
        }
    }

    #[test]
    fn leaves_follow_the_integer_reading() {
        let m = build_tn_model_exact(2, 1.0).unwrap();
        assert_eq!(m.interp.constant("c_10").unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(m.interp.constant("c_1").unwrap(), vec![0.0, 0.0, 1.0, 1.0]);
        assert_eq!(m.interp.constant("c_110").unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn zero_model_fails_gamma() {
        let mut interp = Interpretation::new(LatticeModel::dyadic(PNorm::new(2.0).unwrap(), 2).unwrap());
        for sigma in FiniteTree::binary(3).nodes() {
            interp.set_zero_constant(&constant_name(sigma));
        }
        let th = theory_tn(2, 2.0, 2.0, &[], &PhiPsiGrid::rational(2)).unwrap();
        let rep = check_theory(&interp, &th, &QuantifierBudget::default(), 1e-12);
        assert!(!rep.pass);
        for s in rep.sentences.iter().filter(|s| s.name.starts_with("Gamma")) {
            let depth = s.name.len() - "Gamma()".len();
            assert!((s.value - 2f64.powf(-(depth as f64) / 2.0)).abs() < 1e-15, "{s:?}");
            assert!(!s.pass);
        }
        assert_eq!(rep.max_value_of("Phi"), 0.0);
    }

    #[test]
    fn empty_theory_passes() {
        let interp = Interpretation::new(LatticeModel::lp(PNorm::new(1.0).unwrap(), 1).unwrap());
        let rep = check_theory(&interp, &Theory::new(), &QuantifierBudget::default(), 0.0);
        assert!(rep.pass);
        assert!(rep.worst.is_none());
    }

    #[test]
    fn insufficient_basis() {
        let model = LatticeModel::lp(PNorm::new(1.0).unwrap(), 2).unwrap();
        assert!(matches!(
            build_tn_model(2, 2.0, model, &[vec![1.0, 0.0]]),
            Err(LogicError::InsufficientBasis { needed: 4, got: 1 })
        ));
    }

    #[test]
    fn mc_model_satisfies_phi_and_gamma() {
        let basis =
            crate::embedding::build_embedding(2.0, PNorm::new(1.0).unwrap(), 4, 20_000, 5, ScalarField::Real).unwrap();
        let m = build_tn_model_mc(2, &basis, true).unwrap();
        assert!(m.calibration_shift.unwrap() < 0.2);
        let grid = PhiPsiGrid::rational(2);
        let th = theory_tn(2, 1.0, 2.0, &[], &grid).unwrap();
        let rep = check_theory(&m.interp, &th, &QuantifierBudget::default(), 1e-9);
        assert!(rep.max_value_of("Phi") <= 1e-9);
        assert!(rep.max_value_of("Gamma") <= 1e-9, "{}", rep.max_value_of("Gamma"));
        assert!(rep.max_value_of("Psi") <= 0.1, "{}", rep.max_value_of("Psi"));
        let raw = build_tn_model_mc(2, &basis, false).unwrap();
        assert!(raw.calibration_shift.is_none());
        assert!(build_tn_model_mc(3, &basis, false).is_err());
    }
}
