//! Complexification of the real step-function lattice.
//!
//! A [`ComplexPair`] is `v0 + i v1` with `v0, v1` real step functions, scaled
//! by `(x + iy)(v0, v1) = (x v0 - y v1, y v0 + x v1)`. The lattice modulus
//! `|v| = sup_θ Re(e^{iθ} v)` is approximated on a finite grid of angles with
//! lattice joins. Candidate norms on pairs are tested against the two
//! conditions that make a complexified abstract `L^p` space an abstract
//! complex `L^p` space, and against the `G0, G1, G2` criterion.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spaces::{disjointify, DyadicStep, PNorm, ScalarField, SpaceError, StepValues, MAX_LEVEL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComplexifyError {
    #[error("complex pair parts must be real step functions")]
    ComplexPart,
    #[error("theta grid needs K >= 4, got {0}")]
    GridTooCoarse(usize),
    #[error("need at least one trial")]
    NoTrials,
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// `re + i·im` over the real step lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PairRecord", into = "PairRecord")]
pub struct ComplexPair {
    re: DyadicStep,
    im: DyadicStep,
}

#[derive(Serialize, Deserialize)]
struct PairRecord {
    field: ScalarField,
    re: DyadicStep,
    im: DyadicStep,
}

impl From<ComplexPair> for PairRecord {
    fn from(v: ComplexPair) -> Self {
        PairRecord { field: ScalarField::Complex, re: v.re, im: v.im }
    }
}

impl TryFrom<PairRecord> for ComplexPair {
    type Error = String;

    fn try_from(r: PairRecord) -> Result<Self, String> {
        if r.field != ScalarField::Complex {
            return Err("complex pair record must have field \"complex\"".into());
        }
        ComplexPair::new(r.re, r.im).map_err(|e| e.to_string())
    }
}

impl ComplexPair {
    pub fn new(re: DyadicStep, im: DyadicStep) -> Result<Self, ComplexifyError> {
        if re.field() != ScalarField::Real || im.field() != ScalarField::Real {
            return Err(ComplexifyError::ComplexPart);
        }
        Ok(Self { re, im })
    }

    /// `v + i0`.
    pub fn from_real(v: &DyadicStep) -> Result<Self, ComplexifyError> {
        Self::new(v.clone(), DyadicStep::zero(v.level(), ScalarField::Real))
    }

    /// `0 + iv`.
    pub fn imaginary(v: &DyadicStep) -> Result<Self, ComplexifyError> {
        Self::new(DyadicStep::zero(v.level(), ScalarField::Real), v.clone())
    }

    /// Splits a complex step function into real and imaginary parts.
    pub fn from_complex(f: &DyadicStep) -> Self {
        let vals = f.complex_values();
        let level = f.level();
        let part = |g: fn(&Complex64) -> f64| {
            DyadicStep::real(level, vals.iter().map(g).collect()).expect("same length as source")
        };
        Self { re: part(|z| z.re), im: part(|z| z.im) }
    }

    /// The complex step function `re + i im` at the finer of the two levels.
    pub fn to_complex(&self) -> DyadicStep {
        self.re
            .to_complex()
            .axpy(Complex64::i(), &self.im.to_complex())
            .expect("both parts are complex after conversion")
    }

    pub fn re(&self) -> &DyadicStep {
        &self.re
    }

    pub fn im(&self) -> &DyadicStep {
        &self.im
    }

    pub fn try_add(&self, other: &ComplexPair) -> Result<ComplexPair, ComplexifyError> {
        Ok(ComplexPair { re: self.re.try_add(&other.re)?, im: self.im.try_add(&other.im)? })
    }

    pub fn try_sub(&self, other: &ComplexPair) -> Result<ComplexPair, ComplexifyError> {
        Ok(ComplexPair { re: self.re.try_sub(&other.re)?, im: self.im.try_sub(&other.im)? })
    }

    /// The pointwise complex modulus `sqrt(re^2 + im^2)`.
    pub fn modulus(&self) -> DyadicStep {
        self.to_complex().modulus()
    }

    pub fn same_pair(&self, other: &ComplexPair) -> bool {
        self.re.same_function(&other.re) && self.im.same_function(&other.im)
    }
}

/// `(x + iy)(v0, v1) = (x v0 - y v1, y v0 + x v1)`.
pub fn complex_scale(z: Complex64, v: &ComplexPair) -> ComplexPair {
    let r = |c: f64| Complex64::new(c, 0.0);
    let re = v.re.scale(z.re).axpy(r(-z.im), &v.im).expect("real parts");
    let im = v.re.scale(z.im).axpy(r(z.re), &v.im).expect("real parts");
    ComplexPair { re, im }
}

/// `Re(e^{iθ} v) = cos θ · re - sin θ · im`.
pub fn rotate_real_part(theta: f64, v: &ComplexPair) -> DyadicStep {
    v.re.scale(theta.cos()).axpy(Complex64::new(-theta.sin(), 0.0), &v.im).expect("real parts")
}

/// The lattice supremum over `θ = 2πk/K`, `0 <= k < K`, of `Re(e^{iθ} v)`.
///
/// Pointwise it lies in `[cos(π/K) |v|, |v|]`, and refining the grid
/// (replacing `K` by a multiple of `K`) never lowers it.
pub fn modulus_theta_grid(v: &ComplexPair, k: usize) -> Result<DyadicStep, ComplexifyError> {
    if k < 4 {
        return Err(ComplexifyError::GridTooCoarse(k));
    }
    let mut acc = rotate_real_part(0.0, v);
    for j in 1..k {
        let theta = 2.0 * PI * j as f64 / k as f64;
        acc = acc.join(&rotate_real_part(theta, v))?;
    }
    Ok(acc)
}

/// Candidate norms on the complexification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ComplexNorm {
    /// `|| |re + i im| ||_p`.
    Genuine,
    /// `||re||_p + ||im||_p`.
    SumOfParts,
    /// `max(||re||_p, ||im||_p)`.
    MaxOfParts,
    /// `|| modulus_theta_grid(v, K) ||_p`.
    ThetaGrid { k: usize },
}

/// A complexified real step `L^p` model together with a candidate norm on pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexModel {
    pub p: PNorm,
    pub norm: ComplexNorm,
}

impl ComplexModel {
    pub fn new(p: PNorm, norm: ComplexNorm) -> Self {
        Self { p, norm }
    }

    pub fn genuine(p: PNorm) -> Self {
        Self::new(p, ComplexNorm::Genuine)
    }

    /// The norm of the underlying real space.
    pub fn real_norm(&self, v: &DyadicStep) -> f64 {
        v.lp_norm(self.p)
    }

    /// The candidate norm of a pair.
    pub fn norm(&self, v: &ComplexPair) -> f64 {
        match self.norm {
            ComplexNorm::Genuine => v.modulus().lp_norm(self.p),
            ComplexNorm::SumOfParts => self.real_norm(&v.re) + self.real_norm(&v.im),
            ComplexNorm::MaxOfParts => self.real_norm(&v.re).max(self.real_norm(&v.im)),
            ComplexNorm::ThetaGrid { k } => modulus_theta_grid(v, k.max(4)).expect("grid size clamped").lp_norm(self.p),
        }
    }

    /// The two-argument predicate `||u, v||_+ := ||u + iv||`.
    pub fn norm_plus(&self, u: &DyadicStep, v: &DyadicStep) -> Result<f64, ComplexifyError> {
        Ok(self.norm(&ComplexPair::new(u.clone(), v.clone())?))
    }

    /// `| ||α(v0+i0) + β(v1+i0)||^p - |α|^p ||v0||^p - |β|^p ||v1||^p |`.
    pub fn disjointness_residual(
        &self,
        v0: &DyadicStep,
        v1: &DyadicStep,
        alpha: Complex64,
        beta: Complex64,
    ) -> Result<f64, ComplexifyError> {
        let p = self.p.get();
        let combo = complex_scale(alpha, &ComplexPair::from_real(v0)?)
            .try_add(&complex_scale(beta, &ComplexPair::from_real(v1)?))?;
        let lhs = self.norm(&combo).powf(p);
        let rhs = alpha.norm().powf(p) * self.real_norm(v0).powf(p) + beta.norm().powf(p) * self.real_norm(v1).powf(p);
        Ok((lhs - rhs).abs())
    }
}

/// Values of `G0`, `G1,α,β` and `G2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GValues {
    pub g0: f64,
    pub g1: f64,
    pub g2: f64,
}

impl GValues {
    pub fn max(&self) -> f64 {
        self.g0.max(self.g1).max(self.g2)
    }
}

/// `G0 = ≤(max(||v0-u0||, ||v1-u1||), || |v0| ∧ |v1| ||)` with `≤(s,t) = (s-t)^+`,
/// `G1` the formal-disjointness residual of `(u0, u1)` for `(α, β)`, and
/// `G2 = | ||v0 + i0|| - ||v0|| |`.
#[allow(clippy::too_many_arguments)]
pub fn eval_g_functionals(
    model: &ComplexModel,
    u0: &DyadicStep,
    u1: &DyadicStep,
    v0: &DyadicStep,
    v1: &DyadicStep,
    alpha: Complex64,
    beta: Complex64,
) -> Result<GValues, ComplexifyError> {
    let dist = model.real_norm(&v0.try_sub(u0)?).max(model.real_norm(&v1.try_sub(u1)?));
    let overlap = model.real_norm(&v0.abs()?.meet(&v1.abs()?)?);
    Ok(GValues {
        g0: (dist - overlap).max(0.0),
        g1: model.disjointness_residual(u0, u1, alpha, beta)?,
        g2: (model.norm(&ComplexPair::from_real(v0)?) - model.real_norm(v0)).abs(),
    })
}

/// The `G` values at the witness `(u0, u1) = disjointify(v0, v1)`; their max
/// bounds the infimum in the criterion from above.
pub fn g_at_disjointified_witness(
    model: &ComplexModel,
    v0: &DyadicStep,
    v1: &DyadicStep,
    alpha: Complex64,
    beta: Complex64,
) -> Result<GValues, ComplexifyError> {
    let (u0, u1) = disjointify(v0, v1)?;
    eval_g_functionals(model, &u0, &u1, v0, v1, alpha, beta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexLpReport {
    pub model: ComplexModel,
    pub trials: usize,
    pub tol: f64,
    /// `max | ||v + i0|| - ||v|| |`.
    pub condition1_residual: f64,
    /// `max | ||0 + iv|| - ||v|| |`.
    pub remark_residual: f64,
    /// Worst formal-disjointness residual over disjoint pairs.
    pub condition2_residual: f64,
    /// Worst residual on the half-interval indicator pair alone.
    pub witness_residual: f64,
    pub witness_scalars: (Complex64, Complex64),
    /// Worst `max(G0, G1, G2)` at disjointified witnesses.
    pub g_residual: f64,
    pub pass: bool,
}

/// Scalar pairs tried on the half-interval indicators.
pub fn witness_scalars() -> Vec<(Complex64, Complex64)> {
    let one = Complex64::new(1.0, 0.0);
    let diag = Complex64::from_polar(1.0, FRAC_PI_4);
    vec![(one, one), (one, -one), (one, Complex64::i()), (diag, diag), (diag, Complex64::i())]
}

fn random_real<R: Rng + ?Sized>(rng: &mut R) -> DyadicStep {
    let level = rng.random_range(0..=5u32.min(MAX_LEVEL));
    DyadicStep::random(rng, level, ScalarField::Real)
}

fn random_scalar<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(rng.random_range(0.0..=1.0), rng.random_range(0.0..2.0 * PI))
}

/// A random disjoint pair: one random vector split by a random cell mask.
fn random_disjoint_pair<R: Rng + ?Sized>(rng: &mut R) -> (DyadicStep, DyadicStep) {
    let level = rng.random_range(1..=5);
    let v = DyadicStep::random(rng, level, ScalarField::Real);
    let StepValues::Real(vals) = v.values() else { unreachable!("random real step") };
    let mask: Vec<bool> = (0..vals.len()).map(|_| rng.random_bool(0.5)).collect();
    let pick = |keep: bool| {
        let w = vals.iter().zip(&mask).map(|(x, &m)| if m == keep { *x } else { 0.0 }).collect();
        DyadicStep::real(level, w).expect("same length")
    };
    (pick(true), pick(false))
}

/// Randomized check of both defining conditions, the remark `||v|| = ||0 + iv||`,
/// and the `G` criterion at disjointified witnesses. Condition (2) also runs
/// on the indicators of `[0,1/2)` and `[1/2,1)` with the scalars of
/// [`witness_scalars`].
pub fn check_abstract_complex_lp(
    model: &ComplexModel,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<ComplexLpReport, ComplexifyError> {
    if trials == 0 {
        return Err(ComplexifyError::NoTrials);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut c1, mut remark, mut c2, mut g) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);

    let left = DyadicStep::indicator(1, 0, 1)?;
    let right = DyadicStep::indicator(1, 1, 2)?;
    let mut witness = 0.0f64;
    let mut witness_at = witness_scalars()[0];
    for (a, b) in witness_scalars() {
        let r = model.disjointness_residual(&left, &right, a, b)?;
        if r > witness {
            witness = r;
            witness_at = (a, b);
        }
    }
    c2 = c2.max(witness);

    for _ in 0..trials {
        let v = random_real(&mut rng);
        let n = model.real_norm(&v);
        c1 = c1.max((model.norm(&ComplexPair::from_real(&v)?) - n).abs());
        remark = remark.max((model.norm(&ComplexPair::imaginary(&v)?) - n).abs());

        let (v0, v1) = random_disjoint_pair(&mut rng);
        let (a, b) = (random_scalar(&mut rng), random_scalar(&mut rng));
        c2 = c2.max(model.disjointness_residual(&v0, &v1, a, b)?);

        let (w0, w1) = (random_real(&mut rng), random_real(&mut rng));
        let (a, b) = (random_scalar(&mut rng), random_scalar(&mut rng));
        g = g.max(g_at_disjointified_witness(model, &w0, &w1, a, b)?.max());
    }
    Ok(ComplexLpReport {
        model: *model,
        trials,
        tol,
        condition1_residual: c1,
        remark_residual: remark,
        condition2_residual: c2,
        witness_residual: witness,
        witness_scalars: witness_at,
        g_residual: g,
        pass: c1 <= tol && remark <= tol && c2 <= tol && g <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn real(level: u32, v: &[f64]) -> DyadicStep {
        DyadicStep::real(level, v.to_vec()).unwrap()
    }

    fn pair(re: &[f64], im: &[f64]) -> ComplexPair {
        let level = re.len().trailing_zeros();
        ComplexPair::new(real(level, re), real(level, im)).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scaling_examples() {
        let f = real(1, &[1.0, -2.0]);
        let v = ComplexPair::from_real(&f).unwrap();
        assert!(complex_scale(c(1.0, 0.0), &v).same_pair(&v));
        assert!(complex_scale(Complex64::i(), &v).same_pair(&ComplexPair::imaginary(&f).unwrap()));
        let w = pair(&[1.0, 0.5], &[-0.25, 3.0]);
        let h = Complex64::from_polar(1.0, FRAC_PI_4);
        let twice = complex_scale(h, &complex_scale(h, &w));
        let by_i = complex_scale(Complex64::i(), &w);
        assert!(twice.re().sup_distance(by_i.re()).unwrap() < 1e-15);
        assert!(twice.im().sup_distance(by_i.im()).unwrap() < 1e-15);
        // i·(a, b) = (-b, a)
        assert!(by_i.same_pair(&ComplexPair::new(w.im().scale(-1.0), w.re().clone()).unwrap()));
    }

    #[test]
    fn pair_conversions() {
        let z = DyadicStep::complex(1, vec![c(1.0, 2.0), c(-3.0, 0.5)]).unwrap();
        let p = ComplexPair::from_complex(&z);
        assert_eq!(p.re(), &real(1, &[1.0, -3.0]));
        assert!(p.to_complex().same_function(&z));
        assert_eq!(ComplexPair::new(z.clone(), z), Err(ComplexifyError::ComplexPart));
    }

    #[test]
    fn theta_grid_examples() {
        let f = real(2, &[0.0, 1.0, 2.5, 0.25]);
        for k in [4, 7, 64] {
            assert!(modulus_theta_grid(&ComplexPair::from_real(&f).unwrap(), k).unwrap().same_function(&f));
        }
        let ones = pair(&[1.0], &[1.0]);
        let g4 = modulus_theta_grid(&ones, 4).unwrap();
        assert!((g4.real_values().unwrap()[0] - 1.0).abs() < 1e-15);
        let err = 2f64.sqrt() - 1.0;
        assert!((err / 2f64.sqrt() - (1.0 - (PI / 4.0).cos())).abs() < 1e-15);
        let im_only = ComplexPair::imaginary(&f).unwrap();
        for k in [4, 8, 256] {
            let g = modulus_theta_grid(&im_only, k).unwrap();
            assert!(g.sup_distance(&f).unwrap() < 1e-15);
        }
        assert_eq!(modulus_theta_grid(&ones, 3), Err(ComplexifyError::GridTooCoarse(3)));
    }

    #[test]
    fn g_examples() {
        let m = ComplexModel::genuine(PNorm::new(1.5).unwrap());
        let (v0, v1) = (DyadicStep::indicator(2, 0, 1).unwrap(), real(2, &[0.0, 0.0, 2.0, -1.0]));
        let one = c(1.0, 0.0);
        let g = eval_g_functionals(&m, &v0, &v1, &v0, &v1, one, one).unwrap();
        assert!(g.max() <= 1e-12, "{g:?}");

        let m1 = ComplexModel::genuine(PNorm::ONE);
        let v = real(1, &[1.0, -0.5]);
        let g = eval_g_functionals(&m1, &v, &v, &v, &v, one, -one).unwrap();
        assert!((g.g1 - 2.0 * v.lp_norm(PNorm::ONE)).abs() < 1e-15);

        let zero = DyadicStep::zero(0, ScalarField::Real);
        for norm in [ComplexNorm::Genuine, ComplexNorm::SumOfParts, ComplexNorm::MaxOfParts] {
            let g = eval_g_functionals(&ComplexModel::new(PNorm::TWO, norm), &v, &v, &zero, &v, one, one).unwrap();
            assert_eq!(g.g2, 0.0);
        }
    }

    #[test]
    fn genuine_norm_is_abstract_complex_lp() {
        for p in [1.0, 1.5, 2.0] {
            let r = check_abstract_complex_lp(&ComplexModel::genuine(PNorm::new(p).unwrap()), 200, 1e-10, 4).unwrap();
            assert!(r.pass, "p = {p}: {r:?}");
        }
    }

    #[test]
    fn corrupted_norms_fail() {
        for p in [1.0, 1.5, 2.0] {
            let m = ComplexModel::new(PNorm::new(p).unwrap(), ComplexNorm::SumOfParts);
            let r = check_abstract_complex_lp(&m, 50, 1e-10, 4).unwrap();
            assert!(!r.pass && r.witness_residual >= 0.1, "p = {p}: {r:?}");
            // real vectors are still measured correctly
            assert!(r.condition1_residual < 1e-15 && r.remark_residual < 1e-15);
        }
        let m = ComplexModel::new(PNorm::TWO, ComplexNorm::MaxOfParts);
        assert!(!check_abstract_complex_lp(&m, 50, 1e-10, 4).unwrap().pass);
        let m = ComplexModel::new(PNorm::TWO, ComplexNorm::SumOfParts);
        let (l, r) = (DyadicStep::indicator(1, 0, 1).unwrap(), DyadicStep::indicator(1, 1, 2).unwrap());
        // ||(1_L, 1_R)|| = 2 · 2^(-1/2), squared 2, against 1/2 + 1/2
        assert!((m.disjointness_residual(&l, &r, c(1.0, 0.0), Complex64::i()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn serde_record() {
        let v = pair(&[1.0, 2.0], &[0.0, -1.0]);
        let text = serde_json::to_string(&v).unwrap();
        assert!(text.starts_with(r#"{"field":"complex","re":{"field":"real""#));
        assert_eq!(serde_json::from_str::<ComplexPair>(&text).unwrap(), v);
        let bad = text.replacen(r#""field":"complex""#, r#""field":"real""#, 1);
        assert!(serde_json::from_str::<ComplexPair>(&bad).is_err());
    }

    proptest! {
        #[test]
        fn scaling_is_an_action(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = ComplexPair::from_complex(&DyadicStep::random(&mut rng, 3, ScalarField::Complex));
            let (z, w) = (random_scalar(&mut rng) * 3.0, random_scalar(&mut rng) * 3.0);
            let lhs = complex_scale(z, &complex_scale(w, &v)).to_complex();
            let rhs = complex_scale(z * w, &v).to_complex();
            prop_assert!(lhs.sup_distance(&rhs).unwrap() < 1e-13);
            // agrees with native complex multiplication
            let native = v.to_complex().axpy(z - 1.0, &v.to_complex()).unwrap();
            prop_assert!(complex_scale(z, &v).to_complex().sup_distance(&native).unwrap() < 1e-13);
        }

        #[test]
        fn theta_grid_bounds(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = ComplexPair::from_complex(&DyadicStep::random(&mut rng, 4, ScalarField::Complex));
            let exact = v.modulus();
            let exact = exact.real_values().unwrap();
            let mut prev: Option<Vec<f64>> = None;
            for k in [8usize, 64, 256] {
                let g = modulus_theta_grid(&v, k).unwrap();
                let g = g.real_values().unwrap().to_vec();
                let bound = 1.0 - (PI / k as f64).cos();
                for (x, m) in g.iter().zip(exact) {
                    prop_assert!(*x <= m + 1e-15);
                    prop_assert!(m - x <= bound * m + 1e-15);
                }
                if let Some(prev) = &prev {
                    for (a, b) in prev.iter().zip(&g) {
                        prop_assert!(a <= b);
                    }
                }
                prev = Some(g);
            }
        }
    }
}
