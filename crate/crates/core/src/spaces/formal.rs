use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::step::random_disc;
use super::{DyadicStep, NormedSpace, PNorm, ScalarField, SpaceError, StepSpace};

/// Outcome of a randomized test of the identity
/// `||sum_j a_j v_j||^p = sum_j |a_j|^p ||v_j||^p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormalDisjointness {
    pub holds: bool,
    pub worst_residual: f64,
    pub worst_coefficients: Vec<Complex64>,
    pub tuples_checked: usize,
}

/// Scalar tuples used to probe formal disjointness of `n` vectors.
///
/// The deterministic part covers all-ones, alternating signs and every pair
/// `(1, ±1)` (plus `(1, ±i)` over the complex field); `trials` further tuples
/// are drawn uniformly from `[-1,1]^n` or the unit polydisc.
pub fn coefficient_tuples<R: Rng + ?Sized>(
    n: usize,
    field: ScalarField,
    trials: usize,
    rng: &mut R,
) -> Vec<Vec<Complex64>> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    out.push(vec![one; n]);
    out.push((0..n).map(|j| if j % 2 == 0 { one } else { -one }).collect());
    let mut partners = vec![one, -one];
    if field == ScalarField::Complex {
        partners.push(Complex64::i());
        partners.push(-Complex64::i());
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for &b in &partners {
                let mut t = vec![zero; n];
                t[i] = one;
                t[j] = b;
                out.push(t);
            }
        }
    }
    for _ in 0..trials {
        out.push(
            (0..n)
                .map(|_| match field {
                    ScalarField::Real => Complex64::new(rng.random_range(-1.0..=1.0), 0.0),
                    ScalarField::Complex => random_disc(rng),
                })
                .collect(),
        );
    }
    out
}

/// Randomized refutation test of `L^p`-formal disjointness for vectors of an
/// arbitrary normed space. `exponent` is the `p` of the identity, which need
/// not be the exponent of the space's own norm.
pub fn check_formal_disjointness<S: NormedSpace>(
    space: &S,
    vs: &[S::Vector],
    exponent: PNorm,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<FormalDisjointness, SpaceError> {
    let p = exponent.get();
    let norms_p: Vec<f64> = vs.iter().map(|v| space.norm(v).powf(p)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tuples = coefficient_tuples(vs.len(), space.field(), trials, &mut rng);
    let mut worst = 0.0f64;
    let mut worst_coefficients = Vec::new();
    for alphas in &tuples {
        let residual = residual_with_norms(space, vs, &norms_p, alphas, p)?;
        if residual > worst || worst_coefficients.is_empty() {
            worst = worst.max(residual);
            worst_coefficients = alphas.clone();
        }
    }
    Ok(FormalDisjointness {
        holds: worst <= tol,
        worst_residual: worst,
        worst_coefficients,
        tuples_checked: tuples.len(),
    })
}

/// `| ||Σ α_j v_j||^p - Σ |α_j|^p ||v_j||^p |` for one tuple of scalars.
pub fn formal_residual<S: NormedSpace>(
    space: &S,
    vs: &[S::Vector],
    alphas: &[Complex64],
    exponent: PNorm,
) -> Result<f64, SpaceError> {
    let p = exponent.get();
    let norms_p: Vec<f64> = vs.iter().map(|v| space.norm(v).powf(p)).collect();
    residual_with_norms(space, vs, &norms_p, alphas, p)
}

fn residual_with_norms<S: NormedSpace>(
    space: &S,
    vs: &[S::Vector],
    norms_p: &[f64],
    alphas: &[Complex64],
    p: f64,
) -> Result<f64, SpaceError> {
    let terms: Vec<(Complex64, &S::Vector)> = alphas.iter().copied().zip(vs.iter()).collect();
    let combo = space.linear_combination(&terms)?;
    let lhs = space.norm(&combo).powf(p);
    let rhs: f64 = alphas.iter().zip(norms_p).map(|(a, n)| a.norm().powf(p) * n).sum();
    Ok((lhs - rhs).abs())
}

/// Formal disjointness of step functions with respect to their own L^p norm.
pub fn is_formally_disjoint(
    vs: &[DyadicStep],
    p: PNorm,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<FormalDisjointness, SpaceError> {
    let field = vs.first().map_or(ScalarField::Real, DyadicStep::field);
    for v in vs {
        field.ensure_same(v.field())?;
    }
    check_formal_disjointness(&StepSpace::new(p, field), vs, p, trials, tol, seed)
}
