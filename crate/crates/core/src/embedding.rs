//! The embedding `e_n ↦ g_n / ||g_n||_p` of `ℓ^r` into `L^p[0,1]` built from
//! independent symmetric r-stable columns, and the dyadic disintegration of
//! `L^r[0,1]`.
//!
//! Since `Σ a_j g_j` has the law of `||a||_r g`, the map is an isometry for
//! every `1 <= p < r` (and for `r = 2`, every `p`). Here each column is a
//! Monte Carlo draw of `N` samples and norms are empirical.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::disintegration::{Disintegration, FiniteTree};
use crate::spaces::{check_scalar, DyadicStep, PNorm, ScalarField, SpaceError, StepSpace};
use crate::stable::{independent_family, NormEstimator, SampleVector, Samples, StableError, StableSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbeddingError {
    #[error("need 1 <= p <= r <= 2, got r = {r}, p = {p}")]
    Inadmissible { r: f64, p: f64 },
    #[error("coefficient vector has length {got}, basis has {expected} columns")]
    Dimension { expected: usize, got: usize },
    #[error("need at least one trial")]
    NoTrials,
    #[error(transparent)]
    Stable(#[from] StableError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("i/o: {0}")]
    Io(String),
}

/// Normalized stable columns `f_j = g_j / ||g_j||_p`.
#[derive(Debug, Clone)]
pub struct EmbeddedBasis {
    pub r: f64,
    pub p: PNorm,
    pub field: ScalarField,
    pub seed: u64,
    pub n_samples: usize,
    pub estimator: NormEstimator,
    /// The columns after normalization. Their `spec`, `seed` and `stream_id`
    /// describe the raw draw they were computed from.
    pub basis: Vec<SampleVector>,
    /// Empirical `||g_j||_p` of the raw columns.
    pub norms_used: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Median-of-means with `max(32, N / 1000)` blocks.
///
/// The embedding compares norms of columns that share one law up to scale, so
/// the bias of a many-block median cancels in the ratio while its variance
/// stays small for heavy tails.
pub fn embedding_estimator(n: usize) -> NormEstimator {
    NormEstimator::MedianOfMeans { blocks: (n / 1000).max(NormEstimator::DEFAULT_BLOCKS) }
}

/// Default relative tolerance for [`EmbeddedBasis::verify_isometry`]:
/// `3 N^-(1 - 1/r)`, at least 1%.
pub fn default_tolerance(r: f64, n: usize) -> f64 {
    (3.0 * (n as f64).powf(-(1.0 - 1.0 / r))).max(0.01)
}

/// `(Σ |a_j|^r)^(1/r)`.
pub fn lr_norm(a: &[Complex64], r: f64) -> f64 {
    a.iter().map(|x| x.norm().powf(r)).sum::<f64>().powf(1.0 / r)
}

/// Draws `m` independent r-stable columns of length `N` (streams `0..m` of
/// `seed`) and normalizes each by its own empirical `L^p` norm.
pub fn build_embedding(
    r: f64,
    p: PNorm,
    m: usize,
    n: usize,
    seed: u64,
    field: ScalarField,
) -> Result<EmbeddedBasis, EmbeddingError> {
    if !(p.get() <= r && r <= 2.0) {
        return Err(EmbeddingError::Inadmissible { r, p: p.get() });
    }
    let mut warnings = Vec::new();
    if p.get() == r && r < 2.0 {
        warnings.push(format!(
            "p = r = {r} < 2: the stable columns have infinite L^p norm and the empirical norms grow with N"
        ));
    }
    let spec = StableSpec::new(r, 1.0, field)?;
    let estimator = embedding_estimator(n);
    let raw = independent_family(spec, m, n, seed)?;
    let mut basis = Vec::with_capacity(m);
    let mut norms_used = Vec::with_capacity(m);
    for g in raw {
        let norm = g.samples.lp_norm(p, estimator);
        let samples = g.samples.scale(1.0 / norm);
        norms_used.push(norm);
        basis.push(SampleVector { samples, ..g });
    }
    Ok(EmbeddedBasis { r, p, field, seed, n_samples: n, estimator, basis, norms_used, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryConfig {
    pub r: f64,
    pub p: PNorm,
    pub field: ScalarField,
    pub m: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub trial_seed: u64,
    pub estimator: NormEstimator,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryCase {
    pub label: String,
    pub coefficients: Vec<Complex64>,
    /// `||a||_r`.
    pub target: f64,
    /// Empirical `||Σ a_j f_j||_p`.
    pub empirical: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryReport {
    pub config: IsometryConfig,
    pub cases: Vec<IsometryCase>,
    pub max_relative_error: f64,
    pub mean_relative_error: f64,
    pub tol: f64,
    pub pass: bool,
    pub warnings: Vec<String>,
}

impl IsometryReport {
    /// `trial,label,target,empirical,relative_error` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "trial,label,target,empirical,relative_error")?;
        for (i, c) in self.cases.iter().enumerate() {
            writeln!(w, "{i},{},{},{},{}", c.label, c.target, c.empirical, c.relative_error)?;
        }
        Ok(())
    }
}

impl EmbeddedBasis {
    pub fn m(&self) -> usize {
        self.basis.len()
    }

    /// `Σ a_j f_j`, pointwise.
    pub fn embed(&self, a: &[Complex64]) -> Result<Samples, EmbeddingError> {
        if a.len() != self.m() {
            return Err(EmbeddingError::Dimension { expected: self.m(), got: a.len() });
        }
        for &x in a {
            check_scalar(self.field, x)?;
        }
        let mut acc = Samples::zeros(self.n_samples, self.field);
        for (alpha, f) in a.iter().zip(&self.basis) {
            acc.axpy(*alpha, &f.samples)?;
        }
        Ok(acc)
    }

    pub fn embed_real(&self, a: &[f64]) -> Result<Samples, EmbeddingError> {
        let a: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.embed(&a)
    }

    /// Empirical `||x||_p` under the basis' estimator.
    pub fn norm(&self, x: &Samples) -> f64 {
        x.lp_norm(self.p, self.estimator)
    }

    /// Coefficient vectors used by [`Self::verify_isometry`]: the unit vectors,
    /// all-ones and alternating signs, then `trials` vectors uniform on
    /// `[-1,1]^m` (the unit polydisc over the complex field).
    pub fn test_coefficients(&self, trials: usize, seed: u64) -> Vec<(String, Vec<Complex64>)> {
        let m = self.m();
        let one = Complex64::new(1.0, 0.0);
        let mut out = Vec::new();
        for j in 0..m {
            let mut e = vec![Complex64::default(); m];
            e[j] = one;
            out.push((format!("e{j}"), e));
        }
        out.push(("ones".into(), vec![one; m]));
        out.push(("alternating".into(), (0..m).map(|j| if j % 2 == 0 { one } else { -one }).collect()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in 0..trials {
            let a = (0..m)
                .map(|_| match self.field {
                    ScalarField::Real => Complex64::new(rng.random_range(-1.0..=1.0), 0.0),
                    ScalarField::Complex => loop {
                        let z = Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
                        if z.norm_sqr() <= 1.0 {
                            break z;
                        }
                    },
                })
                .collect();
            out.push((format!("random{t}"), a));
        }
        out
    }

    /// Compares `||Σ a_j f_j||_p` with `||a||_r` over [`Self::test_coefficients`].
    /// `tol = None` uses [`default_tolerance`].
    pub fn verify_isometry(
        &self,
        trials: usize,
        tol: Option<f64>,
        seed: u64,
    ) -> Result<IsometryReport, EmbeddingError> {
        if trials == 0 {
            return Err(EmbeddingError::NoTrials);
        }
        let tol = tol.unwrap_or_else(|| default_tolerance(self.r, self.n_samples));
        let mut cases = Vec::new();
        for (label, a) in self.test_coefficients(trials, seed) {
            let target = lr_norm(&a, self.r);
            let empirical = self.norm(&self.embed(&a)?);
            cases.push(IsometryCase {
                label,
                relative_error: (empirical - target).abs() / target,
                coefficients: a,
                target,
                empirical,
            });
        }
        let max = cases.iter().map(|c| c.relative_error).fold(0.0, f64::max);
        let mean = cases.iter().map(|c| c.relative_error).sum::<f64>() / cases.len() as f64;
        Ok(IsometryReport {
            config: IsometryConfig {
                r: self.r,
                p: self.p,
                field: self.field,
                m: self.m(),
                n_samples: self.n_samples,
                seed: self.seed,
                trial_seed: seed,
                estimator: self.estimator,
            },
            cases,
            max_relative_error: max,
            mean_relative_error: mean,
            tol,
            pass: max <= tol,
            warnings: self.warnings.clone(),
        })
    }
}

/// `σ ↦ 1_{J_σ}` on the full binary tree of the given depth, with `J_∅ = [0,1]`
/// and the children of `J_σ` its left and right halves, as a disintegration of
/// `L^r[0,1]`.
pub fn dyadic_disintegration(r: PNorm, depth: usize) -> Disintegration<StepSpace> {
    Disintegration::from_fn(StepSpace::real(r), FiniteTree::binary(depth), r, |n| {
        let k = n.binary_value().expect("binary tree nodes") as usize;
        DyadicStep::indicator(n.len() as u32, k, k + 1).expect("cell inside level")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pn(p: f64) -> PNorm {
        PNorm::new(p).unwrap()
    }

    #[test]
    fn admissible_region() {
        assert!(matches!(
            build_embedding(1.5, pn(2.0), 2, 100, 1, ScalarField::Real),
            Err(EmbeddingError::Inadmissible { .. })
        ));
        assert!(build_embedding(2.5, pn(1.0), 2, 100, 1, ScalarField::Real).is_err());
        let b = build_embedding(1.5, pn(1.5), 2, 100, 1, ScalarField::Real).unwrap();
        assert_eq!(b.warnings.len(), 1);
        let b = build_embedding(2.0, pn(2.0), 2, 100, 1, ScalarField::Real).unwrap();
        assert!(b.warnings.is_empty());
    }

    #[test]
    fn columns_are_normalized() {
        let b = build_embedding(1.5, pn(1.0), 4, 100_000, 3, ScalarField::Real).unwrap();
        for f in &b.basis {
            assert!((b.norm(&f.samples) - 1.0).abs() <= 1e-9);
        }
        let single = build_embedding(2.0, pn(2.0), 1, 10_000, 3, ScalarField::Real).unwrap();
        assert_eq!(single.m(), 1);
        assert!((single.norm(&single.basis[0].samples) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn raw_gaussian_l1_norms() {
        let b = build_embedding(2.0, pn(1.0), 2, 1_000_000, 8, ScalarField::Real).unwrap();
        for norm in &b.norms_used {
            assert!((norm / (2.0 / PI.sqrt()) - 1.0).abs() < 0.01, "{norm}");
        }
    }

    #[test]
    fn embed_trivial_cases() {
        let b = build_embedding(1.5, pn(1.0), 3, 1000, 1, ScalarField::Real).unwrap();
        let e1 = b.embed_real(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(e1, b.basis[0].samples);
        let z = b.embed_real(&[0.0; 3]).unwrap();
        assert_eq!(b.norm(&z), 0.0);
        assert!(matches!(b.embed_real(&[1.0]), Err(EmbeddingError::Dimension { .. })));
        assert!(b.embed(&[Complex64::i(), Complex64::default(), Complex64::default()]).is_err());
    }

    #[test]
    fn embed_is_linear() {
        let b = build_embedding(1.3, pn(1.2), 4, 5000, 2, ScalarField::Real).unwrap();
        let (a, c) = ([0.3, -1.0, 0.5, 2.0], [1.5, 0.25, -0.75, 0.0]);
        let sum: Vec<f64> = a.iter().zip(&c).map(|(x, y)| x + y).collect();
        let lhs = b.embed_real(&sum).unwrap();
        let mut rhs = b.embed_real(&a).unwrap();
        rhs.axpy(Complex64::new(1.0, 0.0), &b.embed_real(&c).unwrap()).unwrap();
        let (Samples::Real(l), Samples::Real(r)) = (&lhs, &rhs) else { panic!() };
        for (x, y) in l.iter().zip(r) {
            assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn gaussian_pythagoras() {
        let b = build_embedding(2.0, pn(2.0), 2, 1_000_000, 4, ScalarField::Real).unwrap();
        let n = b.norm(&b.embed_real(&[1.0, 1.0]).unwrap());
        assert!((n / 2f64.sqrt() - 1.0).abs() < 0.01, "{n}");
        let b = build_embedding(2.0, pn(1.0), 2, 1_000_000, 4, ScalarField::Real).unwrap();
        let n = b.norm(&b.embed_real(&[3.0, 4.0]).unwrap());
        assert!((n / 5.0 - 1.0).abs() < 0.015, "{n}");
    }

    #[test]
    fn unit_vectors_are_exact_in_report() {
        let b = build_embedding(1.5, pn(1.0), 3, 20_000, 6, ScalarField::Complex).unwrap();
        let rep = b.verify_isometry(2, None, 1).unwrap();
        assert_eq!(rep.cases.len(), 3 + 2 + 2);
        for c in rep.cases.iter().filter(|c| c.label.starts_with('e')) {
            assert!(c.relative_error <= 1e-9, "{c:?}");
        }
        assert_eq!(rep.tol, default_tolerance(1.5, 20_000));
        let mut csv = Vec::new();
        rep.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 8);
        assert!(b.verify_isometry(0, None, 1).is_err());
    }

    #[test]
    fn dyadic_disintegration_norms() {
        let d0 = dyadic_disintegration(pn(2.0), 0);
        assert_eq!(d0.tree().len(), 1);
        assert_eq!(d0.norm_at(&Default::default()), Some(1.0));
        let d1 = dyadic_disintegration(pn(2.0), 1);
        assert!((d1.norm_at(&"0".parse().unwrap()).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let d3 = dyadic_disintegration(pn(1.5), 3);
        for n in d3.tree().nodes() {
            let expect = 2f64.powf(-(n.len() as f64) / 1.5);
            assert!((d3.norm_at(n).unwrap() - expect).abs() < 1e-15);
        }
        assert!(d3.check_summative(0.0).unwrap().pass);
        assert!(d3.check_formally_separating(10, 1e-12, 0).unwrap().pass);
    }
}
