//! Symmetric r-stable random variables.
//!
//! Real variates have characteristic function `t -> exp(-σ^r |t|^r)` and are
//! drawn with the Chambers–Mallows–Stuck transform. Complex variates are
//! isotropic, `E exp(i Re(z̄ g)) = exp(-c |z|^r)`, and are drawn as
//! `σ sqrt(2A) (G1 + i G2)` with `A` a positive (r/2)-stable variable whose
//! Laplace transform is `exp(-s^(r/2))`, so that `c = σ^r`.
//!
//! Every [`SampleVector`] is reproducible from `(spec, N, seed, stream_id)`:
//! the stream is a ChaCha8 generator keyed by `seed` with its stream counter
//! set to `stream_id`, so independent streams never depend on evaluation order.

mod export;

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spaces::{check_scalar, NormedSpace, PNorm, ScalarField, SpaceError};

pub use export::{read_binary, SampleHeader};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StableError {
    #[error("stability index r = {0} is outside (0, 2]")]
    InvalidIndex(f64),
    #[error("scale σ = {0} must be a finite nonnegative number")]
    InvalidScale(f64),
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("family size must be at least 1")]
    EmptyFamily,
    #[error("sampler for the {expected} field called with a {got} spec")]
    WrongField { expected: ScalarField, got: ScalarField },
    #[error("malformed sample file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// Wrapper so that `StableError` stays `Clone + PartialEq`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct IoError(pub String);

impl From<std::io::Error> for StableError {
    fn from(e: std::io::Error) -> Self {
        StableError::Io(IoError(e.to_string()))
    }
}

/// Law of a symmetric r-stable variable: index `r`, scale `σ`, field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableSpec {
    r: f64,
    scale: f64,
    field: ScalarField,
}

impl StableSpec {
    pub fn new(r: f64, scale: f64, field: ScalarField) -> Result<Self, StableError> {
        if !(r > 0.0 && r <= 2.0) {
            return Err(StableError::InvalidIndex(r));
        }
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(StableError::InvalidScale(scale));
        }
        Ok(Self { r, scale, field })
    }

    pub fn real(r: f64, scale: f64) -> Result<Self, StableError> {
        Self::new(r, scale, ScalarField::Real)
    }

    pub fn complex(r: f64, scale: f64) -> Result<Self, StableError> {
        Self::new(r, scale, ScalarField::Complex)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn field(&self) -> ScalarField {
        self.field
    }

    /// `exp(-σ^r |z|^r)`.
    pub fn characteristic_function(&self, z: Complex64) -> f64 {
        (-(self.scale.powf(self.r)) * z.norm().powf(self.r)).exp()
    }
}

/// A column of draws: the Monte Carlo stand-in for an element of L^p[0,1].
#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Real(v) => v.len(),
            Samples::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn field(&self) -> ScalarField {
        match self {
            Samples::Real(_) => ScalarField::Real,
            Samples::Complex(_) => ScalarField::Complex,
        }
    }

    pub fn zeros(len: usize, field: ScalarField) -> Self {
        match field {
            ScalarField::Real => Samples::Real(vec![0.0; len]),
            ScalarField::Complex => Samples::Complex(vec![Complex64::new(0.0, 0.0); len]),
        }
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Samples::Real(v) => Some(v),
            Samples::Complex(_) => None,
        }
    }

    /// `|x_i|^p` for every draw.
    fn abs_powers(&self, p: f64) -> Vec<f64> {
        match self {
            Samples::Real(v) => v.iter().map(|x| x.abs().powf(p)).collect(),
            Samples::Complex(v) => v.iter().map(|z| z.norm().powf(p)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Samples {
        match self {
            Samples::Real(v) => Samples::Real(v.iter().map(|x| x * c).collect()),
            Samples::Complex(v) => Samples::Complex(v.iter().map(|z| z * c).collect()),
        }
    }

    /// `self <- self + alpha x`.
    pub fn axpy(&mut self, alpha: Complex64, x: &Samples) -> Result<(), SpaceError> {
        if self.len() != x.len() {
            return Err(SpaceError::DimensionMismatch(self.len(), x.len()));
        }
        let field = self.field().ensure_same(x.field())?;
        check_scalar(field, alpha)?;
        match (self, x) {
            (Samples::Real(y), Samples::Real(x)) => {
                for (yi, xi) in y.iter_mut().zip(x) {
                    *yi += alpha.re * xi;
                }
            }
            (Samples::Complex(y), Samples::Complex(x)) => {
                for (yi, xi) in y.iter_mut().zip(x) {
                    *yi += alpha * xi;
                }
            }
            _ => unreachable!("fields checked above"),
        }
        Ok(())
    }

    /// `(1/N) Σ cos(Re(z̄ x_i))`, the real part of the empirical characteristic
    /// function. For real draws this is `(1/N) Σ cos(t x_i)` with `t = Re z`.
    pub fn empirical_cf(&self, z: Complex64) -> f64 {
        let n = self.len() as f64;
        match self {
            Samples::Real(v) => v.iter().map(|x| (z.re * x).cos()).sum::<f64>() / n,
            Samples::Complex(v) => v.iter().map(|x| (z.conj() * x).re.cos()).sum::<f64>() / n,
        }
    }

    /// Monte Carlo `||x||_p` under the given estimator.
    pub fn lp_norm(&self, p: PNorm, estimator: NormEstimator) -> f64 {
        let p = p.get();
        let powers = self.abs_powers(p);
        let moment = match estimator {
            NormEstimator::PlainMean => mean(&powers),
            NormEstimator::MedianOfMeans { blocks } => median_of_means(&powers, blocks),
        };
        moment.powf(1.0 / p)
    }

    /// Sample covariance of two real columns.
    pub fn covariance(&self, other: &Samples) -> Option<f64> {
        let (a, b) = (self.as_real()?, other.as_real()?);
        if a.len() != b.len() || a.is_empty() {
            return None;
        }
        let (ma, mb) = (mean(a), mean(b));
        Some(a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / a.len() as f64)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Median of the means of `blocks` contiguous blocks (sizes differ by at most
/// one, the larger blocks first).
fn median_of_means(xs: &[f64], blocks: usize) -> f64 {
    let n = xs.len();
    let b = blocks.clamp(1, n.max(1));
    if n == 0 {
        return 0.0;
    }
    let (base, extra) = (n / b, n % b);
    let mut means = Vec::with_capacity(b);
    let mut start = 0;
    for i in 0..b {
        let len = base + usize::from(i < extra);
        means.push(mean(&xs[start..start + len]));
        start += len;
    }
    means.sort_by(f64::total_cmp);
    if b % 2 == 1 {
        means[b / 2]
    } else {
        0.5 * (means[b / 2 - 1] + means[b / 2])
    }
}

/// How a p-th absolute moment is estimated from draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NormEstimator {
    /// The norm of the empirical measure; an exact L^p norm on N atoms.
    PlainMean,
    /// Robust to heavy tails, where the plain mean has infinite variance.
    MedianOfMeans { blocks: usize },
}

impl NormEstimator {
    pub const DEFAULT_BLOCKS: usize = 32;
}

impl Default for NormEstimator {
    fn default() -> Self {
        NormEstimator::MedianOfMeans { blocks: Self::DEFAULT_BLOCKS }
    }
}

/// A Monte Carlo norm together with a flag for moments that do not exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    /// `p >= r` with `r < 2`: the true moment is infinite and the estimate
    /// grows with N.
    pub divergent_moment: bool,
}

/// Draws together with the parameters that regenerate them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector {
    pub spec: StableSpec,
    pub seed: u64,
    pub stream_id: u64,
    pub samples: Samples,
    /// Measured `c` in `exp(-c|z|^r)` for complex draws, from the empirical CF
    /// at `z = 1`.
    pub calibration: Option<f64>,
}

impl SampleVector {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn empirical_cf(&self, z: Complex64) -> f64 {
        self.samples.empirical_cf(z)
    }
}

/// The generator behind stream `stream_id` of `seed`.
pub fn stream_rng(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// One standard (σ = 1) symmetric r-stable variate.
pub fn standard_symmetric_stable<R: Rng + ?Sized>(r: f64, rng: &mut R) -> f64 {
    if r == 2.0 {
        let g: f64 = rng.sample(StandardNormal);
        return SQRT_2 * g;
    }
    let u01: f64 = rng.sample(Open01);
    let u = PI * (u01 - 0.5);
    if r == 1.0 {
        return u.tan();
    }
    let w: f64 = rng.sample(Exp1);
    (r * u).sin() / u.cos().powf(1.0 / r) * (((1.0 - r) * u).cos() / w).powf((1.0 - r) / r)
}

/// Positive a-stable variate with `E exp(-sA) = exp(-s^a)`, `0 < a < 1`
/// (Kanter's representation).
pub fn positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let u01: f64 = rng.sample(Open01);
    let u = PI * u01;
    let w: f64 = rng.sample(Exp1);
    (a * u).sin() / u.sin().powf(1.0 / a) * (((1.0 - a) * u).sin() / w).powf((1.0 - a) / a)
}

/// One isotropic complex variate with `E exp(i Re(z̄ g)) = exp(-|z|^r)`.
pub fn standard_isotropic_stable<R: Rng + ?Sized>(r: f64, rng: &mut R) -> Complex64 {
    let mix = if r == 2.0 { 1.0 } else { positive_stable(r / 2.0, rng) };
    let g1: f64 = rng.sample(StandardNormal);
    let g2: f64 = rng.sample(StandardNormal);
    Complex64::new(g1, g2) * (2.0 * mix).sqrt()
}

/// `N` draws of the law `spec` from stream `stream_id` of `seed`.
///
/// Complex specs are forwarded to [`sample_isotropic_complex_stable`].
pub fn sample_symmetric_stable(
    spec: StableSpec,
    n: usize,
    seed: u64,
    stream_id: u64,
) -> Result<SampleVector, StableError> {
    if spec.field == ScalarField::Complex {
        return sample_isotropic_complex_stable(spec, n, seed, stream_id);
    }
    if n == 0 {
        return Err(StableError::NoSamples);
    }
    let mut rng = stream_rng(seed, stream_id);
    let sigma = spec.scale;
    let samples = (0..n).map(|_| sigma * standard_symmetric_stable(spec.r, &mut rng)).collect();
    Ok(SampleVector { spec, seed, stream_id, samples: Samples::Real(samples), calibration: None })
}

pub fn sample_isotropic_complex_stable(
    spec: StableSpec,
    n: usize,
    seed: u64,
    stream_id: u64,
) -> Result<SampleVector, StableError> {
    if spec.field != ScalarField::Complex {
        return Err(StableError::WrongField { expected: ScalarField::Complex, got: spec.field });
    }
    if n == 0 {
        return Err(StableError::NoSamples);
    }
    let mut rng = stream_rng(seed, stream_id);
    let sigma = spec.scale;
    let samples = Samples::Complex((0..n).map(|_| standard_isotropic_stable(spec.r, &mut rng) * sigma).collect());
    let calibration = Some(measured_calibration(&samples));
    Ok(SampleVector { spec, seed, stream_id, samples, calibration })
}

/// `-ln(empirical CF at z = 1)`, which estimates `c` since `|1|^r = 1`.
fn measured_calibration(samples: &Samples) -> f64 {
    let cf = samples.empirical_cf(Complex64::new(1.0, 0.0));
    if cf > 0.0 {
        -cf.ln()
    } else {
        f64::INFINITY
    }
}

pub fn empirical_cf(sv: &SampleVector, z: Complex64) -> f64 {
    sv.empirical_cf(z)
}

/// Median-of-means (32 blocks) estimate of `||g||_p`.
pub fn empirical_lp_norm(sv: &SampleVector, p: PNorm) -> NormEstimate {
    empirical_lp_norm_with(sv, p, NormEstimator::default())
}

pub fn empirical_lp_norm_with(sv: &SampleVector, p: PNorm, estimator: NormEstimator) -> NormEstimate {
    let r = sv.spec.r;
    NormEstimate { value: sv.samples.lp_norm(p, estimator), divergent_moment: r < 2.0 && p.get() >= r }
}

/// `m` independent columns of the law `spec`: streams `0..m` of one seed.
pub fn independent_family(spec: StableSpec, m: usize, n: usize, seed: u64) -> Result<Vec<SampleVector>, StableError> {
    if m == 0 {
        return Err(StableError::EmptyFamily);
    }
    (0..m as u64).map(|stream| sample_symmetric_stable(spec, n, seed, stream)).collect()
}

/// L^p of the sample space, with the norm of a column given by an estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSpace {
    pub p: PNorm,
    pub field: ScalarField,
    pub len: usize,
    pub estimator: NormEstimator,
}

impl NormedSpace for SampleSpace {
    type Vector = Samples;

    fn field(&self) -> ScalarField {
        self.field
    }

    fn norm(&self, v: &Samples) -> f64 {
        v.lp_norm(self.p, self.estimator)
    }

    fn zero(&self) -> Samples {
        Samples::zeros(self.len, self.field)
    }

    fn axpy(&self, alpha: Complex64, x: &Samples, y: &mut Samples) -> Result<(), SpaceError> {
        y.axpy(alpha, x)
    }
}
