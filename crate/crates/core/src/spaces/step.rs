use num_complex::Complex64;
use rand::Rng;

use super::{check_scalar, PNorm, ScalarField, SpaceError};

/// Finest partition level a step function may use (2^24 cells).
pub const MAX_LEVEL: u32 = 24;

#[derive(Debug, Clone, PartialEq)]
pub enum StepValues {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl StepValues {
    fn len(&self) -> usize {
        match self {
            StepValues::Real(v) => v.len(),
            StepValues::Complex(v) => v.len(),
        }
    }
}

/// A step function on [0,1] that is constant on each dyadic cell of one level.
///
/// `values[k]` is the value on `[k 2^-level, (k+1) 2^-level)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicStep {
    level: u32,
    values: StepValues,
}

fn check_len(level: u32, got: usize) -> Result<(), SpaceError> {
    if level > MAX_LEVEL {
        return Err(SpaceError::LevelTooLarge(level));
    }
    let expected = 1usize << level;
    if got != expected {
        return Err(SpaceError::LengthMismatch { level, expected, got });
    }
    Ok(())
}

impl DyadicStep {
    pub fn real(level: u32, values: Vec<f64>) -> Result<Self, SpaceError> {
        check_len(level, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SpaceError::NonFinite);
        }
        Ok(Self { level, values: StepValues::Real(values) })
    }

    pub fn complex(level: u32, values: Vec<Complex64>) -> Result<Self, SpaceError> {
        check_len(level, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SpaceError::NonFinite);
        }
        Ok(Self { level, values: StepValues::Complex(values) })
    }

    pub fn zero(level: u32, field: ScalarField) -> Self {
        let n = 1usize << level.min(MAX_LEVEL);
        let values = match field {
            ScalarField::Real => StepValues::Real(vec![0.0; n]),
            ScalarField::Complex => StepValues::Complex(vec![Complex64::new(0.0, 0.0); n]),
        };
        Self { level: level.min(MAX_LEVEL), values }
    }

    pub fn constant(level: u32, c: f64) -> Result<Self, SpaceError> {
        Self::real(level, vec![c; 1usize << level.min(MAX_LEVEL)])
    }

    /// The indicator of `[start 2^-level, end 2^-level)`.
    pub fn indicator(level: u32, start: usize, end: usize) -> Result<Self, SpaceError> {
        if level > MAX_LEVEL {
            return Err(SpaceError::LevelTooLarge(level));
        }
        let n = 1usize << level;
        if start > end || end > n {
            return Err(SpaceError::CellRange { level, start, end });
        }
        let values = (0..n).map(|k| if (start..end).contains(&k) { 1.0 } else { 0.0 }).collect();
        Self::real(level, values)
    }

    /// Independent uniform values in `[-1, 1]` (or the unit disc) on every cell.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, level: u32, field: ScalarField) -> Self {
        let level = level.min(MAX_LEVEL);
        let n = 1usize << level;
        match field {
            ScalarField::Real => {
                Self { level, values: StepValues::Real((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()) }
            }
            ScalarField::Complex => {
                Self { level, values: StepValues::Complex((0..n).map(|_| random_disc(rng)).collect()) }
            }
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn field(&self) -> ScalarField {
        match self.values {
            StepValues::Real(_) => ScalarField::Real,
            StepValues::Complex(_) => ScalarField::Complex,
        }
    }

    pub fn values(&self) -> &StepValues {
        &self.values
    }

    pub fn real_values(&self) -> Option<&[f64]> {
        match &self.values {
            StepValues::Real(v) => Some(v),
            StepValues::Complex(_) => None,
        }
    }

    /// Cell values as complex numbers (real vectors get a zero imaginary part).
    pub fn complex_values(&self) -> Vec<Complex64> {
        match &self.values {
            StepValues::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            StepValues::Complex(v) => v.clone(),
        }
    }

    /// The same function viewed as a complex vector.
    pub fn to_complex(&self) -> DyadicStep {
        DyadicStep { level: self.level, values: StepValues::Complex(self.complex_values()) }
    }

    /// Value on cell `k` of level `level`, where `level >= self.level`.
    fn cell(&self, level: u32, k: usize) -> Complex64 {
        let idx = k >> (level - self.level);
        match &self.values {
            StepValues::Real(v) => Complex64::new(v[idx], 0.0),
            StepValues::Complex(v) => v[idx],
        }
    }

    fn real_cell(&self, level: u32, k: usize) -> f64 {
        match &self.values {
            StepValues::Real(v) => v[k >> (level - self.level)],
            StepValues::Complex(_) => unreachable!("real_cell on a complex step"),
        }
    }

    /// Pointwise modulus at cell `k` of `level`.
    fn abs_cell(&self, level: u32, k: usize) -> f64 {
        match &self.values {
            StepValues::Real(v) => v[k >> (level - self.level)].abs(),
            StepValues::Complex(v) => v[k >> (level - self.level)].norm(),
        }
    }

    /// The same function written on the finer partition of level `m`.
    pub fn refine(&self, m: u32) -> Result<Self, SpaceError> {
        if m < self.level {
            return Err(SpaceError::CoarserRefinement { from: self.level, to: m });
        }
        if m > MAX_LEVEL {
            return Err(SpaceError::LevelTooLarge(m));
        }
        let n = 1usize << m;
        let values = match &self.values {
            StepValues::Real(_) => StepValues::Real((0..n).map(|k| self.real_cell(m, k)).collect()),
            StepValues::Complex(_) => StepValues::Complex((0..n).map(|k| self.cell(m, k)).collect()),
        };
        Ok(Self { level: m, values })
    }

    /// `(sum_k |v_k|^p 2^-level)^(1/p)`.
    pub fn lp_norm(&self, p: PNorm) -> f64 {
        let p = p.get();
        let sum: f64 = match &self.values {
            StepValues::Real(v) => v.iter().map(|x| pow_abs(x.abs(), p)).sum(),
            StepValues::Complex(v) => v.iter().map(|z| pow_abs(z.norm(), p)).sum(),
        };
        let integral = sum * (-(self.level as f64)).exp2();
        if p == 1.0 {
            integral
        } else {
            integral.powf(1.0 / p)
        }
    }

    /// Pointwise modulus `t -> |f(t)|` as a real step function.
    pub fn modulus(&self) -> DyadicStep {
        let values = match &self.values {
            StepValues::Real(v) => v.iter().map(|x| x.abs()).collect(),
            StepValues::Complex(v) => v.iter().map(|z| z.norm()).collect(),
        };
        DyadicStep { level: self.level, values: StepValues::Real(values) }
    }

    pub fn scale(&self, c: f64) -> DyadicStep {
        let values = match &self.values {
            StepValues::Real(v) => StepValues::Real(v.iter().map(|x| c * x).collect()),
            StepValues::Complex(v) => StepValues::Complex(v.iter().map(|z| z * c).collect()),
        };
        DyadicStep { level: self.level, values }
    }

    /// `self + alpha x`, computed at the finer of the two levels.
    pub fn axpy(&self, alpha: Complex64, x: &DyadicStep) -> Result<DyadicStep, SpaceError> {
        let field = self.field().ensure_same(x.field())?;
        check_scalar(field, alpha)?;
        let level = self.level.max(x.level);
        let n = 1usize << level;
        let values = match field {
            ScalarField::Real => {
                StepValues::Real((0..n).map(|k| self.real_cell(level, k) + alpha.re * x.real_cell(level, k)).collect())
            }
            ScalarField::Complex => {
                StepValues::Complex((0..n).map(|k| self.cell(level, k) + alpha * x.cell(level, k)).collect())
            }
        };
        Ok(DyadicStep { level, values })
    }

    pub fn try_add(&self, other: &DyadicStep) -> Result<DyadicStep, SpaceError> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn try_sub(&self, other: &DyadicStep) -> Result<DyadicStep, SpaceError> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// Exact equality of the represented functions (levels may differ).
    pub fn same_function(&self, other: &DyadicStep) -> bool {
        if self.field() != other.field() {
            return false;
        }
        let level = self.level.max(other.level);
        (0..1usize << level).all(|k| self.cell(level, k) == other.cell(level, k))
    }

    /// Largest pointwise deviation `sup_t |f(t) - g(t)|`.
    pub fn sup_distance(&self, other: &DyadicStep) -> Result<f64, SpaceError> {
        self.field().ensure_same(other.field())?;
        let level = self.level.max(other.level);
        Ok((0..1usize << level).map(|k| (self.cell(level, k) - other.cell(level, k)).norm()).fold(0.0, f64::max))
    }

    fn zip_real(&self, other: &DyadicStep, f: impl Fn(f64, f64) -> f64) -> Result<DyadicStep, SpaceError> {
        if self.field() != ScalarField::Real || other.field() != ScalarField::Real {
            return Err(SpaceError::ComplexLattice);
        }
        let level = self.level.max(other.level);
        let values = (0..1usize << level).map(|k| f(self.real_cell(level, k), other.real_cell(level, k))).collect();
        Ok(DyadicStep { level, values: StepValues::Real(values) })
    }

    fn map_real(&self, f: impl Fn(f64) -> f64) -> Result<DyadicStep, SpaceError> {
        match &self.values {
            StepValues::Real(v) => {
                Ok(DyadicStep { level: self.level, values: StepValues::Real(v.iter().map(|&x| f(x)).collect()) })
            }
            StepValues::Complex(_) => Err(SpaceError::ComplexLattice),
        }
    }

    /// Pointwise minimum `f ∧ g`.
    pub fn meet(&self, other: &DyadicStep) -> Result<DyadicStep, SpaceError> {
        self.zip_real(other, f64::min)
    }

    /// Pointwise maximum `f ∨ g`.
    pub fn join(&self, other: &DyadicStep) -> Result<DyadicStep, SpaceError> {
        self.zip_real(other, f64::max)
    }

    /// `|f| = f ∨ (-f)`.
    pub fn abs(&self) -> Result<DyadicStep, SpaceError> {
        self.join(&self.scale(-1.0))
    }

    /// `f⁺ = f ∨ 0`.
    pub fn pos_part(&self) -> Result<DyadicStep, SpaceError> {
        self.map_real(|x| x.max(0.0))
    }

    /// `f⁻ = (-f) ∨ 0`.
    pub fn neg_part(&self) -> Result<DyadicStep, SpaceError> {
        self.map_real(|x| (-x).max(0.0))
    }

    /// `f <= g` pointwise.
    pub fn le(&self, other: &DyadicStep) -> Result<bool, SpaceError> {
        let diff = self.zip_real(other, |a, b| if a <= b { 0.0 } else { 1.0 })?;
        Ok(diff.real_values().unwrap_or(&[]).iter().all(|&x| x == 0.0))
    }

    /// Indices of cells (at this vector's level) where the value is nonzero.
    pub fn support_cells(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.abs_cell(self.level, k) != 0.0).collect()
    }
}

fn pow_abs(a: f64, p: f64) -> f64 {
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else {
        a.powf(p)
    }
}

pub(crate) fn random_disc<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    loop {
        let z = Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        if z.norm_sqr() <= 1.0 {
            return z;
        }
    }
}

/// `|f| ∧ |g| = 0`, tested exactly at the common refinement level.
///
/// Complex inputs are compared through their pointwise moduli.
pub fn is_disjointly_supported(f: &DyadicStep, g: &DyadicStep) -> Result<bool, SpaceError> {
    f.field().ensure_same(g.field())?;
    let level = f.level.max(g.level);
    Ok((0..1usize << level).all(|k| f.abs_cell(level, k).min(g.abs_cell(level, k)) == 0.0))
}

/// Splits two vectors into disjointly supported ones by zeroing, at every
/// point, each coordinate whose modulus does not strictly exceed the other's.
///
/// Ties zero both outputs. The result satisfies
/// `max_j ||g_j - f_j||_p <= || |f0| ∧ |f1| ||_p` for every `p >= 1`.
pub fn disjointify(f0: &DyadicStep, f1: &DyadicStep) -> Result<(DyadicStep, DyadicStep), SpaceError> {
    let field = f0.field().ensure_same(f1.field())?;
    let level = f0.level.max(f1.level);
    let n = 1usize << level;
    let keep = |k: usize, mine: &DyadicStep, theirs: &DyadicStep| mine.abs_cell(level, k) > theirs.abs_cell(level, k);
    let build = |mine: &DyadicStep, theirs: &DyadicStep| -> DyadicStep {
        let values = match field {
            ScalarField::Real => StepValues::Real(
                (0..n).map(|k| if keep(k, mine, theirs) { mine.real_cell(level, k) } else { 0.0 }).collect(),
            ),
            ScalarField::Complex => StepValues::Complex(
                (0..n)
                    .map(|k| if keep(k, mine, theirs) { mine.cell(level, k) } else { Complex64::new(0.0, 0.0) })
                    .collect(),
            ),
        };
        DyadicStep { level, values }
    };
    Ok((build(f0, f1), build(f1, f0)))
}
