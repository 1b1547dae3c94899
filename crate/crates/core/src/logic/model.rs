use std::collections::BTreeMap;
use std::ops::Range;

use serde::Serialize;

use super::{Language, LogicError};
use crate::spaces::PNorm;

/// Slack on `||c|| <= 1` for constants, absorbing rounding in constructed models.
pub const BALL_SLACK: f64 = 1e-9;

/// `R^d` with pointwise order and `||x|| = (Σ w_i |x_i|^p)^{1/p}`: the space
/// `L^p` of a measure with atoms of mass `w_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModel {
    p: PNorm,
    weights: Vec<f64>,
}

impl LatticeModel {
    pub fn new(p: PNorm, weights: Vec<f64>) -> Result<Self, LogicError> {
        if weights.is_empty() {
            return Err(LogicError::InvalidModel("no coordinates".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(LogicError::InvalidModel(format!("weight {w} is not positive")));
        }
        Ok(Self { p, weights })
    }

    /// `l^p_d`.
    pub fn lp(p: PNorm, dim: usize) -> Result<Self, LogicError> {
        Self::new(p, vec![1.0; dim])
    }

    /// Step functions on the `2^level` dyadic cells of `[0, 1]`.
    pub fn dyadic(p: PNorm, level: u32) -> Result<Self, LogicError> {
        let n = 1usize << level;
        Self::new(p, vec![1.0 / n as f64; n])
    }

    /// The empirical measure of `n` draws.
    pub fn empirical(p: PNorm, n: usize) -> Result<Self, LogicError> {
        Self::new(p, vec![1.0 / n as f64; n])
    }

    pub fn p(&self) -> PNorm {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_i |x_i|^p`.
    pub fn norm_pow(&self, x: &[f64]) -> f64 {
        let p = self.p.get();
        let w = &self.weights;
        if p == 1.0 {
            x.iter().zip(w).map(|(a, w)| w * a.abs()).sum()
        } else if p == 2.0 {
            x.iter().zip(w).map(|(a, w)| w * a * a).sum()
        } else {
            x.iter().zip(w).map(|(a, w)| w * a.abs().powf(p)).sum()
        }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        let p = self.p.get();
        let s = self.norm_pow(x);
        if p == 1.0 {
            s
        } else if p == 2.0 {
            s.sqrt()
        } else {
            s.powf(1.0 / p)
        }
    }

    /// `d(x, y) = ½ ||x - y||`.
    pub fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        0.5 * self.norm(&diff)
    }

    /// `||u + i v||` in the complexified space with `|u + i v|` taken pointwise.
    pub fn complex_norm(&self, u: &[f64], v: &[f64]) -> f64 {
        let m: Vec<f64> = u.iter().zip(v).map(|(a, b)| a.hypot(*b)).collect();
        self.norm(&m)
    }

    /// Contiguous blocks of near-equal size, at most `k` of them.
    pub fn blocks(&self, k: usize) -> Vec<Range<usize>> {
        let d = self.dim();
        let k = k.clamp(1, d);
        (0..k).map(|b| (b * d / k)..((b + 1) * d / k)).collect()
    }

    /// The sublattice of functions constant on each block, as a model of its own.
    pub fn coarsen(&self, blocks: &[Range<usize>]) -> Self {
        Self { p: self.p, weights: blocks.iter().map(|r| self.weights[r.clone()].iter().sum()).collect() }
    }

    /// Rescales `x` into the unit ball if it lies outside.
    pub fn clamp_to_ball(&self, x: &mut [f64]) {
        let n = self.norm(x);
        if n > 1.0 {
            for v in x.iter_mut() {
                *v /= n;
            }
        }
    }
}

/// How the predicate `||u, v||₊` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplexReading {
    /// `|| (u² + v²)^{1/2} ||`.
    #[default]
    Genuine,
    /// `||u|| + ||v||`, which is not a complex L^p norm.
    SumOfParts,
}

#[derive(Debug, Clone, PartialEq)]
enum ConstValue {
    Zero,
    Vector(Vec<f64>),
}

/// A lattice model with named constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpretation {
    model: LatticeModel,
    constants: BTreeMap<String, ConstValue>,
    norms: BTreeMap<String, f64>,
    complex: ComplexReading,
}

impl Interpretation {
    pub fn new(model: LatticeModel) -> Self {
        Self { model, constants: BTreeMap::new(), norms: BTreeMap::new(), complex: ComplexReading::Genuine }
    }

    pub fn with_complex_reading(mut self, reading: ComplexReading) -> Self {
        self.complex = reading;
        self
    }

    pub fn with_constant(mut self, name: &str, values: Vec<f64>) -> Result<Self, LogicError> {
        self.set_constant(name, values)?;
        Ok(self)
    }

    /// Interprets `name` as a vector of the unit ball.
    pub fn set_constant(&mut self, name: &str, values: Vec<f64>) -> Result<(), LogicError> {
        if values.len() != self.model.dim() {
            return Err(LogicError::Dimension { expected: self.model.dim(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LogicError::InvalidModel(format!("constant {name} has non-finite entries")));
        }
        let n = self.model.norm(&values);
        if n > 1.0 + BALL_SLACK {
            return Err(LogicError::InvalidModel(format!("constant {name} has norm {n}, outside the unit ball")));
        }
        self.norms.insert(name.to_string(), n);
        self.constants.insert(name.to_string(), ConstValue::Vector(values));
        Ok(())
    }

    /// Interprets `name` as the zero vector without storing it.
    pub fn set_zero_constant(&mut self, name: &str) {
        self.norms.insert(name.to_string(), 0.0);
        self.constants.insert(name.to_string(), ConstValue::Zero);
    }

    pub fn model(&self) -> &LatticeModel {
        &self.model
    }

    /// Replaces the measure, keeping the constants.
    pub fn with_model(mut self, model: LatticeModel) -> Result<Self, LogicError> {
        if model.dim() != self.model.dim() {
            return Err(LogicError::Dimension { expected: self.model.dim(), got: model.dim() });
        }
        self.model = model;
        let names: Vec<String> = self.constants.keys().cloned().collect();
        for n in names {
            let norm = match &self.constants[&n] {
                ConstValue::Zero => 0.0,
                ConstValue::Vector(v) => self.model.norm(v),
            };
            self.norms.insert(n, norm);
        }
        Ok(self)
    }

    pub fn complex_reading(&self) -> ComplexReading {
        self.complex
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn has_constant(&self, name: &str) -> bool {
        self.constants.contains_key(name)
    }

    pub fn constant_names(&self) -> impl Iterator<Item = &str> {
        self.constants.keys().map(String::as_str)
    }

    /// The value of a constant; `None` for unknown names.
    pub fn constant(&self, name: &str) -> Option<Vec<f64>> {
        self.constants.get(name).map(|c| match c {
            ConstValue::Zero => vec![0.0; self.model.dim()],
            ConstValue::Vector(v) => v.clone(),
        })
    }

    pub(crate) fn constant_ref(&self, name: &str) -> Option<Option<&[f64]>> {
        self.constants.get(name).map(|c| match c {
            ConstValue::Zero => None,
            ConstValue::Vector(v) => Some(v.as_slice()),
        })
    }

    pub fn constant_norm(&self, name: &str) -> Option<f64> {
        self.norms.get(name).copied()
    }

    pub fn language(&self) -> Language {
        Language::lp_complex().with_constants(self.constants.keys().cloned())
    }

    pub(crate) fn pair_norm(&self, model: &LatticeModel, u: &[f64], v: &[f64]) -> f64 {
        match self.complex {
            ComplexReading::Genuine => model.complex_norm(u, v),
            ComplexReading::SumOfParts => model.norm(u) + model.norm(v),
        }
    }
}

/// Reweights the measure of `model` so that `||x_k|| = target_k` holds for
/// each constraint, moving the weights as little as possible in Euclidean
/// distance. Each constraint is linear in the weights (`Σ w_i |x_{k,i}|^p =
/// target_k^p`); two Newton passes absorb rounding.
pub fn calibrate_weights(model: &LatticeModel, constraints: &[(&[f64], f64)]) -> Result<LatticeModel, LogicError> {
    let p = model.p().get();
    let d = model.dim();
    let rows: Vec<Vec<f64>> = constraints
        .iter()
        .map(|(x, _)| {
            if x.len() != d {
                return Err(LogicError::Dimension { expected: d, got: x.len() });
            }
            Ok(x.iter().map(|v| v.abs().powf(p)).collect())
        })
        .collect::<Result<_, _>>()?;
    let targets: Vec<f64> = constraints.iter().map(|(_, t)| t.powf(p)).collect();
    let k = rows.len();
    let mut gram = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let g: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            gram[i][j] = g;
            gram[j][i] = g;
        }
    }
    let mut w = model.weights().to_vec();
    for _ in 0..2 {
        let resid: Vec<f64> =
            rows.iter().zip(&targets).map(|(row, t)| t - row.iter().zip(&w).map(|(a, w)| a * w).sum::<f64>()).collect();
        let lambda = solve_dense(gram.clone(), resid)?;
        for (i, wi) in w.iter_mut().enumerate() {
            *wi += rows.iter().zip(&lambda).map(|(row, l)| row[i] * l).sum::<f64>();
        }
    }
    LatticeModel::new(model.p(), w)
        .map_err(|_| LogicError::InvalidModel("calibration produced a non-positive weight".into()))
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, LogicError> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).expect("non-empty range");
        if a[piv][col].abs() < 1e-300 {
            return Err(LogicError::InvalidModel("calibration constraints are dependent".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}
