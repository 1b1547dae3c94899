use num_complex::Complex64;

use super::{Disintegration, FiniteTree, Node};
use crate::spaces::{check_scalar, NormedSpace, PNorm, ScalarField, SpaceError};

/// Weighted `ℓ^p` on finitely many coordinates:
/// `||c|| = (Σ w_i |c_i|^p)^(1/p)`. Used as an abstract norm oracle that
/// knows nothing about functions on `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSequenceSpace {
    pub p: PNorm,
    pub field: ScalarField,
    pub weights: Vec<f64>,
}

impl NormedSpace for WeightedSequenceSpace {
    type Vector = Vec<Complex64>;

    fn field(&self) -> ScalarField {
        self.field
    }

    fn norm(&self, v: &Vec<Complex64>) -> f64 {
        let p = self.p.get();
        self.weights.iter().zip(v).map(|(w, c)| w * c.norm().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    fn zero(&self) -> Vec<Complex64> {
        vec![Complex64::default(); self.weights.len()]
    }

    fn axpy(&self, alpha: Complex64, x: &Vec<Complex64>, y: &mut Vec<Complex64>) -> Result<(), SpaceError> {
        check_scalar(self.field, alpha)?;
        if x.len() != y.len() {
            return Err(SpaceError::DimensionMismatch(x.len(), y.len()));
        }
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += alpha * xi;
        }
        Ok(())
    }
}

impl Disintegration<WeightedSequenceSpace> {
    /// `ν ↦ Σ_{terminal λ ⊒ ν} e_λ` in weighted `ℓ^p` over the terminal nodes,
    /// with weight `leaf_weight(λ)` on coordinate `λ`. The norm of node `ν` is
    /// then `(Σ_{λ ⊒ ν} leaf_weight(λ))^(1/p)`.
    pub fn leaf_indicators<F: Fn(&Node) -> f64>(
        tree: FiniteTree,
        p: PNorm,
        field: ScalarField,
        leaf_weight: F,
    ) -> Self {
        let leaves = tree.terminals();
        let weights = leaves.iter().map(&leaf_weight).collect();
        let space = WeightedSequenceSpace { p, field, weights };
        Disintegration::from_fn(space, tree, p, |n| {
            leaves
                .iter()
                .map(|l| if n.is_prefix_of(l) { Complex64::new(1.0, 0.0) } else { Complex64::default() })
                .collect()
        })
    }
}
