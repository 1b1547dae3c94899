use std::collections::BTreeMap;
use std::ops::AddAssign;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{DisintegrationError, FiniteTree, Node};
use crate::spaces::{check_formal_disjointness, formal_residual, random_disc, NormedSpace, PNorm, ScalarField};

/// Above this many maximal antichains the separation check samples instead of
/// enumerating.
pub const ANTICHAIN_CAP: u64 = 10_000;

/// Above this many incomparable pairs the separation check samples pairs.
pub const PAIR_CAP: usize = 50_000;

/// A map from the nodes of a finite tree into a normed space.
#[derive(Debug, Clone)]
pub struct Disintegration<S: NormedSpace> {
    space: S,
    tree: FiniteTree,
    assign: BTreeMap<Node, S::Vector>,
    exponent: PNorm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummativeReport {
    pub pass: bool,
    pub nodes_checked: usize,
    pub worst_residual: f64,
    pub worst_node: Option<Node>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparatingReport {
    pub pass: bool,
    /// All maximal antichains were enumerated (otherwise they were sampled).
    pub exhaustive: bool,
    pub pairs_checked: usize,
    pub antichains_checked: usize,
    pub worst_residual: f64,
    pub worst_nodes: Vec<Node>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonzeroReport {
    pub pass: bool,
    pub zero_nodes: Vec<Node>,
    pub smallest_norm: f64,
}

impl<S: NormedSpace> Disintegration<S> {
    pub fn new(
        space: S,
        tree: FiniteTree,
        assign: BTreeMap<Node, S::Vector>,
        exponent: PNorm,
    ) -> Result<Self, DisintegrationError> {
        if let Some(n) = tree.nodes().find(|n| !assign.contains_key(n)) {
            return Err(DisintegrationError::MissingVector(n.clone()));
        }
        if let Some(n) = assign.keys().find(|n| !tree.contains(n)) {
            return Err(DisintegrationError::ExtraVector(n.clone()));
        }
        Ok(Self { space, tree, assign, exponent })
    }

    pub fn from_fn<F: FnMut(&Node) -> S::Vector>(space: S, tree: FiniteTree, exponent: PNorm, mut f: F) -> Self {
        let assign = tree.nodes().map(|n| (n.clone(), f(n))).collect();
        Self { space, tree, assign, exponent }
    }

    pub fn space(&self) -> &S {
        &self.space
    }

    pub fn tree(&self) -> &FiniteTree {
        &self.tree
    }

    pub fn exponent(&self) -> PNorm {
        self.exponent
    }

    pub fn vector(&self, n: &Node) -> Option<&S::Vector> {
        self.assign.get(n)
    }

    pub fn norm_at(&self, n: &Node) -> Option<f64> {
        self.assign.get(n).map(|v| self.space.norm(v))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Node, &S::Vector)> {
        self.assign.iter()
    }

    /// Replaces the vector at one node.
    pub fn set(&mut self, n: &Node, v: S::Vector) -> Result<(), DisintegrationError> {
        match self.assign.get_mut(n) {
            Some(slot) => {
                *slot = v;
                Ok(())
            }
            None => Err(DisintegrationError::UnknownNode(n.clone())),
        }
    }

    /// `Σ α_ν φ(ν)`; absent nodes count as 0.
    pub fn combine(&self, coeffs: &BTreeMap<Node, Complex64>) -> Result<S::Vector, DisintegrationError> {
        let mut acc = self.space.zero();
        for (n, alpha) in coeffs {
            let v = self.assign.get(n).ok_or_else(|| DisintegrationError::UnknownNode(n.clone()))?;
            self.space.axpy(*alpha, v, &mut acc)?;
        }
        Ok(acc)
    }

    /// `||φ(ν) - Σ_children φ(ν')|| <= tol` at every non-terminal node.
    pub fn check_summative(&self, tol: f64) -> Result<SummativeReport, DisintegrationError> {
        let mut worst = 0.0f64;
        let mut worst_node = None;
        let mut checked = 0;
        for n in self.tree.nodes() {
            let kids = self.tree.children(n);
            if kids.is_empty() {
                continue;
            }
            checked += 1;
            let residual = self.space.norm(&self.combine(&summation_relation(&self.tree, n))?);
            if residual > worst || worst_node.is_none() {
                worst = worst.max(residual);
                worst_node = Some(n.clone());
            }
        }
        Ok(SummativeReport { pass: worst <= tol, nodes_checked: checked, worst_residual: worst, worst_node, tol })
    }

    /// Randomized test that every antichain of nodes is formally disjoint for
    /// the exponent of the disintegration.
    ///
    /// Incomparable pairs are checked with the deterministic pair tuples.
    /// Maximal antichains (whose subsets inherit the identity by zeroing
    /// coefficients) are enumerated when there are at most [`ANTICHAIN_CAP`]
    /// of them, and otherwise `trials` of them are drawn at random; each gets
    /// the all-ones and alternating tuples plus `trials` random tuples.
    pub fn check_formally_separating(
        &self,
        trials: usize,
        tol: f64,
        seed: u64,
    ) -> Result<SeparatingReport, DisintegrationError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes: Vec<&Node> = self.tree.nodes().collect();
        let mut worst = 0.0f64;
        let mut worst_nodes = Vec::new();
        let mut note = |residual: f64, ns: Vec<Node>| {
            if residual > worst || worst_nodes.is_empty() {
                worst = worst.max(residual);
                worst_nodes = ns;
            }
        };

        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                if !nodes[i].comparable(nodes[j]) {
                    pairs.push((i, j));
                }
            }
        }
        if pairs.len() > PAIR_CAP {
            pairs = (0..PAIR_CAP).map(|_| pairs[rng.random_range(0..pairs.len())]).collect();
        }
        for &(i, j) in &pairs {
            let vs = [self.assign[nodes[i]].clone(), self.assign[nodes[j]].clone()];
            let r = check_formal_disjointness(&self.space, &vs, self.exponent, 0, tol, seed)?;
            note(r.worst_residual, vec![nodes[i].clone(), nodes[j].clone()]);
        }

        let (antichains, exhaustive) = match self.tree.maximal_antichains(ANTICHAIN_CAP as usize) {
            Some(all) => (all, true),
            None => ((0..trials.max(1)).map(|_| self.tree.random_maximal_antichain(&mut rng)).collect(), false),
        };
        let field = self.space.field();
        for a in antichains.iter().filter(|a| a.len() > 1) {
            let vs: Vec<S::Vector> = a.iter().map(|n| self.assign[n].clone()).collect();
            let k = vs.len();
            let one = Complex64::new(1.0, 0.0);
            let mut tuples = vec![vec![one; k], (0..k).map(|j| if j % 2 == 0 { one } else { -one }).collect()];
            for _ in 0..trials {
                tuples.push((0..k).map(|_| random_scalar(field, &mut rng)).collect());
            }
            for alphas in &tuples {
                note(formal_residual(&self.space, &vs, alphas, self.exponent)?, a.clone());
            }
        }
        Ok(SeparatingReport {
            pass: worst <= tol,
            exhaustive,
            pairs_checked: pairs.len(),
            antichains_checked: antichains.len(),
            worst_residual: worst,
            worst_nodes,
            tol,
        })
    }

    /// Nodes whose vector has norm `<= tol`.
    pub fn check_never_zero(&self, tol: f64) -> NonzeroReport {
        let mut zero_nodes = Vec::new();
        let mut smallest = f64::INFINITY;
        for (n, v) in &self.assign {
            let norm = self.space.norm(v);
            smallest = smallest.min(norm);
            if norm <= tol {
                zero_nodes.push(n.clone());
            }
        }
        NonzeroReport { pass: zero_nodes.is_empty(), zero_nodes, smallest_norm: smallest }
    }
}

fn random_scalar<R: Rng + ?Sized>(field: ScalarField, rng: &mut R) -> Complex64 {
    match field {
        ScalarField::Real => Complex64::new(rng.random_range(-1.0..=1.0), 0.0),
        ScalarField::Complex => random_disc(rng),
    }
}

/// The combination `φ(ν) - Σ_children φ(ν')`, which vanishes exactly when
/// the disintegration is summative at `ν`.
pub fn summation_relation(tree: &FiniteTree, n: &Node) -> BTreeMap<Node, Complex64> {
    let mut coeffs = BTreeMap::from([(n.clone(), Complex64::new(1.0, 0.0))]);
    for c in tree.children(n) {
        coeffs.insert(c, Complex64::new(-1.0, 0.0));
    }
    coeffs
}

/// Pushes coefficients down to the terminal nodes: `γ_ν = Σ_{μ ⊑ ν} β_μ`.
///
/// For any summative `φ`, `Σ_F β_ν φ(ν) = Σ_{terminal ν} γ_ν φ(ν)`.
pub fn collapse_to_leaves<T>(
    tree: &FiniteTree,
    beta: &BTreeMap<Node, T>,
) -> Result<BTreeMap<Node, T>, DisintegrationError>
where
    T: Copy + Default + AddAssign,
{
    if let Some(n) = tree.nodes().find(|n| !beta.contains_key(n)) {
        return Err(DisintegrationError::MissingCoefficient(n.clone()));
    }
    if let Some(n) = beta.keys().find(|n| !tree.contains(n)) {
        return Err(DisintegrationError::UnknownNode(n.clone()));
    }
    Ok(tree
        .terminals()
        .into_iter()
        .map(|leaf| {
            let mut g = T::default();
            for prefix in leaf.prefixes() {
                g += beta[&prefix];
            }
            (leaf, g)
        })
        .collect())
}
