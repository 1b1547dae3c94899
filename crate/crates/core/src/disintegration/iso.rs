use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{collapse_to_leaves, Disintegration, DisintegrationError, FiniteTree, Node};
use crate::spaces::NormedSpace;

/// A map between the node sets of two trees, stored as explicit pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<(Node, Node)>", into = "Vec<(Node, Node)>")]
pub struct TreeIso {
    map: BTreeMap<Node, Node>,
}

impl From<Vec<(Node, Node)>> for TreeIso {
    fn from(pairs: Vec<(Node, Node)>) -> Self {
        Self { map: pairs.into_iter().collect() }
    }
}

impl From<TreeIso> for Vec<(Node, Node)> {
    fn from(f: TreeIso) -> Self {
        f.map.into_iter().collect()
    }
}

impl TreeIso {
    pub fn identity(tree: &FiniteTree) -> Self {
        Self::from_fn(tree, Node::clone)
    }

    pub fn from_pairs<I: IntoIterator<Item = (Node, Node)>>(pairs: I) -> Self {
        Self { map: pairs.into_iter().collect() }
    }

    pub fn from_fn<F: FnMut(&Node) -> Node>(tree: &FiniteTree, mut f: F) -> Self {
        Self { map: tree.nodes().map(|n| (n.clone(), f(n))).collect() }
    }

    /// Swaps the two depth-1 subtrees of a binary tree: `(b, rest) ↦ (1-b, rest)`.
    pub fn flip_first(tree: &FiniteTree) -> Self {
        Self::from_fn(tree, |n| {
            let mut e = n.entries().to_vec();
            if let Some(b) = e.first_mut() {
                *b = 1 - (*b).min(1);
            }
            Node::new(e)
        })
    }

    /// A random isomorphism onto a relabeled copy of `tree`: at every node the
    /// children are sent injectively to random labels below `2k + 1`, where
    /// `k` is the number of children. Returns the map and the image tree.
    pub fn random_relabeling<R: Rng + ?Sized>(tree: &FiniteTree, rng: &mut R) -> (Self, FiniteTree) {
        let mut map = BTreeMap::from([(Node::root(), Node::root())]);
        let mut stack = vec![Node::root()];
        while let Some(n) = stack.pop() {
            let kids = tree.children(&n);
            let mut labels: Vec<u32> = (0..2 * kids.len() as u32 + 1).collect();
            labels.shuffle(rng);
            let image = map[&n].clone();
            for (c, &label) in kids.iter().zip(&labels) {
                map.insert(c.clone(), image.child(label));
                stack.push(c.clone());
            }
        }
        let target = FiniteTree::closure(map.values().cloned());
        (Self { map }, target)
    }

    pub fn get(&self, n: &Node) -> Option<&Node> {
        self.map.get(n)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Node, &Node)> {
        self.map.iter()
    }

    pub fn inverse(&self) -> Self {
        Self { map: self.map.iter().map(|(a, b)| (b.clone(), a.clone())).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsoReport {
    pub pass: bool,
    pub total: bool,
    pub injective: bool,
    pub surjective: bool,
    pub order_preserving: bool,
    pub order_violation: Option<(Node, Node)>,
    pub worst_norm_gap: f64,
    pub worst_node: Option<Node>,
    pub tol: f64,
}

/// Checks that `f` is an order isomorphism from the tree of `d0` onto the tree
/// of `d1` with `| ||φ1(f(ν))|| - ||φ0(ν)|| | <= tol` at every node.
pub fn tree_isomorphism_check<S0: NormedSpace, S1: NormedSpace>(
    d0: &Disintegration<S0>,
    d1: &Disintegration<S1>,
    f: &TreeIso,
    tol: f64,
) -> IsoReport {
    let (t0, t1) = (d0.tree(), d1.tree());
    let total = t0.nodes().all(|n| f.get(n).is_some_and(|m| t1.contains(m))) && f.pairs().all(|(a, _)| t0.contains(a));
    let image: BTreeSet<&Node> = f.pairs().map(|(_, b)| b).collect();
    let injective = image.len() == f.len();
    let surjective = t1.nodes().all(|m| image.contains(m));

    let mut order_violation = None;
    let mut worst = 0.0f64;
    let mut worst_node = None;
    if total {
        let nodes: Vec<&Node> = t0.nodes().collect();
        'outer: for u in &nodes {
            for v in &nodes {
                if u.is_prefix_of(v) != f.map[*u].is_prefix_of(&f.map[*v]) {
                    order_violation = Some(((*u).clone(), (*v).clone()));
                    break 'outer;
                }
            }
        }
        for n in t0.nodes() {
            let gap = (d1.norm_at(&f.map[n]).unwrap_or(f64::NAN) - d0.norm_at(n).unwrap_or(f64::NAN)).abs();
            if !(gap <= worst) {
                worst = if gap.is_nan() { f64::INFINITY } else { gap };
                worst_node = Some(n.clone());
            }
        }
    }
    let order_preserving = total && order_violation.is_none();
    IsoReport {
        pass: total && injective && surjective && order_preserving && worst <= tol,
        total,
        injective,
        surjective,
        order_preserving,
        order_violation,
        worst_norm_gap: worst,
        worst_node,
        tol,
    }
}

/// Tolerances and sampling for the hypothesis checks of [`lift_isomorphism`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftOptions {
    pub tol: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for LiftOptions {
    fn default() -> Self {
        Self { tol: 1e-9, trials: 20, seed: 0 }
    }
}

/// The linear map `T_f` on the span of a disintegration, determined by
/// `T_f(φ0(ν)) = φ1(f(ν))`.
#[derive(Debug, Clone)]
pub struct LiftedMap<S: NormedSpace> {
    f: TreeIso,
    source_tree: FiniteTree,
    target: Disintegration<S>,
}

impl<S: NormedSpace> LiftedMap<S> {
    pub fn tree_map(&self) -> &TreeIso {
        &self.f
    }

    /// `φ1(f(ν))`.
    pub fn image(&self, n: &Node) -> Option<&S::Vector> {
        self.target.vector(self.f.get(n)?)
    }

    /// `T_f(Σ α_ν φ0(ν))`, computed from the terminal-node representation of
    /// the combination. Missing nodes have coefficient 0.
    pub fn apply(&self, coeffs: &BTreeMap<Node, Complex64>) -> Result<S::Vector, DisintegrationError> {
        let mut full: BTreeMap<Node, Complex64> =
            self.source_tree.nodes().map(|n| (n.clone(), Complex64::default())).collect();
        for (n, a) in coeffs {
            *full.get_mut(n).ok_or_else(|| DisintegrationError::UnknownNode(n.clone()))? += *a;
        }
        let gamma = collapse_to_leaves(&self.source_tree, &full)?;
        self.target.combine(&self.push_forward(&gamma))
    }

    /// `Σ α_ν φ1(f(ν))` without collapsing first.
    pub fn apply_direct(&self, coeffs: &BTreeMap<Node, Complex64>) -> Result<S::Vector, DisintegrationError> {
        for n in coeffs.keys() {
            if !self.source_tree.contains(n) {
                return Err(DisintegrationError::UnknownNode(n.clone()));
            }
        }
        self.target.combine(&self.push_forward(coeffs))
    }

    fn push_forward(&self, coeffs: &BTreeMap<Node, Complex64>) -> BTreeMap<Node, Complex64> {
        coeffs.iter().map(|(n, a)| (self.f.map[n].clone(), *a)).collect()
    }
}

/// Builds `T_f` after checking the hypotheses of the lifting theorem: both
/// maps summative, formally separating and never zero, and `f` a
/// norm-matching tree isomorphism.
pub fn lift_isomorphism<S0: NormedSpace, S1: NormedSpace>(
    d0: &Disintegration<S0>,
    d1: &Disintegration<S1>,
    f: &TreeIso,
    opts: LiftOptions,
) -> Result<LiftedMap<S1>, DisintegrationError> {
    let fail = |what: String| Err(DisintegrationError::Hypothesis(what));
    for (name, s, n) in [
        ("source", d0.check_summative(opts.tol)?, d0.check_never_zero(opts.tol)),
        ("target", d1.check_summative(opts.tol)?, d1.check_never_zero(opts.tol)),
    ] {
        if !s.pass {
            return fail(format!("{name} is not summative (residual {:e} at {:?})", s.worst_residual, s.worst_node));
        }
        if !n.pass {
            return fail(format!("{name} vanishes at {:?}", n.zero_nodes));
        }
    }
    let sep0 = d0.check_formally_separating(opts.trials, opts.tol, opts.seed)?;
    if !sep0.pass {
        return fail(format!("source is not formally separating at {:?}", sep0.worst_nodes));
    }
    let sep1 = d1.check_formally_separating(opts.trials, opts.tol, opts.seed)?;
    if !sep1.pass {
        return fail(format!("target is not formally separating at {:?}", sep1.worst_nodes));
    }
    let iso = tree_isomorphism_check(d0, d1, f, opts.tol);
    if !(iso.total && iso.injective && iso.surjective && iso.order_preserving) {
        return Err(DisintegrationError::NotIsomorphism(format!("{iso:?}")));
    }
    if !iso.pass {
        return fail(format!("norms differ by {:e} at {:?}", iso.worst_norm_gap, iso.worst_node));
    }
    Ok(LiftedMap { f: f.clone(), source_tree: d0.tree().clone(), target: d1.clone() })
}
