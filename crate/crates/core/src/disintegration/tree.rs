use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DisintegrationError;

/// A finite sequence of nonnegative integers. The derived order is
/// lexicographic, so a node sorts immediately before its extensions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Node(Vec<u32>);

impl Node {
    pub fn root() -> Self {
        Node(Vec::new())
    }

    pub fn new(entries: Vec<u32>) -> Self {
        Node(entries)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// `|σ|`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// `σ⌢i`.
    pub fn child(&self, i: u32) -> Node {
        let mut v = self.0.clone();
        v.push(i);
        Node(v)
    }

    /// `σ⌢τ`.
    pub fn concat(&self, tail: &Node) -> Node {
        let mut v = self.0.clone();
        v.extend_from_slice(&tail.0);
        Node(v)
    }

    pub fn parent(&self) -> Option<Node> {
        let (_, init) = self.0.split_last()?;
        Some(Node(init.to_vec()))
    }

    /// `self ⊑ other`.
    pub fn is_prefix_of(&self, other: &Node) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn comparable(&self, other: &Node) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// All prefixes from the root up to and including `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = Node> + '_ {
        (0..=self.0.len()).map(|k| Node(self.0[..k].to_vec()))
    }

    /// The integer read off a binary node: `σ = (b_1..b_k)` gives
    /// `Σ b_i 2^(k-i)`. `None` if some entry is not a bit or the node is too long.
    pub fn binary_value(&self) -> Option<u64> {
        if self.0.len() > 63 {
            return None;
        }
        self.0.iter().try_fold(0u64, |acc, &b| match b {
            0 | 1 => Some(2 * acc + u64::from(b)),
            _ => None,
        })
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for Node {
    type Err = DisintegrationError;

    /// Accepts `()`, `(0,1,2)` and the bare digit string form `012`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DisintegrationError::Parse(s.to_string());
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            if inner.trim().is_empty() {
                return Ok(Node::root());
            }
            return inner
                .split(',')
                .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()
                .map(Node);
        }
        s.chars().map(|c| c.to_digit(10).ok_or_else(bad)).collect::<Result<Vec<_>, _>>().map(Node)
    }
}

impl From<Vec<u32>> for Node {
    fn from(v: Vec<u32>) -> Self {
        Node(v)
    }
}

impl<const K: usize> From<[u32; K]> for Node {
    fn from(v: [u32; K]) -> Self {
        Node(v.to_vec())
    }
}

/// A nonempty, prefix-closed finite set of nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(into = "Vec<Node>")]
pub struct FiniteTree {
    nodes: BTreeSet<Node>,
}

impl FiniteTree {
    pub fn new<I: IntoIterator<Item = Node>>(nodes: I) -> Result<Self, DisintegrationError> {
        let nodes: BTreeSet<Node> = nodes.into_iter().collect();
        if !nodes.contains(&Node::root()) {
            return Err(DisintegrationError::MissingRoot);
        }
        for n in &nodes {
            if let Some(parent) = n.parent() {
                if !nodes.contains(&parent) {
                    return Err(DisintegrationError::NotPrefixClosed(n.clone()));
                }
            }
        }
        Ok(Self { nodes })
    }

    /// The prefix closure of the given nodes (always contains the root).
    pub fn closure<I: IntoIterator<Item = Node>>(nodes: I) -> Self {
        let mut set = BTreeSet::from([Node::root()]);
        for n in nodes {
            set.extend(n.prefixes());
        }
        Self { nodes: set }
    }

    pub fn single() -> Self {
        Self { nodes: BTreeSet::from([Node::root()]) }
    }

    /// Every sequence over `0..branching` of length at most `depth`.
    pub fn full(branching: u32, depth: usize) -> Self {
        let mut nodes = BTreeSet::from([Node::root()]);
        let mut frontier = vec![Node::root()];
        for _ in 0..depth {
            frontier = frontier.iter().flat_map(|n| (0..branching).map(move |i| n.child(i))).collect();
            nodes.extend(frontier.iter().cloned());
        }
        Self { nodes }
    }

    pub fn binary(depth: usize) -> Self {
        Self::full(2, depth)
    }

    /// `(), (0), (0,0), ...` with `depth + 1` nodes.
    pub fn chain(depth: usize) -> Self {
        Self::closure([Node(vec![0; depth])])
    }

    /// A random tree: each node at depth `< max_depth` gets `0..=max_branching`
    /// children (the root at least one when `max_depth > 0`).
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_depth: usize, max_branching: u32) -> Self {
        let mut nodes = BTreeSet::from([Node::root()]);
        let mut frontier = vec![Node::root()];
        for depth in 0..max_depth {
            let mut next = Vec::new();
            for n in &frontier {
                let lo = u32::from(depth == 0 && max_branching > 0);
                let k = rng.random_range(lo..=max_branching);
                for i in 0..k {
                    next.push(n.child(i));
                }
            }
            nodes.extend(next.iter().cloned());
            frontier = next;
        }
        Self { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: &Node) -> bool {
        self.nodes.contains(n)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter()
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(Node::len).max().unwrap_or(0)
    }

    /// Immediate successors of `n` that lie in the tree, in order.
    pub fn children(&self, n: &Node) -> Vec<Node> {
        self.nodes
            .range(n.clone()..)
            .skip(1)
            .take_while(|m| n.is_prefix_of(m))
            .filter(|m| m.len() == n.len() + 1)
            .cloned()
            .collect()
    }

    pub fn is_terminal(&self, n: &Node) -> bool {
        self.nodes.range(n.clone()..).nth(1).is_none_or(|m| !n.is_prefix_of(m))
    }

    /// Terminal nodes, i.e. those with no children in the tree.
    pub fn terminals(&self) -> Vec<Node> {
        self.nodes.iter().filter(|n| self.is_terminal(n)).cloned().collect()
    }

    /// Nodes of the tree that extend `n` (including `n`).
    pub fn subtree(&self, n: &Node) -> impl Iterator<Item = &Node> {
        let n = n.clone();
        self.nodes.range(n.clone()..).take_while(move |m| n.is_prefix_of(m))
    }

    /// The number of maximal antichains, saturating at `u64::MAX`.
    pub fn count_maximal_antichains(&self) -> u64 {
        self.count_from(&Node::root())
    }

    fn count_from(&self, n: &Node) -> u64 {
        let kids = self.children(n);
        if kids.is_empty() {
            return 1;
        }
        kids.iter().map(|c| self.count_from(c)).fold(1u64, |acc, k| acc.saturating_mul(k)).saturating_add(1)
    }

    /// Every maximal antichain, or `None` if there are more than `cap`.
    ///
    /// In a rooted finite tree a maximal antichain is either `{ν}` or the union
    /// of maximal antichains of the subtrees at each child of `ν`.
    pub fn maximal_antichains(&self, cap: usize) -> Option<Vec<Vec<Node>>> {
        if self.count_maximal_antichains() > cap as u64 {
            return None;
        }
        Some(self.antichains_from(&Node::root()))
    }

    fn antichains_from(&self, n: &Node) -> Vec<Vec<Node>> {
        let kids = self.children(n);
        let mut out = vec![vec![n.clone()]];
        if kids.is_empty() {
            return out;
        }
        let mut product: Vec<Vec<Node>> = vec![Vec::new()];
        for c in &kids {
            let below = self.antichains_from(c);
            product = product
                .iter()
                .flat_map(|prefix| {
                    below.iter().map(move |a| {
                        let mut v = prefix.clone();
                        v.extend(a.iter().cloned());
                        v
                    })
                })
                .collect();
        }
        out.extend(product);
        out
    }

    /// A random maximal antichain: stop at a node with probability 1/2
    /// (always at terminal nodes), otherwise descend into every child.
    pub fn random_maximal_antichain<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Node> {
        let mut out = Vec::new();
        let mut stack = vec![Node::root()];
        while let Some(n) = stack.pop() {
            let kids = self.children(&n);
            if kids.is_empty() || rng.random_bool(0.5) {
                out.push(n);
            } else {
                stack.extend(kids.into_iter().rev());
            }
        }
        out.sort();
        out
    }
}

impl From<FiniteTree> for Vec<Node> {
    fn from(t: FiniteTree) -> Self {
        t.nodes.into_iter().collect()
    }
}

impl<'de> Deserialize<'de> for FiniteTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let nodes = Vec::<Node>::deserialize(d)?;
        FiniteTree::new(nodes).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn node(s: &str) -> Node {
        s.parse().unwrap()
    }

    #[test]
    fn node_basics() {
        assert_eq!(node("()"), Node::root());
        assert_eq!(node("(0, 12,3)"), Node::new(vec![0, 12, 3]));
        assert_eq!(node("011"), Node::new(vec![0, 1, 1]));
        assert_eq!(node("(2,0)").to_string(), "(2,0)");
        assert!(node("01").is_prefix_of(&node("011")));
        assert!(!node("011").is_prefix_of(&node("01")));
        assert!(!node("00").comparable(&node("01")));
        assert_eq!(node("011").binary_value(), Some(3));
        assert_eq!(node("(2)").binary_value(), None);
        assert_eq!(node("01").parent(), Some(node("0")));
        assert_eq!(Node::root().parent(), None);
        assert!("(a)".parse::<Node>().is_err());
    }

    #[test]
    fn tree_validation() {
        assert_eq!(FiniteTree::new([node("0")]), Err(DisintegrationError::MissingRoot));
        assert_eq!(FiniteTree::new([Node::root(), node("01")]), Err(DisintegrationError::NotPrefixClosed(node("01"))));
        let t = FiniteTree::new([Node::root(), node("0"), node("01")]).unwrap();
        assert_eq!(t, FiniteTree::closure([node("01")]));
    }

    #[test]
    fn children_and_terminals() {
        let t = FiniteTree::closure([node("00"), node("01"), node("1"), node("(0,0,5)")]);
        assert_eq!(t.children(&Node::root()), vec![node("0"), node("1")]);
        assert_eq!(t.children(&node("0")), vec![node("00"), node("01")]);
        assert_eq!(t.terminals(), vec![node("(0,0,5)"), node("01"), node("1")]);
        assert!(t.is_terminal(&node("1")));
        assert!(!t.is_terminal(&node("00")));
        assert_eq!(t.subtree(&node("0")).count(), 4);
        assert_eq!(t.depth(), 3);
    }

    #[test]
    fn full_binary_counts() {
        let t = FiniteTree::binary(3);
        assert_eq!(t.len(), 15);
        assert_eq!(t.terminals().len(), 8);
        // a(d) = 1 + a(d-1)^2
        assert_eq!(t.count_maximal_antichains(), 26);
        assert_eq!(t.maximal_antichains(100).unwrap().len(), 26);
        assert!(t.maximal_antichains(10).is_none());
        assert_eq!(FiniteTree::chain(4).maximal_antichains(10).unwrap().len(), 5);
    }

    #[test]
    fn serde_round_trip_and_validation() {
        let t = FiniteTree::binary(2);
        let text = serde_json::to_string(&t).unwrap();
        assert!(text.starts_with("[[],[0],[0,0]"));
        assert_eq!(serde_json::from_str::<FiniteTree>(&text).unwrap(), t);
        assert!(serde_json::from_str::<FiniteTree>("[[],[0,1]]").is_err());
    }

    fn is_maximal_antichain(t: &FiniteTree, a: &[Node]) -> bool {
        let antichain = a.iter().enumerate().all(|(i, x)| a[i + 1..].iter().all(|y| !x.comparable(y)));
        let maximal = t.nodes().all(|n| a.iter().any(|x| x.comparable(n)));
        antichain && maximal
    }

    proptest! {
        #[test]
        fn antichains_are_maximal(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = FiniteTree::random(&mut rng, 4, 3);
            for _ in 0..10 {
                let a = t.random_maximal_antichain(&mut rng);
                prop_assert!(is_maximal_antichain(&t, &a));
            }
            if let Some(all) = t.maximal_antichains(2000) {
                prop_assert_eq!(all.len() as u64, t.count_maximal_antichains());
                for a in &all {
                    prop_assert!(is_maximal_antichain(&t, a));
                }
            }
        }

        #[test]
        fn random_trees_are_prefix_closed(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = FiniteTree::random(&mut rng, 5, 3);
            prop_assert!(FiniteTree::new(t.nodes().cloned()).is_ok());
            prop_assert!(t.depth() <= 5);
            for n in t.nodes() {
                prop_assert!(t.children(n).len() <= 3);
            }
        }
    }
}
