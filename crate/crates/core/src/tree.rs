//! Independent percolation on finite rooted trees.
//!
//! Edge `e` is kept with probability `p_e`. The boundary survives when some
//! leaf stays connected to the root. Survivors listed left to right form a
//! Markov chain whose Green kernel is explicit, which brackets the survival
//! probability by the capacity of the leaves in the kernel
//! `F(x,y) = prod{1/p_e : e on both root paths}` (doubled on the diagonal).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::capacity;
use crate::chain::GreenMatrix;
use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;
use crate::rng::{self, HitEstimate};

/// Largest denominator for which edge probabilities are treated as exact rationals.
pub const MAX_EXACT_DENOMINATOR: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
struct Node {
    parent: Option<usize>,
    /// Retention probability of the edge to the parent (1 at the root).
    p: f64,
    exact: Option<BigRational>,
    children: Vec<usize>,
    depth: usize,
}

/// Rooted tree with per-edge retention probabilities. Node 0 is the root;
/// children keep their insertion order, which fixes the left-to-right order.
#[derive(Debug, Clone, PartialEq)]
pub struct PercTree {
    nodes: Vec<Node>,
}

impl Default for PercTree {
    fn default() -> Self {
        Self::new()
    }
}

impl PercTree {
    pub fn new() -> Self {
        PercTree {
            nodes: vec![Node { parent: None, p: 1.0, exact: Some(BigRational::one()), children: vec![], depth: 0 }],
        }
    }

    pub fn root(&self) -> usize {
        0
    }

    /// Adds a child of `parent` joined by an edge kept with probability `p in (0, 1]`.
    pub fn add_child(&mut self, parent: usize, p: f64) -> Result<usize> {
        if parent >= self.nodes.len() {
            return Err(Error::InvalidTree(format!("no node {parent}")));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidTree(format!("edge probability {p} is not in (0, 1]")));
        }
        let id = self.nodes.len();
        let depth = self.nodes[parent].depth + 1;
        self.nodes.push(Node { parent: Some(parent), p, exact: exact_rational(p), children: vec![], depth });
        self.nodes[parent].children.push(id);
        Ok(id)
    }

    /// Adds a child with an exact rational edge probability `num / den`.
    pub fn add_child_rational(&mut self, parent: usize, num: u64, den: u64) -> Result<usize> {
        if den == 0 || num == 0 || num > den {
            return Err(Error::InvalidTree(format!("edge probability {num}/{den} is not in (0, 1]")));
        }
        let id = self.add_child(parent, num as f64 / den as f64)?;
        self.nodes[id].exact = Some(BigRational::new(BigInt::from(num), BigInt::from(den)));
        Ok(id)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.nodes[v].children
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.nodes[v].parent
    }

    /// Probability of the edge from `v` to its parent.
    pub fn edge_probability(&self, v: usize) -> f64 {
        self.nodes[v].p
    }

    pub fn depth(&self, v: usize) -> usize {
        self.nodes[v].depth
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Leaves (childless non-root nodes) in left-to-right order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            let ch = &self.nodes[v].children;
            if ch.is_empty() {
                if v != 0 {
                    out.push(v);
                }
            } else {
                stack.extend(ch.iter().rev());
            }
        }
        out
    }

    /// Edges on the root path of `v`, named by their lower endpoint, root first.
    pub fn path(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes[v].depth);
        let mut cur = v;
        while let Some(p) = self.nodes[cur].parent {
            out.push(cur);
            cur = p;
        }
        out.reverse();
        out
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.nodes[a].depth > self.nodes[b].depth {
            a = self.nodes[a].parent.expect("non-root");
        }
        while self.nodes[b].depth > self.nodes[a].depth {
            b = self.nodes[b].parent.expect("non-root");
        }
        while a != b {
            a = self.nodes[a].parent.expect("non-root");
            b = self.nodes[b].parent.expect("non-root");
        }
        a
    }

    /// `prod_{e in Path(v)} p_e` for every node.
    fn path_products(&self) -> Vec<f64> {
        let mut prod = vec![1.0; self.nodes.len()];
        // parents always precede children
        for v in 1..self.nodes.len() {
            let parent = self.nodes[v].parent.expect("non-root");
            prod[v] = prod[parent] * self.nodes[v].p;
        }
        prod
    }

    pub fn all_exact(&self) -> bool {
        self.nodes.iter().all(|n| n.exact.is_some())
    }
}

/// Exact rational value of `p` if it is `a/b` with `b <= 2^16`.
fn exact_rational(p: f64) -> Option<BigRational> {
    let exact = BigRational::from_float(p)?;
    // continued-fraction convergents of the binary value
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut x = exact;
    let limit = BigInt::from(MAX_EXACT_DENOMINATOR);
    for _ in 0..64 {
        let a = x.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        if k2 > limit {
            return None;
        }
        let candidate = BigRational::new(h2.clone(), k2.clone());
        let as_f64 = num_traits::ToPrimitive::to_f64(&h2)? / num_traits::ToPrimitive::to_f64(&k2)?;
        if as_f64 == p {
            return Some(candidate);
        }
        let frac = &x - BigRational::from_integer(a);
        if frac.is_zero() {
            return None;
        }
        x = frac.recip();
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
    None
}

/// `P[boundary survives]` via `q_v = 1 - prod_c (1 - p_vc q_c)`, `q_leaf = 1`.
pub fn survival_probability(tree: &PercTree) -> f64 {
    if tree.children(0).is_empty() {
        return 0.0;
    }
    let mut q = vec![1.0; tree.n_nodes()];
    for v in (0..tree.n_nodes()).rev() {
        let ch = tree.children(v);
        if !ch.is_empty() {
            q[v] = 1.0 - ch.iter().map(|&c| 1.0 - tree.edge_probability(c) * q[c]).product::<f64>();
        }
    }
    q[0]
}

/// The same recursion in exact arithmetic; `None` unless every edge is an exact rational.
pub fn survival_probability_exact(tree: &PercTree) -> Option<BigRational> {
    if !tree.all_exact() {
        return None;
    }
    if tree.children(0).is_empty() {
        return Some(BigRational::zero());
    }
    let one = BigRational::one();
    let mut q = vec![one.clone(); tree.n_nodes()];
    for v in (0..tree.n_nodes()).rev() {
        let ch = tree.children(v);
        if !ch.is_empty() {
            let mut miss = one.clone();
            for &c in ch {
                let p = tree.nodes[c].exact.as_ref().expect("checked");
                miss *= &one - p * &q[c];
            }
            q[v] = &one - miss;
        }
    }
    Some(q[0].clone())
}

/// Kernel on the leaves: `F(x,y) = prod{1/p_e : e in Path(x) ∩ Path(y)}`,
/// `F(x,x) = 2 prod{1/p_e : e in Path(x)}`.
pub fn lyons_kernel(tree: &PercTree) -> Result<KernelMatrix> {
    let leaves = tree.leaves();
    let prod = tree.path_products();
    KernelMatrix::from_symmetric_fn(leaves.len(), |i, j| {
        if i == j {
            2.0 / prod[leaves[i]]
        } else {
            1.0 / prod[tree.lca(leaves[i], leaves[j])]
        }
    })
}

/// Green kernel of the left-to-right survivor chain on `{root} ∪ leaves`.
/// Index 0 is the root, index `i + 1` is the `i`-th leaf.
pub fn hidden_chain_green(tree: &PercTree) -> Result<GreenMatrix> {
    let leaves = tree.leaves();
    let prod = tree.path_products();
    let n = leaves.len() + 1;
    let mut values = vec![0.0; n * n];
    values[0] = 1.0;
    for (j, &y) in leaves.iter().enumerate() {
        values[j + 1] = prod[y];
        values[(j + 1) * n + j + 1] = 1.0;
        for (i, &x) in leaves.iter().enumerate().take(j) {
            // x left of y: edges of Path(y) below the common ancestor
            values[(i + 1) * n + j + 1] = prod[y] / prod[tree.lca(x, y)];
        }
    }
    GreenMatrix::from_values(n, 0, values)
}

/// Monte Carlo estimate of the survival probability.
pub fn percolate(tree: &PercTree, n_trials: u64, seed: u64) -> Result<HitEstimate> {
    if n_trials == 0 {
        return Err(Error::InvalidParameter("n_trials must be positive".into()));
    }
    if tree.children(0).is_empty() {
        return Ok(HitEstimate::certain(false, n_trials, seed));
    }
    if tree.nodes.iter().all(|n| n.p == 1.0) {
        return Ok(HitEstimate::certain(true, n_trials, seed));
    }
    let hits = rng::count_successes(n_trials, seed, |r| {
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            let ch = tree.children(v);
            if ch.is_empty() {
                return true;
            }
            for &c in ch.iter().rev() {
                if r.random::<f64>() < tree.edge_probability(c) {
                    stack.push(c);
                }
            }
        }
        false
    });
    Ok(HitEstimate::from_counts(hits, n_trials, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSandwichReport {
    pub n_leaves: usize,
    pub capacity: f64,
    pub survival: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
    pub solver_converged: bool,
}

/// Checks `Cap_F(leaves) <= P[survival] <= 2 Cap_F(leaves)`.
pub fn verify_tree_sandwich(tree: &PercTree) -> Result<TreeSandwichReport> {
    let f = lyons_kernel(tree)?;
    let cap = capacity::capacity(&f);
    let survival = survival_probability(tree);
    let (lower, upper) = (cap.capacity, 2.0 * cap.capacity);
    let tol = capacity::SANDWICH_TOL;
    Ok(TreeSandwichReport {
        n_leaves: f.size(),
        capacity: cap.capacity,
        survival,
        lower,
        upper,
        holds: lower - tol <= survival && survival <= upper + tol,
        solver_converged: cap.converged,
    })
}

/// Random tree of depth at most `max_depth`; every node below the root has
/// `0..=max_children` children and edge probabilities are uniform on `[p_min, p_max]`.
pub fn random_tree(seed: u64, max_depth: usize, max_children: usize, p_min: f64, p_max: f64) -> Result<PercTree> {
    if max_depth == 0 || max_children == 0 || !(0.0 < p_min && p_min <= p_max && p_max <= 1.0) {
        return Err(Error::InvalidParameter("bad random tree parameters".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tree = PercTree::new();
    let mut frontier = vec![0usize];
    while let Some(v) = frontier.pop() {
        if tree.depth(v) >= max_depth {
            continue;
        }
        let k = if v == 0 { rng.random_range(1..=max_children) } else { rng.random_range(0..=max_children) };
        for _ in 0..k {
            let p = if p_min == p_max { p_min } else { rng.random_range(p_min..=p_max) };
            frontier.push(tree.add_child(v, p)?);
        }
    }
    Ok(tree)
}

/// Random tree with at most `max_edges` edges and rational edge probabilities `k / den`.
pub fn random_rational_tree(seed: u64, max_edges: usize, den: u64) -> Result<PercTree> {
    if max_edges == 0 || den == 0 || den > MAX_EXACT_DENOMINATOR {
        return Err(Error::InvalidParameter("bad random tree parameters".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tree = PercTree::new();
    let target_edges = rng.random_range(1..=max_edges);
    while tree.n_edges() < target_edges {
        let parent = rng.random_range(0..tree.n_nodes());
        let num = rng.random_range(1..=den);
        tree.add_child_rational(parent, num, den)?;
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(depth: usize, p: f64) -> PercTree {
        let mut t = PercTree::new();
        let mut level = vec![0];
        for _ in 0..depth {
            let mut next = Vec::new();
            for v in level {
                next.push(t.add_child(v, p).unwrap());
                next.push(t.add_child(v, p).unwrap());
            }
            level = next;
        }
        t
    }

    #[test]
    fn single_edge() {
        let mut t = PercTree::new();
        t.add_child(0, 0.3).unwrap();
        assert!((survival_probability(&t) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn binary_survival() {
        assert!((survival_probability(&binary(1, 0.5)) - 0.75).abs() < 1e-15);
        assert!((survival_probability(&binary(2, 0.5)) - 39.0 / 64.0).abs() < 1e-15);
        let exact = survival_probability_exact(&binary(2, 0.5)).unwrap();
        assert_eq!(exact, BigRational::new(39.into(), 64.into()));
    }

    #[test]
    fn rational_detection() {
        assert_eq!(exact_rational(0.5), Some(BigRational::new(1.into(), 2.into())));
        assert_eq!(exact_rational(0.3), Some(BigRational::new(3.into(), 10.into())));
        assert_eq!(exact_rational(1.0), Some(BigRational::one()));
        assert_eq!(exact_rational(std::f64::consts::FRAC_1_PI), None);
    }

    #[test]
    fn lyons_kernel_entries() {
        let k = lyons_kernel(&binary(2, 0.5)).unwrap();
        // leaves: 0,1 siblings; 0,2 cousins
        assert_eq!(k.get(0, 0), 8.0);
        assert_eq!(k.get(0, 1), 2.0);
        assert_eq!(k.get(0, 2), 1.0);
        let k1 = lyons_kernel(&binary(1, 0.5)).unwrap();
        assert_eq!(k1.get(0, 0), 4.0);
        assert_eq!(k1.get(0, 1), 1.0);
    }

    #[test]
    fn sibling_green_value() {
        // shared edge s, own edges a (left) and b (right)
        let mut t = PercTree::new();
        let s = t.add_child(0, 0.6).unwrap();
        t.add_child(s, 0.3).unwrap();
        t.add_child(s, 0.7).unwrap();
        let g = hidden_chain_green(&t).unwrap();
        assert!((g.get(1, 2) - 0.7).abs() < 1e-15);
        assert_eq!(g.get(2, 1), 0.0);
        assert!((g.get(0, 1) - 0.18).abs() < 1e-15);
        assert!((g.get(0, 2) - 0.42).abs() < 1e-15);
    }

    #[test]
    fn depth_one_closed_form() {
        let r = verify_tree_sandwich(&binary(1, 0.5)).unwrap();
        assert!((r.capacity - 0.4).abs() < 1e-9);
        assert!((r.survival - 0.75).abs() < 1e-15);
        assert!(r.holds);
    }

    #[test]
    fn bare_root() {
        let t = PercTree::new();
        assert!(t.leaves().is_empty());
        assert_eq!(survival_probability(&t), 0.0);
        assert!(verify_tree_sandwich(&t).unwrap().holds);
    }

    #[test]
    fn invalid_edges_rejected() {
        let mut t = PercTree::new();
        assert!(t.add_child(0, 0.0).is_err());
        assert!(t.add_child(0, 1.5).is_err());
        assert!(t.add_child(7, 0.5).is_err());
        assert!(t.add_child_rational(0, 3, 2).is_err());
    }

    #[test]
    fn percolation_certain_cases() {
        let e = percolate(&binary(3, 1.0), 100, 3).unwrap();
        assert_eq!(e.point_estimate, 1.0);
    }

    #[test]
    fn random_trees_respect_limits() {
        for seed in 0..20 {
            let t = random_tree(seed, 6, 3, 0.2, 1.0).unwrap();
            assert!(t.max_depth() <= 6);
            let r = random_rational_tree(seed, 16, 8).unwrap();
            assert!(r.n_edges() <= 16 && r.all_exact());
        }
    }
}
