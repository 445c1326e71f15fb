//! Finite substochastic Markov chains: Green functions, Martin kernels and
//! hitting probabilities.
//!
//! Row deficits `1 - sum_y p(x, y)` are absorption. Infinite chains are
//! handled by the callers truncating to a finite window with killing.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelMatrix, Measure};
use crate::linalg::{self, ResolventSolver, SparseMatrix};
use crate::rng::{self, HitEstimate};

/// Row sums may exceed one by this much before a chain is rejected.
const ROW_SUM_SLACK: f64 = 1e-12;

/// Green residual accepted by [`green_matrix`].
pub const GREEN_RESIDUAL_TOL: f64 = 1e-10;

/// Transition structure of a finite substochastic chain with a root state.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    n_states: usize,
    root: usize,
    transitions: Vec<(usize, usize, f64)>,
    labels: Option<Vec<String>>,
    matrix: SparseMatrix,
}

impl ChainSpec {
    pub fn new(
        n_states: usize,
        root: usize,
        transitions: Vec<(usize, usize, f64)>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if n_states == 0 {
            return Err(Error::InvalidChain("chain needs at least one state".into()));
        }
        if root >= n_states {
            return Err(Error::StateOutOfRange { state: root, n_states });
        }
        if let Some(l) = &labels {
            if l.len() != n_states {
                return Err(Error::InvalidChain(format!("{} labels for {n_states} states", l.len())));
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(transitions.len());
        let mut sums = vec![0.0; n_states];
        for &(from, to, p) in &transitions {
            for s in [from, to] {
                if s >= n_states {
                    return Err(Error::StateOutOfRange { state: s, n_states });
                }
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidChain(format!("p({from},{to}) = {p} is not in (0, 1]")));
            }
            if !seen.insert((from, to)) {
                return Err(Error::InvalidChain(format!("duplicate transition ({from},{to})")));
            }
            sums[from] += p;
        }
        if let Some((x, s)) = sums.iter().enumerate().find(|(_, s)| **s > 1.0 + ROW_SUM_SLACK) {
            return Err(Error::InvalidChain(format!("row {x} sums to {s} > 1")));
        }
        let matrix = SparseMatrix::from_triplets(n_states, &transitions);
        Ok(ChainSpec { n_states, root, transitions, labels, matrix })
    }

    /// Chain started from an initial law `pi` instead of a fixed state: an
    /// extra root state (index `n_states`) jumps to `y` with probability `pi(y)`.
    pub fn with_initial_distribution(
        n_states: usize,
        pi: &[f64],
        transitions: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        if pi.len() != n_states {
            return Err(Error::DimensionMismatch { expected: n_states, got: pi.len() });
        }
        let root = n_states;
        let mut all = transitions;
        all.extend(pi.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(y, &p)| (root, y, p)));
        ChainSpec::new(n_states + 1, root, all, None)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn transitions(&self) -> &[(usize, usize, f64)] {
        &self.transitions
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Same transitions, different root.
    pub fn with_root(&self, root: usize) -> Result<Self> {
        ChainSpec::new(self.n_states, root, self.transitions.clone(), self.labels.clone())
    }

    /// Spectral radius estimate of the transition matrix, or `NotTransient`.
    pub fn check_transient(&self) -> Result<f64> {
        linalg::check_transient(&self.matrix)
    }

    /// States reachable from the root.
    pub fn reachable_from_root(&self) -> Vec<bool> {
        let mut seen = vec![false; self.n_states];
        let mut queue = VecDeque::from([self.root]);
        seen[self.root] = true;
        while let Some(x) = queue.pop_front() {
            for (y, _) in self.matrix.row(x) {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    fn target_mask(&self, target: &[usize]) -> Result<Vec<bool>> {
        if target.is_empty() {
            return Err(Error::EmptyTarget);
        }
        let mut mask = vec![false; self.n_states];
        for &t in target {
            if t >= self.n_states {
                return Err(Error::StateOutOfRange { state: t, n_states: self.n_states });
            }
            mask[t] = true;
        }
        Ok(mask)
    }
}

/// Dense Green matrix `G = (I - P)^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenMatrix {
    n: usize,
    root: usize,
    values: Vec<f64>,
}

impl GreenMatrix {
    /// Wraps a row-major `n x n` table of Green values.
    pub fn from_values(n: usize, root: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: values.len() });
        }
        if root >= n {
            return Err(Error::StateOutOfRange { state: root, n_states: n });
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter("Green values must be finite and nonnegative".into()));
        }
        Ok(GreenMatrix { n, root, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> usize {
        self.root
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.n + y]
    }

    /// `G(root, .)`.
    pub fn root_row(&self) -> &[f64] {
        &self.values[self.root * self.n..(self.root + 1) * self.n]
    }

    /// Entrywise max of `|(I - P) G - I|`.
    pub fn residual(&self, chain: &ChainSpec) -> f64 {
        let n = self.n;
        let p = chain.matrix();
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                let pg: f64 = p.row(x).map(|(z, v)| v * self.get(z, y)).sum();
                let target = if x == y { 1.0 } else { 0.0 };
                worst = worst.max((self.get(x, y) - pg - target).abs());
            }
        }
        worst
    }
}

/// Green matrix of a transient chain.
pub fn green_matrix(chain: &ChainSpec) -> Result<GreenMatrix> {
    chain.check_transient()?;
    let n = chain.n_states();
    let p = chain.matrix();
    let mut values = vec![0.0; n * n];
    if n <= linalg::DENSE_LIMIT {
        let a = nalgebra::DMatrix::identity(n, n) - p.to_dense();
        let lu = a.clone().lu();
        let mut g = lu
            .try_inverse()
            .ok_or_else(|| Error::SingularSolve("I - P is singular".into()))?;
        // one step of iterative refinement
        let r = nalgebra::DMatrix::identity(n, n) - &a * &g;
        if let Some(corr) = lu.solve(&r) {
            g += corr;
        }
        for x in 0..n {
            for y in 0..n {
                values[x * n + y] = g[(x, y)].max(0.0);
            }
        }
    } else {
        let solver = ResolventSolver::new(p)?;
        let mut e = vec![0.0; n];
        for y in 0..n {
            e[y] = 1.0;
            let col = solver.solve(&e)?;
            e[y] = 0.0;
            for x in 0..n {
                values[x * n + y] = col[x].max(0.0);
            }
        }
    }
    let green = GreenMatrix { n, root: chain.root(), values };
    if n <= linalg::DENSE_LIMIT {
        let res = green.residual(chain);
        if res >= GREEN_RESIDUAL_TOL {
            return Err(Error::SingularSolve(format!("Green residual {res:e} too large")));
        }
    }
    Ok(green)
}

/// Green values `G(x, y)` for `x, y` in `target` plus the root row on `target`,
/// computed with one solve per target column.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenBlock {
    pub target: Vec<usize>,
    /// `block[i][j] = G(target[i], target[j])`
    pub block: Vec<Vec<f64>>,
    /// `G(root, target[j])`
    pub root_row: Vec<f64>,
}

pub fn green_block(chain: &ChainSpec, target: &[usize]) -> Result<GreenBlock> {
    chain.target_mask(target)?;
    let n = chain.n_states();
    let solver = ResolventSolver::new(chain.matrix())?;
    let m = target.len();
    let mut block = vec![vec![0.0; m]; m];
    let mut root_row = vec![0.0; m];
    let mut e = vec![0.0; n];
    for (j, &y) in target.iter().enumerate() {
        e[y] = 1.0;
        let col = solver.solve(&e)?;
        e[y] = 0.0;
        for (i, &x) in target.iter().enumerate() {
            block[i][j] = col[x].max(0.0);
        }
        root_row[j] = col[chain.root()].max(0.0);
    }
    Ok(GreenBlock { target: target.to_vec(), block, root_row })
}

fn martin_from_values(
    target: &[usize],
    g: impl Fn(usize, usize) -> f64,
    root_g: impl Fn(usize) -> f64,
) -> Result<KernelMatrix> {
    if let Some(j) = (0..target.len()).find(|&j| root_g(j) <= 0.0) {
        return Err(Error::UnreachableTarget { state: target[j] });
    }
    KernelMatrix::from_fn(target.len(), |i, j| g(i, j) / root_g(j))
}

/// Symmetrized Martin kernel `(K(x,y) + K(y,x)) / 2` with `K(x,y) = G(x,y) / G(root,y)`.
pub fn martin_kernel(green: &GreenMatrix, target: &[usize]) -> Result<KernelMatrix> {
    if let Some(&bad) = target.iter().find(|&&t| t >= green.n()) {
        return Err(Error::StateOutOfRange { state: bad, n_states: green.n() });
    }
    let root = green.root();
    martin_from_values(
        target,
        |i, j| green.get(target[i], target[j]),
        |j| green.get(root, target[j]),
    )
}

/// Martin kernel on `target` without forming the full Green matrix.
pub fn martin_kernel_for(chain: &ChainSpec, target: &[usize]) -> Result<KernelMatrix> {
    let gb = green_block(chain, target)?;
    martin_from_values(target, |i, j| gb.block[i][j], |j| gb.root_row[j])
}

/// Off-target states in index order plus their position lookup.
fn complement(mask: &[bool]) -> (Vec<usize>, Vec<usize>) {
    let off: Vec<usize> = (0..mask.len()).filter(|&s| !mask[s]).collect();
    let mut pos = vec![usize::MAX; mask.len()];
    for (i, &s) in off.iter().enumerate() {
        pos[s] = i;
    }
    (off, pos)
}

/// `P_root[exists n >= 0 : X_n in target]`.
pub fn exact_hitting_probability(chain: &ChainSpec, target: &[usize]) -> Result<f64> {
    let mask = chain.target_mask(target)?;
    if mask[chain.root()] {
        return Ok(1.0);
    }
    let (off, pos) = complement(&mask);
    let p = chain.matrix();
    let sub = p.submatrix(&off);
    let rhs: Vec<f64> = off
        .iter()
        .map(|&x| p.row(x).filter(|(y, _)| mask[*y]).map(|(_, v)| v).sum())
        .collect();
    let h = ResolventSolver::new(&sub)?.solve(&rhs)?;
    Ok(h[pos[chain.root()]].clamp(0.0, 1.0))
}

/// Defective first-hit law `nu(x) = P_root[X_tau = x]` on `target` (in the given order).
pub fn hitting_measure(chain: &ChainSpec, target: &[usize]) -> Result<Measure> {
    let mask = chain.target_mask(target)?;
    let root = chain.root();
    if mask[root] {
        let w = target.iter().map(|&t| if t == root { 1.0 } else { 0.0 }).collect();
        return Measure::new(w);
    }
    let (off, pos) = complement(&mask);
    let p = chain.matrix();
    let sub = p.submatrix(&off);
    // w^T = e_root^T (I - P_UU)^{-1}: expected visits to each off-target state before tau
    let mut e = vec![0.0; off.len()];
    e[pos[root]] = 1.0;
    let w = ResolventSolver::new(&sub)?.solve_transpose(&e)?;
    let mut index = vec![usize::MAX; chain.n_states()];
    for (i, &t) in target.iter().enumerate() {
        index[t] = i;
    }
    let mut nu = vec![0.0; target.len()];
    for (i, &x) in off.iter().enumerate() {
        if w[i] == 0.0 {
            continue;
        }
        for (y, v) in p.row(x) {
            if mask[y] {
                nu[index[y]] += w[i] * v;
            }
        }
    }
    Measure::new(nu.into_iter().map(|v: f64| v.max(0.0)).collect())
}

/// Monte Carlo estimate of the hitting probability; paths start at the root
/// and are killed on deficit mass or after `horizon` steps.
pub fn simulate_hitting(
    chain: &ChainSpec,
    target: &[usize],
    n_paths: u64,
    seed: u64,
    horizon: u64,
) -> Result<HitEstimate> {
    if n_paths == 0 || horizon == 0 {
        return Err(Error::InvalidParameter("n_paths and horizon must be positive".into()));
    }
    let mask = chain.target_mask(target)?;
    if mask[chain.root()] {
        return Ok(HitEstimate::certain(true, n_paths, seed));
    }
    let p = chain.matrix();
    let rows: Vec<Vec<(usize, f64)>> = (0..chain.n_states())
        .map(|x| {
            let mut acc = 0.0;
            p.row(x)
                .filter(|e| e.1 > 0.0)
                .map(|(y, v)| {
                    acc += v;
                    (y, acc)
                })
                .collect()
        })
        .collect();
    let root = chain.root();
    let hits = rng::count_successes(n_paths, seed, |r| {
        let mut x = root;
        for _ in 0..horizon {
            let u: f64 = r.random();
            match rows[x].iter().find(|e| u < e.1) {
                Some(&(y, _)) => x = y,
                None => return false,
            }
            if mask[x] {
                return true;
            }
        }
        false
    });
    Ok(HitEstimate::from_counts(hits, n_paths, seed))
}

/// Default Monte Carlo horizon for a chain whose window has the given diameter.
pub fn default_horizon(diameter: usize) -> u64 {
    50 * diameter.max(1) as u64
}

/// Space-time chain `(X_n, n)` of a (typically recurrent) base chain.
#[derive(Debug, Clone)]
pub struct SpaceTimeChain {
    pub chain: ChainSpec,
    /// Indices of `{root} x A` in `chain`, ordered like `times`.
    pub target: Vec<usize>,
    pub times: Vec<u64>,
    pub horizon: u64,
    /// `(base state, time)` of every space-time state.
    pub states: Vec<(usize, u64)>,
    /// `p^(n)(root, root)` for `n = 0..=horizon` in the base chain.
    pub return_probabilities: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Periodicity {
    /// No return to the root within the horizon.
    NoReturn,
    Period(u64),
}

/// `p^(n)(root, root)` for `n = 0..=horizon`.
pub fn return_probabilities(base: &ChainSpec, horizon: u64) -> Vec<f64> {
    let n = base.n_states();
    let mut dist = vec![0.0; n];
    dist[base.root()] = 1.0;
    let mut out = vec![1.0];
    let mut next = vec![0.0; n];
    for _ in 0..horizon {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (x, &d) in dist.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            for (y, v) in base.matrix().row(x) {
                next[y] += d * v;
            }
        }
        std::mem::swap(&mut dist, &mut next);
        out.push(dist[base.root()]);
    }
    out
}

/// gcd of the return times within `horizon`.
pub fn return_period(base: &ChainSpec, horizon: u64) -> Periodicity {
    let probs = return_probabilities(base, horizon);
    let g = probs
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, p)| **p > 0.0)
        .fold(0u64, |g, (t, _)| gcd(g, t as u64));
    if g == 0 {
        Periodicity::NoReturn
    } else {
        Periodicity::Period(g)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Wraps `base` into its space-time chain with target `{root} x times`.
///
/// Only states reachable from `(root, 0)` that can still reach the target are
/// kept; this leaves hitting probabilities and the Martin kernel on the target
/// unchanged. Time sets that are not multiples of the walk's period are rejected.
pub fn space_time_wrap(base: &ChainSpec, times: &[u64], horizon: u64) -> Result<SpaceTimeChain> {
    if times.is_empty() {
        return Err(Error::EmptyTimeSet);
    }
    let mut times = times.to_vec();
    times.sort_unstable();
    times.dedup();
    for &t in &times {
        if t == 0 || t > horizon {
            return Err(Error::TimeBeyondHorizon { time: t, horizon });
        }
    }
    if let Periodicity::Period(r) = return_period(base, horizon) {
        if r > 1 {
            if let Some(&t) = times.iter().find(|&&t| t % r != 0) {
                return Err(Error::PeriodicTimeSet { period: r, time: t });
            }
        }
    }
    let last = *times.last().expect("nonempty");
    let n = base.n_states();
    let root = base.root();
    let p = base.matrix();
    let pt = p.transpose();

    // forward reachability per layer
    let mut forward = vec![vec![false; n]; last as usize + 1];
    forward[0][root] = true;
    for t in 0..last as usize {
        for x in 0..n {
            if forward[t][x] {
                for (y, _) in p.row(x) {
                    forward[t + 1][y] = true;
                }
            }
        }
    }
    // backward: can (x, t) still reach (root, s) for some s in times?
    let mut backward = vec![vec![false; n]; last as usize + 1];
    let is_time: std::collections::HashSet<u64> = times.iter().copied().collect();
    for t in (0..=last as usize).rev() {
        if is_time.contains(&(t as u64)) {
            backward[t][root] = true;
        }
        if t < last as usize {
            for y in 0..n {
                if backward[t + 1][y] {
                    for (x, _) in pt.row(y) {
                        backward[t][x] = true;
                    }
                }
            }
        }
    }
    let mut states = Vec::new();
    let mut index = vec![vec![usize::MAX; n]; last as usize + 1];
    for t in 0..=last as usize {
        for x in 0..n {
            if forward[t][x] && (backward[t][x] || (t == 0 && x == root)) {
                index[t][x] = states.len();
                states.push((x, t as u64));
            }
        }
    }
    let mut transitions = Vec::new();
    for (i, &(x, t)) in states.iter().enumerate() {
        let t = t as usize;
        if t >= last as usize {
            continue;
        }
        for (y, v) in p.row(x) {
            let j = index[t + 1][y];
            if j != usize::MAX && v > 0.0 {
                transitions.push((i, j, v));
            }
        }
    }
    let chain = ChainSpec::new(states.len(), index[0][root], transitions, None)?;
    let target = times.iter().map(|&t| index[t as usize][root]).collect::<Vec<_>>();
    if target.iter().any(|&t| t == usize::MAX) {
        // root unreachable at some requested time: the time set is never hit there
        return Err(Error::UnreachableTarget { state: root });
    }
    Ok(SpaceTimeChain {
        chain,
        target,
        times,
        horizon,
        states,
        return_probabilities: return_probabilities(base, last),
    })
}

impl SpaceTimeChain {
    /// `K~(m, n) = p^(n-m)(root,root) / p^(n)(root,root)` for `m <= n`, zero otherwise,
    /// symmetrized; evaluated straight from the return probabilities.
    pub fn return_kernel(&self) -> Result<KernelMatrix> {
        let g = &self.return_probabilities;
        let times = &self.times;
        KernelMatrix::from_fn(times.len(), |i, j| {
            let (m, n) = (times[i] as usize, times[j] as usize);
            if m <= n {
                g[n - m] / g[n]
            } else {
                0.0
            }
        })
    }
}

/// `sum_x nu(x) K(x, y)` for each `y` in `target`, with `nu` the hitting
/// measure and `K` the unsymmetrized Martin kernel; every entry equals 1.
pub fn hitting_identity_sums(chain: &ChainSpec, target: &[usize]) -> Result<Vec<f64>> {
    let nu = hitting_measure(chain, target)?;
    let b = green_block(chain, target)?;
    Ok((0..target.len())
        .map(|j| {
            let w = nu.weights();
            (0..target.len()).map(|i| w[i] * b.block[i][j]).sum::<f64>() / b.root_row[j]
        })
        .collect())
}

/// Seeded random substochastic chain on `2..=max_states` states. Every state
/// steps to its successor, so all states are reachable from the root 0, and
/// row sums lie in `[0.5, 0.95]`.
pub fn random_chain(seed: u64, max_states: usize) -> Result<ChainSpec> {
    if max_states < 2 {
        return Err(Error::InvalidParameter("random chains need at least 2 states".into()));
    }
    let mut r = rng::stream(seed, u64::MAX);
    let n = r.random_range(2..=max_states);
    let mut tr = Vec::new();
    for i in 0..n {
        let mut to: Vec<usize> = (0..r.random_range(1..=4)).map(|_| r.random_range(0..n)).collect();
        if i + 1 < n {
            to.push(i + 1);
        }
        to.sort();
        to.dedup();
        let w: Vec<f64> = to.iter().map(|_| r.random_range(0.05..1.0)).collect();
        let mass = r.random_range(0.5..0.95) / w.iter().sum::<f64>();
        tr.extend(to.into_iter().zip(w).map(|(j, wj)| (i, j, wj * mass)));
    }
    ChainSpec::new(n, 0, tr, None)
}

/// Seeded random target of `1..=max_size` distinct states.
pub fn random_target(seed: u64, n_states: usize, max_size: usize) -> Vec<usize> {
    let mut r = rng::stream(seed, u64::MAX - 1);
    let k = r.random_range(1..=max_size.clamp(1, n_states));
    let mut all: Vec<usize> = (0..n_states).collect();
    for i in 0..k {
        let j = r.random_range(i..n_states);
        all.swap(i, j);
    }
    let mut t = all[..k].to_vec();
    t.sort();
    t
}
