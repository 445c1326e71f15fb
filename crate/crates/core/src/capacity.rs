//! Energy, capacity and capacity-derived diagnostics.
//!
//! The capacity of a finite set in a kernel `F` is the reciprocal of the
//! minimal energy `mu^T F mu` over probability vectors `mu`. The minimizer is
//! found by Frank-Wolfe with away steps: the linear oracle is the coordinate
//! minimizing the potential `phi = F mu`, so the equilibrium potential comes
//! out of the iteration for free.

use serde::{Deserialize, Serialize};

use crate::chain::{self, ChainSpec, GreenMatrix};
use crate::error::{Error, Result};
use crate::kernel::{KernelMatrix, Measure};

/// `sum_{x,y} F(x,y) mu(x) mu(y)`; infinite iff an atom sits on an infinite diagonal.
pub fn energy(mu: &Measure, f: &KernelMatrix) -> Result<f64> {
    f.check_dim(mu)?;
    let w = mu.weights();
    let mut total = 0.0;
    for x in mu.support() {
        if f.has_infinite_diagonal(x) {
            return Ok(f64::INFINITY);
        }
        let row = f.row(x);
        total += w[x] * row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityOptions {
    /// Stop once `max(energy - min phi, max_support phi - energy) / energy` drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions { tolerance: 1e-8, max_iterations: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub capacity: f64,
    pub energy: f64,
    pub minimizer: Measure,
    /// `phi(y) = sum_x mu*(x) F(x,y)`.
    pub potential: Vec<f64>,
    /// Largest relative violation of the equilibrium conditions.
    pub kkt_gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Whether the minimum is known to be global: the kernel is convex on
    /// the simplex, or every support was searched.
    pub global: bool,
}

impl CapacityResult {
    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence { iterations: self.iterations, gap: self.kkt_gap })
        }
    }
}

pub fn capacity(f: &KernelMatrix) -> CapacityResult {
    capacity_with(f, CapacityOptions::default())
}

pub fn capacity_with(f: &KernelMatrix, opts: CapacityOptions) -> CapacityResult {
    let n = f.size();
    if n == 0 {
        return CapacityResult {
            capacity: 0.0,
            energy: f64::INFINITY,
            minimizer: Measure::new(vec![]).expect("empty measure"),
            potential: vec![],
            kkt_gap: 0.0,
            iterations: 0,
            converged: true,
            global: true,
        };
    }
    // Atoms on infinite diagonals have infinite energy, so those points never carry mass.
    let active: Vec<usize> = (0..n).filter(|&i| !f.has_infinite_diagonal(i)).collect();
    if active.is_empty() {
        let minimizer = Measure::uniform(n);
        let potential = f.potential(&minimizer).expect("dimensions match");
        return CapacityResult {
            capacity: 0.0,
            energy: f64::INFINITY,
            minimizer,
            potential,
            kkt_gap: 0.0,
            iterations: 0,
            converged: true,
            global: true,
        };
    }
    let sub = f.restrict(&active);
    let (weights, iterations, converged, global) = minimize(&sub, opts);
    let mut full = vec![0.0; n];
    for (k, &i) in active.iter().enumerate() {
        full[i] = weights[k];
    }
    let minimizer = Measure::new(full).expect("weights are nonnegative");
    let potential = f.potential(&minimizer).expect("dimensions match");
    let e = energy(&minimizer, f).expect("dimensions match");
    let kkt_gap = equilibrium_gap(&potential, &minimizer, e, &active);
    let capacity = if e == 0.0 { f64::INFINITY } else { 1.0 / e };
    CapacityResult { capacity, energy: e, minimizer, potential, kkt_gap, iterations, converged, global }
}

/// Kernels up to this size are tested for convexity on the simplex.
pub const CONVEXITY_CHECK_LIMIT: usize = 64;

/// Non-convex kernels up to this size are minimized by searching all supports.
pub const SUPPORT_SEARCH_LIMIT: usize = 12;

fn quad(f: &KernelMatrix, mu: &[f64]) -> f64 {
    (0..mu.len()).map(|i| mu[i] * f.row(i).iter().zip(mu).map(|(a, b)| a * b).sum::<f64>()).sum()
}

/// Frank-Wolfe from the uniform measure, globalized for small non-convex kernels.
fn minimize(f: &KernelMatrix, opts: CapacityOptions) -> (Vec<f64>, usize, bool, bool) {
    let n = f.size();
    let start = vec![1.0 / n as f64; n];
    let (mut mu, mut iterations, mut converged) = frank_wolfe(f, start, opts);
    if n == 1 || n > CONVEXITY_CHECK_LIMIT || is_convex_on_simplex(f) {
        return (mu, iterations, converged, n <= CONVEXITY_CHECK_LIMIT);
    }
    let mut best = quad(f, &mu);
    if n <= SUPPORT_SEARCH_LIMIT {
        if let Some((w, e)) = support_search(f) {
            if e < best {
                mu = w;
                converged = true;
            }
        }
        return (mu, iterations, converged, true);
    }
    for v in 0..n {
        let mut start = vec![0.0; n];
        start[v] = 1.0;
        let (w, it, ok) = frank_wolfe(f, start, opts);
        iterations += it;
        let e = quad(f, &w);
        if e < best {
            (mu, best, converged) = (w, e, ok);
        }
    }
    (mu, iterations, converged, false)
}

/// `x^T F x >= 0` whenever `sum x = 0`.
fn is_convex_on_simplex(f: &KernelMatrix) -> bool {
    let n = f.size();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| f.get(i, j));
    let p = nalgebra::DMatrix::<f64>::identity(n, n) - nalgebra::DMatrix::from_element(n, n, 1.0 / n as f64);
    let q = &p * m * &p;
    let q = (&q + q.transpose()) * 0.5;
    let scale = f.row(0).iter().chain((1..n).flat_map(|i| f.row(i).iter())).fold(0.0f64, |a, &b| a.max(b.abs()));
    q.symmetric_eigenvalues().min() >= -1e-12 * scale.max(1.0) * n as f64
}

/// Global minimum over the simplex: on each support `S` with `F_S w = 1`,
/// `w > 0`, the stationary point is `w / sum w` with energy `1 / sum w`.
fn support_search(f: &KernelMatrix) -> Option<(Vec<f64>, f64)> {
    let n = f.size();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 1u32..(1 << n) {
        let s: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let k = s.len();
        let m = nalgebra::DMatrix::from_fn(k, k, |i, j| f.get(s[i], s[j]));
        let Some(w) = m.lu().solve(&nalgebra::DVector::from_element(k, 1.0)) else { continue };
        if w.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            continue;
        }
        let total: f64 = w.iter().sum();
        let mut mu = vec![0.0; n];
        for (idx, &i) in s.iter().enumerate() {
            mu[i] = w[idx] / total;
        }
        let e = quad(f, &mu);
        if best.as_ref().is_none_or(|(_, b)| e < *b) {
            best = Some((mu, e));
        }
    }
    best
}

fn equilibrium_gap(phi: &[f64], mu: &Measure, e: f64, active: &[usize]) -> f64 {
    if e == 0.0 {
        return 0.0;
    }
    let min_phi = active.iter().map(|&i| phi[i]).fold(f64::INFINITY, f64::min);
    let support_dev = mu.support().map(|i| (phi[i] - e).abs()).fold(0.0, f64::max);
    ((e - min_phi).max(0.0)).max(support_dev) / e
}

/// Returns (weights, iterations, converged) for a kernel with finite entries.
fn frank_wolfe(f: &KernelMatrix, start: Vec<f64>, opts: CapacityOptions) -> (Vec<f64>, usize, bool) {
    let n = f.size();
    let mut mu = start;
    let mut phi = vec![0.0; n];
    let refresh = |mu: &[f64], phi: &mut [f64]| {
        phi.iter_mut().for_each(|p| *p = 0.0);
        for (x, &w) in mu.iter().enumerate() {
            if w > 0.0 {
                for (p, &v) in phi.iter_mut().zip(f.row(x)) {
                    *p += w * v;
                }
            }
        }
    };
    refresh(&mu, &mut phi);
    for it in 0..opts.max_iterations {
        if it > 0 && it % 1000 == 0 {
            refresh(&mu, &mut phi);
        }
        let e: f64 = mu.iter().zip(&phi).map(|(a, b)| a * b).sum();
        if e <= 0.0 {
            return (mu, it, true);
        }
        // ties broken by lowest index
        let mut s = 0;
        for i in 1..n {
            if phi[i] < phi[s] {
                s = i;
            }
        }
        let mut a = usize::MAX;
        for i in 0..n {
            if mu[i] > 0.0 && (a == usize::MAX || phi[i] > phi[a]) {
                a = i;
            }
        }
        let fw_gap = e - phi[s];
        let away_gap = phi[a] - e;
        if fw_gap.max(away_gap) / e < opts.tolerance {
            return (mu, it, true);
        }
        if fw_gap >= away_gap || mu[a] >= 1.0 {
            // move towards vertex s: f(mu + g (e_s - mu)) = e - 2 g fw_gap + g^2 c
            let c = f.get(s, s) - 2.0 * phi[s] + e;
            let g = if c <= 0.0 { 1.0 } else { (fw_gap / c).min(1.0) };
            for w in mu.iter_mut() {
                *w *= 1.0 - g;
            }
            mu[s] += g;
            let row = f.row(s);
            for (p, &v) in phi.iter_mut().zip(row) {
                *p = (1.0 - g) * *p + g * v;
            }
        } else {
            // move away from vertex a along mu - e_a
            let g_max = mu[a] / (1.0 - mu[a]);
            let c = e - 2.0 * phi[a] + f.get(a, a);
            let g = if c <= 0.0 { g_max } else { (away_gap / c).min(g_max) };
            for w in mu.iter_mut() {
                *w *= 1.0 + g;
            }
            if g >= g_max {
                mu[a] = 0.0;
            } else {
                mu[a] = (mu[a] - g).max(0.0);
            }
            let row = f.row(a);
            for (p, &v) in phi.iter_mut().zip(row) {
                *p = (1.0 + g) * *p - g * v;
            }
        }
    }
    refresh(&mu, &mut phi);
    let e: f64 = mu.iter().zip(&phi).map(|(a, b)| a * b).sum();
    let min_phi = phi.iter().copied().fold(f64::INFINITY, f64::min);
    let converged = e > 0.0 && (e - min_phi) / e < opts.tolerance;
    (mu, opts.max_iterations, converged)
}

/// Outcome of comparing a hitting probability with Martin capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub target: Vec<usize>,
    pub hitting_probability: f64,
    pub capacity: f64,
    pub lower: f64,
    pub upper: f64,
    pub tolerance: f64,
    pub holds: bool,
    pub solver_converged: bool,
}

pub const SANDWICH_TOL: f64 = 1e-6;

/// Checks `Cap_K / 2 <= P_root[hit target] <= Cap_K` for the Martin kernel `K`.
pub fn verify_sandwich(chain: &ChainSpec, target: &[usize]) -> Result<SandwichReport> {
    chain.check_transient()?;
    let p = chain::exact_hitting_probability(chain, target)?;
    let k = chain::martin_kernel_for(chain, target)?;
    let cap = capacity(&k);
    let (lower, upper) = (cap.capacity / 2.0, cap.capacity);
    let holds = lower - SANDWICH_TOL <= p && p <= upper + SANDWICH_TOL;
    Ok(SandwichReport {
        target: target.to_vec(),
        hitting_probability: p,
        capacity: cap.capacity,
        lower,
        upper,
        tolerance: SANDWICH_TOL,
        holds,
        solver_converged: cap.converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint<T> {
    pub cut: T,
    /// Points left after removing everything below the cut.
    pub n_points: usize,
    pub capacity: f64,
}

/// Tail capacities `Cap_F({x in set : x >= cut})` for each cut.
///
/// `build` turns a (sorted) tail into its kernel. A cut past the end of the
/// set leaves the empty set, whose capacity is zero.
pub fn asymptotic_capacity_profile<T, B>(set: &[T], cuts: &[T], build: B) -> Result<Vec<ProfilePoint<T>>>
where
    T: Ord + Clone,
    B: Fn(&[T]) -> Result<KernelMatrix>,
{
    if cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadCuts);
    }
    let mut sorted = set.to_vec();
    sorted.sort();
    sorted.dedup();
    cuts.iter()
        .map(|cut| {
            let start = sorted.partition_point(|x| x < cut);
            let tail = &sorted[start..];
            let cap = if tail.is_empty() { 0.0 } else { capacity(&build(tail)?).capacity };
            Ok(ProfilePoint { cut: cut.clone(), n_points: tail.len(), capacity: cap })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LampertiTerm {
    pub level: usize,
    pub states: Vec<usize>,
    /// Capacity of the level slice in the (symmetrized) Green kernel.
    pub capacity: f64,
    /// `b^{-level} * capacity`.
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LampertiSeries {
    pub base: f64,
    pub terms: Vec<LampertiTerm>,
    pub partial_sum: f64,
    /// Target states with `G(root, x) > 1`, which sit below level 0.
    pub above_unit: Vec<usize>,
    /// Target states never reached from the root.
    pub unreachable: Vec<usize>,
}

/// Level of `g` in the partition `b^{-n-1} < g <= b^{-n}`; `None` if `g > 1` or `g == 0`.
pub fn green_level(g: f64, b: f64) -> Option<usize> {
    if g <= 0.0 || g > 1.0 {
        return None;
    }
    let mut n = (-(g.ln()) / b.ln()).floor().max(0.0) as i64;
    // repair floating-point placement at the level boundaries
    while n > 0 && g > b.powi(-(n as i32)) {
        n -= 1;
    }
    while g <= b.powi(-(n as i32) - 1) {
        n += 1;
    }
    Some(n as usize)
}

/// Terms `b^{-n} Cap_G(target ∩ Y(n))` of Lamperti's series for `n < n_terms`.
pub fn lamperti_series(green: &GreenMatrix, target: &[usize], b: f64, n_terms: usize) -> Result<LampertiSeries> {
    if !(b > 1.0) {
        return Err(Error::InvalidParameter(format!("base {b} must exceed 1")));
    }
    if n_terms == 0 {
        return Err(Error::InvalidParameter("n_terms must be positive".into()));
    }
    let root_row = green.root_row();
    let mut levels: Vec<Vec<usize>> = vec![Vec::new(); n_terms];
    let mut above_unit = Vec::new();
    let mut unreachable = Vec::new();
    for &x in target {
        if x >= green.n() {
            return Err(Error::StateOutOfRange { state: x, n_states: green.n() });
        }
        let g = root_row[x];
        match green_level(g, b) {
            Some(n) if n < n_terms => levels[n].push(x),
            Some(_) => {}
            None if g > 1.0 => above_unit.push(x),
            None => unreachable.push(x),
        }
    }
    let mut terms = Vec::with_capacity(n_terms);
    let mut partial_sum = 0.0;
    for (level, states) in levels.into_iter().enumerate() {
        let cap = if states.is_empty() {
            0.0
        } else {
            let k = KernelMatrix::from_fn(states.len(), |i, j| green.get(states[i], states[j]))?;
            capacity(&k).capacity
        };
        let term = b.powi(-(level as i32)) * cap;
        partial_sum += term;
        terms.push(LampertiTerm { level, states, capacity: cap, term });
    }
    Ok(LampertiSeries { base: b, terms, partial_sum, above_unit, unreachable })
}
