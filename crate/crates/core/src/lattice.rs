//! Lattice examples: return-time kernels for time sets, Riesz-type kernels,
//! integer Cantor sets, tail-capacity profiles, lazy walk chains and the
//! two-dimensional versus three-dimensional hitting experiment.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::capacity::{self, ProfilePoint};
use crate::chain::{self, ChainSpec};
use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;
use crate::rng::{self, HitEstimate};

/// Time sets larger than this are refused at construction.
pub const MAX_TIME_SET_LEN: u64 = 1 << 26;

/// Relative change of the root Green row at which window doubling stops.
pub const WINDOW_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockRule {
    /// `L_n = n`
    Linear,
    /// `L_n = floor(2^{n/2})`
    Sqrt,
    /// `L_n = 2^n`
    Exponential,
}

impl BlockRule {
    pub fn length(self, n: u32) -> u64 {
        match self {
            BlockRule::Linear => n as u64,
            BlockRule::Sqrt => (2f64.powf(n as f64 / 2.0)).floor() as u64,
            BlockRule::Exponential => 1u64 << n,
        }
    }
}

/// How a time set was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeSetSpec {
    Explicit(Vec<u64>),
    /// Union of `[2^n, 2^n + L_n]` for `n = 1..=n_max`.
    Blocks { rule: BlockRule, n_max: u32 },
    /// Primes up to `n_max`.
    Primes { n_max: u64 },
}

/// Strictly increasing set of positive integer times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSet {
    pub spec: TimeSetSpec,
    /// Every `stride`-th element of the generated set is kept.
    #[serde(default = "one")]
    pub stride: usize,
    times: Vec<u64>,
}

fn one() -> usize {
    1
}

impl TimeSet {
    pub fn build(spec: TimeSetSpec) -> Result<Self> {
        let times = match &spec {
            TimeSetSpec::Explicit(t) => {
                if t.first() == Some(&0) || t.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidParameter("times must be positive and strictly increasing".into()));
                }
                t.clone()
            }
            TimeSetSpec::Blocks { rule, n_max } => blocks(*rule, *n_max)?,
            TimeSetSpec::Primes { n_max } => primes(*n_max)?,
        };
        Ok(TimeSet { spec, stride: 1, times })
    }

    pub fn explicit(times: Vec<u64>) -> Result<Self> {
        Self::build(TimeSetSpec::Explicit(times))
    }

    pub fn blocks(rule: BlockRule, n_max: u32) -> Result<Self> {
        Self::build(TimeSetSpec::Blocks { rule, n_max })
    }

    pub fn primes(n_max: u64) -> Result<Self> {
        Self::build(TimeSetSpec::Primes { n_max })
    }

    pub fn times(&self) -> &[u64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max(&self) -> Option<u64> {
        self.times.last().copied()
    }

    /// Keeps every `s`-th element, with `s` the smallest stride leaving at most `max_points`.
    /// The result is a subset, so its capacities bound those of the full set from below.
    pub fn thinned(&self, max_points: usize) -> TimeSet {
        let s = self.times.len().div_ceil(max_points.max(1)).max(1);
        TimeSet {
            spec: self.spec.clone(),
            stride: self.stride * s,
            times: self.times.iter().step_by(s).copied().collect(),
        }
    }

    /// Re-derives `times` after deserialization.
    pub fn rebuild(&self) -> Result<Self> {
        let full = Self::build(self.spec.clone())?;
        let stride = self.stride.max(1);
        Ok(TimeSet { spec: full.spec, stride, times: full.times.into_iter().step_by(stride).collect() })
    }
}

fn blocks(rule: BlockRule, n_max: u32) -> Result<Vec<u64>> {
    if n_max >= 62 {
        return Err(Error::Overflow(format!("block index {n_max} too large")));
    }
    let total: u64 = (1..=n_max).map(|n| rule.length(n) + 1).sum();
    if total > MAX_TIME_SET_LEN {
        return Err(Error::Overflow(format!("block set has {total} elements")));
    }
    let mut out: Vec<u64> = Vec::with_capacity(total as usize);
    for n in 1..=n_max {
        let start = 1u64 << n;
        for t in start..=start + rule.length(n) {
            if out.last().is_none_or(|&l| t > l) {
                out.push(t);
            }
        }
    }
    Ok(out)
}

fn primes(n_max: u64) -> Result<Vec<u64>> {
    if n_max > MAX_TIME_SET_LEN * 8 {
        return Err(Error::Overflow(format!("prime bound {n_max} too large")));
    }
    let n = n_max as usize;
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    Ok(out)
}

/// `F(m,n) = sqrt(n) / sqrt(n - m + 1)` for `m <= n`, zero otherwise, symmetrized.
pub fn return_kernel_1d(a: &TimeSet) -> Result<KernelMatrix> {
    return_kernel_1d_times(a.times())
}

pub fn return_kernel_1d_times(t: &[u64]) -> Result<KernelMatrix> {
    KernelMatrix::from_fn(t.len(), |i, j| {
        let (m, n) = (t[i] as f64, t[j] as f64);
        if m <= n { n.sqrt() / (n - m + 1.0).sqrt() } else { 0.0 }
    })
}

/// `F(m,n) = n / (1 + n - m)` for `m <= n`, zero otherwise, symmetrized.
pub fn return_kernel_2d(a: &TimeSet) -> Result<KernelMatrix> {
    return_kernel_2d_times(a.times())
}

pub fn return_kernel_2d_times(t: &[u64]) -> Result<KernelMatrix> {
    KernelMatrix::from_fn(t.len(), |i, j| {
        let (m, n) = (t[i] as f64, t[j] as f64);
        if m <= n { n / (1.0 + n - m) } else { 0.0 }
    })
}

/// Martin kernel of the Brownian zero set: `sqrt(t / (t - s))` for `s < t`,
/// infinite on the diagonal. Every point carries infinite self-energy, so
/// the capacity of any finite set in this kernel is zero.
pub fn zero_set_kernel(a: &TimeSet) -> Result<KernelMatrix> {
    let t = a.times();
    KernelMatrix::from_fn(t.len(), |i, j| {
        let (s, u) = (t[i] as f64, t[j] as f64);
        if i == j {
            f64::INFINITY
        } else if s < u {
            (u / (u - s)).sqrt()
        } else {
            0.0
        }
    })
}

/// Zero-set kernel on cells of width `h` centred at `times`; the diagonal is
/// the off-diagonal formula at separation `h / 2`.
pub fn zero_set_grid_kernel(times: &[f64], h: f64) -> Result<KernelMatrix> {
    if !(h > 0.0) || times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidParameter("zero-set grid needs positive times and mesh".into()));
    }
    KernelMatrix::from_fn(times.len(), |i, j| {
        let (s, u) = (times[i], times[j]);
        if i == j {
            (u / (h / 2.0)).sqrt()
        } else if s < u {
            (u / (u - s)).sqrt()
        } else {
            0.0
        }
    })
}

/// Midpoints of `n` equal cells covering `[a, b]` and the cell width.
pub fn zero_set_grid(a: f64, b: f64, n: usize) -> (Vec<f64>, f64) {
    let h = (b - a) / n as f64;
    ((0..n).map(|i| a + (i as f64 + 0.5) * h).collect(), h)
}

/// `P[B has a zero in [a, b]] = (2/pi) arccos(sqrt(a/b))` for `0 < a < b`.
pub fn zero_set_interval_probability(a: f64, b: f64) -> f64 {
    std::f64::consts::FRAC_2_PI * (a / b).sqrt().acos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    #[default]
    Euclidean,
    Sup,
    L1,
}

impl Norm {
    pub fn of(self, v: impl Iterator<Item = f64>) -> f64 {
        match self {
            Norm::Euclidean => v.map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Sup => v.map(f64::abs).fold(0.0, f64::max),
            Norm::L1 => v.map(f64::abs).sum(),
        }
    }
}

/// Point of `Z^d`, `d` in 1..=3, with the norm used to measure it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePoint {
    pub coords: Vec<i64>,
    #[serde(default)]
    pub norm: Norm,
}

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticePoint { coords, norm: Norm::Euclidean }
    }

    pub fn on_line(x: i64) -> Self {
        Self::new(vec![x])
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn length(&self) -> f64 {
        self.norm.of(self.coords.iter().map(|&c| c as f64))
    }

    pub fn distance(&self, other: &LatticePoint) -> f64 {
        self.norm.of(self.coords.iter().zip(&other.coords).map(|(&a, &b)| (a - b) as f64))
    }
}

fn check_points(points: &[LatticePoint]) -> Result<()> {
    let Some(first) = points.first() else { return Ok(()) };
    let (d, norm) = (first.dim(), first.norm);
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidParameter(format!("lattice dimension {d} not in 1..=3")));
    }
    if points.iter().any(|p| p.dim() != d || p.norm != norm) {
        return Err(Error::InvalidParameter("points must share dimension and norm".into()));
    }
    let mut sorted: Vec<&Vec<i64>> = points.iter().map(|p| &p.coords).collect();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("points must be distinct".into()));
    }
    Ok(())
}

/// `F_a(x,y) = |y|^a / (1 + |x - y|^a)`, symmetrized.
pub fn riesz_kernel(points: &[LatticePoint], alpha: f64) -> Result<KernelMatrix> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
    }
    check_points(points)?;
    let len: Vec<f64> = points.iter().map(|p| p.length().powf(alpha)).collect();
    KernelMatrix::from_fn(points.len(), |i, j| len[j] / (1.0 + points[i].distance(&points[j]).powf(alpha)))
}

/// Digits `D` in base `b`, strings of length at most `n_digits`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CantorSpec {
    pub base: u64,
    pub digits: Vec<u64>,
    pub n_digits: u32,
}

impl CantorSpec {
    pub fn new(base: u64, digits: Vec<u64>, n_digits: u32) -> Result<Self> {
        let spec = CantorSpec { base, digits, n_digits };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.base < 2 {
            return Err(Error::InvalidParameter("base must be at least 2".into()));
        }
        if !self.digits.contains(&0) || self.digits.iter().any(|&d| d >= self.base) {
            return Err(Error::InvalidParameter("digits must lie in 0..base and include 0".into()));
        }
        Ok(())
    }

    /// `log |D| / log b`.
    pub fn dimension(&self) -> f64 {
        let mut d = self.digits.clone();
        d.sort();
        d.dedup();
        (d.len() as f64).ln() / (self.base as f64).ln()
    }
}

/// `{ sum a_k b^k : a_k in D, k < N }`, sorted.
pub fn cantor_set(spec: &CantorSpec) -> Result<Vec<u64>> {
    spec.validate()?;
    spec.base
        .checked_pow(spec.n_digits)
        .ok_or_else(|| Error::Overflow(format!("{}^{} exceeds u64", spec.base, spec.n_digits)))?;
    let mut digits = spec.digits.clone();
    digits.sort();
    digits.dedup();
    let count = (digits.len() as u64).checked_pow(spec.n_digits).filter(|&c| c <= MAX_TIME_SET_LEN);
    if count.is_none() {
        return Err(Error::Overflow("Cantor set too large to enumerate".into()));
    }
    let mut set = vec![0u64];
    let mut place = 1u64;
    for _ in 0..spec.n_digits {
        set = set.iter().flat_map(|&x| digits.iter().map(move |&a| x + a * place)).collect();
        place = place.wrapping_mul(spec.base);
    }
    set.sort();
    set.dedup();
    Ok(set)
}

/// Tail capacities under `F_a` for a grid of `a`, with a heuristic crossover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionProfile {
    pub alphas: Vec<f64>,
    pub cuts: Vec<f64>,
    /// `profiles[i][j]`: capacity at `alphas[i]` of the points with norm `>= cuts[j]`.
    pub profiles: Vec<Vec<ProfilePoint<f64>>>,
    /// Last over first capacity for each alpha.
    pub decay: Vec<f64>,
    /// Alpha at which the decay ratio crosses `threshold`, by linear interpolation.
    pub knee: Option<f64>,
    pub threshold: f64,
}

/// Decay ratio below which a profile counts as vanishing.
pub const DECAY_THRESHOLD: f64 = 0.2;

pub fn dimension_profile(points: &[LatticePoint], alphas: &[f64], cuts: &[f64]) -> Result<DimensionProfile> {
    if alphas.windows(2).any(|w| w[0] >= w[1]) || alphas.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidParameter("alphas must be positive and increasing".into()));
    }
    if cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadCuts);
    }
    check_points(points)?;
    let lengths: Vec<f64> = points.iter().map(LatticePoint::length).collect();
    let mut profiles = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let mut row = Vec::with_capacity(cuts.len());
        for &cut in cuts {
            let tail: Vec<LatticePoint> =
                points.iter().zip(&lengths).filter(|(_, &l)| l >= cut).map(|(p, _)| p.clone()).collect();
            let cap = if tail.is_empty() { 0.0 } else { capacity::capacity(&riesz_kernel(&tail, alpha)?).capacity };
            row.push(ProfilePoint { cut, n_points: tail.len(), capacity: cap });
        }
        profiles.push(row);
    }
    let decay: Vec<f64> = profiles
        .iter()
        .map(|row| match (row.first(), row.last()) {
            (Some(f), Some(l)) if f.capacity > 0.0 => l.capacity / f.capacity,
            _ => f64::NAN,
        })
        .collect();
    let knee = crossing(alphas, &decay, DECAY_THRESHOLD);
    Ok(DimensionProfile { alphas: alphas.to_vec(), cuts: cuts.to_vec(), profiles, decay, knee, threshold: DECAY_THRESHOLD })
}

fn crossing(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    for i in 1..xs.len() {
        let (y0, y1) = (ys[i - 1], ys[i]);
        if y0 >= level && y1 < level {
            return Some(xs[i - 1] + (y0 - level) / (y0 - y1) * (xs[i] - xs[i - 1]));
        }
    }
    None
}

/// Walk on `{lo..=hi}` stepping right with probability `p` and left otherwise,
/// killed on leaving the window; the root is 0.
pub fn drift_walk(lo: i64, hi: i64, p: f64) -> Result<ChainSpec> {
    if !(lo <= 0 && 0 <= hi) {
        return Err(Error::InvalidParameter("window must contain 0".into()));
    }
    let n = (hi - lo + 1) as usize;
    let mut tr = Vec::new();
    for i in 0..n {
        if i + 1 < n && p > 0.0 {
            tr.push((i, i + 1, p));
        }
        if i > 0 && p < 1.0 {
            tr.push((i, i - 1, 1.0 - p));
        }
    }
    ChainSpec::new(n, (-lo) as usize, tr, None)
}

/// Lazy simple walk on the box `[-r, r]^d`, killed on leaving it.
#[derive(Debug, Clone)]
pub struct LatticeBox {
    pub dim: usize,
    pub radius: i64,
    pub chain: ChainSpec,
}

impl LatticeBox {
    pub fn new(dim: usize, radius: i64) -> Result<Self> {
        if !(1..=3).contains(&dim) || radius < 1 {
            return Err(Error::InvalidParameter("box needs d in 1..=3 and radius >= 1".into()));
        }
        let side = (2 * radius + 1) as usize;
        let n = side.pow(dim as u32);
        let step = 1.0 / (4.0 * dim as f64);
        let mut tr = Vec::with_capacity(n * (2 * dim + 1));
        let mut stride = 1usize;
        let mut strides = Vec::with_capacity(dim);
        for _ in 0..dim {
            strides.push(stride);
            stride *= side;
        }
        for s in 0..n {
            tr.push((s, s, 0.5));
            for &st in &strides {
                let c = (s / st) % side;
                if c + 1 < side {
                    tr.push((s, s + st, step));
                }
                if c > 0 {
                    tr.push((s, s - st, step));
                }
            }
        }
        let mut b = LatticeBox { dim, radius, chain: ChainSpec::new(n, 0, tr, None)? };
        let origin = b.index(&vec![0; dim]).expect("origin inside");
        b.chain = b.chain.with_root(origin)?;
        Ok(b)
    }

    pub fn index(&self, coords: &[i64]) -> Option<usize> {
        if coords.len() != self.dim || coords.iter().any(|c| c.abs() > self.radius) {
            return None;
        }
        let side = 2 * self.radius + 1;
        Some(coords.iter().rev().fold(0i64, |acc, &c| acc * side + c + self.radius) as usize)
    }
}

/// Root Green row on `target`, doubling the window radius from `r0` until the
/// row changes by less than `tol` relative, or `r_max` is reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveGreen {
    pub radius: i64,
    pub root_row: Vec<f64>,
    pub relative_change: f64,
    pub converged: bool,
}

pub fn adaptive_root_green<B>(r0: i64, r_max: i64, tol: f64, build: B) -> Result<AdaptiveGreen>
where
    B: Fn(i64) -> Result<(ChainSpec, Vec<usize>)>,
{
    let row_at = |r: i64| -> Result<Vec<f64>> {
        let (c, target) = build(r)?;
        Ok(chain::green_block(&c, &target)?.root_row)
    };
    let mut r = r0.max(1);
    let mut prev = row_at(r)?;
    loop {
        let next_r = r * 2;
        if next_r > r_max {
            return Ok(AdaptiveGreen { radius: r, root_row: prev, relative_change: f64::NAN, converged: false });
        }
        let next = row_at(next_r)?;
        let change = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| if *b > 0.0 { (a - b).abs() / b } else { 0.0 })
            .fold(0.0, f64::max);
        r = next_r;
        prev = next;
        if change < tol {
            return Ok(AdaptiveGreen { radius: r, root_row: prev, relative_change: change, converged: true });
        }
    }
}

/// One lazy step in `Z^d`: hold with probability 1/2, else a uniform neighbour.
fn lazy_step<R: Rng>(r: &mut R, pos: &mut [i64]) {
    let d = pos.len();
    let k = r.random_range(0..4 * d);
    if k >= 2 * d {
        let m = k - 2 * d;
        pos[m / 2] += if m % 2 == 0 { 1 } else { -1 };
    }
}

/// Sup-norm kill radius for the three-dimensional axis experiment.
pub fn axis_kill_radius(max_time: u64) -> i64 {
    (8.0 * (max_time as f64).sqrt()).ceil() as i64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub times: Vec<u64>,
    /// `P[S_n = 0 for some n in A]` for the lazy walk on `Z^2`.
    pub planar: HitEstimate,
    /// `P[S hits {0} x {0} x A]` for the lazy walk on `Z^3`.
    pub axis: HitEstimate,
    /// `planar / axis`; `None` when the denominator vanishes.
    pub ratio: Option<f64>,
    pub kill_radius: i64,
}

pub fn intersection_equiv_experiment(a: &TimeSet, n_paths: u64, seed: u64) -> Result<IntersectionReport> {
    if n_paths == 0 {
        return Err(Error::InvalidParameter("n_paths must be positive".into()));
    }
    let times = a.times().to_vec();
    let Some(&t_max) = times.last() else {
        return Ok(IntersectionReport {
            times,
            planar: HitEstimate::certain(false, n_paths, seed),
            axis: HitEstimate::certain(false, n_paths, seed),
            ratio: None,
            kill_radius: 0,
        });
    };
    let in_a: Vec<bool> = {
        let mut v = vec![false; t_max as usize + 1];
        for &t in &times {
            v[t as usize] = true;
        }
        v
    };
    let planar_hits = rng::count_successes(n_paths, seed, |r| {
        let mut pos = [0i64; 2];
        for t in 1..=t_max {
            lazy_step(r, &mut pos);
            if pos == [0, 0] && in_a[t as usize] {
                return true;
            }
        }
        false
    });
    let radius = axis_kill_radius(t_max);
    // the axis experiment runs on a stream family disjoint from the planar one
    let axis_seed = seed ^ 0x9e37_79b9_7f4a_7c15;
    let axis_hits = rng::count_successes(n_paths, axis_seed, |r| {
        let mut pos = [0i64; 3];
        loop {
            lazy_step(r, &mut pos);
            if pos.iter().any(|c| c.abs() > radius) {
                return false;
            }
            if pos[0] == 0 && pos[1] == 0 && pos[2] > 0 && (pos[2] as u64) <= t_max && in_a[pos[2] as usize] {
                return true;
            }
        }
    });
    let planar = HitEstimate::from_counts(planar_hits, n_paths, seed);
    let axis = HitEstimate::from_counts(axis_hits, n_paths, axis_seed);
    let ratio = (axis.point_estimate > 0.0).then(|| planar.point_estimate / axis.point_estimate);
    Ok(IntersectionReport { times, planar, axis, ratio, kill_radius: radius })
}

/// Exact `P[S_n = 0 for some n in A]` for the lazy walk on `Z^d`, by evolving
/// the law of the walk killed at its first return during `A`.
pub fn exact_return_at_times(dim: usize, a: &TimeSet) -> Result<f64> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidParameter("dimension must be 1, 2 or 3".into()));
    }
    let Some(t_max) = a.max() else { return Ok(0.0) };
    let r = t_max as i64;
    let side = (2 * r + 1) as usize;
    let n = side.pow(dim as u32);
    if n > 1 << 24 {
        return Err(Error::Overflow("time horizon too large for exact evolution".into()));
    }
    let strides: Vec<usize> = (0..dim).map(|k| side.pow(k as u32)).collect();
    let origin: usize = strides.iter().map(|s| s * r as usize).sum();
    let step = 1.0 / (4.0 * dim as f64);
    let mut law = vec![0.0; n];
    law[origin] = 1.0;
    let mut hit = 0.0;
    let mut next = vec![0.0; n];
    let mut ti = 0;
    for t in 1..=t_max {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (s, &m) in law.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            next[s] += 0.5 * m;
            for &st in &strides {
                let c = (s / st) % side;
                // the walk cannot reach the box edge within t_max steps
                if c + 1 < side {
                    next[s + st] += step * m;
                }
                if c > 0 {
                    next[s - st] += step * m;
                }
            }
        }
        std::mem::swap(&mut law, &mut next);
        if ti < a.len() && a.times()[ti] == t {
            hit += law[origin];
            law[origin] = 0.0;
            ti += 1;
        }
    }
    Ok(hit)
}

/// Exact probability that the lazy walk on `Z^3`, killed outside the sup-norm
/// box of radius `radius`, ever visits `{0} x {0} x A`.
pub fn exact_axis_hit(a: &TimeSet, radius: i64) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    let b = LatticeBox::new(3, radius)?;
    let target: Vec<usize> = a
        .times()
        .iter()
        .filter_map(|&t| b.index(&[0, 0, t as i64]))
        .collect();
    if target.len() != a.len() {
        return Err(Error::InvalidParameter("axis segment leaves the box".into()));
    }
    chain::exact_hitting_probability(&b.chain, &target)
}
