use anyhow::{Context, Result};
use martin_core::brownian::{self, ShellMesh};
use martin_core::capacity::{self, SANDWICH_TOL};
use martin_core::chain::{random_chain, random_target};
use martin_core::lattice::{self, BlockRule, CantorSpec, LatticePoint, TimeSet, TimeSetSpec};
use martin_core::rng;
use martin_core::tree::{self, random_tree};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::ConfigError;

pub const NAMES: [&str; 8] = [
    "sandwich-chains",
    "tree-sandwich",
    "shell-limit",
    "cantor-dimension",
    "blocks-1d",
    "blocks-2d",
    "intersection-equivalence",
    "zero-set",
];

/// Slack above the universal bound 2 allowed for discretized compact sets.
pub const COMPACT_SLACK: f64 = 0.05;

pub struct Output {
    pub rows: Vec<Value>,
    pub summary: Value,
    /// Conjunction of every asserted inequality; `None` when nothing is asserted.
    pub passed: Option<bool>,
}

pub fn is_stochastic(name: &str) -> bool {
    matches!(name, "sandwich-chains" | "tree-sandwich" | "intersection-equivalence")
}

fn params<P: DeserializeOwned>(name: &str, v: &Value) -> std::result::Result<P, ConfigError> {
    serde_json::from_value(v.clone()).map_err(|e| ConfigError::Params { experiment: name.into(), message: e.to_string() })
}

/// Validates `params` against the experiment's schema without running it.
pub fn check_params(name: &str, v: &Value) -> std::result::Result<(), ConfigError> {
    match name {
        "sandwich-chains" => params::<SandwichParams>(name, v).map(drop),
        "tree-sandwich" => params::<TreeParams>(name, v).map(drop),
        "shell-limit" => params::<ShellParams>(name, v).map(drop),
        "cantor-dimension" => params::<CantorParams>(name, v).map(drop),
        "blocks-1d" | "blocks-2d" => params::<BlockParams>(name, v).map(drop),
        "intersection-equivalence" => params::<IntersectionParams>(name, v).map(drop),
        "zero-set" => params::<ZeroSetParams>(name, v).map(drop),
        other => Err(ConfigError::UnknownExperiment(other.into())),
    }
}

pub fn run(name: &str, v: &Value, seed: u64) -> Result<Output> {
    match name {
        "sandwich-chains" => sandwich_chains(params(name, v)?, seed),
        "tree-sandwich" => tree_sandwich(params(name, v)?, seed),
        "shell-limit" => shell_limit(params(name, v)?),
        "cantor-dimension" => cantor_dimension(params(name, v)?),
        "blocks-1d" => blocks(params(name, v)?, false),
        "blocks-2d" => blocks(params(name, v)?, true),
        "intersection-equivalence" => intersection(params(name, v)?, seed),
        "zero-set" => zero_set(params(name, v)?),
        other => Err(ConfigError::UnknownExperiment(other.into()).into()),
    }
}

fn sub_seed(seed: u64, i: u64) -> u64 {
    rng::derive_seed(seed, i)
}

fn default_params<P: Default + Serialize>() -> Value {
    serde_json::to_value(P::default()).expect("params serialize")
}

pub fn describe(name: &str) -> std::result::Result<String, ConfigError> {
    let (about, defaults) = match name {
        "sandwich-chains" => (
            "Random substochastic chains and targets: exact hitting probability against the Martin \
             capacity bracket Cap/2 <= P[hit] <= Cap (the main hitting-probability theorem). \
             The first target of every chain is a singleton, where the upper bound is attained. \
             Needs a seed.",
            default_params::<SandwichParams>(),
        ),
        "tree-sandwich" => (
            "Random percolation trees: exact survival probability against Cap_F <= P[survive] <= 2 Cap_F \
             for the tree kernel F (the tree percolation theorem), optionally with Monte Carlo survival. \
             Needs a seed.",
            default_params::<TreeParams>(),
        ),
        "shell-limit" => (
            "Brownian Martin capacity of the shells {1 <= |x| <= R}: increasing in R, bounded by 2 \
             (the capacity of any compact set is at most 2), with two rotation-invariant witness measures.",
            default_params::<ShellParams>(),
        ),
        "cantor-dimension" => (
            "Tail capacities of the integer Cantor set in the Riesz-type kernels |y|^a / (1 + |x-y|^a); \
             profiles stay bounded below for a < log|D| / log b and decay above it. Reports a heuristic knee.",
            default_params::<CantorParams>(),
        ),
        "blocks-1d" => (
            "Tail capacities of block time sets A = U [2^n, 2^n + L_n] in the one-dimensional return kernel \
             sqrt(n) / sqrt(n - m + 1): non-vanishing iff sum L_n^(1/2) 2^(-n/2) diverges.",
            default_params::<BlockParams>(),
        ),
        "blocks-2d" => (
            "Tail capacities of block time sets in the planar return kernel n / (1 + n - m).",
            default_params::<BlockParams>(),
        ),
        "intersection-equivalence" => (
            "Monte Carlo P[planar lazy walk is at 0 at some time in A] against P[a three-dimensional lazy walk \
             hits {0} x {0} x A], over disjoint seed batches; the ratio stays bounded (intersection \
             equivalence of the planar zero-time set and the spatial axis). Needs a seed.",
            default_params::<IntersectionParams>(),
        ),
        "zero-set" => (
            "Zero set of one-dimensional Brownian motion (the zero-set corollary): the kernel \
             sqrt(t / (t - s)) with infinite diagonal, regularized on cells, brackets the arcsine-law \
             probability (2/pi) arccos(sqrt(a/b)) of a zero in [a, b].",
            default_params::<ZeroSetParams>(),
        ),
        other => return Err(ConfigError::UnknownExperiment(other.into())),
    };
    let defaults = serde_json::to_string_pretty(&defaults).expect("json");
    Ok(format!("{name}\n\n{about}\n\nparams (defaults):\n{defaults}\n"))
}

fn inequality(lower: f64, measured: f64, upper: f64, tol: f64) -> bool {
    lower - tol <= measured && measured <= upper + tol
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SandwichParams {
    pub n_chains: u64,
    pub max_states: usize,
    pub targets_per_chain: u64,
    pub max_target: usize,
}

impl Default for SandwichParams {
    fn default() -> Self {
        SandwichParams { n_chains: 100, max_states: 50, targets_per_chain: 3, max_target: 12 }
    }
}

/// One row per chain; the three numbers belong to its tightest target.
#[derive(Serialize)]
struct SandwichRow {
    chain: u64,
    n_states: usize,
    targets: u64,
    violations: u64,
    tightest_target_size: usize,
    lower: f64,
    measured: f64,
    upper: f64,
    pass: bool,
}

fn sandwich_chains(p: SandwichParams, seed: u64) -> Result<Output> {
    let mut rows = Vec::new();
    let mut all = true;
    let mut checks = 0;
    for i in 0..p.n_chains {
        let c = random_chain(sub_seed(seed, 2 * i), p.max_states).with_context(|| format!("chain {i}"))?;
        let mut violations = 0;
        let mut tightest: Option<(f64, usize, capacity::SandwichReport)> = None;
        for j in 0..p.targets_per_chain {
            let max = if j == 0 { 1 } else { p.max_target };
            let t = random_target(sub_seed(seed, 2 * i + 1) ^ j, c.n_states(), max);
            let r = capacity::verify_sandwich(&c, &t).with_context(|| format!("chain {i} target {j}"))?;
            checks += 1;
            if !r.holds {
                violations += 1;
            }
            let slack = (r.hitting_probability - r.lower).min(r.upper - r.hitting_probability) / r.upper.max(f64::MIN_POSITIVE);
            if tightest.as_ref().is_none_or(|(s, _, _)| slack < *s) {
                tightest = Some((slack, t.len(), r));
            }
        }
        let Some((_, size, r)) = tightest else { continue };
        all &= violations == 0;
        rows.push(serde_json::to_value(SandwichRow {
            chain: i,
            n_states: c.n_states(),
            targets: p.targets_per_chain,
            violations,
            tightest_target_size: size,
            lower: r.lower,
            measured: r.hitting_probability,
            upper: r.upper,
            pass: violations == 0,
        })?);
    }
    let summary = json!({ "checks": checks, "tolerance": SANDWICH_TOL });
    Ok(Output { rows, summary, passed: Some(all) })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    pub n_trees: u64,
    pub max_depth: usize,
    pub max_children: usize,
    pub p_min: f64,
    pub p_max: f64,
    /// Monte Carlo trials per tree; 0 skips the simulation.
    pub mc_trials: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { n_trees: 50, max_depth: 6, max_children: 3, p_min: 0.2, p_max: 1.0, mc_trials: 0 }
    }
}

#[derive(Serialize)]
struct TreeRow {
    tree: u64,
    leaves: usize,
    lower: f64,
    measured: f64,
    upper: f64,
    mc_estimate: Option<f64>,
    mc_half_width: Option<f64>,
    pass: bool,
}

fn tree_sandwich(p: TreeParams, seed: u64) -> Result<Output> {
    let mut rows = Vec::new();
    let mut all = true;
    for i in 0..p.n_trees {
        let t = random_tree(sub_seed(seed, i), p.max_depth, p.max_children, p.p_min, p.p_max)
            .with_context(|| format!("tree {i}"))?;
        let r = tree::verify_tree_sandwich(&t)?;
        let mc = if p.mc_trials > 0 { Some(tree::percolate(&t, p.mc_trials, sub_seed(seed ^ 1, i))?) } else { None };
        all &= r.holds;
        rows.push(serde_json::to_value(TreeRow {
            tree: i,
            leaves: r.n_leaves,
            lower: r.lower,
            measured: r.survival,
            upper: r.upper,
            mc_estimate: mc.map(|m| m.point_estimate),
            mc_half_width: mc.map(|m| m.half_width),
            pass: r.holds,
        })?);
    }
    Ok(Output { rows, summary: json!({ "tolerance": SANDWICH_TOL }), passed: Some(all) })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShellParams {
    pub d: usize,
    pub radii: Vec<f64>,
    pub layers_per_octave: usize,
    pub cloud_points_per_layer: Option<usize>,
    pub witness_nodes: usize,
}

impl Default for ShellParams {
    fn default() -> Self {
        let m = ShellMesh::default();
        ShellParams {
            d: 6,
            radii: vec![2.0, 4.0, 8.0, 16.0],
            layers_per_octave: m.layers_per_octave,
            cloud_points_per_layer: None,
            witness_nodes: m.witness_nodes,
        }
    }
}

#[derive(Serialize)]
struct ShellOut {
    radius: f64,
    mesh: usize,
    capacity: f64,
    cloud_points: Option<usize>,
    cloud_capacity: Option<f64>,
    witness_log_uniform: f64,
    witness_uniform_radius: f64,
    /// previous radius' capacity; the row asserts monotonicity and the bound 2
    lower: f64,
    measured: f64,
    upper: f64,
    pass: bool,
}

fn shell_limit(p: ShellParams) -> Result<Output> {
    let mesh = ShellMesh {
        layers_per_octave: p.layers_per_octave,
        cloud_points_per_layer: p.cloud_points_per_layer,
        witness_nodes: p.witness_nodes,
    };
    let profile = brownian::shell_capacity_profile(p.d, &p.radii, &mesh)?;
    let mut rows = Vec::new();
    let mut all = true;
    let mut prev = 0.0;
    let upper = 2.0 + COMPACT_SLACK;
    for r in profile {
        let cloud_ok = r.cloud_capacity.is_none_or(|c| c <= upper);
        let pass = inequality(prev, r.layered_capacity, upper, 0.0) && cloud_ok && r.converged;
        all &= pass;
        rows.push(serde_json::to_value(ShellOut {
            radius: r.radius,
            mesh: r.layers,
            capacity: r.layered_capacity,
            cloud_points: r.cloud_points,
            cloud_capacity: r.cloud_capacity,
            witness_log_uniform: r.witness_log_uniform,
            witness_uniform_radius: r.witness_uniform_radius,
            lower: prev,
            measured: r.layered_capacity,
            upper,
            pass,
        })?);
        prev = r.layered_capacity;
    }
    Ok(Output { rows, summary: json!({ "d": p.d, "limit": 2.0 }), passed: Some(all) })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CantorParams {
    pub base: u64,
    pub digits: Vec<u64>,
    pub n_digits: u32,
    pub alphas: Vec<f64>,
    pub cuts: Vec<f64>,
}

impl Default for CantorParams {
    fn default() -> Self {
        CantorParams {
            base: 3,
            digits: vec![0, 2],
            n_digits: 10,
            alphas: vec![0.4, 0.5, 0.55, 0.6, 0.65, 0.7, 0.72, 0.8, 0.9],
            cuts: vec![3.0, 9.0, 81.0, 6561.0],
        }
    }
}

#[derive(Serialize)]
struct ProfileRow {
    alpha: f64,
    cut: f64,
    n_points: usize,
    capacity: f64,
}

fn cantor_dimension(p: CantorParams) -> Result<Output> {
    let spec = CantorSpec::new(p.base, p.digits, p.n_digits)?;
    let pts: Vec<LatticePoint> = lattice::cantor_set(&spec)?.into_iter().map(|x| LatticePoint::on_line(x as i64)).collect();
    let prof = lattice::dimension_profile(&pts, &p.alphas, &p.cuts)?;
    let mut rows = Vec::new();
    for (alpha, row) in prof.alphas.iter().zip(&prof.profiles) {
        for q in row {
            rows.push(serde_json::to_value(ProfileRow { alpha: *alpha, cut: q.cut, n_points: q.n_points, capacity: q.capacity })?);
        }
    }
    let summary = json!({
        "dimension": spec.dimension(),
        "decay_ratios": prof.decay,
        "heuristic_knee": prof.knee,
        "decay_threshold": prof.threshold,
    });
    Ok(Output { rows, summary, passed: None })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSet {
    pub rule: BlockRule,
    pub n_max: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockParams {
    pub sets: Vec<BlockSet>,
    /// Larger sets are thinned to every s-th element, a subset.
    pub max_points: usize,
    /// Tail cuts at `2^k`.
    pub cut_exponents: Vec<u32>,
}

impl Default for BlockParams {
    fn default() -> Self {
        BlockParams {
            sets: vec![
                BlockSet { rule: BlockRule::Linear, n_max: 40 },
                BlockSet { rule: BlockRule::Sqrt, n_max: 24 },
                BlockSet { rule: BlockRule::Exponential, n_max: 20 },
            ],
            max_points: 2048,
            cut_exponents: vec![1, 2, 4, 8, 16],
        }
    }
}

#[derive(Serialize)]
struct BlockRow {
    rule: BlockRule,
    n_max: u32,
    stride: usize,
    cut: u64,
    n_points: usize,
    capacity: f64,
}

fn blocks(p: BlockParams, planar: bool) -> Result<Output> {
    let cuts: Vec<u64> = p
        .cut_exponents
        .iter()
        .map(|&k| 1u64.checked_shl(k).filter(|_| k < 63).context("cut exponent too large"))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for s in &p.sets {
        let set = TimeSet::build(TimeSetSpec::Blocks { rule: s.rule, n_max: s.n_max })?.thinned(p.max_points);
        let prof = capacity::asymptotic_capacity_profile(set.times(), &cuts, |tail| {
            if planar { lattice::return_kernel_2d_times(tail) } else { lattice::return_kernel_1d_times(tail) }
        })?;
        let first = prof.first().map_or(0.0, |q| q.capacity);
        ratios.push(json!({
            "rule": s.rule,
            "min_over_first": prof.iter().map(|q| q.capacity).fold(f64::INFINITY, f64::min) / first,
            "last_over_first": prof.last().map_or(0.0, |q| q.capacity) / first,
        }));
        for q in prof {
            rows.push(serde_json::to_value(BlockRow {
                rule: s.rule,
                n_max: s.n_max,
                stride: set.stride,
                cut: q.cut,
                n_points: q.n_points,
                capacity: q.capacity,
            })?);
        }
    }
    Ok(Output { rows, summary: json!({ "kernel": if planar { "2d" } else { "1d" }, "ratios": ratios }), passed: None })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntersectionParams {
    pub times: TimeSetSpec,
    pub n_paths: u64,
    pub batches: u64,
}

impl Default for IntersectionParams {
    fn default() -> Self {
        IntersectionParams { times: TimeSetSpec::Explicit((1..=64).collect()), n_paths: 10_000, batches: 10 }
    }
}

#[derive(Serialize)]
struct IntersectionRow {
    batch: u64,
    p2: f64,
    p3: f64,
    ratio: Option<f64>,
    ci2: f64,
    ci3: f64,
}

fn intersection(p: IntersectionParams, seed: u64) -> Result<Output> {
    let a = TimeSet::build(p.times)?;
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for b in 0..p.batches {
        let r = lattice::intersection_equiv_experiment(&a, p.n_paths, sub_seed(seed, b))?;
        ratios.extend(r.ratio);
        rows.push(serde_json::to_value(IntersectionRow {
            batch: b,
            p2: r.planar.point_estimate,
            p3: r.axis.point_estimate,
            ratio: r.ratio,
            ci2: r.planar.half_width,
            ci3: r.axis.half_width,
        })?);
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    let summary = json!({
        "n_times": a.len(),
        "kill_radius": a.max().map(lattice::axis_kill_radius),
        "ratio_min": (!ratios.is_empty()).then_some(lo),
        "ratio_max": (!ratios.is_empty()).then_some(hi),
    });
    Ok(Output { rows, summary, passed: None })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZeroSetParams {
    pub intervals: Vec<(f64, f64)>,
    pub cells: Vec<usize>,
}

impl Default for ZeroSetParams {
    fn default() -> Self {
        ZeroSetParams { intervals: vec![(1.0, 2.0), (1.0, 4.0), (1.0, 10.0)], cells: vec![50, 200, 800] }
    }
}

#[derive(Serialize)]
struct ZeroSetRow {
    a: f64,
    b: f64,
    cells: usize,
    capacity: f64,
    lower: f64,
    measured: f64,
    upper: f64,
    pass: bool,
}

fn zero_set(p: ZeroSetParams) -> Result<Output> {
    let mut rows = Vec::new();
    let mut all = true;
    for &(a, b) in &p.intervals {
        if !(0.0 < a && a < b) {
            return Err(ConfigError::Field { field: "intervals".into(), message: format!("need 0 < a < b, got [{a}, {b}]") }.into());
        }
        let exact = lattice::zero_set_interval_probability(a, b);
        for &n in &p.cells {
            let (t, h) = lattice::zero_set_grid(a, b, n);
            let c = capacity::capacity(&lattice::zero_set_grid_kernel(&t, h)?);
            let pass = inequality(c.capacity / 2.0, exact, c.capacity, SANDWICH_TOL);
            all &= pass;
            rows.push(serde_json::to_value(ZeroSetRow {
                a,
                b,
                cells: n,
                capacity: c.capacity,
                lower: c.capacity / 2.0,
                measured: exact,
                upper: c.capacity,
                pass,
            })?);
        }
    }
    // with the printed infinite diagonal every finite set has capacity zero
    let integer = TimeSet::explicit(vec![1, 2])?;
    let unregularized = capacity::capacity(&lattice::zero_set_kernel(&integer)?).capacity;
    Ok(Output { rows, summary: json!({ "unregularized_capacity_of_1_2": unregularized }), passed: Some(all) })
}
