//! Python module `martincap`.
//!
//! Structured results come back as plain dicts and lists.

use martin_core::brownian::{self, ShellMesh};
use martin_core::lattice::{self, BlockRule, LatticePoint, Norm, TimeSet};
use martin_core::{capacity, chain, tree, ChainSpec, KernelMatrix};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(err)?;
    PyModule::import(py, "json")?.call_method1("loads", (s,))
}

fn kernel(rows: Vec<Vec<f64>>) -> PyResult<KernelMatrix> {
    KernelMatrix::from_rows(&rows).map_err(err)
}

fn parse_norm(s: &str) -> PyResult<Norm> {
    match s {
        "euclidean" => Ok(Norm::Euclidean),
        "sup" => Ok(Norm::Sup),
        "l1" => Ok(Norm::L1),
        _ => Err(PyValueError::new_err(format!("unknown norm {s:?}; expected euclidean, sup or l1"))),
    }
}

fn parse_rule(s: &str) -> PyResult<BlockRule> {
    match s {
        "linear" => Ok(BlockRule::Linear),
        "sqrt" => Ok(BlockRule::Sqrt),
        "exponential" => Ok(BlockRule::Exponential),
        _ => Err(PyValueError::new_err(format!("unknown block rule {s:?}"))),
    }
}

/// Sub-stochastic chain on `0..n_states` started at `root`.
#[pyclass(name = "Chain", module = "martincap", frozen)]
struct PyChain {
    inner: ChainSpec,
}

#[pymethods]
impl PyChain {
    #[new]
    #[pyo3(signature = (n_states, root, transitions, labels=None))]
    fn new(n_states: usize, root: usize, transitions: Vec<(usize, usize, f64)>, labels: Option<Vec<String>>) -> PyResult<Self> {
        Ok(PyChain { inner: ChainSpec::new(n_states, root, transitions, labels).map_err(err)? })
    }

    /// Random transient chain, as used by the sandwich experiment.
    #[staticmethod]
    #[pyo3(signature = (seed, max_states=12))]
    fn random(seed: u64, max_states: usize) -> PyResult<Self> {
        Ok(PyChain { inner: chain::random_chain(seed, max_states).map_err(err)? })
    }

    #[getter]
    fn n_states(&self) -> usize {
        self.inner.n_states()
    }

    #[getter]
    fn root(&self) -> usize {
        self.inner.root()
    }

    fn transitions(&self) -> Vec<(usize, usize, f64)> {
        self.inner.transitions().to_vec()
    }

    fn green_matrix(&self) -> PyResult<Vec<Vec<f64>>> {
        let g = chain::green_matrix(&self.inner).map_err(err)?;
        Ok((0..g.n()).map(|x| (0..g.n()).map(|y| g.get(x, y)).collect()).collect())
    }

    fn martin_kernel(&self, target: Vec<usize>) -> PyResult<Vec<Vec<f64>>> {
        Ok(chain::martin_kernel_for(&self.inner, &target).map_err(err)?.rows())
    }

    fn hitting_probability(&self, target: Vec<usize>) -> PyResult<f64> {
        chain::exact_hitting_probability(&self.inner, &target).map_err(err)
    }

    #[pyo3(signature = (target, n_paths, seed, horizon=None))]
    fn simulate_hitting<'py>(
        &self,
        py: Python<'py>,
        target: Vec<usize>,
        n_paths: u64,
        seed: u64,
        horizon: Option<u64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let horizon = horizon.unwrap_or_else(|| chain::default_horizon(self.inner.n_states()));
        let est = py.detach(|| chain::simulate_hitting(&self.inner, &target, n_paths, seed, horizon)).map_err(err)?;
        to_py(py, &est)
    }

    fn verify_sandwich<'py>(&self, py: Python<'py>, target: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &capacity::verify_sandwich(&self.inner, &target).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!("Chain(n_states={}, root={}, transitions={})", self.inner.n_states(), self.inner.root(), self.inner.transitions().len())
    }
}

/// Rooted tree with independent edge retention probabilities.
#[pyclass(name = "Tree", module = "martincap")]
struct PyTree {
    inner: tree::PercTree,
}

#[pymethods]
impl PyTree {
    #[new]
    fn new() -> Self {
        PyTree { inner: tree::PercTree::new() }
    }

    #[staticmethod]
    #[pyo3(signature = (seed, max_depth=5, max_children=3, p_min=0.3, p_max=0.95))]
    fn random(seed: u64, max_depth: usize, max_children: usize, p_min: f64, p_max: f64) -> PyResult<Self> {
        Ok(PyTree { inner: tree::random_tree(seed, max_depth, max_children, p_min, p_max).map_err(err)? })
    }

    /// Adds a child of `parent`; returns the new node id. The root is 0.
    fn add_child(&mut self, parent: usize, p: f64) -> PyResult<usize> {
        self.inner.add_child(parent, p).map_err(err)
    }

    fn leaves(&self) -> Vec<usize> {
        self.inner.leaves()
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.n_nodes()
    }

    fn survival_probability(&self) -> f64 {
        tree::survival_probability(&self.inner)
    }

    /// Exact survival probability as `(numerator, denominator)` strings, when
    /// every edge probability is a small rational.
    fn survival_probability_exact(&self) -> Option<(String, String)> {
        tree::survival_probability_exact(&self.inner).map(|q| (q.numer().to_string(), q.denom().to_string()))
    }

    fn kernel(&self) -> PyResult<Vec<Vec<f64>>> {
        Ok(tree::lyons_kernel(&self.inner).map_err(err)?.rows())
    }

    fn percolate<'py>(&self, py: Python<'py>, n_trials: u64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let est = py.detach(|| tree::percolate(&self.inner, n_trials, seed)).map_err(err)?;
        to_py(py, &est)
    }

    fn verify_sandwich<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &tree::verify_tree_sandwich(&self.inner).map_err(err)?)
    }
}

/// Capacity `1 / min energy` of a kernel given as a list of rows.
#[pyfunction]
fn martin_capacity<'py>(py: Python<'py>, rows: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyAny>> {
    let k = kernel(rows)?;
    let r = py.detach(|| capacity::capacity(&k));
    to_py(py, &r)
}

#[pyfunction]
fn energy(rows: Vec<Vec<f64>>, weights: Vec<f64>) -> PyResult<f64> {
    let mu = martin_core::Measure::new(weights).map_err(err)?;
    martin_core::energy(&mu, &kernel(rows)?).map_err(err)
}

/// Union of `[2^n, 2^n + L_n]` for `n = 1..=n_max`.
#[pyfunction]
fn block_times(rule: &str, n_max: u32) -> PyResult<Vec<u64>> {
    Ok(TimeSet::blocks(parse_rule(rule)?, n_max).map_err(err)?.times().to_vec())
}

#[pyfunction]
#[pyo3(signature = (times, dim=1))]
fn return_kernel(times: Vec<u64>, dim: usize) -> PyResult<Vec<Vec<f64>>> {
    let k = match dim {
        1 => lattice::return_kernel_1d_times(&times),
        2 => lattice::return_kernel_2d_times(&times),
        _ => return Err(PyValueError::new_err("dim must be 1 or 2")),
    };
    Ok(k.map_err(err)?.rows())
}

#[pyfunction]
#[pyo3(signature = (points, alpha, norm="euclidean"))]
fn riesz_kernel(points: Vec<Vec<i64>>, alpha: f64, norm: &str) -> PyResult<Vec<Vec<f64>>> {
    let norm = parse_norm(norm)?;
    let pts: Vec<LatticePoint> = points.into_iter().map(|c| LatticePoint::new(c).with_norm(norm)).collect();
    Ok(lattice::riesz_kernel(&pts, alpha).map_err(err)?.rows())
}

#[pyfunction]
fn cantor_set(base: u64, digits: Vec<u64>, n_digits: u32) -> PyResult<Vec<u64>> {
    let spec = lattice::CantorSpec::new(base, digits, n_digits).map_err(err)?;
    lattice::cantor_set(&spec).map_err(err)
}

/// Tail capacities of points on the line for each `alpha` and cut.
#[pyfunction]
fn dimension_profile<'py>(py: Python<'py>, points: Vec<i64>, alphas: Vec<f64>, cuts: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let pts: Vec<LatticePoint> = points.into_iter().map(LatticePoint::on_line).collect();
    let p = py.detach(|| lattice::dimension_profile(&pts, &alphas, &cuts)).map_err(err)?;
    to_py(py, &p)
}

/// Planar return at times in `times` against a spatial walk hitting the time axis.
#[pyfunction]
fn intersection_experiment<'py>(py: Python<'py>, times: Vec<u64>, n_paths: u64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let a = TimeSet::explicit(times).map_err(err)?;
    let r = py.detach(|| lattice::intersection_equiv_experiment(&a, n_paths, seed)).map_err(err)?;
    to_py(py, &r)
}

/// Capacity of a discretized sphere of radius `r` in `R^d`.
#[pyfunction]
fn sphere_capacity<'py>(py: Python<'py>, d: usize, n: usize, r: f64) -> PyResult<Bound<'py, PyAny>> {
    let cloud = brownian::sphere_cloud(d, n, r).map_err(err)?;
    let c = py.detach(|| brownian::cloud_capacity(&cloud)).map_err(err)?;
    to_py(py, &c)
}

#[pyfunction]
#[pyo3(signature = (d, radii, layers_per_octave=64, witness_nodes=2000))]
fn shell_profile<'py>(py: Python<'py>, d: usize, radii: Vec<f64>, layers_per_octave: usize, witness_nodes: usize) -> PyResult<Bound<'py, PyAny>> {
    let mesh = ShellMesh { layers_per_octave, cloud_points_per_layer: None, witness_nodes };
    let rows = py.detach(|| brownian::shell_capacity_profile(d, &radii, &mesh)).map_err(err)?;
    to_py(py, &rows)
}

#[pyfunction]
fn ball_hit_probability(y: Vec<f64>, eps: f64, d: usize) -> PyResult<f64> {
    brownian::ball_hit_probability(&y, eps, d).map_err(err)
}

#[pymodule]
fn martincap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChain>()?;
    m.add_class::<PyTree>()?;
    m.add("SANDWICH_TOL", capacity::SANDWICH_TOL)?;
    m.add_function(wrap_pyfunction!(martin_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(block_times, m)?)?;
    m.add_function(wrap_pyfunction!(return_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(riesz_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(cantor_set, m)?)?;
    m.add_function(wrap_pyfunction!(dimension_profile, m)?)?;
    m.add_function(wrap_pyfunction!(intersection_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(shell_profile, m)?)?;
    m.add_function(wrap_pyfunction!(ball_hit_probability, m)?)?;
    Ok(())
}
