//! Python bindings for the core types and solvers. Data crosses the
//! boundary as plain lists of floats; arrays are row-major lists of rows.

use ndarray::{Array1, Array2};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use decsvm::admm::{hard_threshold_support, run_decsvm, AdmmConfig};
use decsvm::refsolver::{self, PenaltySpec, SolveOptions};
use decsvm::smoothing::{self, KernelKind, SmoothedHingeLoss};
use decsvm::synthgen::LabeledShard;
use decsvm::Topology;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    let n = rows.len();
    let p = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != p) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Array2::from_shape_vec((n, p), rows.into_iter().flatten().collect()).map_err(err)
}

#[pyclass(name = "SmoothedHingeLoss", from_py_object)]
#[derive(Clone)]
struct PySmoothedHingeLoss {
    inner: SmoothedHingeLoss,
}

#[pymethods]
impl PySmoothedHingeLoss {
    #[new]
    fn new(kernel: &str, h: f64) -> PyResult<Self> {
        let kind: KernelKind = kernel.parse().map_err(err)?;
        Ok(PySmoothedHingeLoss { inner: SmoothedHingeLoss::new(kind, h).map_err(err)? })
    }

    fn value(&self, v: f64) -> f64 {
        self.inner.value(v)
    }

    fn grad(&self, v: f64) -> f64 {
        self.inner.grad(v)
    }

    fn curvature(&self, v: f64) -> f64 {
        self.inner.curvature(v)
    }

    fn lipschitz_constant(&self) -> f64 {
        self.inner.lipschitz_constant()
    }
}

#[pyclass(name = "Topology")]
struct PyTopology {
    inner: Topology,
}

#[pymethods]
impl PyTopology {
    /// Connected Erdős–Rényi draw.
    #[staticmethod]
    fn erdos_renyi(m: usize, p_c: f64, seed: u64) -> PyResult<Self> {
        Ok(PyTopology { inner: Topology::erdos_renyi_connected(m, p_c, seed).map_err(err)? })
    }

    /// Build from 1-based undirected edges.
    #[staticmethod]
    fn from_edges(m: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyTopology { inner: Topology::from_edge_list(m, &edges).map_err(err)? })
    }

    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    fn neighbors(&self, node: usize) -> Vec<usize> {
        self.inner.neighbors(node).to_vec()
    }
}

#[pyfunction]
fn bandwidth_default(n_total: usize, p: usize) -> f64 {
    smoothing::bandwidth_default(n_total, p)
}

#[pyfunction]
fn soft_threshold(v: Vec<f64>, t: f64) -> Vec<f64> {
    v.into_iter().map(|x| refsolver::soft_threshold_scalar(x, t)).collect()
}

/// Penalized fit on one dataset (rows of `x` must include any intercept
/// column); returns the coefficient vector.
#[pyfunction]
#[pyo3(signature = (x, y, loss, lam, lambda0 = 0.0))]
fn solve_csvm(
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    loss: PySmoothedHingeLoss,
    lam: f64,
    lambda0: f64,
) -> PyResult<Vec<f64>> {
    let x = to_matrix(x)?;
    let y = Array1::from_vec(y);
    let opts = SolveOptions::new(loss.inner, PenaltySpec { lambda: lam, lambda0 });
    let beta = refsolver::solve_csvm(x.view(), y.view(), &opts).map_err(err)?;
    Ok(beta.to_vec())
}

/// Decentralized consensus solve; `xs[k]`/`ys[k]` is node k's shard.
/// Returns per-node estimates after `rounds` communication rounds.
#[pyfunction]
#[pyo3(signature = (xs, ys, topology, loss, lam, rounds, tau = 1.0, lambda0 = 0.0))]
#[allow(clippy::too_many_arguments)]
fn run_consensus(
    xs: Vec<Vec<Vec<f64>>>,
    ys: Vec<Vec<f64>>,
    topology: &PyTopology,
    loss: PySmoothedHingeLoss,
    lam: f64,
    rounds: usize,
    tau: f64,
    lambda0: f64,
) -> PyResult<Vec<Vec<f64>>> {
    if xs.len() != ys.len() {
        return Err(PyValueError::new_err("xs and ys length mismatch"));
    }
    let shards: Vec<LabeledShard> = xs
        .into_iter()
        .zip(ys)
        .map(|(x, y)| {
            LabeledShard::new(to_matrix(x)?, Array1::from_vec(y)).map_err(err)
        })
        .collect::<PyResult<_>>()?;
    let mut cfg = AdmmConfig::new(loss.inner, PenaltySpec { lambda: lam, lambda0 }, rounds);
    cfg.tau = tau;
    let out = run_decsvm(&shards, &topology.inner, &cfg, None).map_err(err)?;
    Ok(out.estimates.into_iter().map(|b| b.to_vec()).collect())
}

/// Soft-threshold an estimate and return `(vector, support)` with the
/// intercept slot excluded from the support.
#[pyfunction]
fn hard_threshold(beta: Vec<f64>, lam: f64) -> (Vec<f64>, Vec<usize>) {
    let (b, s) = hard_threshold_support(&Array1::from_vec(beta), lam);
    (b.to_vec(), s)
}

#[pymodule]
fn decsvm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySmoothedHingeLoss>()?;
    m.add_class::<PyTopology>()?;
    m.add_function(wrap_pyfunction!(bandwidth_default, m)?)?;
    m.add_function(wrap_pyfunction!(soft_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(solve_csvm, m)?)?;
    m.add_function(wrap_pyfunction!(run_consensus, m)?)?;
    m.add_function(wrap_pyfunction!(hard_threshold, m)?)?;
    Ok(())
}
