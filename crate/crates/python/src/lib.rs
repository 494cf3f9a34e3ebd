//! Python module `pyfracobs`: operator assembly, obstacle solvers and the
//! verification checks of `fracobs`, on plain Python lists.

use std::sync::Arc;

use fracobs::solvers::{self, PenaltyParams, PenaltyScheme};
use fracobs::verify::{self, Report, SuiteOptions};
use fracobs::{Error, FracLapOperator, Grid, ProblemSpec, SolverKind, SolverParams};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Dimension { .. } | Error::InvalidInput(_) | Error::Config(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn solver_params(tol: f64, max_iter: usize, relaxation: f64, active_tol: f64) -> SolverParams {
    SolverParams { tol, max_iter, relaxation, active_tol, ..Default::default() }
}

#[pyclass(name = "Operator", module = "pyfracobs", frozen)]
struct PyOperator {
    inner: Arc<FracLapOperator>,
}

#[pymethods]
impl PyOperator {
    #[new]
    fn new(a: f64, b: f64, n: usize, s: f64) -> PyResult<Self> {
        let grid = Grid::new(a, b, n).map_err(to_py)?;
        Ok(Self { inner: Arc::new(FracLapOperator::assemble(grid, s).map_err(to_py)?) })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    #[getter]
    fn s(&self) -> f64 {
        self.inner.order()
    }

    #[getter]
    fn diag(&self) -> f64 {
        self.inner.diag()
    }

    fn nodes(&self) -> Vec<f64> {
        self.inner.grid().nodes()
    }

    fn weight(&self, k: usize) -> f64 {
        self.inner.weight(k)
    }

    fn tail(&self, k: usize) -> f64 {
        self.inner.tail(k)
    }

    fn apply(&self, v: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.apply(&v).map_err(to_py)
    }

    fn pairing(&self, v: Vec<f64>, w: Vec<f64>) -> PyResult<f64> {
        self.inner.pairing(&v, &w).map_err(to_py)
    }

    fn energy(&self, v: Vec<f64>, f: Vec<f64>) -> PyResult<f64> {
        self.inner.energy(&v, &f).map_err(to_py)
    }

    fn lambda_max_bound(&self) -> f64 {
        self.inner.lambda_max_bound()
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        let m = self.inner.to_dense();
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    fn __repr__(&self) -> String {
        let g = self.inner.grid();
        format!("Operator(a={}, b={}, n={}, s={})", g.a(), g.b(), g.n(), self.inner.order())
    }
}

#[pyclass(name = "Problem", module = "pyfracobs", frozen)]
struct PyProblem {
    inner: ProblemSpec,
}

#[pymethods]
impl PyProblem {
    #[new]
    fn new(op: &PyOperator, psi: Vec<f64>, f: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: ProblemSpec::new(op.inner.clone(), psi, f).map_err(to_py)? })
    }

    #[getter]
    fn psi(&self) -> Vec<f64> {
        self.inner.psi().to_vec()
    }

    #[getter]
    fn f(&self) -> Vec<f64> {
        self.inner.f().to_vec()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn residual(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.residual(&u).map_err(to_py)
    }

    fn energy(&self, u: Vec<f64>) -> PyResult<f64> {
        self.inner.energy(&u).map_err(to_py)
    }
}

#[pyclass(name = "Solution", module = "pyfracobs", frozen, get_all)]
struct PySolution {
    u: Vec<f64>,
    residual: Vec<f64>,
    active_set: Vec<usize>,
    iterations: usize,
    solver: String,
    converged: bool,
    kkt_violation: f64,
    fallback: Option<String>,
}

impl From<solvers::Solution> for PySolution {
    fn from(s: solvers::Solution) -> Self {
        Self {
            u: s.u,
            residual: s.residual,
            active_set: s.active_set,
            iterations: s.iterations,
            solver: s.solver.as_str().to_string(),
            converged: s.converged,
            kkt_violation: s.kkt_violation,
            fallback: s.fallback.map(|k| k.as_str().to_string()),
        }
    }
}

#[pymethods]
impl PySolution {
    fn __repr__(&self) -> String {
        format!(
            "Solution(solver={}, converged={}, iterations={}, kkt_violation={:e})",
            self.solver, self.converged, self.iterations, self.kkt_violation
        )
    }
}

fn report_dict<'py>(py: Python<'py>, r: &Report) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("check", r.check.as_str())?;
    d.set_item("passed", r.passed)?;
    d.set_item("worst_violation", r.worst_violation)?;
    d.set_item("worst_index", r.worst_index)?;
    d.set_item("samples", r.samples)?;
    d.set_item("seed", r.seed)?;
    d.set_item("tolerance", r.tolerance)?;
    d.set_item("inconclusive", r.inconclusive)?;
    d.set_item("margin", r.margin)?;
    d.set_item("measured", r.measured)?;
    d.set_item("asserted", r.asserted)?;
    Ok(d)
}

#[pyfunction]
fn kernel_constant(s: f64) -> PyResult<f64> {
    fracobs::kernel_constant(s).map_err(to_py)
}

#[pyfunction]
fn solve_linear(op: &PyOperator, f: Vec<f64>) -> PyResult<Vec<f64>> {
    solvers::solve_linear(&op.inner, &f).map_err(to_py)
}

/// `method` is one of `psor`, `pg`, `activeset`, `penalty`.
#[pyfunction]
#[pyo3(signature = (problem, method = "psor", tol = 1e-10, max_iter = 200_000, relaxation = 1.5, active_tol = 1e-8))]
fn solve(
    py: Python<'_>,
    problem: &PyProblem,
    method: &str,
    tol: f64,
    max_iter: usize,
    relaxation: f64,
    active_tol: f64,
) -> PyResult<PySolution> {
    let kind: SolverKind = method.parse().map_err(to_py)?;
    let params = solver_params(tol, max_iter, relaxation, active_tol);
    let spec = &problem.inner;
    py.detach(|| solvers::solve(spec, kind, &params)).map(Into::into).map_err(to_py)
}

/// Returns `(solution, u_eps)`.
#[pyfunction]
#[pyo3(signature = (problem, epsilon = 1e-3, scheme = "newton", tol = 1e-10))]
fn solve_penalty(
    py: Python<'_>,
    problem: &PyProblem,
    epsilon: f64,
    scheme: &str,
    tol: f64,
) -> PyResult<(PySolution, Vec<f64>)> {
    let scheme = match scheme {
        "newton" => PenaltyScheme::Newton,
        "picard" => PenaltyScheme::Picard,
        other => return Err(PyValueError::new_err(format!("unknown penalty scheme '{other}'"))),
    };
    let pp = PenaltyParams { epsilon, scheme, ..Default::default() };
    let params = SolverParams { tol, ..Default::default() };
    let spec = &problem.inner;
    let out = py.detach(|| solvers::solve_penalty(spec, &pp, &params)).map_err(to_py)?;
    Ok((out.solution.into(), out.u_eps))
}

#[pyfunction]
fn brute_force_oracle(problem: &PyProblem) -> PyResult<PySolution> {
    solvers::brute_force_oracle(&problem.inner).map(Into::into).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (problem, u, tol = verify::DEFAULT_TOL))]
fn check_kkt<'py>(py: Python<'py>, problem: &PyProblem, u: Vec<f64>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    report_dict(py, &verify::check_kkt(&problem.inner, &u, tol).map_err(to_py)?)
}

#[pyfunction]
#[pyo3(signature = (problem, u, samples = 200, tol = verify::DEFAULT_TOL, seed = 0))]
fn check_minty<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    u: Vec<f64>,
    samples: usize,
    tol: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    report_dict(py, &verify::check_minty(&problem.inner, &u, samples, tol, seed).map_err(to_py)?)
}

#[pyfunction]
#[pyo3(signature = (op, samples = 100, tol = verify::DEFAULT_TOL, seed = 0))]
fn check_truncation_identities<'py>(
    py: Python<'py>,
    op: &PyOperator,
    samples: usize,
    tol: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    report_dict(py, &verify::check_truncation_identities(&op.inner, samples, tol, seed).map_err(to_py)?)
}

/// Runs every applicable check on `u` and returns the reports as dicts.
#[pyfunction]
#[pyo3(signature = (problem, u, seed = 0))]
fn run_suite<'py>(py: Python<'py>, problem: &PyProblem, u: Vec<f64>, seed: u64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let opts = SuiteOptions { seed, ..Default::default() };
    let spec = &problem.inner;
    let reports = py.detach(|| verify::run_suite(spec, &u, &opts)).map_err(to_py)?;
    reports.iter().map(|r| report_dict(py, r)).collect()
}

#[pymodule]
fn pyfracobs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperator>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(kernel_constant, m)?)?;
    m.add_function(wrap_pyfunction!(solve_linear, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_penalty, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(check_kkt, m)?)?;
    m.add_function(wrap_pyfunction!(check_minty, m)?)?;
    m.add_function(wrap_pyfunction!(check_truncation_identities, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
