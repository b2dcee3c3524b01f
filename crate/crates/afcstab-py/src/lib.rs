//! Python bindings: mesh generation, one-shot solves and the basic checks,
//! mirroring the command line front-end.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use afcstab::analysis::{check_a2, A2Outcome};
use afcstab::assembly::assemble;
use afcstab::mesh::{adjacency, build_grid, GridKind, GridSpec, Mesh};
use afcstab::problems::catalog;
use afcstab::runner::{method_name, parse_method, run_solve, RunSpec};
use afcstab::solver::SolverConfig;

fn grid_spec(grid: u8, ne: usize, shift: f64) -> PyResult<GridSpec> {
    let kind = match grid {
        1 => GridKind::Grid1,
        4 => GridKind::Grid4,
        5 => GridKind::Grid5,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown grid {other} (expected 1, 4 or 5)"
            )))
        }
    };
    GridSpec::new(kind, ne, if kind == GridKind::Grid5 { shift } else { 0.0 })
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// A structured triangulation of the unit square.
#[pyclass(name = "Mesh")]
struct PyMesh {
    inner: Mesh,
}

#[pymethods]
impl PyMesh {
    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.n_nodes()
    }

    #[getter]
    fn n_interior(&self) -> usize {
        self.inner.n_interior
    }

    #[getter]
    fn n_triangles(&self) -> usize {
        self.inner.n_triangles()
    }

    fn coordinates(&self) -> Vec<(f64, f64)> {
        self.inner.coords.iter().map(|p| (p[0], p[1])).collect()
    }

    fn triangles(&self) -> Vec<(usize, usize, usize)> {
        self.inner.triangles.iter().map(|t| (t[0], t[1], t[2])).collect()
    }

    fn write(&self, path: &str) -> PyResult<()> {
        self.inner
            .write_file(std::path::Path::new(path))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }
}

/// Result of a stabilized solve.
#[pyclass(name = "Solution")]
struct PySolution {
    #[pyo3(get)]
    u: Vec<f64>,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    method: String,
    #[pyo3(get)]
    l2: Option<f64>,
    #[pyo3(get)]
    h1: Option<f64>,
    #[pyo3(get)]
    normh: Option<f64>,
    #[pyo3(get)]
    max_nodal_error: Option<f64>,
}

/// Builds one of the structured grids (1, 4 or 5).
#[pyfunction]
#[pyo3(signature = (grid, ne, shift = 0.1))]
fn make_mesh(grid: u8, ne: usize, shift: f64) -> PyResult<PyMesh> {
    let spec = grid_spec(grid, ne, shift)?;
    let mesh = build_grid(&spec).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(PyMesh { inner: mesh })
}

/// Solves one benchmark configuration.
#[pyfunction]
#[pyo3(signature = (example, grid, ne, method, eps = 1e-8, shift = 0.1,
                    weights = "matrix", mu = "patch", pvariant = "standard",
                    tol = 1e-10, max_iter = 50_000))]
#[allow(clippy::too_many_arguments)]
fn solve(
    example: u32,
    grid: u8,
    ne: usize,
    method: &str,
    eps: f64,
    shift: f64,
    weights: &str,
    mu: &str,
    pvariant: &str,
    tol: f64,
    max_iter: usize,
) -> PyResult<PySolution> {
    let kind = parse_method(method, weights, mu, pvariant)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let spec = RunSpec {
        example,
        epsilon: eps,
        grid: grid_spec(grid, ne, shift)?,
        method: kind,
        solver: SolverConfig {
            tol_rel: tol,
            max_iter,
            ..SolverConfig::default()
        },
    };
    let out = run_solve(&spec).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(PySolution {
        u: out.u,
        converged: out.report.converged,
        iterations: out.report.iterations,
        residual: out.report.residual,
        method: method_name(kind),
        l2: out.errors.map(|e| e.l2),
        h1: out.errors.map(|e| e.h1semi),
        normh: out.errors.map(|e| e.norm_h),
        max_nodal_error: out.max_nodal_error,
    })
}

/// Planted-extremum monotonicity check; returns "pass", "not-applicable" or
/// raises on violations.
#[pyfunction]
#[pyo3(signature = (example, grid, ne, method, eps = 1e-8, shift = 0.1,
                    weights = "matrix", mu = "patch", trials = 100, seed = 42))]
#[allow(clippy::too_many_arguments)]
fn check_monotonicity(
    example: u32,
    grid: u8,
    ne: usize,
    method: &str,
    eps: f64,
    shift: f64,
    weights: &str,
    mu: &str,
    trials: usize,
    seed: u64,
) -> PyResult<String> {
    let kind = parse_method(method, weights, mu, "standard")
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let spec = grid_spec(grid, ne, shift)?;
    let mesh = build_grid(&spec).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let adj = adjacency(&mesh);
    let data = catalog(example, eps).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let sys = assemble(&mesh, &adj, &data).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    match check_a2(&mesh, &adj, &sys.a, kind, trials, seed)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?
    {
        A2Outcome::Pass => Ok("pass".into()),
        A2Outcome::NotApplicable => Ok("not-applicable".into()),
        A2Outcome::Violations(v) => Err(PyRuntimeError::new_err(format!(
            "{} violating pairs, first: {:?}",
            v.len(),
            v.first()
        ))),
    }
}

#[pymodule]
fn afcstab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(make_mesh, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(check_monotonicity, m)?)?;
    Ok(())
}
