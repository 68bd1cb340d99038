//! Python bindings. Reports cross the boundary as JSON strings.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use tanaka::distribution::{derived_flag, summarize, FieldsDoc};
use tanaka::flat::{jacobi_bracket, WeightedPolynomial};
use tanaka::graded::Gnla;
use tanaka::linalg::{parse_scalar, Matrix};
use tanaka::prolong::{prolong as prolong_gnla, ProlongedAlgebra, ReductionKind, ReductionSpec, DEFAULT_MAX_DEGREE};
use tanaka::symmetry::{run_scenario as run, ScenarioDoc};
use tanaka::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::Parse(_) | Error::Json(_) | Error::Malformed(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

#[pyclass(name = "Gnla", frozen)]
struct PyGnla(Gnla);

#[pymethods]
impl PyGnla {
    #[staticmethod]
    fn from_json(src: &str) -> PyResult<Self> {
        Gnla::from_json(src).map(PyGnla).map_err(err)
    }

    #[staticmethod]
    fn heisenberg(d: usize) -> Self {
        PyGnla(Gnla::heisenberg(d))
    }

    #[staticmethod]
    fn abelian(n: usize) -> Self {
        PyGnla(Gnla::abelian(n))
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    /// Dimensions from the deepest degree up to −1.
    fn dims(&self) -> Vec<usize> {
        self.0.dims()
    }

    fn names(&self) -> Vec<String> {
        self.0.names().to_vec()
    }

    fn is_fundamental(&self) -> bool {
        self.0.is_fundamental()
    }

    /// Empty when the file is a valid graded nilpotent algebra.
    fn violations(&self) -> Vec<String> {
        self.0.validate().iter().map(|v| v.to_string()).collect()
    }

    fn __repr__(&self) -> String {
        format!("Gnla(dims={:?})", self.0.dims())
    }
}

#[pyclass(name = "Prolongation", frozen)]
struct PyProlongation(ProlongedAlgebra);

#[pymethods]
impl PyProlongation {
    /// Nonnegative component dimensions, ending in 0 when of finite type.
    fn dims(&self) -> Vec<usize> {
        self.0.dims().nonnegative
    }

    fn negative_dims(&self) -> Vec<usize> {
        self.0.dims().negative
    }

    fn total(&self) -> usize {
        self.0.dims().total
    }

    fn finite_type(&self) -> Option<usize> {
        self.0.finite_type()
    }

    fn report_json(&self) -> String {
        to_json(&self.0.report())
    }

    fn __repr__(&self) -> String {
        format!("Prolongation{}", self.0.dims())
    }
}

/// `g0` is "der0", "co" or "so"; the forms are the identity on degree −1.
#[pyfunction]
#[pyo3(signature = (m, g0 = "der0", max_degree = DEFAULT_MAX_DEGREE))]
fn prolong(m: &PyGnla, g0: &str, max_degree: usize) -> PyResult<PyProlongation> {
    let d1 = m.0.dim_of(-1);
    let specs = match g0 {
        "der0" => vec![],
        "co" => vec![ReductionSpec::new(0, ReductionKind::Conformal(Matrix::identity(d1)))],
        "so" => vec![ReductionSpec::new(0, ReductionKind::Orthogonal(Matrix::identity(d1)))],
        other => return Err(PyValueError::new_err(format!("unknown g0 {other:?}"))),
    };
    prolong_gnla(&m.0, None, &specs, max_degree).map(PyProlongation).map_err(err)
}

/// Jacobi bracket of two polynomials in x1..x(n-1), u, p1..p(n-1).
#[pyfunction]
fn jacobi(n: usize, f: &str, g: &str) -> PyResult<String> {
    let f = WeightedPolynomial::parse(n, f).map_err(err)?;
    let g = WeightedPolynomial::parse(n, g).map_err(err)?;
    jacobi_bracket(&f, &g).map(|h| h.to_string()).map_err(err)
}

/// Flag summary for a fields document at rational points, as JSON.
#[pyfunction]
#[pyo3(signature = (fields_json, points, gnla = false, max_step = 8))]
fn flag(fields_json: &str, points: Vec<Vec<String>>, gnla: bool, max_step: usize) -> PyResult<String> {
    let doc: FieldsDoc = serde_json::from_str(fields_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let fields = doc.parse_fields().map_err(err)?;
    let pts = points
        .iter()
        .map(|p| p.iter().map(|s| parse_scalar(s)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let flag = derived_flag(&fields, max_step).map_err(err)?;
    summarize(&flag, &pts, gnla).map(|s| to_json(&s)).map_err(err)
}

/// Runs a symmetry scenario document and returns the outcome as JSON.
#[pyfunction]
fn run_scenario(scenario_json: &str) -> PyResult<String> {
    let doc = ScenarioDoc::from_json(scenario_json).map_err(err)?;
    run(&doc).map(|o| to_json(&o)).map_err(err)
}

#[pymodule]
fn pytanaka(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGnla>()?;
    m.add_class::<PyProlongation>()?;
    m.add_function(wrap_pyfunction!(prolong, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi, m)?)?;
    m.add_function(wrap_pyfunction!(flag, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
