use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use geolab::algebra::{self as alg, AlgebraElement, CMatrix, GroupElement, Subalgebra};
use geolab::catalog::resolve;
use geolab::independence::{flag_conditions, replay_eschenburg_steps, replay_gromoll_meyer};
use geolab::integrals::{build_family, check_involution, lie_poisson_bracket, IntegralFamily};
use geolab::lab::{load_scenario_with, run_checks, BuiltinParams, BUILTINS};
use geolab::moment::{self, MomentPair};
use geolab::sampling::{random_element, rng_from_seed};

type Rows = Vec<Vec<Complex64>>;

fn err(e: geolab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: &Rows) -> PyResult<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a square matrix"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn to_rows(m: &CMatrix) -> Rows {
    (0..m.nrows())
        .map(|i| m.row(i).iter().cloned().collect())
        .collect()
}

fn element(rows: &Rows) -> PyResult<AlgebraElement> {
    AlgebraElement::new(to_matrix(rows)?).map_err(err)
}

fn group(rows: &Rows) -> PyResult<GroupElement> {
    GroupElement::new(to_matrix(rows)?).map_err(err)
}

fn pair(left: &Rows, right: &Rows) -> PyResult<MomentPair> {
    MomentPair::new(element(left)?, element(right)?).map_err(err)
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A named subalgebra from the catalog, e.g. `su3` or `sp1xsp1_sp2`.
#[pyclass(name = "Algebra", frozen)]
struct PyAlgebra {
    inner: Subalgebra,
}

#[pymethods]
impl PyAlgebra {
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        resolve(name).map(|inner| Self { inner }).map_err(err)
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn basis(&self) -> Vec<Rows> {
        self.inner
            .basis()
            .iter()
            .map(|b| to_rows(b.matrix()))
            .collect()
    }

    fn project(&self, x: Rows) -> PyResult<Rows> {
        Ok(to_rows(
            self.inner.project(&element(&x)?).map_err(err)?.matrix(),
        ))
    }

    fn coords(&self, x: Rows) -> PyResult<Vec<f64>> {
        Ok(self.inner.coords(&element(&x)?).iter().cloned().collect())
    }

    #[pyo3(name = "from_coords")]
    fn element_from_coords(&self, coords: Vec<f64>) -> PyResult<Rows> {
        if coords.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!(
                "expected {} coordinates",
                self.inner.dim()
            )));
        }
        Ok(to_rows(self.inner.from_coords(&coords).matrix()))
    }

    fn residual(&self, x: Rows) -> PyResult<f64> {
        Ok(self.inner.residual(&element(&x)?))
    }

    fn random_element(&self, seed: u64) -> Rows {
        to_rows(random_element(&self.inner, &mut rng_from_seed(seed)).matrix())
    }

    fn __repr__(&self) -> String {
        format!("Algebra('{}', dim={})", self.inner.name(), self.inner.dim())
    }
}

/// A family of integrals on pairs of moment values.
#[pyclass(name = "Family", frozen)]
struct PyFamily {
    inner: IntegralFamily,
}

#[pymethods]
impl PyFamily {
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        build_family(name).map(|inner| Self { inner }).map_err(err)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().iter().map(|s| s.to_string()).collect()
    }

    fn algebra(&self) -> PyAlgebra {
        PyAlgebra {
            inner: self.inner.algebra.clone(),
        }
    }

    fn values(&self, left: Rows, right: Rows) -> PyResult<Vec<f64>> {
        self.inner.values(&pair(&left, &right)?).map_err(err)
    }

    /// Lie-Poisson bracket of two members at `(left, right)`.
    fn bracket(&self, first: &str, second: &str, left: Rows, right: Rows) -> PyResult<f64> {
        let spec = |l: &str| {
            self.inner
                .spec(l)
                .ok_or_else(|| PyValueError::new_err(format!("no integral labelled `{l}`")))
        };
        lie_poisson_bracket(spec(first)?, spec(second)?, &pair(&left, &right)?).map_err(err)
    }

    #[pyo3(signature = (samples = 32, seed = 0))]
    fn check_involution<'py>(
        &self,
        py: Python<'py>,
        samples: usize,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        to_py(
            py,
            &check_involution(&self.inner, samples, seed).map_err(err)?,
        )
    }
}

#[pyfunction]
fn exp(x: Rows) -> PyResult<Rows> {
    Ok(to_rows(alg::exp(&element(&x)?).matrix()))
}

#[pyfunction]
fn bracket(x: Rows, y: Rows) -> PyResult<Rows> {
    Ok(to_rows(
        alg::bracket(&element(&x)?, &element(&y)?)
            .map_err(err)?
            .matrix(),
    ))
}

#[pyfunction]
fn inner(x: Rows, y: Rows) -> PyResult<f64> {
    alg::inner(&element(&x)?, &element(&y)?).map_err(err)
}

#[pyfunction]
fn spectrum(x: Rows) -> PyResult<Vec<Complex64>> {
    Ok(alg::spectrum(&element(&x)?))
}

/// `(Ad g1 X, -Ad g2 X)` as a pair of matrices.
#[pyfunction]
fn moment_bi(g1: Rows, g2: Rows, x: Rows) -> PyResult<(Rows, Rows)> {
    let mp = moment::moment_bi(&group(&g1)?, &group(&g2)?, &element(&x)?).map_err(err)?;
    Ok((to_rows(mp.left.matrix()), to_rows(mp.right.matrix())))
}

#[pyfunction]
#[pyo3(signature = (example, m = 1))]
fn replay<'py>(py: Python<'py>, example: &str, m: i64) -> PyResult<Bound<'py, PyAny>> {
    match example {
        "2.1" | "flag" | "su3_flag" => to_py(py, &flag_conditions().map_err(err)?),
        "4.7" | "eschenburg" => to_py(py, &replay_eschenburg_steps(m).map_err(err)?),
        "4.8" | "gromoll_meyer" => to_py(py, &replay_gromoll_meyer().map_err(err)?),
        other => Err(PyValueError::new_err(format!("unknown example `{other}`"))),
    }
}

/// Runs every check of a scenario and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (scenario, m = None, n = None, t = None, seed = None, steps = None))]
fn verify<'py>(
    py: Python<'py>,
    scenario: &str,
    m: Option<i64>,
    n: Option<usize>,
    t: Option<f64>,
    seed: Option<u64>,
    steps: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut s = load_scenario_with(scenario, &BuiltinParams { m, n, t }).map_err(err)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    if let Some(steps) = steps {
        s.steps = steps;
    }
    geolab::lab::scenario::validate(&s).map_err(err)?;
    let report = py.allow_threads(|| run_checks(&s));
    to_py(py, &report)
}

#[pyfunction]
fn scenarios<'py>(py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    BUILTINS
        .iter()
        .map(|(name, signature, anchor, description)| {
            let d = PyDict::new(py);
            d.set_item("name", name)?;
            d.set_item("signature", signature)?;
            d.set_item("anchor", anchor)?;
            d.set_item("description", description)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
#[pyo3(name = "geolab")]
fn geolab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAlgebra>()?;
    m.add_class::<PyFamily>()?;
    m.add_function(wrap_pyfunction!(exp, m)?)?;
    m.add_function(wrap_pyfunction!(bracket, m)?)?;
    m.add_function(wrap_pyfunction!(inner, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(moment_bi, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    Ok(())
}
