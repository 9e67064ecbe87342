use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use linkops::analysis::{self, ClosedForms};
use linkops::{basis, functionals, operators};
use linkops::{BasisParams, Error, FunctionSpec, OperatorConfig, OperatorKind, Rho, Tolerances};

fn to_py(e: Error) -> PyErr {
    if e.is_config() {
        PyValueError::new_err(e.to_string())
    } else {
        PyArithmeticError::new_err(e.to_string())
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for linkops::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// `ρ` as a positive float, `float("inf")` or the string `"inf"`.
#[derive(FromPyObject)]
enum RhoArg {
    Num(f64),
    Text(String),
}

impl RhoArg {
    fn rho(&self) -> PyResult<Rho> {
        match self {
            RhoArg::Num(v) if v.is_infinite() && *v > 0.0 => Ok(Rho::Infinite),
            RhoArg::Num(v) => v.to_string().parse().py_err(),
            RhoArg::Text(s) => s.parse().py_err(),
        }
    }
}

/// A single `quad_rel` or the triple `(quad_rel, series_tail, check_slack)`.
#[derive(FromPyObject)]
enum TolArg {
    Triple(f64, f64, f64),
    Single(f64),
}

fn tolerances(tol: Option<TolArg>) -> PyResult<Tolerances> {
    let d = Tolerances::default();
    match tol {
        None => Ok(d),
        Some(TolArg::Single(q)) => Tolerances::new(q, d.series_tail, d.check_slack).py_err(),
        Some(TolArg::Triple(q, s, c)) => Tolerances::new(q, s, c).py_err(),
    }
}

fn json<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Operator parameters `(c, n, rho, k)`.
#[pyclass(name = "OperatorConfig", module = "pylinkops", frozen, eq)]
#[derive(PartialEq)]
struct PyOperatorConfig(OperatorConfig);

#[pymethods]
impl PyOperatorConfig {
    #[new]
    #[pyo3(signature = (c, n, rho = RhoArg::Num(1.0), k = 0))]
    fn new(c: f64, n: f64, rho: RhoArg, k: u32) -> PyResult<Self> {
        Ok(Self(OperatorConfig::new(c, n, rho.rho()?, k).py_err()?))
    }

    #[getter]
    fn c(&self) -> f64 {
        self.0.c
    }

    #[getter]
    fn n(&self) -> f64 {
        self.0.n
    }

    /// `float("inf")` for the limit operator.
    #[getter]
    fn rho(&self) -> f64 {
        self.0.rho.finite().unwrap_or(f64::INFINITY)
    }

    #[getter]
    fn k(&self) -> u32 {
        self.0.k
    }

    /// `(lower, upper)` of the domain; `upper` is `inf` for `c >= 0`.
    fn domain(&self) -> (f64, f64) {
        let d = self.0.domain();
        (d.lower(), d.upper())
    }

    fn with_rho(&self, rho: RhoArg) -> PyResult<Self> {
        Ok(Self(self.0.with_rho(rho.rho()?).py_err()?))
    }

    fn to_json(&self) -> PyResult<String> {
        json(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("OperatorConfig({})", self.0)
    }
}

fn kind(name: &str) -> PyResult<OperatorKind> {
    name.parse().py_err()
}

fn spec(cfg: &OperatorConfig, f: &str, d2_sup: Option<f64>) -> PyResult<FunctionSpec> {
    let f = FunctionSpec::from_source(f, cfg.domain()).py_err()?;
    Ok(match d2_sup {
        Some(d) => f.with_d2_sup(d),
        None => f,
    })
}

/// Names accepted by `evaluate`.
#[pyfunction]
fn kinds() -> Vec<&'static str> {
    OperatorKind::ALL.iter().map(|k| k.name()).collect()
}

/// Applies the operator `kind` to `f` (catalog entry or expression in `t`) at `xs`.
#[pyfunction]
#[pyo3(signature = (kind_name, cfg, f, xs, tol = None))]
fn evaluate(kind_name: &str, cfg: &PyOperatorConfig, f: &str, xs: Vec<f64>, tol: Option<TolArg>) -> PyResult<Vec<f64>> {
    let tol = tolerances(tol)?;
    let f = spec(&cfg.0, f, None)?;
    operators::evaluate(kind(kind_name)?, &cfg.0, &f, &xs, &tol).py_err()
}

#[pyfunction]
#[pyo3(signature = (cfg, j, f, tol = None))]
fn a_functional(cfg: &PyOperatorConfig, j: usize, f: &str, tol: Option<TolArg>) -> PyResult<f64> {
    let f = spec(&cfg.0, f, None)?;
    functionals::a_functional(&cfg.0, j, &f, &tolerances(tol)?).py_err()
}

#[pyfunction]
#[pyo3(signature = (cfg, j, f, tol = None))]
fn f_functional(cfg: &PyOperatorConfig, j: usize, f: &str, tol: Option<TolArg>) -> PyResult<f64> {
    let f = spec(&cfg.0, f, None)?;
    functionals::f_functional(&cfg.0, j, &f, &tolerances(tol)?).py_err()
}

#[pyfunction]
fn barycenter(cfg: &PyOperatorConfig, j: usize) -> PyResult<f64> {
    functionals::barycenter(&cfg.0, j).py_err()
}

#[pyfunction]
fn second_moment_a(cfg: &PyOperatorConfig, j: usize) -> PyResult<f64> {
    functionals::second_moment_a(&cfg.0, j).py_err()
}

#[pyfunction]
fn variance_a(cfg: &PyOperatorConfig, j: usize) -> PyResult<f64> {
    functionals::variance_a(&cfg.0, j).py_err()
}

/// `(series, closed)` values of `E(L)` at `x`.
#[pyfunction]
#[pyo3(signature = (cfg, x, tol = None))]
fn e_of_l(cfg: &PyOperatorConfig, x: f64, tol: Option<TolArg>) -> PyResult<(f64, f64)> {
    let e = analysis::e_of_l(&cfg.0, x, &tolerances(tol)?).py_err()?;
    Ok((e.series, e.closed))
}

/// `(numeric, closed)` values of `Var_x V` at `x`; `closed` is `None` where no
/// closed form applies.
#[pyfunction]
#[pyo3(signature = (cfg, x, kind_name = "V_normalized", tol = None))]
fn var_x(cfg: &PyOperatorConfig, x: f64, kind_name: &str, tol: Option<TolArg>) -> PyResult<(f64, Option<f64>)> {
    let v = analysis::var_x_operator(kind(kind_name)?, &cfg.0, x, &tolerances(tol)?).py_err()?;
    Ok((v.numeric, v.closed))
}

/// Closed-form and numeric images of `e_0, e_1, e_2`, as JSON.
#[pyfunction]
#[pyo3(signature = (cfg, xs = Vec::new(), tol = None))]
fn monomial_images(cfg: &PyOperatorConfig, xs: Vec<f64>, tol: Option<TolArg>) -> PyResult<String> {
    json(&operators::monomial_images(&cfg.0, &xs, &tolerances(tol)?).py_err()?)
}

#[pyfunction]
fn basis_p(c: f64, n: f64, j: usize, x: f64) -> PyResult<f64> {
    basis::basis_p(&BasisParams::new(c, n).py_err()?, j, x).py_err()
}

/// `(series, integral, bound)` for the squared basis sum at `x`.
#[pyfunction]
#[pyo3(signature = (c, n, x, tol = None))]
fn squared_sum(c: f64, n: f64, x: f64, tol: Option<TolArg>) -> PyResult<(f64, f64, f64)> {
    let bp = BasisParams::new(c, n).py_err()?;
    let tol = tolerances(tol)?;
    Ok((
        basis::squared_sum_series(&bp, x, &tol).py_err()?,
        basis::squared_sum_integral(&bp, x, &tol).py_err()?,
        basis::squared_sum_bound(&bp, x).py_err()?,
    ))
}

/// Runs a verification suite and returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (suite, configs = Vec::new(), tol = None, mutate = false))]
fn run_suite(suite: &str, configs: Vec<PyRef<'_, PyOperatorConfig>>, tol: Option<TolArg>, mutate: bool) -> PyResult<String> {
    let configs: Vec<OperatorConfig> = configs.iter().map(|c| c.0).collect();
    let closed = if mutate { ClosedForms::corrupted() } else { ClosedForms::default() };
    json(&analysis::run_suite(suite, &configs, &tolerances(tol)?, &closed).py_err()?)
}

#[pyfunction]
fn suite_ids() -> Vec<&'static str> {
    analysis::SUITE_IDS.to_vec()
}

#[pymodule]
fn pylinkops(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperatorConfig>()?;
    m.add_function(wrap_pyfunction!(kinds, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(a_functional, m)?)?;
    m.add_function(wrap_pyfunction!(f_functional, m)?)?;
    m.add_function(wrap_pyfunction!(barycenter, m)?)?;
    m.add_function(wrap_pyfunction!(second_moment_a, m)?)?;
    m.add_function(wrap_pyfunction!(variance_a, m)?)?;
    m.add_function(wrap_pyfunction!(e_of_l, m)?)?;
    m.add_function(wrap_pyfunction!(var_x, m)?)?;
    m.add_function(wrap_pyfunction!(monomial_images, m)?)?;
    m.add_function(wrap_pyfunction!(basis_p, m)?)?;
    m.add_function(wrap_pyfunction!(squared_sum, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(suite_ids, m)?)?;
    Ok(())
}
