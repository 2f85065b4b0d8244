//! Python bindings. Matrices are nested lists of rows; structured results
//! come back as plain dicts, lists and floats, in the same shape as the
//! command-line JSON reports.

use lorentzdyn::approx_stability::{
    as_subspace_all, as_subspace_ellipsoid, as_subspace_graph, as_subspace_kak, lorentz_as_check, spas_subspace,
};
use lorentzdyn::cocycles::{cocycle as cocycle_at, entropy_dichotomy, lyapunov_exponent, TorusAutomorphism};
use lorentzdyn::io::{matrix_from_rows, to_json_string};
use lorentzdyn::model_spaces::torus::{is_hyperbolic_exact, DEFAULT_BUDGET};
use lorentzdyn::model_spaces::{
    ads_second_factor_action, hopf_trace as trace, integer_isometries, CircleParam, HopfModel, RationalLorentzForm,
};
use lorentzdyn::projective::{classify_elementary, limit_set as estimate_limit_set, LimitSetOptions};
use lorentzdyn::reports::{KakReport, LimitSetReport, LorentzCheckReport};
use lorentzdyn::{kak as kak_factor, lorentz_kak, AsOptions, Error, HyperbolicPoint, MatrixSequence, QuadraticForm};
use nalgebra::{DMatrix, DVector, Matrix2};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn py_err(e: Error) -> PyErr {
    if e.is_precondition() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = to_json_string(value).map_err(py_err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    matrix_from_rows(rows).map_err(py_err)
}

fn int_matrix(rows: &[Vec<i64>]) -> PyResult<DMatrix<i64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(PyValueError::new_err("expected a non-empty rectangular matrix"));
    }
    Ok(DMatrix::from_fn(n, rows[0].len(), |i, j| rows[i][j]))
}

fn form(rows: &[Vec<f64>]) -> PyResult<QuadraticForm> {
    QuadraticForm::from_rows(rows).map_err(py_err)
}

fn sequence(terms: &[Vec<Vec<f64>>]) -> PyResult<MatrixSequence> {
    let terms = terms.iter().map(|t| matrix(t)).collect::<PyResult<Vec<_>>>()?;
    MatrixSequence::new(terms).map_err(py_err)
}

fn automorphism(gram: &[Vec<i64>], a: &[Vec<i64>]) -> PyResult<TorusAutomorphism> {
    let g = RationalLorentzForm::new(int_matrix(gram)?).map_err(py_err)?;
    TorusAutomorphism::new(g, int_matrix(a)?).map_err(py_err)
}

/// Cartan decomposition `A = L·D·R`; with `gram`, the Lorentz form of it.
#[pyfunction]
#[pyo3(signature = (a, gram=None))]
fn kak(py: Python<'_>, a: Vec<Vec<f64>>, gram: Option<Vec<Vec<f64>>>) -> PyResult<Py<PyAny>> {
    let a = matrix(&a)?;
    let report = match gram {
        Some(g) => KakReport::from_lorentz(&lorentz_kak(&form(&g)?, &a).map_err(py_err)?, &a),
        None => KakReport::new(&kak_factor(&a).map_err(py_err)?, &a),
    };
    to_py(py, &report)
}

/// Approximately stable subspace of a sequence of matrices.
#[pyfunction]
#[pyo3(signature = (terms, oracle="kak"))]
fn approx_stable(py: Python<'_>, terms: Vec<Vec<Vec<f64>>>, oracle: &str) -> PyResult<Py<PyAny>> {
    let seq = sequence(&terms)?;
    let opts = AsOptions::default();
    let res = match oracle {
        "kak" => as_subspace_kak(&seq, &opts),
        "ellipsoid" => as_subspace_ellipsoid(&seq, &opts),
        "graph" => as_subspace_graph(&seq, &opts),
        "all" => as_subspace_all(&seq, &opts),
        other => return Err(PyValueError::new_err(format!("unknown oracle `{other}`"))),
    }
    .map_err(py_err)?;
    to_py(py, &res)
}

/// Strongly approximately stable subspace.
#[pyfunction]
#[pyo3(signature = (terms, gram=None))]
fn strongly_stable(py: Python<'_>, terms: Vec<Vec<Vec<f64>>>, gram: Option<Vec<Vec<f64>>>) -> PyResult<Py<PyAny>> {
    let seq = sequence(&terms)?;
    let form = gram.map(|g| form(&g)).transpose()?;
    to_py(py, &spas_subspace(&seq, form.as_ref(), &AsOptions::default()).map_err(py_err)?)
}

/// Lightlike-hyperplane check for a divergent sequence of isometries.
#[pyfunction]
fn lorentz_check(py: Python<'_>, gram: Vec<Vec<f64>>, terms: Vec<Vec<Vec<f64>>>) -> PyResult<Py<PyAny>> {
    let report = lorentz_as_check(&form(&gram)?, &sequence(&terms)?, &AsOptions::default()).map_err(py_err)?;
    to_py(py, &LorentzCheckReport::from(&report))
}

/// Limit set of the group generated by `generators`.
#[pyfunction]
#[pyo3(signature = (generators, depth=8, samples=2000, seed=0, gram=None))]
fn limit_set(
    py: Python<'_>,
    generators: Vec<Vec<Vec<f64>>>,
    depth: usize,
    samples: usize,
    seed: u64,
    gram: Option<Vec<Vec<f64>>>,
) -> PyResult<Py<PyAny>> {
    let gens = generators.iter().map(|g| matrix(g)).collect::<PyResult<Vec<_>>>()?;
    let d = gens.first().map(|g| g.nrows()).ok_or_else(|| PyValueError::new_err("no generators"))?;
    let form = match gram {
        Some(g) => form(&g)?,
        None => QuadraticForm::minkowski(d),
    };
    let mut e0 = DVector::zeros(form.dim());
    e0[0] = 1.0;
    let base = HyperbolicPoint::normalize(&form, &(form.standardizing_congruence() * e0)).map_err(py_err)?;
    let opts = LimitSetOptions { depth, samples, seed, ..LimitSetOptions::default() };
    let estimate = estimate_limit_set(&form, &gens, &base, &opts).map_err(py_err)?;
    let classification = classify_elementary(&estimate);
    to_py(py, &LimitSetReport { estimate, classification, seed, depth, samples })
}

/// Return cocycle of the Hopf manifold along the orbit of `point`, for
/// `n = 0..=n_max`.
#[pyfunction]
fn hopf_trace(py: Python<'_>, alpha: f64, lam: f64, point: [f64; 2], n_max: i64) -> PyResult<Py<PyAny>> {
    let model = HopfModel::new(alpha, lam).map_err(py_err)?;
    to_py(py, &trace(&model, point, n_max).map_err(py_err)?)
}

/// Integer isometries of a flat torus with entries bounded by `height`.
#[pyfunction]
fn torus_isometries(gram: Vec<Vec<i64>>, height: i64) -> PyResult<Vec<Vec<Vec<i64>>>> {
    let g = RationalLorentzForm::new(int_matrix(&gram)?).map_err(py_err)?;
    let elements = integer_isometries(&g, height, DEFAULT_BUDGET, false).map_err(py_err)?;
    Ok(elements.iter().map(|m| m.row_iter().map(|r| r.iter().copied().collect()).collect()).collect())
}

/// Whether an integer matrix has an eigenvalue off the unit circle.
#[pyfunction]
fn is_hyperbolic(a: Vec<Vec<i64>>) -> PyResult<bool> {
    is_hyperbolic_exact(&int_matrix(&a)?).map_err(py_err)
}

/// `λ¹, λ²` on the `n`-th iterate of a hyperbolic torus automorphism.
#[pyfunction]
fn cocycle(py: Python<'_>, gram: Vec<Vec<i64>>, a: Vec<Vec<i64>>, n: i64) -> PyResult<Py<PyAny>> {
    to_py(py, &cocycle_at(&automorphism(&gram, &a)?, n).map_err(py_err)?)
}

/// Lyapunov exponent along the contracted (1) or expanded (2) direction.
#[pyfunction]
fn lyapunov(gram: Vec<Vec<i64>>, a: Vec<Vec<i64>>, direction: u8) -> PyResult<f64> {
    lyapunov_exponent(&automorphism(&gram, &a)?, direction).map_err(py_err)
}

/// Topological entropy and the approximate-stability side of the dichotomy.
#[pyfunction]
fn entropy(py: Python<'_>, gram: Vec<Vec<i64>>, a: Vec<Vec<i64>>) -> PyResult<Py<PyAny>> {
    to_py(py, &entropy_dichotomy(&automorphism(&gram, &a)?, &AsOptions::default()).map_err(py_err)?)
}

/// Parameter of the image of the plane `P_α` under `I ⊗ h`; `None` is the
/// point at infinity.
#[pyfunction]
#[pyo3(signature = (h, alpha))]
fn ads_circle(h: [[f64; 2]; 2], alpha: Option<f64>) -> PyResult<Option<f64>> {
    let h = Matrix2::new(h[0][0], h[0][1], h[1][0], h[1][1]);
    let alpha = alpha.map_or(CircleParam::Infinity, CircleParam::Finite);
    Ok(match ads_second_factor_action(&h, alpha).map_err(py_err)? {
        CircleParam::Finite(x) => Some(x),
        CircleParam::Infinity => None,
    })
}

#[pymodule]
fn pylorentzdyn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(kak, m)?)?;
    m.add_function(wrap_pyfunction!(approx_stable, m)?)?;
    m.add_function(wrap_pyfunction!(strongly_stable, m)?)?;
    m.add_function(wrap_pyfunction!(lorentz_check, m)?)?;
    m.add_function(wrap_pyfunction!(limit_set, m)?)?;
    m.add_function(wrap_pyfunction!(hopf_trace, m)?)?;
    m.add_function(wrap_pyfunction!(torus_isometries, m)?)?;
    m.add_function(wrap_pyfunction!(is_hyperbolic, m)?)?;
    m.add_function(wrap_pyfunction!(cocycle, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(ads_circle, m)?)?;
    Ok(())
}
