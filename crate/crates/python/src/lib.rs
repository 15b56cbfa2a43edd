use num_complex::Complex64;
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;

use specgraph::generators::{family_graph, randomize, FamilySpec, RandomizeSpec, WeightLaw};
use specgraph::operators::{degree_matrix, laplacian_matrix, HermitianOperator};
use specgraph::spectral::eigh_dense;
use specgraph::suites::{self, SuiteConfig};
use specgraph::verify::{ess_sa_diagnostic, quadratic_form, to_frame, PathChoice};
use specgraph::{block_section, FiniteSection};

fn err(e: specgraph::Error) -> PyErr {
    match e {
        specgraph::Error::SuiteUnknown(name) => PyKeyError::new_err(name),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Accepts a family name or a JSON family object.
fn family(text: &str) -> PyResult<FamilySpec> {
    FamilySpec::by_name(text)
        .map(Ok)
        .unwrap_or_else(|| serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("family '{text}': {e}"))))
}

fn section(name: &str, radius: Option<usize>, seed: Option<u64>) -> PyResult<FiniteSection> {
    let spec = family(name)?;
    let mut g = family_graph(&spec).map_err(err)?;
    if let Some(s) = seed {
        g = randomize(&g, &RandomizeSpec { phase_seed: Some(s), weight_law: WeightLaw::LogUniform { spread: 0.5 }, weight_seed: s });
    }
    let root = g.root().ok_or_else(|| PyValueError::new_err("family has no root"))?;
    block_section(&g, root, radius.unwrap_or_else(|| suites::default_radius(&spec))).map_err(err)
}

fn operator(s: &FiniteSection, which: &str) -> PyResult<HermitianOperator> {
    match which {
        "laplacian" => laplacian_matrix(s, None).map_err(err),
        "degree" => Ok(degree_matrix(s)),
        other => Err(PyValueError::new_err(format!("operator '{other}' (expected 'laplacian' or 'degree')"))),
    }
}

#[pyfunction]
fn suite_names() -> Vec<&'static str> {
    suites::SUITE_NAMES.to_vec()
}

/// Runs a named suite; returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (name, config=None))]
fn run_suite(py: Python<'_>, name: &str, config: Option<&str>) -> PyResult<String> {
    let cfg: SuiteConfig = match config {
        Some(text) => serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?,
        None => SuiteConfig::default(),
    };
    let report = py.detach(|| suites::run_suite(name, &cfg)).map_err(err)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Section vertices in canonical order, as display strings.
#[pyfunction]
#[pyo3(signature = (family, radius=None, seed=None))]
fn vertices(family: &str, radius: Option<usize>, seed: Option<u64>) -> PyResult<Vec<String>> {
    Ok(section(family, radius, seed)?.members.iter().map(|v| v.to_string()).collect())
}

/// Dense matrix of the Dirichlet section operator in the conjugated frame.
#[pyfunction]
#[pyo3(signature = (family, radius=None, seed=None, operator="laplacian"))]
fn matrix(family: &str, radius: Option<usize>, seed: Option<u64>, operator: &str) -> PyResult<Vec<Vec<Complex64>>> {
    let s = section(family, radius, seed)?;
    let m = self::operator(&s, operator)?.to_dense();
    Ok((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect())
}

#[pyfunction]
#[pyo3(signature = (family, radius=None, seed=None, operator="laplacian"))]
fn spectrum(family: &str, radius: Option<usize>, seed: Option<u64>, operator: &str) -> PyResult<Vec<f64>> {
    let s = section(family, radius, seed)?;
    Ok(eigh_dense(&self::operator(&s, operator)?, false).map_err(err)?.eigenvalues)
}

/// `Q(f)` by the edge sum, and `⟨f, Δf⟩` through the matrix.
#[pyfunction]
#[pyo3(signature = (family, f, radius=None, seed=None))]
fn forms(family: &str, f: Vec<Complex64>, radius: Option<usize>, seed: Option<u64>) -> PyResult<(f64, f64)> {
    let s = section(family, radius, seed)?;
    if f.len() != s.len() {
        return Err(PyValueError::new_err(format!("expected {} values, got {}", s.len(), f.len())));
    }
    let q = quadratic_form(&s, &f).map_err(err)?;
    let via = laplacian_matrix(&s, None).map_err(err)?.form(&to_frame(&s, &f));
    Ok((q, via))
}

/// Greedy-path diagnostic with `V = 0`; returns `(verdict, partial sum, path length)`.
#[pyfunction]
#[pyo3(signature = (family, horizon=1000, gamma=1.0, lambda_shift=0.0, lookahead=2))]
fn essaa(family: &str, horizon: usize, gamma: f64, lambda_shift: f64, lookahead: usize) -> PyResult<(String, f64, usize)> {
    let g = family_graph(&self::family(family)?).map_err(err)?;
    let start = g.root().ok_or_else(|| PyValueError::new_err("family has no root"))?;
    let d = ess_sa_diagnostic(&g, &|_| 0.0, gamma, lambda_shift, &PathChoice::Search { start, lookahead }, horizon).map_err(err)?;
    let verdict = serde_json::to_value(d.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    Ok((verdict, d.limit(), d.path.len()))
}

#[pyfunction]
fn weighted_line_limit(e: f64, q: f64, gamma: f64) -> f64 {
    suites::weighted_line_limit(e, q, gamma)
}

#[pymodule]
fn pyspecgraph(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(suite_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(vertices, m)?)?;
    m.add_function(wrap_pyfunction!(matrix, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(forms, m)?)?;
    m.add_function(wrap_pyfunction!(essaa, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_line_limit, m)?)?;
    Ok(())
}
