//! Python bindings: measures, frame bounds, optimal transport, dual membership
//! and perturbation certificates.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use pframe_core::battery::{self, BatteryConfig};
use pframe_core::frame::{self, FrameCertificate, PairedMeasure};
use pframe_core::linalg::DEFAULT_SINGULAR_TOL;
use pframe_core::measure::MeasureFile;
use pframe_core::perturb::{
    self, Certifier, Delta, Falsification, PerturbationCertificate, Theorem, ValidationReport,
};
use pframe_core::transport::{self, DualMembership};
use pframe_core::{DiscreteMeasure, Error};

create_exception!(pframe, PframeError, PyValueError, "Any failure reported by pframe.");
create_exception!(pframe, NotAFrameError, PframeError, "The measure does not span R^n.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NotAFrame { .. } | Error::SingularMatrix { .. } => {
            NotAFrameError::new_err(e.to_string())
        }
        _ => PframeError::new_err(e.to_string()),
    }
}

fn certifier(tol: Option<f64>) -> Certifier {
    Certifier::new(tol.unwrap_or(DEFAULT_SINGULAR_TOL))
}

/// A finitely supported probability measure on R^n.
#[pyclass(name = "Measure", module = "pframe", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMeasure(DiscreteMeasure);

#[pymethods]
impl PyMeasure {
    /// Masses default to uniform; `force_normalize` rescales masses that do
    /// not sum to one instead of rejecting them.
    #[new]
    #[pyo3(signature = (points, masses=None, force_normalize=false))]
    fn new(points: Vec<Vec<f64>>, masses: Option<Vec<f64>>, force_normalize: bool) -> PyResult<Self> {
        let mu = match masses {
            None => DiscreteMeasure::uniform(points),
            Some(m) if force_normalize => DiscreteMeasure::new_normalized(points, m),
            Some(m) => DiscreteMeasure::new(points, m),
        };
        mu.map(Self).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (text, force_normalize=false))]
    fn from_json(text: &str, force_normalize: bool) -> PyResult<Self> {
        let file: MeasureFile =
            serde_json::from_str(text).map_err(|e| PframeError::new_err(e.to_string()))?;
        file.into_measure(force_normalize).map(Self).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn points(&self) -> Vec<Vec<f64>> {
        self.0.points().to_vec()
    }

    #[getter]
    fn masses(&self) -> Vec<f64> {
        self.0.masses().to_vec()
    }

    fn second_moment(&self) -> f64 {
        self.0.second_moment()
    }

    fn digest(&self) -> String {
        self.0.digest()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Measure(dim={}, atoms={})", self.0.dim(), self.0.len())
    }
}

/// A joint measure with fixed marginals, as sparse `(i, j, mass)` entries.
#[pyclass(name = "Coupling", module = "pframe", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCoupling(transport::Coupling);

#[pymethods]
impl PyCoupling {
    #[new]
    fn new(mu: &PyMeasure, nu: &PyMeasure, entries: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        transport::Coupling::new(mu.0.clone(), nu.0.clone(), entries)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn product(mu: &PyMeasure, nu: &PyMeasure) -> Self {
        Self(transport::product_coupling(&mu.0, &nu.0))
    }

    /// Pairs atom `i` with atom `i`; needs equal atom counts and masses.
    #[staticmethod]
    fn diagonal(mu: &PyMeasure, nu: &PyMeasure) -> PyResult<Self> {
        transport::diagonal_coupling(&mu.0, &nu.0)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn mu(&self) -> PyMeasure {
        PyMeasure(self.0.mu().clone())
    }

    #[getter]
    fn nu(&self) -> PyMeasure {
        PyMeasure(self.0.nu().clone())
    }

    #[getter]
    fn entries(&self) -> Vec<(usize, usize, f64)> {
        self.0.entries().to_vec()
    }

    fn cost(&self) -> f64 {
        transport::quadratic_cost(&self.0)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }
}

/// Frame operator `S`, optimal bounds `A <= B`, second moment and class.
#[pyclass(name = "FrameCertificate", module = "pframe", frozen, skip_from_py_object)]
struct PyFrameCertificate(FrameCertificate);

#[pymethods]
impl PyFrameCertificate {
    #[getter(S)]
    fn frame_operator(&self) -> Vec<Vec<f64>> {
        self.0.frame_operator.as_matrix().to_rows()
    }

    #[getter(A)]
    fn lower(&self) -> f64 {
        self.0.lower
    }

    #[getter(B)]
    fn upper(&self) -> f64 {
        self.0.upper
    }

    #[getter(M2)]
    fn m2(&self) -> f64 {
        self.0.m2
    }

    #[getter]
    fn classification(&self) -> String {
        serde_json::to_value(self.0.classification)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    }

    fn is_frame(&self) -> bool {
        self.0.is_frame()
    }

    fn __repr__(&self) -> String {
        format!(
            "FrameCertificate(A={}, B={}, class={})",
            self.0.lower,
            self.0.upper,
            self.classification()
        )
    }
}

/// A perturbation certificate: premise, verdict and guaranteed bounds.
#[pyclass(name = "Certificate", module = "pframe", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCertificate(PerturbationCertificate);

#[pymethods]
impl PyCertificate {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(Self)
            .map_err(|e| PframeError::new_err(e.to_string()))
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn theorem(&self) -> &'static str {
        self.0.theorem.name()
    }

    #[getter]
    fn premise_value(&self) -> f64 {
        self.0.premise_value
    }

    #[getter]
    fn premise_threshold(&self) -> f64 {
        self.0.premise_threshold
    }

    #[getter]
    fn premise_ok(&self) -> bool {
        self.0.premise_ok
    }

    #[getter]
    fn guaranteed_lower(&self) -> Option<f64> {
        self.0.guaranteed_lower
    }

    #[getter]
    fn guaranteed_upper(&self) -> Option<f64> {
        self.0.guaranteed_upper
    }

    #[getter]
    fn coupling_source(&self) -> Option<String> {
        self.0.coupling_source.clone()
    }

    #[getter]
    fn extras(&self) -> std::collections::BTreeMap<String, f64> {
        self.0.extras.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Certificate({}, premise {} < {}: {})",
            self.0.theorem, self.0.premise_value, self.0.premise_threshold, self.0.premise_ok
        )
    }
}

/// Guarantees of a certificate compared with the true bounds.
#[pyclass(name = "ValidationReport", module = "pframe", frozen, get_all, skip_from_py_object)]
struct PyValidationReport {
    actual_lower: f64,
    actual_upper: f64,
    lower_slack: f64,
    upper_slack: f64,
    verdict: bool,
}

impl From<ValidationReport> for PyValidationReport {
    fn from(r: ValidationReport) -> Self {
        Self {
            actual_lower: r.actual_lower,
            actual_upper: r.actual_upper,
            lower_slack: r.lower_slack,
            upper_slack: r.upper_slack,
            verdict: r.verdict,
        }
    }
}

fn paired(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>, masses: Option<Vec<f64>>) -> PyResult<PairedMeasure> {
    let masses = masses.unwrap_or_else(|| vec![1.0 / x.len().max(1) as f64; x.len()]);
    PairedMeasure::new(x, y, masses).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (mu, tol=None))]
fn frame_bounds(mu: &PyMeasure, tol: Option<f64>) -> PyFrameCertificate {
    PyFrameCertificate(frame::frame_bounds_with_tol(
        &mu.0,
        tol.unwrap_or(DEFAULT_SINGULAR_TOL),
    ))
}

/// The canonical dual `(S^-1)_# mu`.
#[pyfunction]
fn canonical_dual(mu: &PyMeasure) -> PyResult<PyMeasure> {
    frame::canonical_dual(&mu.0)
        .map(|(d, _)| PyMeasure(d))
        .map_err(to_py)
}

/// The canonical Parseval frame `(S^-1/2)_# mu`.
#[pyfunction]
fn canonical_parseval(mu: &PyMeasure) -> PyResult<PyMeasure> {
    frame::canonical_parseval(&mu.0)
        .map(PyMeasure)
        .map_err(to_py)
}

/// Exact 2-Wasserstein distance and an optimal plan.
#[pyfunction]
fn w2(mu: &PyMeasure, nu: &PyMeasure) -> PyResult<(f64, PyCoupling)> {
    transport::w2(&mu.0, &nu.0)
        .map(|(d, g)| (d, PyCoupling(g)))
        .map_err(to_py)
}

/// `(is_member, phase_one_objective, witness or None)`.
#[pyfunction]
fn dual_membership(mu: &PyMeasure, nu: &PyMeasure) -> PyResult<(bool, f64, Option<PyCoupling>)> {
    let r = transport::dual_membership(&mu.0, &nu.0).map_err(to_py)?;
    let objective = r.phase_one_objective();
    Ok(match r {
        DualMembership::Member { witness, .. } => (true, objective, Some(PyCoupling(witness))),
        DualMembership::NotMember { .. } => (false, objective, None),
    })
}

#[pyfunction]
#[pyo3(signature = (mu, nu, coupling=None, tol=None))]
fn certify_quadclose(
    mu: &PyMeasure,
    nu: &PyMeasure,
    coupling: Option<&PyCoupling>,
    tol: Option<f64>,
) -> PyResult<PyCertificate> {
    let c = certifier(tol);
    let cert = match coupling {
        Some(g) => c.quadclose(&mu.0, &nu.0, &g.0),
        None => transport::w2(&mu.0, &nu.0).and_then(|(_, g)| {
            c.quadclose(&mu.0, &nu.0, &g)
                .map(|cert| cert.with_coupling_source("w2-optimal"))
        }),
    };
    cert.map(PyCertificate).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (mu, nu, tol=None))]
fn certify_w2(mu: &PyMeasure, nu: &PyMeasure, tol: Option<f64>) -> PyResult<PyCertificate> {
    certifier(tol)
        .w2(&mu.0, &nu.0)
        .map(PyCertificate)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (mu, nu, r=None, tol=None))]
fn certify_sweetie(
    mu: &PyMeasure,
    nu: &PyMeasure,
    r: Option<f64>,
    tol: Option<f64>,
) -> PyResult<PyCertificate> {
    certifier(tol)
        .sweetie_with_r(&mu.0, &nu.0, r)
        .map(PyCertificate)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (mu, nu, coupling, tol=None))]
fn certify_sweetie_coupling(
    mu: &PyMeasure,
    nu: &PyMeasure,
    coupling: &PyCoupling,
    tol: Option<f64>,
) -> PyResult<PyCertificate> {
    certifier(tol)
        .sweetie_coupling(&mu.0, &nu.0, &coupling.0)
        .map(PyCertificate)
        .map_err(to_py)
}

/// Paley–Wiener certificate for index-paired atoms `x_i -> y_i`. With
/// `delta=None` the optimal delta is computed (requires zero lambdas).
#[pyfunction]
#[pyo3(signature = (x, y, masses=None, lambda1=0.0, lambda2=0.0, delta=None, tol=None))]
fn certify_paley(
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    masses: Option<Vec<f64>>,
    lambda1: f64,
    lambda2: f64,
    delta: Option<f64>,
    tol: Option<f64>,
) -> PyResult<PyCertificate> {
    let p = paired(x, y, masses)?;
    let delta = delta.map_or(Delta::Auto, Delta::Value);
    certifier(tol)
        .paley(&p, lambda1, lambda2, delta)
        .map(PyCertificate)
        .map_err(to_py)
}

/// Searches for a direction violating the Paley–Wiener hypothesis; returns the
/// offending coefficient vector or `None` when no violation was found.
#[pyfunction]
#[pyo3(signature = (x, y, delta, masses=None, lambda1=0.0, lambda2=0.0, trials=100, seed=0))]
#[allow(clippy::too_many_arguments)]
fn falsify_paley(
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    delta: f64,
    masses: Option<Vec<f64>>,
    lambda1: f64,
    lambda2: f64,
    trials: usize,
    seed: u64,
) -> PyResult<Option<Vec<f64>>> {
    let p = paired(x, y, masses)?;
    match perturb::falsify_paley(&p, lambda1, lambda2, delta, trials, seed).map_err(to_py)? {
        Falsification::Counterexample { w, .. } => Ok(Some(w)),
        Falsification::NotFalsified { .. } => Ok(None),
    }
}

#[pyfunction]
#[pyo3(signature = (mu, nu, gamma12, eta, gamma23, tol=None))]
fn certify_dual_stability(
    mu: &PyMeasure,
    nu: &PyMeasure,
    gamma12: &PyCoupling,
    eta: &PyMeasure,
    gamma23: &PyCoupling,
    tol: Option<f64>,
) -> PyResult<PyCertificate> {
    certifier(tol)
        .dual_stability(&mu.0, &nu.0, &gamma12.0, &eta.0, &gamma23.0)
        .map(PyCertificate)
        .map_err(to_py)
}

/// `(sigma, eps_hat)` certificates.
#[pyfunction]
#[pyo3(signature = (mu, eta, tol=None))]
fn certify_canonical_dual(
    mu: &PyMeasure,
    eta: &PyMeasure,
    tol: Option<f64>,
) -> PyResult<(PyCertificate, PyCertificate)> {
    let pair = certifier(tol).canonical_dual(&mu.0, &eta.0).map_err(to_py)?;
    Ok((PyCertificate(pair.sigma), PyCertificate(pair.eps_hat)))
}

/// `(eps, chi)` certificates.
#[pyfunction]
#[pyo3(signature = (mu, eta, coupling, tol=None))]
fn certify_coupling_dual(
    mu: &PyMeasure,
    eta: &PyMeasure,
    coupling: &PyCoupling,
    tol: Option<f64>,
) -> PyResult<(PyCertificate, PyCertificate)> {
    let pair = certifier(tol)
        .coupling_dual(&mu.0, &eta.0, &coupling.0)
        .map_err(to_py)?;
    Ok((PyCertificate(pair.eps), PyCertificate(pair.chi)))
}

#[pyfunction]
#[pyo3(signature = (mu, eta, coupling, tol=None))]
fn certify_parseval_tau(
    mu: &PyMeasure,
    eta: &PyMeasure,
    coupling: &PyCoupling,
    tol: Option<f64>,
) -> PyResult<PyCertificate> {
    certifier(tol)
        .parseval_tau(&mu.0, &eta.0, &coupling.0)
        .map(PyCertificate)
        .map_err(to_py)
}

/// Checks a certificate against the true bounds of the perturbed measure.
#[pyfunction]
#[pyo3(signature = (certificate, perturbed, tol=None))]
fn validate(
    certificate: &PyCertificate,
    perturbed: &PyMeasure,
    tol: Option<f64>,
) -> PyResult<PyValidationReport> {
    certifier(tol)
        .validate(&certificate.0, &perturbed.0)
        .map(Into::into)
        .map_err(to_py)
}

/// Runs the randomized soundness battery; returns `(csv, violations)`.
#[pyfunction]
#[pyo3(signature = (seed=0, trials=200, theorems=None))]
fn run_battery(
    py: Python<'_>,
    seed: u64,
    trials: usize,
    theorems: Option<Vec<String>>,
) -> PyResult<(String, usize)> {
    let theorems = match theorems {
        None => Theorem::ALL.to_vec(),
        Some(names) => names
            .iter()
            .map(|n| {
                n.parse::<Theorem>()
                    .map_err(|_| PframeError::new_err(format!("unknown theorem '{n}'")))
            })
            .collect::<PyResult<_>>()?,
    };
    let cfg = BatteryConfig {
        seed,
        trials,
        theorems,
        ..BatteryConfig::default()
    };
    let report = py
        .detach(|| battery::run_battery(&cfg))
        .map_err(to_py)?;
    Ok((report.to_csv(), report.violations()))
}

#[pymodule]
fn pframe(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PframeError", m.py().get_type::<PframeError>())?;
    m.add("NotAFrameError", m.py().get_type::<NotAFrameError>())?;
    m.add_class::<PyMeasure>()?;
    m.add_class::<PyCoupling>()?;
    m.add_class::<PyFrameCertificate>()?;
    m.add_class::<PyCertificate>()?;
    m.add_class::<PyValidationReport>()?;
    m.add_function(wrap_pyfunction!(frame_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_dual, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_parseval, m)?)?;
    m.add_function(wrap_pyfunction!(w2, m)?)?;
    m.add_function(wrap_pyfunction!(dual_membership, m)?)?;
    m.add_function(wrap_pyfunction!(certify_quadclose, m)?)?;
    m.add_function(wrap_pyfunction!(certify_w2, m)?)?;
    m.add_function(wrap_pyfunction!(certify_sweetie, m)?)?;
    m.add_function(wrap_pyfunction!(certify_sweetie_coupling, m)?)?;
    m.add_function(wrap_pyfunction!(certify_paley, m)?)?;
    m.add_function(wrap_pyfunction!(falsify_paley, m)?)?;
    m.add_function(wrap_pyfunction!(certify_dual_stability, m)?)?;
    m.add_function(wrap_pyfunction!(certify_canonical_dual, m)?)?;
    m.add_function(wrap_pyfunction!(certify_coupling_dual, m)?)?;
    m.add_function(wrap_pyfunction!(certify_parseval_tau, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(run_battery, m)?)?;
    Ok(())
}
