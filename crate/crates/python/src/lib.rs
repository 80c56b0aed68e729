//! Python bindings. Exponents are plain floats on the Python side;
//! `math.inf` stands for the sup-norm exponent.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use theta::exponent::{conjugate_exponent, theta_eval, validate_theta, ThetaExponent};
use theta::function_space::{self as fs, DiscreteMeasureSpace, GridFunction, MeasureKind};
use theta::gt_weighting::{self as gt, BilinearForm, FactorizationCertificate, GtOptions};
use theta::inequalities as ineq;
use theta::linalg::Matrix;
use theta::sequence_space::{self as ss, Tail, WeightedSequence};
use theta::suite::{run_suite as core_run_suite, SuiteConfig};
use theta::{ExponentValue, InequalityReport};

create_exception!(theta_norms, ThetaNormsError, PyValueError);

fn err(e: theta::Error) -> PyErr {
    ThetaNormsError::new_err(e.to_string())
}

fn exp(e: f64) -> ExponentValue {
    if e == f64::INFINITY { ExponentValue::Inf } else { ExponentValue::Finite(e) }
}

fn exp_f64(e: ExponentValue) -> f64 {
    match e {
        ExponentValue::Finite(v) => v,
        ExponentValue::Inf => f64::INFINITY,
    }
}

fn seq(values: Vec<f64>) -> PyResult<WeightedSequence> {
    WeightedSequence::finite(values).map_err(err)
}

fn measure(nodes: Vec<f64>, weights: Vec<f64>) -> PyResult<DiscreteMeasureSpace> {
    DiscreteMeasureSpace::new(MeasureKind::Quadrature, nodes, weights).map_err(err)
}

fn grid(samples: Vec<f64>) -> PyResult<GridFunction> {
    GridFunction::new(samples).map_err(err)
}

/// Outcome of one inequality check: `holds ⟺ lhs ≤ rhs·(1+tol) + tail_error`.
#[pyclass(name = "Report", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyReport(InequalityReport);

#[pymethods]
impl PyReport {
    #[getter]
    fn lhs(&self) -> f64 {
        self.0.lhs
    }
    #[getter]
    fn rhs(&self) -> f64 {
        self.0.rhs
    }
    #[getter]
    fn holds(&self) -> bool {
        self.0.holds
    }
    #[getter]
    fn ratio(&self) -> f64 {
        self.0.ratio
    }
    #[getter]
    fn tol(&self) -> f64 {
        self.0.tol
    }
    #[getter]
    fn tail_error(&self) -> f64 {
        self.0.tail_error
    }
    fn __bool__(&self) -> bool {
        self.0.holds
    }
    fn __repr__(&self) -> String {
        let r = &self.0;
        format!("Report(lhs={}, rhs={}, holds={}, ratio={}, tail_error={})", r.lhs, r.rhs, r.holds, r.ratio, r.tail_error)
    }
}

fn report(r: theta::Result<InequalityReport>) -> PyResult<PyReport> {
    r.map(PyReport).map_err(err)
}

/// `θ(p) = Λ(p)^Ψ(p)`.
#[pyclass(name = "ThetaExponent", frozen, skip_from_py_object)]
struct PyTheta(ThetaExponent);

#[pymethods]
impl PyTheta {
    /// Parses `identity`, `power:k` or `affine-power:a,b,c`.
    #[new]
    fn new(preset: &str) -> PyResult<Self> {
        ThetaExponent::from_preset(preset).map(Self).map_err(err)
    }

    /// Builds θ from two Python callables. Exceptions inside them evaluate to NaN
    /// and therefore surface as range errors.
    #[staticmethod]
    fn custom(lam: Py<PyAny>, psi: Py<PyAny>, lo: f64, hi: f64) -> PyResult<Self> {
        let call = |f: Py<PyAny>| {
            move |p: f64| Python::attach(|py| f.call1(py, (p,)).and_then(|v| v.extract::<f64>(py)).unwrap_or(f64::NAN))
        };
        ThetaExponent::new(call(lam), call(psi), (lo, hi)).map(Self).map_err(err)
    }

    fn __call__(&self, p: f64) -> PyResult<f64> {
        theta_eval(&self.0, p).map(exp_f64).map_err(err)
    }

    /// List of violation descriptions on a uniform grid; empty means valid.
    #[pyo3(signature = (grid_size = 1000))]
    fn validate(&self, grid_size: usize) -> Vec<String> {
        validate_theta(&self.0, grid_size).violations.iter().map(|v| format!("{v:?}")).collect()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// Weights `λ`, `μ` and constant `K` from a Grothendieck factorization search.
#[pyclass(name = "Certificate", frozen, skip_from_py_object)]
struct PyCertificate(FactorizationCertificate);

#[pymethods]
impl PyCertificate {
    #[getter]
    fn lambda_(&self) -> Vec<f64> {
        self.0.lambda.as_slice().to_vec()
    }
    #[getter]
    fn mu(&self) -> Vec<f64> {
        self.0.mu.as_slice().to_vec()
    }
    #[getter(K)]
    fn k(&self) -> f64 {
        self.0.k
    }
    #[getter]
    fn form_norm(&self) -> f64 {
        self.0.form_norm
    }
    #[getter]
    fn converged(&self) -> bool {
        self.0.converged
    }
    #[getter]
    fn warning(&self) -> Option<String> {
        self.0.warning.clone()
    }
    fn __repr__(&self) -> String {
        format!("Certificate(K={}, form_norm={}, converged={})", self.0.k, self.0.form_norm, self.0.converged)
    }
}

fn form(rows: Vec<Vec<f64>>) -> PyResult<BilinearForm> {
    BilinearForm::new(Matrix::from_rows(&rows).map_err(err)?).map_err(err)
}

#[pyfunction]
#[pyo3(name = "conjugate_exponent")]
fn py_conjugate(e: f64) -> PyResult<f64> {
    conjugate_exponent(exp(e)).map(exp_f64).map_err(err)
}

/// ‖x‖_e of a finite vector.
#[pyfunction]
fn lp_norm(x: Vec<f64>, e: f64) -> PyResult<f64> {
    ss::lp_norm(&x, exp(e)).map_err(err)
}

/// `(value, tail_error)` for a prefix optionally continued by `c·n^{-s}`.
#[pyfunction]
#[pyo3(signature = (x, e, tail = None))]
fn seq_norm(x: Vec<f64>, e: f64, tail: Option<(f64, f64)>) -> PyResult<(f64, f64)> {
    let tail = tail.map_or(Tail::None, |(c, s)| Tail::PowerDecay { c, s });
    let x = WeightedSequence::with_tail(x, tail).map_err(err)?;
    let enc = ss::seq_norm(&x, exp(e)).map_err(err)?;
    Ok((enc.value, enc.tail_error))
}

/// `(‖b‖_q, extremal evaluation, extremal vector)` for the functional `x ↦ Σ b_k x_k` on ℓ_p.
#[pyfunction]
fn dual_functional_norm(b: Vec<f64>, p: f64) -> PyResult<(f64, f64, Vec<f64>)> {
    let d = ss::dual_functional_norm(&b, exp(p)).map_err(err)?;
    Ok((d.formula, d.extremal, d.extremal_vector))
}

#[pyfunction]
fn embedding_strictness<'py>(py: Python<'py>, p: f64, q: f64, n0: usize, doublings: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = ss::embedding_strictness(exp(p), exp(q), n0, doublings).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("lengths", r.lengths)?;
    d.set_item("q_norms", r.q_norms)?;
    d.set_item("p_power_sums", r.p_power_sums)?;
    d.set_item("q_stable", r.q_stable)?;
    d.set_item("p_divergent", r.p_divergent)?;
    Ok(d)
}

#[pyfunction]
fn holder_seq(x: Vec<f64>, y: Vec<f64>, e: f64) -> PyResult<PyReport> {
    report(ineq::holder_seq(&seq(x)?, &seq(y)?, exp(e)))
}

#[pyfunction]
fn minkowski_seq(x: Vec<f64>, y: Vec<f64>, e: f64) -> PyResult<PyReport> {
    report(ineq::minkowski_seq(&seq(x)?, &seq(y)?, exp(e)))
}

#[pyfunction]
fn hardy(a: Vec<f64>, e: f64) -> PyResult<PyReport> {
    report(ineq::hardy(&seq(a)?, exp(e)))
}

/// Hardy's inequality for `a_n = n^{-s}` with the infinite tails included.
#[pyfunction]
fn hardy_power_family(s: f64, e: f64, n: usize) -> PyResult<PyReport> {
    report(ineq::hardy_power_family(s, exp(e), n))
}

#[pyfunction]
fn hilbert(a: Vec<f64>, b: Vec<f64>, e: f64) -> PyResult<PyReport> {
    report(ineq::hilbert(&seq(a)?, &seq(b)?, exp(e)))
}

/// `(partial_sum, tail_bound, report)`.
#[pyfunction]
fn hilbert_kernel_bound(m: u64, e: f64, n: usize) -> PyResult<(f64, f64, PyReport)> {
    let kb = ineq::hilbert_kernel_bound(m, exp(e), n).map_err(err)?;
    Ok((kb.partial_sum, kb.tail_bound, PyReport(kb.report)))
}

/// `(approximation, truth, abs_error, next_term)` for the partial fractions of π/sin(πz).
#[pyfunction]
fn cosecant_partial_fraction(z: f64, n: usize) -> PyResult<(f64, f64, f64, f64)> {
    let c = ineq::cosecant_partial_fraction(z, n).map_err(err)?;
    Ok((c.approximation, c.truth, c.abs_error, c.next_term))
}

/// ‖f‖_e for samples `f(x_i)` under the measure `Σ w_i δ_{x_i}`.
#[pyfunction]
fn f_norm(nodes: Vec<f64>, weights: Vec<f64>, samples: Vec<f64>, e: f64) -> PyResult<f64> {
    fs::f_norm(&grid(samples)?, &measure(nodes, weights)?, exp(e)).map_err(err)
}

#[pyfunction]
fn holder_fn(nodes: Vec<f64>, weights: Vec<f64>, f: Vec<f64>, g: Vec<f64>, e: f64) -> PyResult<PyReport> {
    report(fs::holder_fn(&grid(f)?, &grid(g)?, &measure(nodes, weights)?, exp(e)))
}

#[pyfunction]
fn minkowski_fn(nodes: Vec<f64>, weights: Vec<f64>, f: Vec<f64>, g: Vec<f64>, e: f64) -> PyResult<PyReport> {
    report(fs::minkowski_fn(&grid(f)?, &grid(g)?, &measure(nodes, weights)?, exp(e)))
}

/// `(value, error_budget)` for Γ(z) by truncated Gauss–Legendre quadrature.
#[pyfunction]
fn gamma_quadrature(z: f64) -> PyResult<(f64, f64)> {
    let g = fs::gamma_quadrature(z).map_err(err)?;
    Ok((g.value, g.error_budget))
}

#[pyfunction]
fn gamma_log_convexity(x: f64, y: f64, t: f64) -> PyResult<PyReport> {
    report(fs::gamma_log_convexity(x, y, t))
}

/// `max |αᵀMβ|` over sign vectors.
#[pyfunction]
fn form_sup_norm(matrix: Vec<Vec<f64>>) -> PyResult<f64> {
    gt::form_sup_norm(&form(matrix)?).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (matrix, restarts = 8, max_iters = 2000, seed = 0))]
fn find_gt_factorization(py: Python<'_>, matrix: Vec<Vec<f64>>, restarts: usize, max_iters: usize, seed: u64) -> PyResult<PyCertificate> {
    let form = form(matrix)?;
    let opts = GtOptions { restarts, max_iters, seed, ..GtOptions::default() };
    py.detach(|| gt::find_gt_factorization_with(&form, &opts)).map(PyCertificate).map_err(err)
}

/// Runs the seeded suite from a TOML config string (empty = defaults).
/// Returns `(report_text, summary)`; the summary is a dict.
#[pyfunction]
#[pyo3(signature = (config_toml = "", seed = None, trials = None))]
fn run_suite<'py>(
    py: Python<'py>,
    config_toml: &str,
    seed: Option<u64>,
    trials: Option<usize>,
) -> PyResult<(String, Bound<'py, PyDict>)> {
    let mut cfg = SuiteConfig::from_toml(config_toml).map_err(err)?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(t) = trials {
        cfg.trials_per_check = t;
    }
    cfg.validate().map_err(err)?;
    let (buf, summary) = py.detach(|| {
        let mut buf = Vec::new();
        core_run_suite(&cfg, &mut buf).map(|s| (buf, s))
    }).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("lines", summary.lines)?;
    d.set_item("violations", summary.violations)?;
    d.set_item("elapsed_ms", summary.elapsed_ms)?;
    let checks = summary
        .checks
        .iter()
        .map(|c| {
            let cd = PyDict::new(py);
            cd.set_item("check", &c.check)?;
            cd.set_item("trials", c.trials)?;
            cd.set_item("violations", c.violations)?;
            cd.set_item("min_ratio", c.min_ratio)?;
            cd.set_item("max_ratio", c.max_ratio)?;
            cd.set_item("max_tail_error", c.max_tail_error)?;
            Ok(cd)
        })
        .collect::<PyResult<Vec<_>>>()?;
    d.set_item("checks", checks)?;
    Ok((String::from_utf8_lossy(&buf).into_owned(), d))
}

#[pymodule]
fn theta_norms(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ThetaNormsError", m.py().get_type::<ThetaNormsError>())?;
    m.add_class::<PyReport>()?;
    m.add_class::<PyTheta>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(py_conjugate, m)?)?;
    m.add_function(wrap_pyfunction!(lp_norm, m)?)?;
    m.add_function(wrap_pyfunction!(seq_norm, m)?)?;
    m.add_function(wrap_pyfunction!(dual_functional_norm, m)?)?;
    m.add_function(wrap_pyfunction!(embedding_strictness, m)?)?;
    m.add_function(wrap_pyfunction!(holder_seq, m)?)?;
    m.add_function(wrap_pyfunction!(minkowski_seq, m)?)?;
    m.add_function(wrap_pyfunction!(hardy, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_power_family, m)?)?;
    m.add_function(wrap_pyfunction!(hilbert, m)?)?;
    m.add_function(wrap_pyfunction!(hilbert_kernel_bound, m)?)?;
    m.add_function(wrap_pyfunction!(cosecant_partial_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(f_norm, m)?)?;
    m.add_function(wrap_pyfunction!(holder_fn, m)?)?;
    m.add_function(wrap_pyfunction!(minkowski_fn, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_log_convexity, m)?)?;
    m.add_function(wrap_pyfunction!(form_sup_norm, m)?)?;
    m.add_function(wrap_pyfunction!(find_gt_factorization, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inf_round_trips_through_float() {
        assert_eq!(exp(f64::INFINITY), ExponentValue::Inf);
        assert_eq!(exp_f64(exp(2.5)), 2.5);
    }

    #[test]
    fn module_functions_work_in_an_interpreter() {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "theta_norms").unwrap();
            theta_norms(&m).unwrap();
            let v: f64 = m.getattr("lp_norm").unwrap().call1((vec![3.0, 4.0], 2.0)).unwrap().extract().unwrap();
            assert_eq!(v, 5.0);
            let r = m.getattr("hardy").unwrap().call1((vec![1.0; 100], 2.0)).unwrap();
            assert!(r.getattr("holds").unwrap().extract::<bool>().unwrap());
            let e = m.getattr("conjugate_exponent").unwrap().call1((1.0,)).unwrap_err();
            assert!(e.is_instance_of::<ThetaNormsError>(py));
        });
    }
}
