//! Python bindings. Rationals cross as `fractions.Fraction`, complex numbers
//! as `complex`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::Ratio;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use hclass_core::config::{Overrides, RunConfig as CoreRunConfig};
use hclass_core::verify::{self, Param, ZetaPath};
use hclass_core::{arith, cohen, kloosterman, qform, Error, Rational};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn frac(r: &Rational) -> Ratio<BigInt> {
    r.as_big_rational().clone()
}

/// An exact number coefficient * pi**pi_exponent.
#[pyclass(frozen, skip_from_py_object, module = "hclass")]
#[derive(Clone)]
struct PiRational {
    inner: hclass_core::PiRational,
}

#[pymethods]
impl PiRational {
    #[getter]
    fn coefficient(&self) -> Ratio<BigInt> {
        frac(&self.inner.coefficient)
    }

    #[getter]
    fn pi_exponent(&self) -> i32 {
        self.inner.pi_exponent
    }

    fn __float__(&self) -> f64 {
        self.inner.to_f64()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("PiRational({})", self.inner)
    }

    fn __eq__(&self, other: &PiRational) -> bool {
        self.inner == other.inner
    }
}

/// A truncated q-expansion with exact rational coefficients.
#[pyclass(frozen, module = "hclass")]
struct QSeries {
    inner: cohen::QSeries,
}

#[pymethods]
impl QSeries {
    #[getter]
    fn n_max(&self) -> u64 {
        self.inner.n_max
    }

    fn coefficient(&self, n: u64) -> Ratio<BigInt> {
        frac(&self.inner.coefficient(n))
    }

    /// Non-zero coefficients keyed by index.
    fn coefficients(&self) -> BTreeMap<u64, Ratio<BigInt>> {
        self.inner
            .coefficients
            .iter()
            .map(|(n, r)| (*n, frac(r)))
            .collect()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<QSeries> {
        Ok(QSeries {
            inner: cohen::QSeries::from_csv(text).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.n_max as usize + 1
    }

    fn __getitem__(&self, n: u64) -> Ratio<BigInt> {
        self.coefficient(n)
    }

    fn __repr__(&self) -> String {
        format!(
            "QSeries(n_max={}, nonzero={})",
            self.inner.n_max,
            self.inner.coefficients.len()
        )
    }
}

/// The binary quadratic form a x^2 + b xy + c y^2.
#[pyclass(frozen, skip_from_py_object, module = "hclass")]
#[derive(Clone)]
struct QuadForm {
    inner: qform::QuadForm,
}

#[pymethods]
impl QuadForm {
    #[new]
    fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm {
            inner: qform::QuadForm::new(a, b, c),
        }
    }

    #[getter]
    fn a(&self) -> i64 {
        self.inner.a
    }

    #[getter]
    fn b(&self) -> i64 {
        self.inner.b
    }

    #[getter]
    fn c(&self) -> i64 {
        self.inner.c
    }

    fn discriminant(&self) -> i64 {
        self.inner.discriminant()
    }

    fn heegner_point(&self) -> PyResult<Complex64> {
        self.inner.heegner_point().map_err(err)
    }

    fn __eq__(&self, other: &QuadForm) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "QuadForm({}, {}, {})",
            self.inner.a, self.inner.b, self.inner.c
        )
    }
}

/// One Gamma_0(N)-class of positive definite forms.
#[pyclass(frozen, get_all, module = "hclass")]
struct HeegnerClass {
    representative: QuadForm,
    stabilizer_order: u32,
    point: Complex64,
}

#[pymethods]
impl HeegnerClass {
    fn __repr__(&self) -> String {
        format!(
            "HeegnerClass({}, stabilizer_order={})",
            self.representative.__repr__(),
            self.stabilizer_order
        )
    }
}

/// Truncation bounds, tolerance override, seed and quick mode for a run.
/// Starts from the file named by HCLASS_CONFIG when that is set.
#[pyclass(skip_from_py_object, module = "hclass")]
#[derive(Clone)]
struct RunConfig {
    inner: CoreRunConfig,
}

#[pymethods]
impl RunConfig {
    #[new]
    #[pyo3(signature = (*, a_max=None, c_max=None, lattice_bound=None, tol=None, seed=None, quick=None))]
    fn new(
        a_max: Option<u64>,
        c_max: Option<u64>,
        lattice_bound: Option<u64>,
        tol: Option<f64>,
        seed: Option<u64>,
        quick: Option<bool>,
    ) -> PyResult<Self> {
        let mut inner = CoreRunConfig::from_env().map_err(err)?;
        inner.apply(&Overrides {
            a_max,
            c_max,
            lattice_bound,
            tol,
            seed,
            quick,
            timing: None,
        });
        inner.validate().map_err(err)?;
        Ok(RunConfig { inner })
    }

    #[getter]
    fn a_max(&self) -> u64 {
        self.inner.truncation.a_max
    }

    #[getter]
    fn c_max(&self) -> u64 {
        self.inner.truncation.c_max
    }

    #[getter]
    fn lattice_bound(&self) -> u64 {
        self.inner.truncation.lattice_bound
    }

    #[getter]
    fn tol(&self) -> Option<f64> {
        self.inner.tol
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn quick(&self) -> bool {
        self.inner.quick
    }

    fn __repr__(&self) -> String {
        let t = &self.inner.truncation;
        format!(
            "RunConfig(a_max={}, c_max={}, lattice_bound={}, tol={:?}, seed={}, quick={})",
            t.a_max, t.c_max, t.lattice_bound, self.inner.tol, self.inner.seed, self.inner.quick
        )
    }
}

/// The outcome of one identity check.
#[pyclass(frozen, module = "hclass")]
struct VerificationReport {
    inner: verify::VerificationReport,
}

#[pymethods]
impl VerificationReport {
    #[getter]
    fn identity_id(&self) -> &str {
        &self.inner.identity_id
    }

    #[getter]
    fn parameters(&self, py: Python<'_>) -> PyResult<BTreeMap<String, Py<PyAny>>> {
        self.inner
            .parameters
            .iter()
            .map(|(k, v)| {
                let obj = match v {
                    Param::Int(i) => i.into_pyobject(py)?.into_any().unbind(),
                    Param::Text(s) => s.into_pyobject(py)?.into_any().unbind(),
                };
                Ok((k.clone(), obj))
            })
            .collect()
    }

    #[getter]
    fn lhs(&self) -> &str {
        &self.inner.lhs
    }

    #[getter]
    fn rhs(&self) -> &str {
        &self.inner.rhs
    }

    #[getter]
    fn abs_error(&self) -> f64 {
        self.inner.abs_error
    }

    #[getter]
    fn rel_error(&self) -> f64 {
        self.inner.rel_error
    }

    #[getter]
    fn tolerance(&self) -> f64 {
        self.inner.tolerance
    }

    #[getter]
    fn tail_bounds(&self) -> BTreeMap<String, f64> {
        self.inner.tail_bounds.clone()
    }

    #[getter]
    fn passed(&self) -> bool {
        self.inner.pass
    }

    #[getter]
    fn note(&self) -> Option<&str> {
        self.inner.note.as_deref()
    }

    /// The verdict recomputed from the recorded sides and tolerance.
    fn recheck(&self) -> PyResult<bool> {
        self.inner.recheck().map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| err(e.into()))
    }

    fn __repr__(&self) -> String {
        format!(
            "VerificationReport({} {:?}, pass={})",
            self.inner.identity_id, self.inner.parameters, self.inner.pass
        )
    }
}

#[pyfunction]
fn kronecker_symbol(a: i64, n: i64) -> i64 {
    arith::kronecker_symbol(a, n)
}

#[pyfunction]
fn moebius(n: u64) -> i64 {
    arith::moebius(n)
}

/// (t, m) with (-1)^k n = t m^2 and t a fundamental discriminant, or None.
#[pyfunction]
fn fundamental_decomposition(k: u32, n: u64) -> Option<(i64, u64)> {
    arith::fundamental_decomposition(k, n).map(|d| (d.t, d.m))
}

#[pyfunction]
fn divisor_sigma(ell: u64, level: u64, s: i32, r: u64) -> PyResult<Ratio<BigInt>> {
    arith::divisor_sigma(ell, level, s, r)
        .map(|v| frac(&v))
        .map_err(err)
}

#[pyfunction]
fn hurwitz_class_number(k: u32, ell: u64, level: u64, n: u64) -> PyResult<Ratio<BigInt>> {
    cohen::hurwitz_class_number(k, ell, level, n)
        .map(|v| frac(&v))
        .map_err(err)
}

#[pyfunction]
fn cohen_eisenstein_series(k: u32, ell: u64, level: u64, n_max: u64) -> PyResult<QSeries> {
    Ok(QSeries {
        inner: cohen::cohen_eisenstein_series(k, ell, level, n_max).map_err(err)?,
    })
}

#[pyfunction]
fn shadow_preimage_series(k: u32, level: u64, n_max: u64) -> PyResult<QSeries> {
    Ok(QSeries {
        inner: cohen::shadow_preimage_series(k, level, n_max).map_err(err)?,
    })
}

#[pyfunction]
fn holomorphic_eisenstein_coefficients(k: u32, level: u64, n_max: u64) -> PyResult<QSeries> {
    Ok(QSeries {
        inner: cohen::holomorphic_eisenstein_coefficients(k, level, n_max).map_err(err)?,
    })
}

/// The half-integral weight Kloosterman sum with weight two_kappa / 2.
#[pyfunction]
fn half_integral_kloosterman(two_kappa: i64, m: i64, n: i64, c: u64) -> PyResult<Complex64> {
    kloosterman::half_integral_kloosterman(two_kappa, m, n, c).map_err(err)
}

#[pyfunction]
fn zeta_k_level(level: u64, n: i64, k: u32) -> PyResult<PiRational> {
    Ok(PiRational {
        inner: kloosterman::zeta_k_level(level, n, k).map_err(err)?,
    })
}

/// The plus space zeta value at s = k + 1/2 from its closed form.
#[pyfunction]
fn plus_zeta_closed(k: u32, level: u64, n: i64) -> PyResult<Complex64> {
    kloosterman::plus_zeta_closed(k, level, n).map_err(err)
}

/// The same value summed over moduli up to c_max, with a tail bound.
#[pyfunction]
fn plus_zeta_direct(k: u32, level: u64, n: i64, c_max: u64) -> PyResult<(Complex64, f64)> {
    let t = kloosterman::plus_zeta_direct(kloosterman::paired_two_kappa(k), level, n, k, c_max)
        .map_err(err)?;
    Ok((t.value, t.tail_bound))
}

#[pyfunction]
fn heegner_classes(level: u64, d: i64) -> PyResult<Vec<HeegnerClass>> {
    Ok(qform::enumerate_heegner_classes(level, d, None)
        .map_err(err)?
        .into_iter()
        .map(|c| HeegnerClass {
            representative: QuadForm {
                inner: c.representative,
            },
            stabilizer_order: c.stabilizer_order,
            point: c.point,
        })
        .collect())
}

#[pyfunction]
fn sqrt_count(a: u64, d: i64) -> u64 {
    qform::sqrt_count(a, d)
}

/// Real quadratic trace at discriminant d > 0; returns (value, tail estimate).
#[pyfunction]
#[pyo3(signature = (k, level, d, config=None))]
fn real_trace(k: u32, level: u64, d: i64, config: Option<&RunConfig>) -> PyResult<(f64, f64)> {
    let cfg = config.map(|c| c.inner.clone()).unwrap_or_default();
    let t = qform::real_trace_unfolded(k, level, d, &cfg.effective_truncation()).map_err(err)?;
    Ok((t.value, t.tail_estimate))
}

/// Heegner trace at discriminant d < 0; returns (value, tail estimate).
#[pyfunction]
#[pyo3(signature = (k, level, d, include_negative=true, config=None))]
fn imag_trace(
    k: u32,
    level: u64,
    d: i64,
    include_negative: bool,
    config: Option<&RunConfig>,
) -> PyResult<(f64, f64)> {
    let cfg = config.map(|c| c.inner.clone()).unwrap_or_default();
    let t = qform::imag_trace(k, level, d, include_negative, &cfg.effective_truncation())
        .map_err(err)?;
    Ok((t.value, t.tail_estimate))
}

fn reports(
    r: hclass_core::Result<Vec<verify::VerificationReport>>,
) -> PyResult<Vec<VerificationReport>> {
    Ok(r.map_err(err)?
        .into_iter()
        .map(|inner| VerificationReport { inner })
        .collect())
}

fn config_or_default(config: Option<&RunConfig>) -> CoreRunConfig {
    config.map(|c| c.inner.clone()).unwrap_or_default()
}

#[pyfunction]
#[pyo3(signature = (k, level, n_max, direct=false, config=None))]
fn verify_shadow_preimage(
    k: u32,
    level: u64,
    n_max: u64,
    direct: bool,
    config: Option<&RunConfig>,
) -> PyResult<Vec<VerificationReport>> {
    let path = if direct {
        ZetaPath::Direct
    } else {
        ZetaPath::Closed
    };
    reports(verify::suite_shadow_preimage(
        k,
        level,
        n_max,
        path,
        &config_or_default(config),
    ))
}

#[pyfunction]
#[pyo3(signature = (k, p, n_max, config=None))]
fn verify_shintani_traces(
    k: u32,
    p: u64,
    n_max: u64,
    config: Option<&RunConfig>,
) -> PyResult<Vec<VerificationReport>> {
    reports(verify::suite_shintani_traces(
        k,
        p,
        n_max,
        &config_or_default(config),
    ))
}

#[pyfunction]
#[pyo3(signature = (k, p, discs, config=None))]
fn verify_heegner_traces(
    k: u32,
    p: u64,
    discs: Vec<i64>,
    config: Option<&RunConfig>,
) -> PyResult<Vec<VerificationReport>> {
    reports(verify::suite_heegner_traces(
        k,
        p,
        &discs,
        &config_or_default(config),
    ))
}

#[pyfunction]
#[pyo3(signature = (k, p, config=None))]
fn verify_millson_constant(
    k: u32,
    p: u64,
    config: Option<&RunConfig>,
) -> PyResult<VerificationReport> {
    let inner = verify::suite_millson_constant(k, p, &config_or_default(config)).map_err(err)?;
    Ok(VerificationReport { inner })
}

#[pyfunction]
#[pyo3(signature = (config=None))]
fn verify_primitives(config: Option<&RunConfig>) -> PyResult<Vec<VerificationReport>> {
    reports(verify::suite_primitives(&config_or_default(config)))
}

#[pymodule]
fn hclass(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PiRational>()?;
    m.add_class::<QSeries>()?;
    m.add_class::<QuadForm>()?;
    m.add_class::<HeegnerClass>()?;
    m.add_class::<RunConfig>()?;
    m.add_class::<VerificationReport>()?;
    m.add_function(wrap_pyfunction!(kronecker_symbol, m)?)?;
    m.add_function(wrap_pyfunction!(moebius, m)?)?;
    m.add_function(wrap_pyfunction!(fundamental_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(divisor_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(hurwitz_class_number, m)?)?;
    m.add_function(wrap_pyfunction!(cohen_eisenstein_series, m)?)?;
    m.add_function(wrap_pyfunction!(shadow_preimage_series, m)?)?;
    m.add_function(wrap_pyfunction!(holomorphic_eisenstein_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(half_integral_kloosterman, m)?)?;
    m.add_function(wrap_pyfunction!(zeta_k_level, m)?)?;
    m.add_function(wrap_pyfunction!(plus_zeta_closed, m)?)?;
    m.add_function(wrap_pyfunction!(plus_zeta_direct, m)?)?;
    m.add_function(wrap_pyfunction!(heegner_classes, m)?)?;
    m.add_function(wrap_pyfunction!(sqrt_count, m)?)?;
    m.add_function(wrap_pyfunction!(real_trace, m)?)?;
    m.add_function(wrap_pyfunction!(imag_trace, m)?)?;
    m.add_function(wrap_pyfunction!(verify_shadow_preimage, m)?)?;
    m.add_function(wrap_pyfunction!(verify_shintani_traces, m)?)?;
    m.add_function(wrap_pyfunction!(verify_heegner_traces, m)?)?;
    m.add_function(wrap_pyfunction!(verify_millson_constant, m)?)?;
    m.add_function(wrap_pyfunction!(verify_primitives, m)?)?;
    Ok(())
}
