//! Python bindings: domains, orthonormal bases, Faber polynomials, maps and
//! the diagnostics report. High-precision values cross the boundary either
//! as Python `complex` (rounded to double) or as decimal strings.

use bergman_core::acceptance;
use bergman_core::bergman::{hessenberg, orthonormalize, OrthonormalBasis};
use bergman_core::conformal::{capacity_from_ratio, interior_map_bkm, invert_exterior_map, phi_from_ratio};
use bergman_core::diagnostics::{corner_integral, distortion_check, exterior_map_domain, report_from, ReportOptions};
use bergman_core::faber::{faber_family, FaberFamily};
use bergman_core::geometry::{catalog_str, DomainConfig, DomainSpec, CATALOG};
use bergman_core::moments::{gram_matrix, MomentMatrix};
use bergman_core::mp::to_decimal;
use bergman_core::{Complex, Precision};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

pyo3::create_exception!(
    bergman,
    NumericalError,
    PyRuntimeError,
    "A computation failed to converge or lost precision."
);

fn py_err(e: impl Into<bergman_core::Error>) -> PyErr {
    use bergman_core::Error as E;
    match e.into() {
        e @ (E::Parse(_) | E::Geometry(_)) => PyValueError::new_err(e.to_string()),
        e => NumericalError::new_err(e.to_string()),
    }
}

fn to_py(z: &Complex) -> Complex64 {
    let (re, im) = z.to_f64();
    Complex64::new(re, im)
}

fn from_py(z: Complex64, prec: Precision) -> Complex {
    Complex::from_f64(prec.bits(), z.re, z.im)
}

/// A planar domain at a fixed working precision.
#[pyclass(module = "bergman")]
pub struct Domain {
    spec: DomainSpec,
}

#[pymethods]
impl Domain {
    /// Catalog domain; `params` are decimal strings or numbers.
    #[new]
    #[pyo3(signature = (name, params = Vec::new(), digits = 60))]
    fn new(name: &str, params: Vec<String>, digits: u32) -> PyResult<Self> {
        let spec = catalog_str(name, &params, Precision::digits(digits)).map_err(py_err)?;
        Ok(Domain { spec })
    }

    /// Domain from the TOML form used in run configs (`kind = ...`).
    #[staticmethod]
    #[pyo3(signature = (text, digits = 60))]
    fn from_toml(text: &str, digits: u32) -> PyResult<Self> {
        let cfg = DomainConfig::from_toml(text).map_err(py_err)?;
        Ok(Domain {
            spec: cfg.build(Precision::digits(digits)).map_err(py_err)?,
        })
    }

    fn to_toml(&self) -> String {
        DomainConfig::from_spec(&self.spec).to_toml()
    }

    #[getter]
    fn name(&self) -> String {
        self.spec.name.clone()
    }

    #[getter]
    fn digits(&self) -> u32 {
        self.spec.prec.decimal_digits()
    }

    #[getter]
    fn is_polygon(&self) -> bool {
        self.spec.is_polygon()
    }

    /// Whether an exterior map is available (directly or by companion).
    #[getter]
    fn has_map(&self) -> bool {
        exterior_map_domain(&self.spec).is_some()
    }

    /// Known capacity as a decimal string.
    #[getter]
    fn capacity(&self) -> Option<String> {
        self.spec.known_capacity.as_ref().map(to_decimal)
    }

    fn contains(&self, z: Complex64) -> bool {
        self.spec.contains(&from_py(z, self.spec.prec))
    }

    /// Orthonormal polynomials `p_0..p_n`.
    fn basis(&self, py: Python<'_>, n: usize) -> PyResult<Basis> {
        let spec = self.spec.clone();
        py.detach(move || {
            let m = gram_matrix(&spec, n, None).map_err(py_err)?;
            let basis = orthonormalize(&m).map_err(py_err)?;
            Ok(Basis {
                spec,
                moments: m,
                basis,
            })
        })
    }

    /// Faber polynomials `F_0..F_{n+1}` and `G_0..G_n`.
    fn faber(&self, n: usize) -> PyResult<Faber> {
        let map =
            exterior_map_domain(&self.spec).ok_or_else(|| NumericalError::new_err("domain has no exterior map"))?;
        Ok(Faber {
            fam: faber_family(&map, n).map_err(py_err)?,
        })
    }

    /// `(Phi(z), Phi'(z))` for `z` outside the domain.
    fn exterior_map(&self, z: Complex64) -> PyResult<(Complex64, Complex64)> {
        let map =
            exterior_map_domain(&self.spec).ok_or_else(|| NumericalError::new_err("domain has no exterior map"))?;
        let v = invert_exterior_map(&map, &from_py(z, self.spec.prec)).map_err(py_err)?;
        Ok((to_py(&v.w), to_py(&v.dphi)))
    }

    /// Full diagnostics report as JSON.
    fn report(&self, py: Python<'_>, n_max: usize) -> PyResult<String> {
        let spec = self.spec.clone();
        py.detach(move || {
            let m = gram_matrix(&spec, n_max + 1, None).map_err(py_err)?;
            let b = orthonormalize(&m).map_err(py_err)?;
            Ok(report_from(&spec, &ReportOptions::new(n_max), &m, &b)
                .map_err(py_err)?
                .to_json())
        })
    }

    /// `(nodes, worst_ratio, pass)` of the distortion check on a `g x g` grid.
    #[pyo3(signature = (g = 20))]
    fn distortion(&self, g: usize) -> PyResult<(usize, f64, bool)> {
        let r = distortion_check(&self.spec, g).map_err(py_err)?;
        Ok((r.nodes, r.worst_ratio, r.pass))
    }

    fn __repr__(&self) -> String {
        format!(
            "Domain({:?}, digits={})",
            self.spec.name,
            self.spec.prec.decimal_digits()
        )
    }
}

#[pyclass(module = "bergman")]
pub struct Basis {
    spec: DomainSpec,
    moments: MomentMatrix,
    basis: OrthonormalBasis,
}

impl Basis {
    fn check(&self, n: usize) -> PyResult<()> {
        if n > self.basis.degree {
            return Err(PyValueError::new_err(format!(
                "degree {n} exceeds {}",
                self.basis.degree
            )));
        }
        Ok(())
    }
}

#[pymethods]
impl Basis {
    #[getter]
    fn degree(&self) -> usize {
        self.basis.degree
    }

    #[getter]
    fn gram_residual(&self) -> f64 {
        self.basis.gram_residual
    }

    /// Leading coefficients as decimal strings.
    fn lambdas(&self) -> Vec<String> {
        self.basis.lambdas.iter().map(to_decimal).collect()
    }

    /// Coefficients of `p_n`, constant term first.
    fn coefficients(&self, n: usize) -> PyResult<Vec<Complex64>> {
        self.check(n)?;
        Ok(self.basis.row(n).iter().map(to_py).collect())
    }

    fn evaluate(&self, n: usize, z: Complex64) -> PyResult<Complex64> {
        let v = self.basis.evaluate(n, &from_py(z, self.basis.prec)).map_err(py_err)?;
        Ok(to_py(&v))
    }

    fn zeros(&self, n: usize) -> PyResult<Vec<Complex64>> {
        Ok(self.basis.zeros(n).map_err(py_err)?.iter().map(to_py).collect())
    }

    /// `K_n(z, zeta) = sum_{k<=n} p_k(z) conj(p_k(zeta))`.
    fn kernel(&self, z: Complex64, zeta: Complex64, n: usize) -> PyResult<Complex64> {
        let p = self.basis.prec;
        let v = self
            .basis
            .kernel(&from_py(z, p), &from_py(zeta, p), n)
            .map_err(py_err)?;
        Ok(to_py(&v))
    }

    /// `(gamma_hat_n, cap_hat_n)` as decimal strings.
    fn capacity(&self, n: usize) -> PyResult<(String, String)> {
        let e = capacity_from_ratio(&self.basis, n, None).map_err(py_err)?;
        Ok((to_decimal(&e.gamma_hat), to_decimal(&e.cap_hat)))
    }

    /// Exterior map estimate from the ratio `p_{n+1} / p_n`.
    fn phi(&self, n: usize, z: Complex64) -> PyResult<Complex64> {
        let v = phi_from_ratio(&self.basis, n, &from_py(z, self.basis.prec)).map_err(py_err)?;
        Ok(to_py(&v))
    }

    /// Interior map by the kernel method, normalized at the domain's
    /// reference interior point.
    #[pyo3(signature = (z, n = None))]
    fn interior_map(&self, z: Complex64, n: Option<usize>) -> PyResult<Complex64> {
        let n = n.unwrap_or(self.basis.degree);
        let z0 = self.spec.interior_point();
        let v = interior_map_bkm(&self.spec, &self.basis, n, &z0, &from_py(z, self.basis.prec)).map_err(py_err)?;
        Ok(to_py(&v))
    }

    /// Recurrence matrix `a[k][n] = <z p_n, p_k>`.
    fn hessenberg(&self) -> Vec<Vec<Complex64>> {
        let h = hessenberg(&self.moments, &self.basis);
        (0..h.size())
            .map(|k| (0..h.size()).map(|n| to_py(h.get(k, n))).collect())
            .collect()
    }

    fn to_csv(&self) -> String {
        self.basis.to_csv()
    }
}

#[pyclass(module = "bergman")]
pub struct Faber {
    fam: FaberFamily,
}

#[pymethods]
impl Faber {
    #[getter]
    fn degree(&self) -> usize {
        self.fam.degree
    }

    /// Coefficients of `F_n`, constant term first.
    fn f(&self, n: usize) -> PyResult<Vec<Complex64>> {
        self.fam
            .f
            .get(n)
            .map(|r| r.iter().map(to_py).collect())
            .ok_or_else(|| PyValueError::new_err(format!("F_{n} not computed")))
    }

    /// Coefficients of `G_n`.
    fn g(&self, n: usize) -> PyResult<Vec<Complex64>> {
        self.fam
            .g
            .get(n)
            .map(|r| r.iter().map(to_py).collect())
            .ok_or_else(|| PyValueError::new_err(format!("G_{n} not computed")))
    }

    fn to_csv(&self) -> String {
        self.fam.to_csv()
    }
}

/// `k^2 I(omega, k)` for the corner integral.
#[pyfunction]
#[pyo3(name = "corner_integral", signature = (omega, k, digits = 30))]
fn corner_integral_py(omega: f64, k: u32, digits: u32) -> PyResult<f64> {
    Ok(corner_integral(omega, k, Precision::digits(digits))
        .map_err(py_err)?
        .to_f64())
}

/// Run acceptance criteria; returns `(id, name, passed, detail)` tuples.
#[pyfunction]
#[pyo3(signature = (ids = None))]
fn verify(py: Python<'_>, ids: Option<Vec<u8>>) -> PyResult<Vec<(u8, String, bool, String)>> {
    let ids = ids.unwrap_or_else(|| acceptance::CRITERIA.iter().map(|c| c.0).collect());
    if let Some(bad) = ids
        .iter()
        .find(|&&i| !(1..=acceptance::CRITERIA.len() as u8).contains(&i))
    {
        return Err(PyValueError::new_err(format!("no criterion {bad}")));
    }
    Ok(py.detach(|| {
        ids.iter()
            .map(|&i| {
                let r = acceptance::run(i);
                (r.id, r.name.to_string(), r.pass, r.detail)
            })
            .collect()
    }))
}

/// `(name, params, notes)` for each catalog domain.
#[pyfunction]
fn catalog() -> Vec<(&'static str, &'static str, &'static str)> {
    CATALOG.iter().map(|e| (e.name, e.params, e.notes)).collect()
}

/// Default working precision (digits) for degree `n`.
#[pyfunction]
fn auto_precision(n: usize) -> u32 {
    Precision::auto_for_degree(n).decimal_digits()
}

#[pymodule]
fn bergman(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Domain>()?;
    m.add_class::<Basis>()?;
    m.add_class::<Faber>()?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_function(wrap_pyfunction!(corner_integral_py, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(auto_precision, m)?)?;
    Ok(())
}
