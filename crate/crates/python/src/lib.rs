//! Python bindings: parameters, frame traces, limit constants, circle
//! geometry and the self-similar solution.

use llg_shrinker::constants::{self, LimitConstants as CoreConstants};
use llg_shrinker::frame::{self, DEFAULT_BUDGET};
use llg_shrinker::geometry::{self, CircleGeom};
use llg_shrinker::selfsimilar::{self, Bump, ShrinkerSolution};
use llg_shrinker::vec3::Vec3;
use llg_shrinker::{report, Error};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

#[pyclass(name = "Params", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyParams(llg_shrinker::Params);

#[pymethods]
impl PyParams {
    #[new]
    fn new(c: f64, alpha: f64) -> PyResult<Self> {
        llg_shrinker::Params::new(c, alpha).map(Self).map_err(to_py)
    }

    #[getter]
    fn c(&self) -> f64 {
        self.0.c
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta
    }

    fn curvature(&self, x: f64) -> f64 {
        self.0.curvature(x)
    }

    fn torsion(&self, x: f64) -> f64 {
        self.0.torsion(x)
    }

    fn __repr__(&self) -> String {
        format!("Params(c={}, alpha={})", self.0.c, self.0.alpha)
    }
}

/// Integrated frame on `[0, x_max]`.
#[pyclass(name = "Trace", frozen)]
struct PyTrace(frame::Trace);

#[pymethods]
impl PyTrace {
    #[getter]
    fn params(&self) -> PyParams {
        PyParams(self.0.params)
    }

    #[getter]
    fn x_max(&self) -> f64 {
        self.0.x_max
    }

    #[getter]
    fn steps(&self) -> u64 {
        self.0.stats.steps
    }

    #[getter]
    fn max_defect(&self) -> f64 {
        self.0.stats.max_defect
    }

    /// `(m, n, b, psi)` at `x`; negative `x` uses the parity map.
    fn frame_at(&self, x: f64) -> PyResult<(Vec3, Vec3, Vec3, f64)> {
        let s = if x < 0.0 {
            frame::reflect(&self.0.frame_at(-x).map_err(to_py)?)
        } else {
            self.0.frame_at(x).map_err(to_py)?
        };
        Ok((s.frame.m, s.frame.n, s.frame.b, s.psi))
    }

    /// Rows `x,m1,m2,m3,n1,n2,n3,b1,b2,b3,psi` at the given spacing.
    fn sample(&self, spacing: f64) -> PyResult<Vec<[f64; 11]>> {
        frame::sampled_rows(&self.0, spacing).map_err(to_py)
    }
}

#[pyclass(name = "LimitConstants", frozen)]
struct PyConstants(CoreConstants);

#[pymethods]
impl PyConstants {
    #[getter]
    fn b(&self) -> Vec3 {
        self.0.b
    }

    #[getter]
    fn w(&self) -> [Complex64; 3] {
        self.0.w
    }

    #[getter]
    fn rho(&self) -> Vec3 {
        self.0.rho
    }

    #[getter]
    fn phi(&self) -> Vec3 {
        self.0.phi
    }

    #[getter]
    fn err_est(&self) -> f64 {
        self.0.err_est
    }

    #[getter]
    fn x_used(&self) -> f64 {
        self.0.x_used
    }

    #[getter]
    fn degraded(&self) -> bool {
        self.0.degraded
    }

    /// Identity name to defect, and whether all pass.
    fn identities(&self) -> (Vec<(String, f64)>, bool) {
        let r = constants::identity_suite(&self.0);
        (
            r.checks.into_iter().map(|c| (c.name, c.defect)).collect(),
            r.pass,
        )
    }

    fn geometry(&self) -> PyResult<PyGeometry> {
        geometry::build_geometry(&self.0)
            .map(PyGeometry)
            .map_err(to_py)
    }

    fn to_json(&self) -> PyResult<String> {
        report::to_json_string(&self.0).map_err(to_py)
    }
}

/// Limit circles `C±` with normals `B⁺ = B` and `B⁻ = (−B₁, B₂, B₃)`.
#[pyclass(name = "CircleGeometry", frozen)]
struct PyGeometry(CircleGeom);

#[pymethods]
impl PyGeometry {
    #[getter]
    fn b_plus(&self) -> Vec3 {
        self.0.b_plus
    }

    #[getter]
    fn b_minus(&self) -> Vec3 {
        self.0.b_minus
    }

    #[getter]
    fn angle_normals(&self) -> f64 {
        self.0.angle_normals
    }

    #[getter]
    fn angle_circles(&self) -> f64 {
        self.0.angle_circles
    }

    /// Distance from `point` to the circle on the side selected by `positive`.
    fn dist_to_circle(&self, point: Vec3, positive: bool) -> PyResult<f64> {
        let normal = if positive {
            self.0.b_plus
        } else {
            self.0.b_minus
        };
        geometry::dist_to_circle(&point, &normal).map_err(to_py)
    }
}

/// `m(x, t) = m_c(x/√(T−t))` for `t < T`.
#[pyclass(name = "ShrinkerSolution", frozen)]
struct PySolution {
    sol: ShrinkerSolution,
    lc: CoreConstants,
}

#[pymethods]
impl PySolution {
    #[new]
    #[pyo3(signature = (c, alpha, t_blow=0.0, tol=1e-8, x_max=None))]
    fn new(c: f64, alpha: f64, t_blow: f64, tol: f64, x_max: Option<f64>) -> PyResult<Self> {
        let (trace, lc) = compute(c, alpha, tol, x_max, DEFAULT_BUDGET)?;
        Ok(Self {
            sol: ShrinkerSolution::new(trace, t_blow),
            lc,
        })
    }

    #[getter]
    fn t_blow(&self) -> f64 {
        self.sol.t_blow
    }

    fn eval(&self, x: f64, t: f64) -> PyResult<Vec3> {
        self.sol.eval(x, t).map_err(to_py)
    }

    fn grad_magnitude(&self, x: f64, t: f64) -> PyResult<f64> {
        self.sol.grad_magnitude(x, t).map_err(to_py)
    }

    /// `(t, value, tail_bound)` of `∫ m·φ` for a bump of the given support.
    #[pyo3(signature = (t_grid, center=0.0, radius=2.0))]
    fn weak_limit(
        &self,
        t_grid: Vec<f64>,
        center: f64,
        radius: f64,
    ) -> PyResult<Vec<(f64, f64, f64)>> {
        let bump = Bump {
            center,
            radius,
            ..selfsimilar::default_bump()
        };
        let rows = selfsimilar::weak_limit_scan(&self.sol, &self.lc, &bump, &t_grid, None)
            .map_err(to_py)?;
        Ok(rows
            .into_iter()
            .map(|r| (r.t, r.value, r.tail_bound))
            .collect())
    }
}

fn compute(
    c: f64,
    alpha: f64,
    tol: f64,
    x_max: Option<f64>,
    budget: f64,
) -> PyResult<(frame::Trace, CoreConstants)> {
    let p = llg_shrinker::Params::new(c, alpha).map_err(to_py)?;
    constants::compute_constants(&p, tol, x_max, budget).map_err(to_py)
}

/// Integrate the frame on `[0, x_max]` with per-step tolerance `tol`.
#[pyfunction]
#[pyo3(signature = (c, alpha, x_max, tol=1e-10))]
fn integrate(c: f64, alpha: f64, x_max: f64, tol: f64) -> PyResult<PyTrace> {
    let p = llg_shrinker::Params::new(c, alpha).map_err(to_py)?;
    frame::integrate(&p, x_max, tol).map(PyTrace).map_err(to_py)
}

/// Trace and limit constants to accuracy `tol`.
#[pyfunction]
#[pyo3(signature = (c, alpha, tol=1e-8, x_max=None, budget=DEFAULT_BUDGET))]
fn compute_constants(
    c: f64,
    alpha: f64,
    tol: f64,
    x_max: Option<f64>,
    budget: f64,
) -> PyResult<(PyTrace, PyConstants)> {
    let (trace, lc) = compute(c, alpha, tol, x_max, budget)?;
    Ok((PyTrace(trace), PyConstants(lc)))
}

/// Closed-form profile `m` at `α = 1`.
#[pyfunction]
fn explicit_alpha1(c: f64, x: f64) -> PyResult<Vec3> {
    frame::explicit_alpha1(c, x).map(|f| f.m).map_err(to_py)
}

/// `Φ_α(x) = ∫₀ˣ e^{αs²/4} ds`.
#[pyfunction]
fn phi(alpha: f64, x: f64) -> PyResult<f64> {
    llg_shrinker::params::phi(alpha, x).map_err(to_py)
}

#[pymodule]
fn llg_shrinker_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyConstants>()?;
    m.add_class::<PyGeometry>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(compute_constants, m)?)?;
    m.add_function(wrap_pyfunction!(explicit_alpha1, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    Ok(())
}
