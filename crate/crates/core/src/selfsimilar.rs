//! The space-time shrinker `m(x, t) = m(x/√(T−t))` built from a profile trace.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::LimitConstants;
use crate::error::{Error, Result};
use crate::frame::{reflect, AugmentedState, Trace};
use crate::geometry::{dist_envelope, dist_to_circle, CircleGeom};
use crate::params::{gauss_tail, Params};
use crate::quadrature::{integrate_scalar, QuadOptions};
use crate::stepper::{self, DriveLimits};
use crate::vec3::{dot, norm, Vec3};

#[derive(Debug, Clone)]
pub struct ShrinkerSolution {
    pub params: Params,
    /// Blow-up time `T`.
    pub t_blow: f64,
    pub trace: Trace,
}

impl ShrinkerSolution {
    pub fn new(trace: Trace, t_blow: f64) -> Self {
        Self {
            params: trace.params,
            t_blow,
            trace,
        }
    }

    /// `ξ = x/√(T−t)`, checked against the trace range.
    pub fn similarity(&self, x: f64, t: f64) -> Result<f64> {
        if !(t < self.t_blow) {
            return Err(Error::InvalidParameter(format!(
                "t = {t} is not before the blow-up time {}",
                self.t_blow
            )));
        }
        let xi = x / (self.t_blow - t).sqrt();
        if !(xi.abs() <= self.trace.x_max) {
            return Err(Error::SimilarityRange {
                xi,
                x_max: self.trace.x_max,
            });
        }
        Ok(xi)
    }

    /// Latest time at which `x` is still inside the trace range.
    pub fn max_usable_t(&self, x: f64) -> f64 {
        self.t_blow - (x / self.trace.x_max).powi(2)
    }

    /// Profile state at `ξ`, using the parity map for `ξ < 0`.
    pub fn profile_state(&self, xi: f64) -> Result<AugmentedState> {
        let s = self.trace.frame_at(xi.abs())?;
        Ok(if xi < 0.0 { reflect(&s) } else { s })
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<Vec3> {
        let xi = self.similarity(x, t)?;
        Ok(self.profile_state(xi)?.frame.m)
    }

    /// `|∂ₓm(x, t)| = (c/√(T−t)) e^{αx²/(4(T−t))}`.
    pub fn grad_magnitude(&self, x: f64, t: f64) -> Result<f64> {
        if !(t < self.t_blow) {
            return Err(Error::InvalidParameter(format!(
                "t = {t} is not before the blow-up time {}",
                self.t_blow
            )));
        }
        let s = self.t_blow - t;
        Ok(self.params.c / s.sqrt() * (0.25 * self.params.alpha * x * x / s).exp())
    }

    /// Central difference of [`eval`](Self::eval) with a step of a thousandth
    /// of the shorter of the angular wavelength and the similarity scale
    /// `√(T−t)` (the torsion varies on the latter even when `c` is small).
    pub fn grad_magnitude_fd(&self, x: f64, t: f64) -> Result<f64> {
        let grad = self.grad_magnitude(x, t)?;
        let s = self.t_blow - t;
        let h = 1e-3 * (1.0 / grad).min(s.sqrt());
        let xi = [(x - h) / s.sqrt(), (x + h) / s.sqrt()];
        if xi.iter().any(|v| v.abs() > self.trace.x_max) {
            return Err(Error::SimilarityRange {
                xi: if xi[0].abs() > xi[1].abs() {
                    xi[0]
                } else {
                    xi[1]
                },
                x_max: self.trace.x_max,
            });
        }
        let states = if xi[0] >= 0.0 {
            self.trace.frames_at(&xi)?
        } else if xi[1] <= 0.0 {
            self.trace
                .frames_at(&[-xi[0], -xi[1]])?
                .iter()
                .map(reflect)
                .collect()
        } else {
            vec![self.profile_state(xi[0])?, self.profile_state(xi[1])?]
        };
        let (a, b) = (states[0].frame.m, states[1].frame.m);
        let d = [
            (b[0] - a[0]) / (2.0 * h),
            (b[1] - a[1]) / (2.0 * h),
            (b[2] - a[2]) / (2.0 * h),
        ];
        Ok(norm(&d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupRow {
    /// `T − t`.
    pub s: f64,
    pub grad: f64,
    /// Finite-difference value where the stencil lies inside the trace.
    pub grad_fd: Option<f64>,
}

pub fn blowup_table(sol: &ShrinkerSolution, x: f64, s_grid: &[f64]) -> Result<Vec<BlowupRow>> {
    s_grid
        .iter()
        .map(|&s| {
            let t = sol.t_blow - s;
            Ok(BlowupRow {
                s,
                grad: sol.grad_magnitude(x, t)?,
                grad_fd: sol.grad_magnitude_fd(x, t).ok(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub t: f64,
    pub xi: f64,
    pub m: Vec3,
    /// Distance to `C⁺` (x > 0) or `C⁻` (x < 0).
    pub dist_circle: f64,
    pub dist_envelope: f64,
    /// `max_j |m_j − ρ^±_j cos(cΦ_α(|ξ|) − φ_j)|`.
    pub pointwise_defect: f64,
    /// `10β/(cα²)|ξ| e^{−αξ²/4}`, defined for `|ξ| ≥ 1`.
    pub pointwise_envelope: Option<f64>,
}

/// Distance to the limit circle and the pointwise limit defect at fixed `x`
/// as `t ↑ T`.
pub fn circle_convergence_scan(
    sol: &ShrinkerSolution,
    lc: &LimitConstants,
    geom: &CircleGeom,
    x: f64,
    t_grid: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    if x == 0.0 {
        return Err(Error::InvalidParameter("x must be nonzero".into()));
    }
    let p = &sol.params;
    let sign = [1.0, x.signum(), x.signum()];
    let normal = if x > 0.0 { geom.b_plus } else { geom.b_minus };
    t_grid
        .iter()
        .map(|&t| {
            let xi = sol.similarity(x, t)?;
            let psi = sol.trace.frame_at(xi.abs())?.psi;
            let m = sol.profile_state(xi)?.frame.m;
            let mut defect = 0.0f64;
            for j in 0..3 {
                let limit = sign[j] * lc.rho[j] * (psi - lc.phi[j]).cos();
                defect = defect.max((m[j] - limit).abs());
            }
            let a = xi.abs();
            Ok(ConvergenceRow {
                t,
                xi,
                m,
                dist_circle: dist_to_circle(&m, &normal)?,
                dist_envelope: dist_envelope(p, xi),
                pointwise_defect: defect,
                pointwise_envelope: (a >= 1.0).then(|| {
                    10.0 * p.beta / (p.c * p.alpha * p.alpha) * a * (-0.25 * p.alpha * a * a).exp()
                }),
            })
        })
        .collect()
}

/// Compactly supported Lipschitz test function `ℝ → ℝ³`.
pub trait TestFunction: Sync {
    fn value(&self, x: f64) -> Vec3;
    /// Supremum of the Euclidean norm.
    fn sup_norm(&self) -> f64;
    fn lipschitz(&self) -> f64;
    fn support(&self) -> (f64, f64);
    /// `∫ |φ(x)| dx`.
    fn l1_norm(&self) -> f64;
    /// Points where the function is not smooth.
    fn kinks(&self) -> Vec<f64>;
}

/// `a (1 − ((x − x₀)/r)²)²` on `|x − x₀| < r`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub radius: f64,
    pub amplitude: Vec3,
}

impl TestFunction for Bump {
    fn value(&self, x: f64) -> Vec3 {
        let u = (x - self.center) / self.radius;
        if u.abs() >= 1.0 {
            return [0.0; 3];
        }
        let w = (1.0 - u * u).powi(2);
        self.amplitude.map(|a| a * w)
    }

    fn sup_norm(&self) -> f64 {
        norm(&self.amplitude)
    }

    fn lipschitz(&self) -> f64 {
        // max |d/du (1 − u²)²| = 8/(3√3), at u = 1/√3.
        norm(&self.amplitude) * 8.0 / (3.0 * 3f64.sqrt()) / self.radius
    }

    fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }

    fn l1_norm(&self) -> f64 {
        norm(&self.amplitude) * 16.0 / 15.0 * self.radius
    }

    fn kinks(&self) -> Vec<f64> {
        vec![self.center - self.radius, self.center + self.radius]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakLimitRow {
    pub t: f64,
    /// `∫ m(x, t)·φ(x) dx` over `|x| ≤ √(T−t) ξ_cut`.
    pub value: f64,
    /// Bound on the contribution from `|x| > √(T−t) ξ_cut`.
    pub tail_bound: f64,
    pub xi_cut: f64,
    pub rhs_evals: u64,
}

/// Frame system plus two accumulators `∫ m·φ(√s ξ)` and `∫ (Pm)·φ(−√s ξ)`,
/// `P = diag(1, −1, −1)` the parity map on `m`.
fn weak_rhs<'a, F: TestFunction>(
    p: &'a Params,
    f: &'a F,
    root_s: f64,
) -> impl Fn(f64, &[f64; 11]) -> [f64; 11] + 'a {
    move |x: f64, y: &[f64; 11]| {
        let k = p.curvature(x);
        let half_bx = 0.5 * p.beta * x;
        let mut d = [0.0; 11];
        for j in 0..3 {
            let (m, n, b) = (y[j], y[3 + j], y[6 + j]);
            d[j] = k * n;
            d[3 + j] = -k * m - half_bx * b;
            d[6 + j] = half_bx * n;
        }
        let fp = f.value(root_s * x);
        let fm = f.value(-root_s * x);
        d[9] = y[0] * fp[0] + y[1] * fp[1] + y[2] * fp[2];
        d[10] = y[0] * fm[0] - y[1] * fm[1] - y[2] * fm[2];
        d
    }
}

/// Analytic bound on `|∫_{|x| > √s ξ₀} m(x,t)·φ(x) dx|`.
///
/// Beyond `ξ₀` the profile is `Re(e^{−iψ}W)` up to `10β/(cα²)ξe^{−αξ²/4}`
/// per component; the oscillating part is integrated by parts once.
pub fn weak_tail_bound<F: TestFunction>(
    p: &Params,
    lc: &LimitConstants,
    f: &F,
    s: f64,
    xi0: f64,
) -> Result<f64> {
    let root_s = s.sqrt();
    let g = (-0.25 * p.alpha * xi0 * xi0).exp();
    let sum_rho: f64 = lc.rho.iter().sum();
    let osc = sum_rho / p.c
        * (2.0 * f.sup_norm() * g + f.lipschitz() * root_s * gauss_tail(0.25 * p.alpha, 0, xi0)?);
    let rem = 3f64.sqrt() * f.sup_norm() * 10.0 * p.beta / (p.c * p.alpha * p.alpha)
        * (2.0 / p.alpha)
        * g;
    Ok(2.0 * root_s * (osc + rem))
}

const WEAK_XI_CUT: f64 = 9.0;

/// `∫ m(x, t)·φ(x) dx` along `t_grid`.
///
/// The integral is taken in the similarity variable by re-integrating the
/// frame system with two extra accumulators (one per half-line), so the
/// oscillation is resolved by the same frequency-guarded stepper as the
/// trace. The part beyond `ξ_cut` is bounded analytically.
pub fn weak_limit_scan<F: TestFunction>(
    sol: &ShrinkerSolution,
    lc: &LimitConstants,
    f: &F,
    t_grid: &[f64],
    xi_cut: Option<f64>,
) -> Result<Vec<WeakLimitRow>> {
    let p = sol.params;
    let xi0 = xi_cut.unwrap_or(WEAK_XI_CUT).min(sol.trace.x_max);
    let (lo, hi) = f.support();
    let opts = &sol.trace.options;
    t_grid
        .iter()
        .map(|&t| {
            if !(t < sol.t_blow) {
                return Err(Error::InvalidParameter(format!(
                    "t = {t} is not before the blow-up time {}",
                    sol.t_blow
                )));
            }
            let s = sol.t_blow - t;
            let root_s = s.sqrt();
            let end = (hi.max(-lo) / root_s).min(xi0);
            let mut stops: Vec<f64> = f
                .kinks()
                .into_iter()
                .map(|k| k.abs() / root_s)
                .filter(|&v| v > 0.0 && v < end)
                .collect();
            stops.push(end);
            stops.sort_by(f64::total_cmp);

            let rhs = weak_rhs(&p, f, root_s);
            let limits = DriveLimits {
                tol: sol.trace.tol,
                budget: opts.budget,
            };
            let scale = root_s / (hi - lo);
            let guard = |x: f64| {
                (opts.guard / (1.0 + p.curvature(x) + 0.5 * p.beta * x.abs())).min(0.05 / scale)
            };
            let mut y = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
            let mut x = 0.0;
            let mut evals = 0;
            for &stop in &stops {
                if stop > x {
                    let (ny, st) =
                        stepper::drive(&rhs, x, y, stop, limits, guard, |_, _| Ok(false))?;
                    y = ny;
                    evals += st.rhs_evals;
                    x = stop;
                }
            }
            // The re-integrated frame must reproduce the trace.
            if x > 0.0 {
                let m = sol.trace.frame_at(x)?.frame.m;
                let drift = (0..3).map(|j| (m[j] - y[j]).abs()).fold(0.0, f64::max);
                if drift > 1e-6 {
                    return Err(Error::Resolution(format!(
                        "re-integrated profile drifts from the trace by {drift:.3e} at xi = {x}"
                    )));
                }
            }
            Ok(WeakLimitRow {
                t,
                value: root_s * (y[9] + y[10]),
                tail_bound: weak_tail_bound(&p, lc, f, s, xi0)?,
                xi_cut: xi0,
                rhs_evals: evals,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMoments {
    pub t: f64,
    pub alpha: f64,
    /// `∫_ℝ e^{−αx²/(4t)} dx` by quadrature.
    pub zeroth: f64,
    /// `2√(πt/α)`.
    pub zeroth_closed: f64,
    /// `∫_ℝ |x| e^{−αx²/(4t)} dx` by quadrature.
    pub first: f64,
    /// `4t/α`.
    pub first_closed: f64,
}

/// Gaussian moments used to show the remainder terms vanish weakly.
pub fn gaussian_moments(alpha: f64, t: f64) -> Result<GaussianMoments> {
    if !(alpha > 0.0 && t > 0.0) {
        return Err(Error::InvalidParameter(
            "alpha and t must be positive".into(),
        ));
    }
    let a = alpha / (4.0 * t);
    // e^{−aL²} < 1e-40 beyond L.
    let l = (92.0 / a).sqrt();
    let opts = QuadOptions {
        rel_tol: 1e-14,
        abs_tol: 0.0,
        max_intervals: 10_000,
    };
    let (z, _) = integrate_scalar(|x| (-a * x * x).exp(), 0.0, l, opts)?;
    let (f1, _) = integrate_scalar(|x| x * (-a * x * x).exp(), 0.0, l, opts)?;
    Ok(GaussianMoments {
        t,
        alpha,
        zeroth: 2.0 * z,
        zeroth_closed: 2.0 * (PI * t / alpha).sqrt(),
        first: 2.0 * f1,
        first_closed: 4.0 * t / alpha,
    })
}

/// `|∫ m·φ|` normalized by `‖φ‖₁`, for trend reporting.
pub fn normalized_weak_value<F: TestFunction>(row: &WeakLimitRow, f: &F) -> f64 {
    row.value.abs() / f.l1_norm()
}

/// Unit vector used by the default bump.
pub fn default_bump() -> Bump {
    let a = [1.0, 1.0, 1.0];
    let n = dot(&a, &a).sqrt();
    Bump {
        center: 0.0,
        radius: 2.0,
        amplitude: a.map(|v| v / n),
    }
}
