//! Residual checks of the profile against the equations it must satisfy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Trace;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::vec3::{cross, dot, Vec3};

fn check_fd_step(h: f64) -> Result<()> {
    if !(h > 0.0 && h <= 1e-3) {
        return Err(Error::OutOfRange {
            what: "h",
            value: h,
            lo: 0.0,
            hi: 1e-3,
        });
    }
    Ok(())
}

/// Central-difference evaluation of `αf″ + α|f′|²f + β(f×f′)′ − xf′/2` at `x`
/// for `f = m`, using `(f×f′)′ = f×f″`.
pub fn profile_residual(trace: &Trace, x: f64, h: f64) -> Result<Vec3> {
    check_fd_step(h)?;
    if x - 2.0 * h < 0.0 || x + 2.0 * h > trace.x_max {
        return Err(Error::OutOfRange {
            what: "x (stencil)",
            value: x,
            lo: 2.0 * h,
            hi: trace.x_max - 2.0 * h,
        });
    }
    let s = trace.frames_at(&[x - h, x, x + h])?;
    let (fm, f0, fp) = (s[0].frame.m, s[1].frame.m, s[2].frame.m);
    let mut d1 = [0.0; 3];
    let mut d2 = [0.0; 3];
    for i in 0..3 {
        d1[i] = (fp[i] - fm[i]) / (2.0 * h);
        d2[i] = (fp[i] - 2.0 * f0[i] + fm[i]) / (h * h);
    }
    let p = &trace.params;
    let g2 = dot(&d1, &d1);
    let twist = cross(&f0, &d2);
    let mut r = [0.0; 3];
    for i in 0..3 {
        r[i] = p.alpha * d2[i] + p.alpha * g2 * f0[i] + p.beta * twist[i] - 0.5 * x * d1[i];
    }
    Ok(r)
}

/// `|m′(x)| − c e^{αx²/4}` with `m′ = k n`, i.e. `k(x)(|n(x)| − 1)`.
pub fn gradient_magnitude_check(trace: &Trace, x: f64) -> Result<f64> {
    let s = trace.frame_at(x)?;
    let n = &s.frame.n;
    let k = trace.params.curvature(x);
    Ok(k * dot(n, n).sqrt() - k)
}

/// Result of checking the scalar second-order form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GjResidual {
    pub g: Complex64,
    pub residual: Complex64,
    /// `|residual|` over the largest of the three terms.
    pub relative: f64,
}

const GJ_X_MAX: f64 = 6.0;
const ETA_FLOOR: f64 = 0.05;

/// `η_j = (n_j + i b_j)/(1 + m_j)`.
fn eta(trace: &Trace, j: usize, x: f64) -> Result<Complex64> {
    let f = trace.frame_at(x)?.frame;
    Ok(Complex64::new(f.n[j], f.b[j]) / (1.0 + f.m[j]))
}

/// `½∫_a^b k(s) η_j(s) ds`.
fn half_log_integral(trace: &Trace, j: usize, a: f64, b: f64) -> Result<Complex64> {
    let p = trace.params;
    let mut failure = None;
    let r = integrate(
        |s| match eta(trace, j, s) {
            Ok(e) => {
                let v = 0.5 * p.curvature(s) * e;
                [v.re, v.im]
            }
            Err(err) => {
                failure = Some(err);
                [0.0, 0.0]
            }
        },
        a,
        b,
        QuadOptions {
            rel_tol: 1e-14,
            abs_tol: 1e-16,
            max_intervals: 5000,
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Complex64::new(r.value[0], r.value[1]))
}

fn check_eta_regular(trace: &Trace, j: usize, x: f64) -> Result<()> {
    let mut min = f64::INFINITY;
    for s in trace.samples.iter().take_while(|s| s.x() <= x) {
        min = min.min(1.0 + s.frame.m[j]);
    }
    min = min.min(1.0 + trace.frame_at(x)?.frame.m[j]);
    if min < ETA_FLOOR {
        return Err(Error::SingularEta { j: j + 1, min, x });
    }
    Ok(())
}

/// `g_j(x) = exp(½∫₀ˣ k η_j)` with `j` zero-based.
pub fn gj_value(trace: &Trace, j: usize, x: f64) -> Result<Complex64> {
    if j > 2 {
        return Err(Error::InvalidParameter(format!(
            "component index {j} out of range"
        )));
    }
    check_eta_regular(trace, j, x)?;
    Ok(half_log_integral(trace, j, 0.0, x)?.exp())
}

/// Residual of `g″ − (x/2)(α+iβ)g′ + (c²/4)e^{αx²/2} g = 0` by central differences.
/// `j` is zero-based.
pub fn gj_residual(trace: &Trace, j: usize, x: f64, h: f64) -> Result<GjResidual> {
    check_fd_step(h)?;
    if j > 2 {
        return Err(Error::InvalidParameter(format!(
            "component index {j} out of range"
        )));
    }
    if !(x - h >= 0.0 && x <= GJ_X_MAX && x + h <= trace.x_max) {
        return Err(Error::OutOfRange {
            what: "x",
            value: x,
            lo: h,
            hi: GJ_X_MAX.min(trace.x_max - h),
        });
    }
    check_eta_regular(trace, j, x + h)?;
    let log0 = half_log_integral(trace, j, 0.0, x)?;
    let dm = half_log_integral(trace, j, x, x - h)?;
    let dp = half_log_integral(trace, j, x, x + h)?;
    let g0 = log0.exp();
    let gm = g0 * dm.exp();
    let gp = g0 * dp.exp();
    let d1 = (gp - gm) / (2.0 * h);
    let d2 = (gp - 2.0 * g0 + gm) / (h * h);
    let p = &trace.params;
    let t1 = d2;
    let t2 = -0.5 * x * Complex64::new(p.alpha, p.beta) * d1;
    let t3 = 0.25 * p.c * p.c * (0.5 * p.alpha * x * x).exp() * g0;
    let residual = t1 + t2 + t3;
    let scale = t1.norm().max(t2.norm()).max(t3.norm());
    Ok(GjResidual {
        g: g0,
        residual,
        relative: if scale > 0.0 {
            residual.norm() / scale
        } else {
            residual.norm()
        },
    })
}
