//! Parameters, the phase function `Φ_α`, and closed-form Gaussian tails.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_scalar, QuadOptions};

/// Largest abscissa the profile machinery will integrate to.
pub const X_CAP: f64 = 12.0;
/// Smallest truncation point considered by [`truncation_point`].
pub const X_FLOOR: f64 = 4.0;
/// `|x|` beyond which `Φ_α` is refused (the integrand overflows near 53 for α = 1).
pub const PHI_CAP: f64 = 50.0;

/// Curvature amplitude `c` and Gilbert damping `alpha`, with the derived
/// exchange constant `beta = sqrt(1 - alpha^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Params {
    pub fn new(c: f64, alpha: f64) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "c must be positive and finite, got {c}"
            )));
        }
        if !alpha.is_finite() || alpha <= 0.0 || alpha > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be in (0,1], got {alpha}"
            )));
        }
        // (1-a)(1+a) keeps full relative accuracy near alpha = 1.
        let beta = ((1.0 - alpha) * (1.0 + alpha)).sqrt();
        Ok(Self { c, alpha, beta })
    }

    /// Curvature `k(x) = c e^{αx²/4}`.
    #[inline]
    pub fn curvature(&self, x: f64) -> f64 {
        self.c * (0.25 * self.alpha * x * x).exp()
    }

    /// Torsion `τ(x) = -βx/2`.
    #[inline]
    pub fn torsion(&self, x: f64) -> f64 {
        -0.5 * self.beta * x
    }
}

/// Reduce an angle to `[0, 2π)`.
#[inline]
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `Φ_α(x)` together with the reduced phase `cΦ_α(x) mod 2π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseValue {
    pub x: f64,
    pub phi: f64,
    pub psi: f64,
}

pub fn phase_value(params: &Params, x: f64) -> Result<PhaseValue> {
    let phi = phi(params.alpha, x)?;
    Ok(PhaseValue {
        x,
        phi,
        psi: reduce_angle(params.c * phi),
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be in (0,1], got {alpha}"
        )));
    }
    Ok(())
}

/// `Φ_α(x) = ∫₀ˣ e^{αs²/4} ds` by adaptive Gauss–Kronrod quadrature.
pub fn phi(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !x.is_finite() || x.abs() > PHI_CAP {
        return Err(Error::OutOfRange {
            what: "x",
            value: x,
            lo: -PHI_CAP,
            hi: PHI_CAP,
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let a = 0.25 * alpha;
    let opts = QuadOptions {
        rel_tol: 1e-15,
        abs_tol: 0.0,
        max_intervals: 2000,
    };
    let (v, _) = integrate_scalar(|s| (a * s * s).exp(), 0.0, x.abs(), opts)?;
    Ok(v.copysign(x))
}

/// Three-term large-`x` expansion
/// `Φ_α(x) ≈ 2e^{αx²/4}/(αx) · (1 + 2/(αx²) + 12/(α²x⁴))`.
pub fn phi_asymptotic(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let threshold = 3.0 / alpha.sqrt();
    if !(x >= threshold) {
        return Err(Error::OutOfRange {
            what: "x (asymptotic regime)",
            value: x,
            lo: threshold,
            hi: f64::INFINITY,
        });
    }
    let u = alpha * x * x;
    Ok(2.0 * (0.25 * u).exp() / (alpha * x) * (1.0 + 2.0 / u + 12.0 / (u * u)))
}

/// Complementary error function.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Exact `∫ₓ^∞ sⁿ e^{−γs²} ds` for `n ∈ {0,1,2,3}`.
pub fn gauss_tail(gamma: f64, n: u32, x: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let e = (-gamma * x * x).exp();
    let tail0 = || 0.5 * (PI / gamma).sqrt() * erfc(gamma.sqrt() * x);
    match n {
        0 => Ok(tail0()),
        1 => Ok(e / (2.0 * gamma)),
        2 => Ok(x * e / (2.0 * gamma) + tail0() / (2.0 * gamma)),
        3 => Ok((1.0 + gamma * x * x) * e / (2.0 * gamma * gamma)),
        _ => Err(Error::InvalidParameter(format!(
            "moment n must be in 0..=3, got {n}"
        ))),
    }
}

/// Upper bounds for the Gaussian tails valid for `0 < γ ≤ 1`:
/// `e^{−γx²}/(2γx)`, `e^{−γx²}/(2γ)`, `x e^{−γx²}/γ²`, `x² e^{−γx²}/γ²`.
pub fn tail_bound(gamma: f64, n: u32, x: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::OutOfRange {
            what: "gamma",
            value: gamma,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let min_x = if n >= 2 { 1.0 } else { 0.0 };
    if !(x > min_x || (n >= 2 && x == 1.0)) {
        return Err(Error::OutOfRange {
            what: "x",
            value: x,
            lo: min_x,
            hi: f64::INFINITY,
        });
    }
    let e = (-gamma * x * x).exp();
    match n {
        0 => Ok(e / (2.0 * gamma * x)),
        1 => Ok(e / (2.0 * gamma)),
        2 => Ok(x * e / (gamma * gamma)),
        3 => Ok(x * x * e / (gamma * gamma)),
        _ => Err(Error::InvalidParameter(format!(
            "moment n must be in 0..=3, got {n}"
        ))),
    }
}

/// Truncation point for the integral formulas of the limit constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub x: f64,
    /// Analytic bound on the neglected tail at `x`.
    pub tail_bound: f64,
    /// Set when `tol` could not be reached below [`X_CAP`].
    pub degraded: bool,
}

/// Bound on the part of the `B`/`W` integrals beyond `x`:
/// `(β/2c)(2/(αx) + 16x/α²) e^{−αx²/4}`.
pub fn quadrature_tail(params: &Params, x: f64) -> f64 {
    let a = params.alpha;
    params.beta / (2.0 * params.c)
        * (2.0 / (a * x) + 16.0 * x / (a * a))
        * (-0.25 * a * x * x).exp()
}

/// Smallest `X ∈ [4, 12]` whose analytic tail is below `tol`.
pub fn truncation_point(params: &Params, tol: f64) -> Result<Truncation> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let f = |x: f64| quadrature_tail(params, x);
    if f(X_FLOOR) <= tol {
        return Ok(Truncation {
            x: X_FLOOR,
            tail_bound: f(X_FLOOR),
            degraded: false,
        });
    }
    if f(X_CAP) > tol {
        return Ok(Truncation {
            x: X_CAP,
            tail_bound: f(X_CAP),
            degraded: true,
        });
    }
    // The bound is decreasing on [4, ∞): bisect.
    let (mut lo, mut hi) = (X_FLOOR, X_CAP);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Truncation {
        x: hi,
        tail_bound: f(hi),
        degraded: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_params_examples() {
        let p = Params::new(0.5, 1.0).unwrap();
        assert_eq!(p.beta, 0.0);
        let p = Params::new(0.5, 0.5).unwrap();
        assert!((p.beta - 0.75f64.sqrt()).abs() < 1e-16);
        assert!((p.alpha * p.alpha + p.beta * p.beta - 1.0).abs() < 1e-15);
        assert!(Params::new(0.5, 0.0).is_err());
        assert!(Params::new(0.0, 0.5).is_err());
        assert!(Params::new(-1.0, 0.5).is_err());
        assert!(Params::new(f64::NAN, 0.5).is_err());
        assert!(Params::new(0.5, 1.0 + 1e-12).is_err());
    }

    #[test]
    fn phi_small_cases() {
        assert_eq!(phi(0.5, 0.0).unwrap(), 0.0);
        assert_eq!(phi(0.5, -1.3).unwrap(), -phi(0.5, 1.3).unwrap());
        assert!(phi(0.5, 60.0).is_err());
        assert!(phi(0.0, 1.0).is_err());
    }

    #[test]
    fn phi_asymptotic_regime() {
        assert!(phi_asymptotic(1.0, 1.0).is_err());
        assert!(phi_asymptotic(1.0, 3.0).is_ok());
    }

    #[test]
    fn gauss_tail_closed_forms() {
        assert!((gauss_tail(1.0, 1, 0.0).unwrap() - 0.5).abs() < 1e-16);
        let (g, x) = (0.3f64, 1.7f64);
        let e = (-g * x * x).exp();
        assert!((gauss_tail(g, 1, x).unwrap() - e / (2.0 * g)).abs() < 1e-16);
        let want = (1.0 + g * x * x) * e / (2.0 * g * g);
        assert!((gauss_tail(g, 3, x).unwrap() - want).abs() < 1e-15 * want);
        assert!(gauss_tail(0.0, 1, 1.0).is_err());
        assert!(gauss_tail(1.0, 4, 1.0).is_err());
    }

    #[test]
    fn tail_bound_examples() {
        let v = tail_bound(0.25, 0, 2.0).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-16);
        let v = tail_bound(0.25, 2, 4.0).unwrap();
        assert!((v - 64.0 * (-4.0f64).exp()).abs() < 1e-14);
        assert!(tail_bound(1.5, 0, 2.0).is_err());
        assert!(tail_bound(0.5, 2, 0.5).is_err());
        assert!(tail_bound(0.5, 0, 0.0).is_err());
    }

    #[test]
    fn truncation_examples() {
        let p = Params::new(0.5, 1.0).unwrap();
        let t = truncation_point(&p, 1e-10).unwrap();
        assert_eq!(t.x, X_FLOOR);
        assert_eq!(t.tail_bound, 0.0);

        let p = Params::new(0.5, 0.5).unwrap();
        let t = truncation_point(&p, 1e-8).unwrap();
        assert!(t.x >= 9.0 && t.x <= 12.0);
        assert!(t.tail_bound <= 1e-8 || t.degraded);

        let small = truncation_point(&Params::new(0.01, 0.5).unwrap(), 1e-3).unwrap();
        let big = truncation_point(&Params::new(0.5, 0.5).unwrap(), 1e-3).unwrap();
        assert!(small.x > big.x);
    }

    #[test]
    fn reduce_angle_range() {
        for t in [-1e5, -TAU, -1e-300, 0.0, TAU, 7.0, 1e6] {
            let r = reduce_angle(t);
            assert!((0.0..TAU).contains(&r), "{t} -> {r}");
        }
    }
}
