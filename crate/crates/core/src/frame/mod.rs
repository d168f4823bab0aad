//! Serret–Frenet frames for the shrinker profile.
//!
//! The profile `m` is the unit tangent of a space curve with curvature
//! `k(x) = c e^{αx²/4}` and torsion `τ(x) = −βx/2`:
//!
//! ```text
//! m' = k n,    n' = −k m − (βx/2) b,    b' = (βx/2) n
//! ```
//!
//! The integrated state also carries the reduced phase `ψ = cΦ_α mod 2π` and
//! the running integrals that define the limit constants `B` and `W`.

mod checks;
mod export;
mod integrate;

pub use checks::{gj_residual, gj_value, gradient_magnitude_check, profile_residual, GjResidual};
pub use export::{read_binary, sampled_rows, write_binary, write_csv, CSV_HEADER};
pub use integrate::{
    auto_x_max, integrate, integrate_from, projected_rhs_evals, propagate, IntegratorOptions,
    Trace, TraceStats, DEFAULT_BUDGET,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::{phi, reduce_angle, Params};
use crate::vec3::{cross, dot, Vec3};

/// Orthonormal triple `(m, n, b)` at abscissa `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub x: f64,
    pub m: Vec3,
    pub n: Vec3,
    pub b: Vec3,
}

impl Frame {
    pub fn canonical() -> Self {
        Self {
            x: 0.0,
            m: [1.0, 0.0, 0.0],
            n: [0.0, 1.0, 0.0],
            b: [0.0, 0.0, 1.0],
        }
    }

    /// Frobenius norm of `G − I`, `G` the Gram matrix of `(m, n, b)`.
    pub fn gram_defect(&self) -> f64 {
        let v = [&self.m, &self.n, &self.b];
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let g = dot(v[i], v[j]) - if i == j { 1.0 } else { 0.0 };
                s += g * g;
            }
        }
        s.sqrt()
    }

    /// `max_j |m_j² + n_j² + b_j² − 1|`: the rows of the frame matrix are unit too.
    pub fn component_defect(&self) -> f64 {
        (0..3)
            .map(|j| {
                (self.m[j] * self.m[j] + self.n[j] * self.n[j] + self.b[j] * self.b[j] - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Max-norm distance of `b` from `m × n`.
    pub fn handedness_defect(&self) -> f64 {
        let mn = cross(&self.m, &self.n);
        (0..3)
            .map(|i| (mn[i] - self.b[i]).abs())
            .fold(0.0, f64::max)
    }

    /// Largest componentwise difference to another frame.
    pub fn max_diff(&self, other: &Frame) -> f64 {
        let mut d = 0.0f64;
        for i in 0..3 {
            d = d
                .max((self.m[i] - other.m[i]).abs())
                .max((self.n[i] - other.n[i]).abs())
                .max((self.b[i] - other.b[i]).abs());
        }
        d
    }

    /// Gram–Schmidt projection back onto SO(3), keeping the direction of `m`.
    pub fn reorthonormalize(&mut self) {
        let m = crate::vec3::normalize(&self.m);
        let p = dot(&self.n, &m);
        let n = crate::vec3::normalize(&crate::vec3::sub(&self.n, &crate::vec3::scale(&m, p)));
        self.m = m;
        self.n = n;
        self.b = cross(&m, &n);
    }
}

/// Frame plus reduced phase and the co-integrated `B`/`W` integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentedState {
    pub frame: Frame,
    /// `cΦ_α(x)` reduced to `[0, 2π)`.
    pub psi: f64,
    /// Number of whole turns removed from `psi` (diagnostic only).
    pub winding: i64,
    /// `∫₀ˣ (1 − αs²/2) e^{−αs²/4} m(s) ds`.
    pub ib: Vec3,
    /// `∫₀ˣ e^{iψ(s) − αs²/4} [(βs²/2) n(s) + (1 − αs²/2) b(s)] ds`.
    pub iw: [Complex64; 3],
}

impl AugmentedState {
    pub fn x(&self) -> f64 {
        self.frame.x
    }

    /// `w = m + i n`.
    pub fn w(&self) -> [Complex64; 3] {
        let f = &self.frame;
        [0, 1, 2].map(|j| Complex64::new(f.m[j], f.n[j]))
    }
}

/// Canonical initial state: `m = e₁`, `n = e₂`, `b = e₃`, zero phase and integrals.
pub fn initial_state() -> AugmentedState {
    initial_state_from(Frame::canonical())
}

/// Initial state with an arbitrary starting frame (used for rotated copies).
pub fn initial_state_from(frame: Frame) -> AugmentedState {
    AugmentedState {
        frame: Frame { x: 0.0, ..frame },
        psi: 0.0,
        winding: 0,
        ib: [0.0; 3],
        iw: [Complex64::new(0.0, 0.0); 3],
    }
}

/// Value of the solution at `−x` from its value at `x`:
/// `m → (m₁, −m₂, −m₃)`, `n → (−n₁, n₂, n₃)`, `b → (−b₁, b₂, b₃)`.
///
/// `Φ_α` is odd so `ψ → −ψ`; the integrals pick up the matching signs
/// (and complex conjugation for `iW`).
pub fn reflect(s: &AugmentedState) -> AugmentedState {
    let f = &s.frame;
    let frame = Frame {
        x: -f.x,
        m: [f.m[0], -f.m[1], -f.m[2]],
        n: [-f.n[0], f.n[1], f.n[2]],
        b: [-f.b[0], f.b[1], f.b[2]],
    };
    let psi = reduce_angle(-s.psi);
    let winding = if s.psi == 0.0 {
        -s.winding
    } else {
        -s.winding - 1
    };
    AugmentedState {
        frame,
        psi,
        winding,
        ib: [-s.ib[0], s.ib[1], s.ib[2]],
        iw: [s.iw[0].conj(), -s.iw[1].conj(), -s.iw[2].conj()],
    }
}

/// Closed-form frame for `α = 1` (β = 0): a planar great circle traversed at phase `cΦ₁(x)`.
pub fn explicit_alpha1(c: f64, x: f64) -> Result<Frame> {
    let theta = c * phi(1.0, x)?;
    Ok(explicit_alpha1_at_phase(x, theta))
}

/// Same as [`explicit_alpha1`] with the phase `cΦ₁(x)` supplied (possibly reduced).
pub fn explicit_alpha1_at_phase(x: f64, theta: f64) -> Frame {
    let (s, c) = theta.sin_cos();
    Frame {
        x,
        m: [c, s, 0.0],
        n: [-s, c, 0.0],
        b: [0.0, 0.0, 1.0],
    }
}

/// Closed-form frame for `c = 0`: `m` is constant and `(n, b)` rotate by `βx²/4`.
pub fn explicit_c0(alpha: f64, x: f64) -> Result<Frame> {
    let p = Params::new(1.0, alpha)?;
    let (s, c) = (0.25 * p.beta * x * x).sin_cos();
    Ok(Frame {
        x,
        m: [1.0, 0.0, 0.0],
        n: [0.0, c, -s],
        b: [0.0, s, c],
    })
}
