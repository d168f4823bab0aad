//! Asymptotic expansions of the profile for `x ≥ 1`, the oscillatory
//! integrals behind them, and sweeps that compare both against a [`Trace`].
//!
//! Phases always come from the reduced `ψ = cΦ_α mod 2π` (the trace's, or one
//! co-integrated here), never from `cos(cΦ)` of an unreduced argument.
//! Component indices `j` are zero-based.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::LimitConstants;
use crate::error::{Error, Result};
use crate::frame::Trace;
use crate::params::{gauss_tail, phi, reduce_angle, Params, X_CAP};
use crate::stepper::{self, DriveLimits};
use crate::vec3::Vec3;

/// Values that can be summed term by term.
pub trait Term: Copy {
    fn plus(&self, other: &Self) -> Self;
}

impl Term for f64 {
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
}

impl Term for Vec3 {
    fn plus(&self, o: &Self) -> Self {
        [self[0] + o[0], self[1] + o[1], self[2] + o[2]]
    }
}

impl Term for [Complex64; 3] {
    fn plus(&self, o: &Self) -> Self {
        [self[0] + o[0], self[1] + o[1], self[2] + o[2]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction<T> {
    pub name: String,
    pub value: T,
}

/// Leading term plus named corrections, with the remainder envelope
/// (universal constant taken as 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticEval<T> {
    pub x: f64,
    pub leading: T,
    pub corrections: Vec<Correction<T>>,
    pub remainder_bound: f64,
}

impl<T: Term> AsymptoticEval<T> {
    pub fn value(&self) -> T {
        self.corrections
            .iter()
            .fold(self.leading, |acc, c| acc.plus(&c.value))
    }
}

fn correction<T>(name: &str, value: T) -> Correction<T> {
    Correction {
        name: name.to_string(),
        value,
    }
}

fn check_regime(x: f64) -> Result<()> {
    if !(x >= 1.0) {
        return Err(Error::OutOfRange {
            what: "x (asymptotic regime)",
            value: x,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    Ok(())
}

fn check_component(j: usize) -> Result<()> {
    if j > 2 {
        return Err(Error::InvalidParameter(format!(
            "component index {j} out of range"
        )));
    }
    Ok(())
}

/// `∫ₓ^∞ s² e^{−αs²/4} ds`.
fn s2_tail(p: &Params, x: f64) -> Result<f64> {
    gauss_tail(0.25 * p.alpha, 2, x)
}

fn decay(p: &Params, x: f64) -> f64 {
    (-0.25 * p.alpha * x * x).exp()
}

/// `m_j(x)` from the limit constants at reduced phase `psi = cΦ_α(x) mod 2π`.
pub fn m_asymptotic_at_phase(
    p: &Params,
    lc: &LimitConstants,
    j: usize,
    x: f64,
    psi: f64,
) -> Result<AsymptoticEval<f64>> {
    check_regime(x)?;
    check_component(j)?;
    let (s, c) = (psi - lc.phi[j]).sin_cos();
    let rho = lc.rho[j];
    let g = decay(p, x);
    Ok(AsymptoticEval {
        x,
        leading: rho * c,
        corrections: vec![
            correction("binormal", -p.beta * lc.b[j] / (2.0 * p.c) * x * g),
            correction(
                "tail",
                p.beta * p.beta * rho / (8.0 * p.c) * s * s2_tail(p, x)?,
            ),
        ],
        remainder_bound: p.beta / (p.alpha.powi(5) * p.c * p.c) * x * x * g * g,
    })
}

/// `m′_j(x)`; the trace supplies `k n_j` as the exact derivative.
pub fn mprime_asymptotic_at_phase(
    p: &Params,
    lc: &LimitConstants,
    j: usize,
    x: f64,
    psi: f64,
) -> Result<AsymptoticEval<f64>> {
    check_regime(x)?;
    check_component(j)?;
    let (s, c) = (psi - lc.phi[j]).sin_cos();
    let rho = lc.rho[j];
    let growth = (0.25 * p.alpha * x * x).exp();
    Ok(AsymptoticEval {
        x,
        leading: -p.c * rho * s * growth,
        corrections: vec![correction(
            "tail",
            p.beta * p.beta * rho / 8.0 * c * growth * s2_tail(p, x)?,
        )],
        remainder_bound: p.beta / (p.alpha.powi(5) * p.c) * x * x * decay(p, x),
    })
}

/// `b(x) ≈ B + (βx/2c) e^{−αx²/4} Re(e^{−iψ} W)`.
pub fn b_asymptotic_at_phase(
    p: &Params,
    lc: &LimitConstants,
    x: f64,
    psi: f64,
) -> Result<AsymptoticEval<Vec3>> {
    check_regime(x)?;
    let g = decay(p, x);
    let rot = Complex64::from_polar(1.0, -psi);
    let s = p.beta * x / (2.0 * p.c) * g;
    let corr = [0, 1, 2].map(|j| s * (rot * lc.w[j]).re);
    Ok(AsymptoticEval {
        x,
        leading: lc.b,
        corrections: vec![correction("oscillation", corr)],
        remainder_bound: p.beta / (p.c * p.c * p.alpha.powi(3)) * x * x * g * g,
    })
}

/// `w(x) ≈ e^{−iψ} W (1 + iβ²T/8c) − (βB/2c) x e^{−αx²/4}`, `T = ∫ₓ^∞ s²e^{−αs²/4}`.
pub fn w_asymptotic_at_phase(
    p: &Params,
    lc: &LimitConstants,
    x: f64,
    psi: f64,
) -> Result<AsymptoticEval<[Complex64; 3]>> {
    check_regime(x)?;
    let g = decay(p, x);
    let rot = Complex64::from_polar(1.0, -psi);
    let eps = Complex64::new(0.0, p.beta * p.beta / (8.0 * p.c) * s2_tail(p, x)?);
    let s = p.beta / (2.0 * p.c) * x * g;
    Ok(AsymptoticEval {
        x,
        leading: [0, 1, 2].map(|j| rot * lc.w[j]),
        corrections: vec![
            correction(
                "binormal",
                [0, 1, 2].map(|j| Complex64::new(-s * lc.b[j], 0.0)),
            ),
            correction("tail", [0, 1, 2].map(|j| rot * lc.w[j] * eps)),
        ],
        remainder_bound: p.beta / (p.c * p.c * p.alpha.powi(5)) * x * x * g * g,
    })
}

pub fn m_asymptotic(
    trace: &Trace,
    lc: &LimitConstants,
    j: usize,
    x: f64,
) -> Result<AsymptoticEval<f64>> {
    let psi = trace.frame_at(x)?.psi;
    m_asymptotic_at_phase(&trace.params, lc, j, x, psi)
}

pub fn mprime_asymptotic(
    trace: &Trace,
    lc: &LimitConstants,
    j: usize,
    x: f64,
) -> Result<AsymptoticEval<f64>> {
    let psi = trace.frame_at(x)?.psi;
    mprime_asymptotic_at_phase(&trace.params, lc, j, x, psi)
}

pub fn b_asymptotic(trace: &Trace, lc: &LimitConstants, x: f64) -> Result<AsymptoticEval<Vec3>> {
    let psi = trace.frame_at(x)?.psi;
    b_asymptotic_at_phase(&trace.params, lc, x, psi)
}

pub fn w_asymptotic(
    trace: &Trace,
    lc: &LimitConstants,
    x: f64,
) -> Result<AsymptoticEval<[Complex64; 3]>> {
    let psi = trace.frame_at(x)?.psi;
    w_asymptotic_at_phase(&trace.params, lc, x, psi)
}

/// `∫ₓ^∞ sⁿ e^{iσΦ_α(s) − γs²} ds` together with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscIntegral {
    pub value: Complex64,
    /// Integration-by-parts bound on the part beyond `x_cut`, not included in `value`.
    pub tail_bound: f64,
    pub x_cut: f64,
    /// Lemma bound with unit constant: `11x/(|σ|α) e^{−αx²/4}` for `n = 1, γ = 0`,
    /// otherwise `xⁿ e^{−γ̃x²}/(|σ| γ̃^{min(n,1)})` with `γ̃ = γ + α/4`.
    pub stated_bound: f64,
    /// First integration-by-parts term `(i/σ) xⁿ e^{iσΦ_α(x) − γ̃x²}`.
    pub leading: Complex64,
    pub rhs_evals: u64,
}

/// Relative size of the discarded tail against the lemma bound.
const OSC_TAIL_REL: f64 = 1e-7;
const OSC_BUDGET: f64 = 2e7;

/// Bound on `|∫_X^∞ sⁿ e^{iσΦ_α − γs²}|` from one integration by parts.
pub fn osc_tail_bound(sigma: f64, gt: f64, n: u32, x: f64) -> Result<f64> {
    let boundary = x.powi(n as i32) * (-gt * x * x).exp();
    let lower = if n > 0 {
        n as f64 * gauss_tail(gt, n - 1, x)?
    } else {
        0.0
    };
    let upper = 2.0 * gt * gauss_tail(gt, n + 1, x)?;
    Ok((boundary + lower + upper) / sigma.abs())
}

/// Lemma right-hand side for the oscillatory integral (unit constant).
pub fn osc_stated_bound(sigma: f64, alpha: f64, x: f64, gamma: f64, n: u32) -> f64 {
    let gt = gamma + 0.25 * alpha;
    if n == 1 && gamma == 0.0 {
        11.0 * x / (sigma.abs() * alpha) * (-0.25 * alpha * x * x).exp()
    } else {
        let denom = if n == 0 { 1.0 } else { gt };
        x.powi(n as i32) * (-gt * x * x).exp() / (sigma.abs() * denom)
    }
}

/// Remainder envelope of the one-term expansion for `n = 1, γ = 0`:
/// `(x²/σ²) e^{−αx²/2}`.
pub fn osc_leading_envelope(sigma: f64, alpha: f64, x: f64) -> f64 {
    x * x / (sigma * sigma) * (-0.5 * alpha * x * x).exp()
}

/// Evaluate `∫ₓ^∞ sⁿ e^{iσΦ_α(s) − γs²} ds` by co-integrating the reduced
/// phase up to a cut-off where the remaining tail is negligible against the
/// lemma bound.
pub fn osc_integral(sigma: f64, alpha: f64, x: f64, gamma: f64, n: u32) -> Result<OscIntegral> {
    Ok(osc_integral_grid(sigma, alpha, &[x], gamma, n)?[0])
}

/// [`osc_integral`] at every point of an increasing grid, from a single
/// forward pass sharing one cut-off (chosen for the largest point).
pub fn osc_integral_grid(
    sigma: f64,
    alpha: f64,
    xs: &[f64],
    gamma: f64,
    n: u32,
) -> Result<Vec<OscIntegral>> {
    if sigma == 0.0 || !sigma.is_finite() {
        return Err(Error::InvalidParameter("sigma must be nonzero".into()));
    }
    if n > 2 {
        return Err(Error::InvalidParameter(format!(
            "weight power {n} not in 0..=2"
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be in (0,1], got {alpha}"
        )));
    }
    let gt = gamma + 0.25 * alpha;
    if !(gt > 0.0 && gt <= 1.0) {
        return Err(Error::OutOfRange {
            what: "gamma + alpha/4",
            value: gt,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if xs.is_empty() || xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "grid must be non-empty and strictly increasing".into(),
        ));
    }
    for &x in xs {
        check_regime(x)?;
        if x > X_CAP {
            return Err(Error::OutOfRange {
                what: "x",
                value: x,
                lo: 1.0,
                hi: X_CAP,
            });
        }
    }
    let x0 = xs[0];
    let x_last = *xs.last().unwrap();

    // Cut-off: tail small against the smallest bound, within the cap and the budget.
    let target = OSC_TAIL_REL * osc_stated_bound(sigma, alpha, x_last, gamma, n);
    let mut x_cut = x_last;
    while x_cut < X_CAP && osc_tail_bound(sigma, gt, n, x_cut)? > target {
        x_cut = (x_cut + 0.05).min(X_CAP);
    }
    let phi0 = phi(alpha, x0)?;
    while x_cut > x_last && osc_cost(sigma, alpha, x0, x_cut)? > OSC_BUDGET {
        x_cut = (x_cut - 0.05).max(x_last);
    }
    let tail_bound = osc_tail_bound(sigma, gt, n, x_cut)?;

    let f = move |s: f64, y: &[f64; 3]| {
        let amp = s.powi(n as i32) * (-gamma * s * s).exp();
        let (sn, cs) = y[0].sin_cos();
        [sigma * (0.25 * alpha * s * s).exp(), amp * cs, amp * sn]
    };
    let limits = DriveLimits {
        tol: 1e-13,
        budget: 2.0 * OSC_BUDGET,
    };
    let max_step = |s: f64| GUARD / (1.0 + sigma.abs() * (0.25 * alpha * s * s).exp());
    let reduce = |_: f64, y: &mut [f64; 3]| {
        y[0] = reduce_angle(y[0]);
        Ok(false)
    };

    // Cumulative integral from x0, recorded at each grid point and at the cut.
    let mut y = [reduce_angle(sigma * phi0), 0.0, 0.0];
    let mut at = Vec::with_capacity(xs.len());
    let mut evals = 0;
    let mut from = x0;
    for &x in xs.iter().chain(std::iter::once(&x_cut)) {
        if x > from {
            let (ny, st) = stepper::drive(&f, from, y, x, limits, max_step, reduce)?;
            y = ny;
            evals += st.rhs_evals;
            from = x;
        }
        at.push(y);
    }
    let end = at.pop().unwrap();
    Ok(xs
        .iter()
        .zip(at)
        .map(|(&x, y)| OscIntegral {
            value: Complex64::new(end[1] - y[1], end[2] - y[2]),
            tail_bound,
            x_cut,
            stated_bound: osc_stated_bound(sigma, alpha, x, gamma, n),
            leading: Complex64::new(0.0, 1.0 / sigma)
                * x.powi(n as i32)
                * Complex64::from_polar((-gt * x * x).exp(), y[0]),
            rhs_evals: evals,
        })
        .collect())
}

const GUARD: f64 = 0.2;

/// Projected right-hand-side evaluations to integrate the phase over `[a, b]`.
fn osc_cost(sigma: f64, alpha: f64, a: f64, b: f64) -> Result<f64> {
    Ok(12.0 * (sigma.abs() * (phi(alpha, b)? - phi(alpha, a)?) + (b - a)) / GUARD)
}

/// Sampled comparison of a measured defect against an envelope.
///
/// A point passes when `defect ≤ factor · envelope + floor`; the floor is
/// the numerical resolution of the trace and extracted constants at that
/// point. `max_ratio` is `defect / envelope` over points where the envelope
/// exceeds the floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub bound_name: String,
    pub factor: f64,
    pub x_grid: Vec<f64>,
    pub defect: Vec<f64>,
    pub envelope: Vec<f64>,
    pub floor: Vec<f64>,
    pub max_ratio: f64,
    pub pass: bool,
}

impl BoundCheck {
    pub fn new(
        name: &str,
        factor: f64,
        x_grid: Vec<f64>,
        defect: Vec<f64>,
        envelope: Vec<f64>,
        floor: Vec<f64>,
    ) -> Self {
        let mut max_ratio = 0.0f64;
        let mut pass = true;
        for i in 0..x_grid.len() {
            if envelope[i] > floor[i] {
                max_ratio = max_ratio.max(defect[i] / envelope[i]);
            }
            pass &= defect[i] <= factor * envelope[i] + floor[i];
        }
        Self {
            bound_name: name.to_string(),
            factor,
            x_grid,
            defect,
            envelope,
            floor,
            max_ratio,
            pass,
        }
    }
}

/// Numerical resolution of differences between the trace and values built
/// from the limit constants, at unit scale.
///
/// Local errors of the (norm-preserving) frame flow add up at most linearly,
/// so `steps · tol` bounds the global error of the trace; long runs make it
/// the dominant term.
pub fn resolution_floor(trace: &Trace, lc: &LimitConstants) -> f64 {
    let global = trace.stats.steps as f64 * trace.tol;
    10.0 * trace.tol.max(trace.stats.max_defect) + global + lc.err_est
}

/// `1, 1.25, …` up to `x_max`.
pub fn asymptotic_grid(x_max: f64, spacing: f64) -> Vec<f64> {
    let n = ((x_max - 1.0) / spacing + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| 1.0 + i as f64 * spacing)
        .filter(|&x| x <= x_max)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expansion {
    Profile,
    Derivative,
    Binormal,
    Complex,
}

impl Expansion {
    pub const ALL: [Expansion; 4] = [
        Self::Profile,
        Self::Derivative,
        Self::Binormal,
        Self::Complex,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Profile => "asymp_m",
            Self::Derivative => "asymp_mprime",
            Self::Binormal => "asymp_b",
            Self::Complex => "asymp_w",
        }
    }
}

/// Big-O envelope check (factor 10) of one expansion over `xs`, taking the
/// worst component at each point.
pub fn remainder_sweep(
    trace: &Trace,
    lc: &LimitConstants,
    which: Expansion,
    xs: &[f64],
) -> Result<BoundCheck> {
    let p = &trace.params;
    let unit_floor = resolution_floor(trace, lc);
    let mut defect = Vec::with_capacity(xs.len());
    let mut envelope = Vec::with_capacity(xs.len());
    let mut floor = Vec::with_capacity(xs.len());
    for &x in xs {
        let s = trace.frame_at(x)?;
        let f = &s.frame;
        let (d, env, scale) = match which {
            Expansion::Profile => {
                let mut d = 0.0f64;
                let mut env = 0.0;
                for j in 0..3 {
                    let e = m_asymptotic_at_phase(p, lc, j, x, s.psi)?;
                    d = d.max((f.m[j] - e.value()).abs());
                    env = e.remainder_bound;
                }
                (d, env, 1.0)
            }
            Expansion::Derivative => {
                let k = p.curvature(x);
                let mut d = 0.0f64;
                let mut env = 0.0;
                for j in 0..3 {
                    let e = mprime_asymptotic_at_phase(p, lc, j, x, s.psi)?;
                    d = d.max((k * f.n[j] - e.value()).abs());
                    env = e.remainder_bound;
                }
                (d, env, 1.0 + k)
            }
            Expansion::Binormal => {
                let e = b_asymptotic_at_phase(p, lc, x, s.psi)?;
                let v = e.value();
                let d = (0..3).map(|j| (f.b[j] - v[j]).abs()).fold(0.0, f64::max);
                (d, e.remainder_bound, 1.0)
            }
            Expansion::Complex => {
                let e = w_asymptotic_at_phase(p, lc, x, s.psi)?;
                let v = e.value();
                let w = s.w();
                let d = (0..3).map(|j| (w[j] - v[j]).norm()).fold(0.0, f64::max);
                (d, e.remainder_bound, 1.0)
            }
        };
        defect.push(d);
        envelope.push(env);
        floor.push(unit_floor * scale);
    }
    Ok(BoundCheck::new(
        which.name(),
        10.0,
        xs.to_vec(),
        defect,
        envelope,
        floor,
    ))
}

/// `|b(x) − B| ≤ (6β/cα) x e^{−αx²/4}` (Euclidean norm, explicit constant).
pub fn est_b_check(trace: &Trace, lc: &LimitConstants, xs: &[f64]) -> Result<BoundCheck> {
    let p = &trace.params;
    let fl = resolution_floor(trace, lc);
    let mut defect = Vec::new();
    let mut envelope = Vec::new();
    for &x in xs {
        check_regime(x)?;
        let b = trace.frame_at(x)?.frame.b;
        defect.push(crate::vec3::norm(&crate::vec3::sub(&b, &lc.b)));
        envelope.push(6.0 * p.beta / (p.c * p.alpha) * x * decay(p, x));
    }
    Ok(BoundCheck::new(
        "est_b",
        1.0,
        xs.to_vec(),
        defect,
        envelope,
        vec![fl; xs.len()],
    ))
}

/// `|w(x) − e^{−iψ}W| ≤ (10β/cα²) x e^{−αx²/4}` (Hermitian norm, explicit constant).
pub fn est_w_check(trace: &Trace, lc: &LimitConstants, xs: &[f64]) -> Result<BoundCheck> {
    let p = &trace.params;
    let fl = resolution_floor(trace, lc);
    let mut defect = Vec::new();
    let mut envelope = Vec::new();
    for &x in xs {
        check_regime(x)?;
        let s = trace.frame_at(x)?;
        let w = s.w();
        let rot = Complex64::from_polar(1.0, -s.psi);
        let d2: f64 = (0..3).map(|j| (w[j] - rot * lc.w[j]).norm_sqr()).sum();
        defect.push(d2.sqrt());
        envelope.push(10.0 * p.beta / (p.c * p.alpha * p.alpha) * x * decay(p, x));
    }
    Ok(BoundCheck::new(
        "est_w",
        1.0,
        xs.to_vec(),
        defect,
        envelope,
        vec![fl; xs.len()],
    ))
}

/// Remainders of the one-term profile expansion at a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorFacil {
    pub x: f64,
    /// `m_j − ρ_j cos(ψ − φ_j)`.
    pub r: Vec3,
    /// `n_j + ρ_j sin(ψ − φ_j)`.
    pub r_tilde: Vec3,
    /// `10β/(cα²) x e^{−αx²/4}`.
    pub bound: f64,
    pub pass: bool,
}

pub fn corfacil_check(trace: &Trace, lc: &LimitConstants, x: f64) -> Result<CorFacil> {
    check_regime(x)?;
    let p = &trace.params;
    let s = trace.frame_at(x)?;
    let mut r = [0.0; 3];
    let mut r_tilde = [0.0; 3];
    for j in 0..3 {
        let (sn, cs) = (s.psi - lc.phi[j]).sin_cos();
        r[j] = s.frame.m[j] - lc.rho[j] * cs;
        r_tilde[j] = s.frame.n[j] + lc.rho[j] * sn;
    }
    let bound = 10.0 * p.beta / (p.c * p.alpha * p.alpha) * x * decay(p, x);
    let worst = r
        .iter()
        .chain(r_tilde.iter())
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    Ok(CorFacil {
        x,
        r,
        r_tilde,
        bound,
        pass: worst <= bound + resolution_floor(trace, lc),
    })
}

pub fn corfacil_sweep(trace: &Trace, lc: &LimitConstants, xs: &[f64]) -> Result<BoundCheck> {
    let fl = resolution_floor(trace, lc);
    let mut defect = Vec::new();
    let mut envelope = Vec::new();
    for &x in xs {
        let c = corfacil_check(trace, lc, x)?;
        defect.push(
            c.r.iter()
                .chain(c.r_tilde.iter())
                .map(|v| v.abs())
                .fold(0.0, f64::max),
        );
        envelope.push(c.bound);
    }
    Ok(BoundCheck::new(
        "cor_facil",
        1.0,
        xs.to_vec(),
        defect,
        envelope,
        vec![fl; xs.len()],
    ))
}

/// Least-squares fit of `ln|b(x) − B|` against `αx²/4 − ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// The binormal approaches its limit like `x e^{−αx²/4}`: the fitted slope
/// should be close to −1. Uses the Euclidean norm, which does not oscillate
/// at leading order.
pub fn decay_fit(
    trace: &Trace,
    lc: &LimitConstants,
    x_from: f64,
    spacing: f64,
) -> Result<DecayFit> {
    let p = &trace.params;
    let mut pts = Vec::new();
    let mut x = x_from;
    while x <= trace.x_max + 1e-12 {
        let b = trace.frame_at(x.min(trace.x_max))?.frame.b;
        let d = crate::vec3::norm(&crate::vec3::sub(&b, &lc.b));
        if d > 0.0 {
            pts.push((0.25 * p.alpha * x * x - x.ln(), d.ln()));
        }
        x += spacing;
    }
    if pts.len() < 3 {
        return Err(Error::InvalidParameter(
            "too few points for a decay fit".into(),
        ));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
    })
}

/// Oscillatory-lemma checks at the trace's own frequency `σ = c`: the
/// unweighted `s e^{icΦ}` bound (factor 1) and the Gaussian-weighted ones
/// (factor 10) with `γ = α/4`.
///
/// Grid points beyond the reach of the evaluation budget are dropped; the
/// lemmas do not depend on the trace, so this only narrows the sampled range.
pub fn oscillatory_checks(p: &Params, xs: &[f64]) -> Result<Vec<BoundCheck>> {
    let x0 = xs.first().copied().unwrap_or(1.0);
    let mut kept = Vec::with_capacity(xs.len());
    for &x in xs {
        if x <= X_CAP && osc_cost(p.c, p.alpha, x0, x)? <= OSC_BUDGET {
            kept.push(x);
        }
    }
    let xs = kept;
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    let summarize = |r: &[OscIntegral]| -> (Vec<f64>, Vec<f64>) {
        (
            r.iter().map(|v| v.value.norm() + v.tail_bound).collect(),
            r.iter().map(|v| v.stated_bound).collect(),
        )
    };
    let mut out = Vec::new();
    let (d, e) = summarize(&osc_integral_grid(p.c, p.alpha, &xs, 0.0, 1)?);
    out.push(BoundCheck::new(
        "est_osc1",
        1.0,
        xs.clone(),
        d,
        e,
        vec![0.0; xs.len()],
    ));
    for n in 0..=2u32 {
        let (d, e) = summarize(&osc_integral_grid(p.c, p.alpha, &xs, 0.25 * p.alpha, n)?);
        let name = format!("lem_osc2_n{n}");
        out.push(BoundCheck::new(
            &name,
            10.0,
            xs.clone(),
            d,
            e,
            vec![0.0; xs.len()],
        ));
    }
    Ok(out)
}
