use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{initial_state, AugmentedState, Frame};
use crate::error::{Error, Result};
use crate::params::{phi, Params, X_CAP};
use crate::stepper::{self, DriveLimits, EVALS_PER_STEP};

/// Default cap on right-hand-side evaluations for one integration.
pub const DEFAULT_BUDGET: f64 = 5e8;

const DIM: usize = 19;
type State = [f64; DIM];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    /// Absolute and relative per-step tolerance.
    pub tol: f64,
    /// Maximum number of right-hand-side evaluations.
    pub budget: f64,
    /// Abort once the Gram defect of the frame exceeds this.
    pub max_defect: f64,
    /// Phase advanced per step is at most `guard` (frequency guard).
    pub guard: f64,
    /// Gram–Schmidt projection every 1000 accepted steps.
    pub reorthonormalize: bool,
    /// Memory cap on stored samples; the stride is chosen from the projected step count.
    pub max_samples: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            budget: DEFAULT_BUDGET,
            max_defect: 1e-6,
            guard: 0.2,
            reorthonormalize: false,
            max_samples: 2_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceStats {
    pub steps: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
    pub max_defect: f64,
    pub sample_stride: usize,
}

/// Dense record of the augmented state on `[0, x_max]`.
///
/// Samples are stored at accepted steps (every `stride`-th); values between
/// samples are produced by re-stepping the integrator from the preceding
/// sample with a finer frequency guard.
#[derive(Debug, Clone)]
pub struct Trace {
    pub params: Params,
    pub tol: f64,
    pub x_max: f64,
    pub samples: Vec<AugmentedState>,
    pub stats: TraceStats,
    pub options: IntegratorOptions,
}

fn pack(s: &AugmentedState) -> State {
    let f = &s.frame;
    [
        f.m[0], f.m[1], f.m[2], f.n[0], f.n[1], f.n[2], f.b[0], f.b[1], f.b[2], s.psi, s.ib[0],
        s.ib[1], s.ib[2], s.iw[0].re, s.iw[1].re, s.iw[2].re, s.iw[0].im, s.iw[1].im, s.iw[2].im,
    ]
}

fn unpack(x: f64, y: &State, winding: i64) -> AugmentedState {
    AugmentedState {
        frame: Frame {
            x,
            m: [y[0], y[1], y[2]],
            n: [y[3], y[4], y[5]],
            b: [y[6], y[7], y[8]],
        },
        psi: y[9],
        winding,
        ib: [y[10], y[11], y[12]],
        iw: [
            Complex64::new(y[13], y[16]),
            Complex64::new(y[14], y[17]),
            Complex64::new(y[15], y[18]),
        ],
    }
}

/// Right-hand side of the 19-dimensional augmented system.
fn rhs(p: &Params) -> impl Fn(f64, &State) -> State + '_ {
    move |x: f64, y: &State| {
        let q = 0.25 * p.alpha * x * x;
        let growth = q.exp();
        let decay = 1.0 / growth;
        let k = p.c * growth;
        let half_bx = 0.5 * p.beta * x;
        let (sp, cp) = y[9].sin_cos();
        let wb = 1.0 - 2.0 * q; // 1 − αx²/2
        let wn = half_bx * x; // βx²/2
        let mut d = [0.0; DIM];
        for j in 0..3 {
            let (m, n, b) = (y[j], y[3 + j], y[6 + j]);
            d[j] = k * n;
            d[3 + j] = -k * m - half_bx * b;
            d[6 + j] = half_bx * n;
            d[10 + j] = wb * decay * m;
            let v = decay * (wn * n + wb * b);
            d[13 + j] = cp * v;
            d[16 + j] = sp * v;
        }
        d[9] = k;
        d
    }
}

/// Largest step allowed by the frequency guard at `x`.
fn guard_step(p: &Params, guard: f64, x: f64) -> f64 {
    guard / (1.0 + p.curvature(x) + 0.5 * p.beta * x.abs())
}

/// Estimated right-hand-side evaluations to reach `|x_end|` at the guard step.
pub fn projected_rhs_evals(p: &Params, x_end: f64, guard: f64) -> Result<f64> {
    let x = x_end.abs();
    let phase = p.c * phi(p.alpha, x)?;
    let steps = (x + phase + 0.25 * p.beta * x * x) / guard;
    Ok(steps * EVALS_PER_STEP as f64)
}

/// Reduce `psi` into `[0, 2π)`, moving whole turns into `winding`.
fn reduce_phase(y: &mut State, winding: &mut i64) {
    let turns = (y[9] / TAU).floor();
    if turns != 0.0 {
        y[9] -= turns * TAU;
        *winding += turns as i64;
    }
    if y[9] >= TAU {
        y[9] -= TAU;
        *winding += 1;
    } else if y[9] < 0.0 {
        y[9] += TAU;
        *winding -= 1;
    }
}

fn apply_projection(y: &mut State) {
    let mut f = unpack(0.0, y, 0).frame;
    f.reorthonormalize();
    y[0..3].copy_from_slice(&f.m);
    y[3..6].copy_from_slice(&f.n);
    y[6..9].copy_from_slice(&f.b);
}

struct RunOutcome {
    end: AugmentedState,
    stats: TraceStats,
}

/// Adaptive integration from `start` to `x_end` (either direction).
/// `on_accept` sees every accepted state.
fn run<F>(
    p: &Params,
    start: &AugmentedState,
    x_end: f64,
    opts: &IntegratorOptions,
    mut on_accept: F,
) -> Result<RunOutcome>
where
    F: FnMut(&AugmentedState),
{
    let f = rhs(p);
    let mut winding = start.winding;
    let mut max_defect = start.frame.gram_defect();
    let mut accepted = 0u64;
    let limits = DriveLimits {
        tol: opts.tol,
        budget: opts.budget,
    };
    let (y, drive_stats) = stepper::drive(
        &f,
        start.x(),
        pack(start),
        x_end,
        limits,
        |x| guard_step(p, opts.guard, x),
        |x, y| {
            accepted += 1;
            reduce_phase(y, &mut winding);
            let projected = opts.reorthonormalize && accepted.is_multiple_of(1000);
            if projected {
                apply_projection(y);
            }
            let state = unpack(x, y, winding);
            let defect = state.frame.gram_defect();
            max_defect = max_defect.max(defect);
            if defect > opts.max_defect {
                return Err(Error::FrameDrift {
                    defect,
                    limit: opts.max_defect,
                    x,
                });
            }
            on_accept(&state);
            Ok(projected)
        },
    )?;
    let stats = TraceStats {
        steps: drive_stats.steps,
        rejected: drive_stats.rejected,
        rhs_evals: drive_stats.rhs_evals,
        max_defect,
        sample_stride: 0,
    };
    Ok(RunOutcome {
        end: unpack(x_end, &y, winding),
        stats,
    })
}

fn check_budget(p: &Params, x_end: f64, opts: &IntegratorOptions) -> Result<f64> {
    let projected = projected_rhs_evals(p, x_end, opts.guard)?;
    if projected > opts.budget {
        return Err(Error::BudgetExceeded {
            projected,
            budget: opts.budget,
            x_max: x_end,
        });
    }
    Ok(projected)
}

/// Integrate the canonical profile on `[0, x_max]` with per-step tolerance `tol`.
pub fn integrate(params: &Params, x_max: f64, tol: f64) -> Result<Trace> {
    integrate_from(
        params,
        &initial_state(),
        x_max,
        &IntegratorOptions::with_tol(tol),
    )
}

/// Integrate from an arbitrary initial state at `x = 0`.
pub fn integrate_from(
    params: &Params,
    start: &AugmentedState,
    x_max: f64,
    opts: &IntegratorOptions,
) -> Result<Trace> {
    if !(x_max > 0.0 && x_max <= X_CAP) {
        return Err(Error::OutOfRange {
            what: "x_max",
            value: x_max,
            lo: 0.0,
            hi: X_CAP,
        });
    }
    if !(1e-13..=1e-6).contains(&opts.tol) {
        return Err(Error::OutOfRange {
            what: "tol",
            value: opts.tol,
            lo: 1e-13,
            hi: 1e-6,
        });
    }
    if start.x() != 0.0 {
        return Err(Error::InvalidParameter("trace must start at x = 0".into()));
    }
    let projected = check_budget(params, x_max, opts)?;
    let projected_steps = projected / EVALS_PER_STEP as f64;
    let stride = ((projected_steps / opts.max_samples.max(1) as f64).ceil() as usize).max(1);

    let mut samples = Vec::with_capacity((projected_steps / stride as f64) as usize + 16);
    samples.push(*start);
    let mut count = 0usize;
    let outcome = run(params, start, x_max, opts, |s| {
        count += 1;
        if count.is_multiple_of(stride) {
            samples.push(*s);
        }
    })?;
    if samples.last().map(|s| s.x()) != Some(outcome.end.x()) {
        samples.push(outcome.end);
    }
    let mut stats = outcome.stats;
    stats.sample_stride = stride;
    Ok(Trace {
        params: *params,
        tol: opts.tol,
        x_max,
        samples,
        stats,
        options: *opts,
    })
}

/// Integrate from `start` to `x_end` in either direction, returning only the end state.
pub fn propagate(
    params: &Params,
    start: &AugmentedState,
    x_end: f64,
    opts: &IntegratorOptions,
) -> Result<AugmentedState> {
    let span = x_end - start.x();
    // The projection counts from the origin; subtract the part already covered.
    let from_origin = projected_rhs_evals(params, x_end, opts.guard)?;
    let covered = if start.x() * x_end >= 0.0 && x_end.abs() >= start.x().abs() {
        projected_rhs_evals(params, start.x(), opts.guard)?
    } else {
        0.0
    };
    if span != 0.0 && from_origin - covered > opts.budget {
        return Err(Error::BudgetExceeded {
            projected: from_origin - covered,
            budget: opts.budget,
            x_max: x_end,
        });
    }
    Ok(run(params, start, x_end, opts, |_| {})?.end)
}

/// Truncation point for the asymptotic-matching extractor: the smallest
/// `X ∈ [6, 12]` whose matching error envelope is below `tol`, pulled back
/// until the projected cost fits the budget. Returns `(X, reached_tol)`.
pub fn auto_x_max(params: &Params, tol: f64, budget: f64) -> Result<(f64, bool)> {
    let envelope = |x: f64| crate::constants::matching_error(params, x);
    let lo = 6.0;
    let mut x = if envelope(lo) <= tol {
        lo
    } else if envelope(X_CAP) > tol {
        X_CAP
    } else {
        let (mut a, mut b) = (lo, X_CAP);
        while b - a > 1e-3 {
            let mid = 0.5 * (a + b);
            if envelope(mid) <= tol {
                b = mid;
            } else {
                a = mid;
            }
        }
        b
    };
    let guard = IntegratorOptions::default().guard;
    while x > 1.0 && projected_rhs_evals(params, x, guard)? > budget {
        x -= 0.05;
    }
    // Round to a tidy grid value; rounding up keeps the envelope condition.
    let rounded = ((x * 100.0).ceil() / 100.0).min(X_CAP);
    let x = if projected_rhs_evals(params, rounded, guard)? <= budget {
        rounded
    } else {
        x
    };
    Ok((x, envelope(x) <= tol))
}

impl Trace {
    pub fn first(&self) -> &AugmentedState {
        &self.samples[0]
    }

    pub fn last(&self) -> &AugmentedState {
        self.samples.last().expect("trace has at least two samples")
    }

    /// Index of the last sample with `x_i <= x`.
    fn base_index(&self, x: f64) -> usize {
        match self.samples.binary_search_by(|s| s.x().total_cmp(&x)) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }

    fn check_range(&self, x: f64) -> Result<()> {
        if !(x >= 0.0 && x <= self.x_max) {
            return Err(Error::OutOfRange {
                what: "x",
                value: x,
                lo: 0.0,
                hi: self.x_max,
            });
        }
        Ok(())
    }

    /// Fixed sub-stepping from `from` to `x`, with a frequency guard half
    /// as large as the one used for integration.
    fn restep(&self, from: &AugmentedState, x: f64) -> AugmentedState {
        let p = &self.params;
        let f = rhs(p);
        let span = x - from.x();
        if span == 0.0 {
            return *from;
        }
        let far = from.x().abs().max(x.abs());
        let h_max = guard_step(p, 0.5 * self.options.guard, far);
        let n = (span.abs() / h_max).ceil().max(1.0) as usize;
        let h = span / n as f64;
        let mut y = pack(from);
        let mut winding = from.winding;
        let mut xc = from.x();
        let mut k1 = f(xc, &y);
        for i in 0..n {
            let out = stepper::step(&f, xc, &y, &k1, h);
            y = out.y;
            k1 = out.dy;
            xc = if i + 1 == n { x } else { xc + h };
        }
        reduce_phase(&mut y, &mut winding);
        unpack(x, &y, winding)
    }

    /// Interpolated state at `x ∈ [0, x_max]`; stored samples are returned exactly.
    pub fn frame_at(&self, x: f64) -> Result<AugmentedState> {
        self.check_range(x)?;
        let i = self.base_index(x);
        let s = &self.samples[i];
        if s.x() == x {
            return Ok(*s);
        }
        Ok(self.restep(s, x))
    }

    /// States at several abscissae, all re-stepped from one common sample so
    /// that finite differences across them are free of sample-switching jumps.
    pub fn frames_at(&self, xs: &[f64]) -> Result<Vec<AugmentedState>> {
        if xs.is_empty() {
            return Ok(Vec::new());
        }
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        for &x in xs {
            self.check_range(x)?;
        }
        let mut base = self.samples[self.base_index(lo)];
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let mut out = vec![base; xs.len()];
        for idx in order {
            base = self.restep(&base, xs[idx]);
            out[idx] = base;
        }
        Ok(out)
    }

    /// Iterator over stored sample abscissae.
    pub fn sample_xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.x())
    }
}
