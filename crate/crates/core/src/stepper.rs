//! Dormand–Prince 8(5,3) explicit Runge–Kutta step on fixed-size states,
//! and an adaptive driver around it.
//!
//! Tableau from Hairer, Nørsett & Wanner (DOP853). Error estimation combines
//! the embedded 5th- and 3rd-order solutions as in the reference code.

// Tabulated coefficients are kept exactly as published.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const A21: f64 = 5.26001519587677318785587544488e-2;
const A31: f64 = 1.97250569845378994544595329183e-2;
const A32: f64 = 5.91751709536136983633785987549e-2;
const A41: f64 = 2.95875854768068491816892993775e-2;
const A43: f64 = 8.87627564304205475450678981324e-2;
const A51: f64 = 2.41365134159266685502369798665e-1;
const A53: f64 = -8.84549479328286085344864962717e-1;
const A54: f64 = 9.24834003261792003115737966543e-1;
const A61: f64 = 3.7037037037037037037037037037e-2;
const A64: f64 = 1.70828608729473871279604482173e-1;
const A65: f64 = 1.25467687566822425016691814123e-1;
const A71: f64 = 3.7109375e-2;
const A74: f64 = 1.70252211019544039314978060272e-1;
const A75: f64 = 6.02165389804559606850219397283e-2;
const A76: f64 = -1.7578125e-2;
const A81: f64 = 3.70920001185047927108779319836e-2;
const A84: f64 = 1.70383925712239993810214054705e-1;
const A85: f64 = 1.07262030446373284651809199168e-1;
const A86: f64 = -1.53194377486244017527936158236e-2;
const A87: f64 = 8.27378916381402288758473766002e-3;
const A91: f64 = 6.24110958716075717114429577812e-1;
const A94: f64 = -3.36089262944694129406857109825e0;
const A95: f64 = -8.68219346841726006818189891453e-1;
const A96: f64 = 2.75920996994467083049415600797e1;
const A97: f64 = 2.01540675504778934086186788979e1;
const A98: f64 = -4.34898841810699588477366255144e1;
const A101: f64 = 4.77662536438264365890433908527e-1;
const A104: f64 = -2.48811461997166764192642586468e0;
const A105: f64 = -5.90290826836842996371446475743e-1;
const A106: f64 = 2.12300514481811942347288949897e1;
const A107: f64 = 1.52792336328824235832596922938e1;
const A108: f64 = -3.32882109689848629194453265587e1;
const A109: f64 = -2.03312017085086261358222928593e-2;
const A111: f64 = -9.3714243008598732571704021658e-1;
const A114: f64 = 5.18637242884406370830023853209e0;
const A115: f64 = 1.09143734899672957818500254654e0;
const A116: f64 = -8.14978701074692612513997267357e0;
const A117: f64 = -1.85200656599969598641566180701e1;
const A118: f64 = 2.27394870993505042818970056734e1;
const A119: f64 = 2.49360555267965238987089396762e0;
const A1110: f64 = -3.0467644718982195003823669022e0;
const A121: f64 = 2.27331014751653820792359768449e0;
const A124: f64 = -1.05344954667372501984066689879e1;
const A125: f64 = -2.00087205822486249909675718444e0;
const A126: f64 = -1.79589318631187989172765950534e1;
const A127: f64 = 2.79488845294199600508499808837e1;
const A128: f64 = -2.85899827713502369474065508674e0;
const A129: f64 = -8.87285693353062954433549289258e0;
const A1210: f64 = 1.23605671757943030647266201528e1;
const A1211: f64 = 6.43392746015763530355970484046e-1;
const B1: f64 = 5.42937341165687622380535766363e-2;
const B6: f64 = 4.45031289275240888144113950566e0;
const B7: f64 = 1.89151789931450038304281599044e0;
const B8: f64 = -5.8012039600105847814672114227e0;
const B9: f64 = 3.1116436695781989440891606237e-1;
const B10: f64 = -1.52160949662516078556178806805e-1;
const B11: f64 = 2.01365400804030348374776537501e-1;
const B12: f64 = 4.47106157277725905176885569043e-2;
const BHH1: f64 = 0.244094488188976377952755905512e0;
const BHH2: f64 = 0.733846688281611857341361741547e0;
const BHH3: f64 = 0.220588235294117647058823529412e-1;
const C2: f64 = 0.526001519587677318785587544488e-1;
const C3: f64 = 0.789002279381515978178381316732e-1;
const C4: f64 = 0.118350341907227396726757197510e0;
const C5: f64 = 0.281649658092772603273242802490e0;
const C6: f64 = 0.333333333333333333333333333333e0;
const C7: f64 = 0.25e0;
const C8: f64 = 0.307692307692307692307692307692e0;
const C9: f64 = 0.651282051282051282051282051282e0;
const C10: f64 = 0.6e0;
const C11: f64 = 0.857142857142857142857142857142e0;
const ER1: f64 = 0.1312004499419488073250102996e-1;
const ER6: f64 = -0.1225156446376204440720569753e1;
const ER7: f64 = -0.4957589496572501915214079952e0;
const ER8: f64 = 0.1664377182454986536961530415e1;
const ER9: f64 = -0.3503288487499736816886487290e0;
const ER10: f64 = 0.3341791187130174790297318841e0;
const ER11: f64 = 0.8192320648511571246570742613e-1;
const ER12: f64 = -0.2235530786388629525884427845e-1;

/// Result of one trial step.
pub struct StepOutput<const N: usize> {
    pub y: [f64; N],
    /// Derivative at the new point (first stage of the next step).
    pub dy: [f64; N],
    /// 5th-order error estimate per component (already multiplied by `h`).
    pub err5: [f64; N],
    /// 3rd-order error estimate per component (already multiplied by `h`).
    pub err3: [f64; N],
}

#[inline(always)]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut s = 0.0;
        for (a, k) in terms {
            s += a * k[i];
        }
        out[i] += h * s;
    }
    out
}

/// Take one step of size `h` from `(x, y)`, given `k1 = f(x, y)`.
/// Costs 11 evaluations of `f` (12 counting the derivative at the new point).
pub fn step<const N: usize, F>(f: &F, x: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> StepOutput<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k2 = f(x + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(x + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(x + C4 * h, &axpy(y, h, &[(A41, k1), (A43, &k3)]));
    let k5 = f(
        x + C5 * h,
        &axpy(y, h, &[(A51, k1), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        x + C6 * h,
        &axpy(y, h, &[(A61, k1), (A64, &k4), (A65, &k5)]),
    );
    let k7 = f(
        x + C7 * h,
        &axpy(y, h, &[(A71, k1), (A74, &k4), (A75, &k5), (A76, &k6)]),
    );
    let k8 = f(
        x + C8 * h,
        &axpy(
            y,
            h,
            &[(A81, k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)],
        ),
    );
    let k9 = f(
        x + C9 * h,
        &axpy(
            y,
            h,
            &[
                (A91, k1),
                (A94, &k4),
                (A95, &k5),
                (A96, &k6),
                (A97, &k7),
                (A98, &k8),
            ],
        ),
    );
    let k10 = f(
        x + C10 * h,
        &axpy(
            y,
            h,
            &[
                (A101, k1),
                (A104, &k4),
                (A105, &k5),
                (A106, &k6),
                (A107, &k7),
                (A108, &k8),
                (A109, &k9),
            ],
        ),
    );
    let k11 = f(
        x + C11 * h,
        &axpy(
            y,
            h,
            &[
                (A111, k1),
                (A114, &k4),
                (A115, &k5),
                (A116, &k6),
                (A117, &k7),
                (A118, &k8),
                (A119, &k9),
                (A1110, &k10),
            ],
        ),
    );
    let x_new = x + h;
    let k12 = f(
        x_new,
        &axpy(
            y,
            h,
            &[
                (A121, k1),
                (A124, &k4),
                (A125, &k5),
                (A126, &k6),
                (A127, &k7),
                (A128, &k8),
                (A129, &k9),
                (A1210, &k10),
                (A1211, &k11),
            ],
        ),
    );

    let mut incr = [0.0; N];
    let mut err5 = [0.0; N];
    let mut err3 = [0.0; N];
    for i in 0..N {
        incr[i] = B1 * k1[i]
            + B6 * k6[i]
            + B7 * k7[i]
            + B8 * k8[i]
            + B9 * k9[i]
            + B10 * k10[i]
            + B11 * k11[i]
            + B12 * k12[i];
        err3[i] = h * (incr[i] - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k12[i]);
        err5[i] = h
            * (ER1 * k1[i]
                + ER6 * k6[i]
                + ER7 * k7[i]
                + ER8 * k8[i]
                + ER9 * k9[i]
                + ER10 * k10[i]
                + ER11 * k11[i]
                + ER12 * k12[i]);
    }
    let mut y_new = *y;
    for i in 0..N {
        y_new[i] += h * incr[i];
    }
    let dy = f(x_new, &y_new);
    StepOutput {
        y: y_new,
        dy,
        err5,
        err3,
    }
}

/// Scaled error norm of a trial step (accept when `<= 1`).
pub fn error_norm<const N: usize>(
    out: &StepOutput<N>,
    y_old: &[f64; N],
    atol: f64,
    rtol: f64,
) -> f64 {
    let mut e5 = 0.0;
    let mut e3 = 0.0;
    #[allow(clippy::needless_range_loop)] // four parallel arrays
    for i in 0..N {
        let sk = atol + rtol * y_old[i].abs().max(out.y[i].abs());
        e5 += (out.err5[i] / sk).powi(2);
        e3 += (out.err3[i] / sk).powi(2);
    }
    let mut deno = e5 + 0.01 * e3;
    if deno <= 0.0 {
        deno = 1.0;
    }
    e5 / (deno * N as f64).sqrt()
}

/// Function evaluations charged per accepted or rejected step.
pub const EVALS_PER_STEP: u64 = 12;

/// Counters from one adaptive run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DriveStats {
    pub steps: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

/// Limits for [`drive`].
#[derive(Debug, Clone, Copy)]
pub struct DriveLimits {
    pub tol: f64,
    /// Abort once this many right-hand-side evaluations have been spent.
    pub budget: f64,
}

/// Adaptive integration from `(x0, y0)` to `x_end` (either direction) with a
/// PI step-size controller.
///
/// `max_step(x)` caps every step. `accept(x, y)` runs after each accepted
/// step; it may modify `y` (returning `true` so the stage derivative is
/// recomputed) or abort the run with an error.
pub fn drive<const N: usize, F, G, A>(
    f: &F,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    limits: DriveLimits,
    max_step: G,
    mut accept: A,
) -> Result<([f64; N], DriveStats)>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(f64) -> f64,
    A: FnMut(f64, &mut [f64; N]) -> Result<bool>,
{
    if !(limits.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {}",
            limits.tol
        )));
    }
    let mut x = x0;
    let dir = if x_end >= x { 1.0 } else { -1.0 };
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut stats = DriveStats {
        rhs_evals: 1,
        ..Default::default()
    };

    let safe = 0.9;
    let beta_pi = 0.04;
    let expo1 = 1.0 / 8.0 - beta_pi * 0.2;
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;

    let mut h = max_step(x).min(0.05).min((x_end - x).abs());
    let h_min = 1e-14 * (1.0 + x_end.abs());

    while dir * (x_end - x) > 0.0 {
        let remaining = (x_end - x).abs();
        let mut h_try = h.min(max_step(x)).min(remaining);
        // Land exactly on x_end rather than leaving a sliver.
        if remaining - h_try < 1e-3 * h_try {
            h_try = remaining;
        }
        if h_try < h_min && h_try < remaining {
            return Err(Error::StepUnderflow { x, h: h_try });
        }
        if stats.rhs_evals as f64 > limits.budget {
            return Err(Error::BudgetExceeded {
                projected: stats.rhs_evals as f64,
                budget: limits.budget,
                x_max: x_end,
            });
        }

        let out = step(f, x, &y, &k1, dir * h_try);
        stats.rhs_evals += EVALS_PER_STEP;
        let err = error_norm(&out, &y, limits.tol, limits.tol);

        let fac11 = err.powf(expo1);
        let mut fac = fac11 / facold.powf(beta_pi);
        fac = (1.0 / 6.0f64).max(3.0f64.min(fac / safe));
        let mut h_new = h_try / fac;

        if err <= 1.0 {
            facold = err.max(1e-4);
            stats.steps += 1;
            x = if h_try == remaining {
                x_end
            } else {
                x + dir * h_try
            };
            y = out.y;
            k1 = out.dy;
            if accept(x, &mut y)? {
                k1 = f(x, &y);
                stats.rhs_evals += 1;
            }
            if last_rejected {
                h_new = h_new.min(h_try);
            }
            last_rejected = false;
        } else {
            h_new = h_try / 3.0f64.min(fac11 / safe);
            stats.rejected += 1;
            last_rejected = true;
        }
        h = h_new;
    }
    Ok((y, stats))
}
