use llg_shrinker::asymptotics::{
    asymptotic_grid, decay_fit, est_b_check, est_w_check, resolution_floor,
};
use llg_shrinker::constants::{
    compute_constants, continuity_scan, extract_by_matching, extract_by_quadrature, identity_suite,
    LimitConstants,
};
use llg_shrinker::frame::{Trace, DEFAULT_BUDGET};
use llg_shrinker::Params;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use std::f64::consts::PI;

const TOL: f64 = 1e-8;

/// Ten fixed-seed points of `[0.1, 3] × [0.3, 1]`, each with its pipeline output.
fn random_runs() -> Vec<(Params, Trace, LimitConstants)> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let points: Vec<(f64, f64)> = (0..10)
        .map(|_| (rng.gen_range(0.1..3.0), rng.gen_range(0.3..=1.0)))
        .collect();
    points
        .par_iter()
        .map(|&(c, a)| {
            let p = Params::new(c, a).unwrap();
            let (trace, lc) = compute_constants(&p, TOL, None, DEFAULT_BUDGET).unwrap();
            (p, trace, lc)
        })
        .collect()
}

#[test]
fn random_parameter_suite() {
    for (p, trace, lc) in random_runs() {
        let tag = format!("c={:.4}, alpha={:.4}, x={}", p.c, p.alpha, trace.x_max);
        let floor = resolution_floor(&trace, &lc);

        // The two extractors agree within their combined error budget.
        let q = extract_by_quadrature(&trace, TOL, true).unwrap();
        let m = extract_by_matching(&trace, TOL).unwrap();
        let diff = q.max_diff(&m);
        assert!(
            diff <= q.err_est + m.err_est,
            "{tag}: routes differ by {diff:e}"
        );

        // Norm identities within ten error estimates.
        let limit = 10.0 * lc.err_est + floor;
        let nb: f64 = lc.b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rho2: f64 = lc.rho.iter().map(|v| v * v).sum();
        assert!((nb - 1.0).abs() <= limit, "{tag}: |B| = {nb}");
        assert!((rho2 - 2.0).abs() <= limit, "{tag}: sum rho^2 = {rho2}");
        for j in 0..3 {
            let v = lc.rho[j] * lc.rho[j] + lc.b[j] * lc.b[j] - 1.0;
            assert!(v.abs() <= limit, "{tag}: rho_{j}^2 + B_{j}^2 - 1 = {v:e}");
        }
        assert!(identity_suite(&lc).pass, "{tag}");

        // Explicit-constant envelopes for b and w.
        let xs = asymptotic_grid(trace.x_max, 0.25);
        let eb = est_b_check(&trace, &lc, &xs).unwrap();
        let ew = est_w_check(&trace, &lc, &xs).unwrap();
        assert!(eb.pass, "{tag}: est_b max ratio {}", eb.max_ratio);
        assert!(ew.pass, "{tag}: est_w max ratio {}", ew.max_ratio);
    }
}

#[test]
fn truncation_point_stability() {
    for (c, a) in [(0.5, 0.5), (1.0, 0.8), (2.0, 0.3)] {
        let p = Params::new(c, a).unwrap();
        let (trace, far) = compute_constants(&p, TOL, None, DEFAULT_BUDGET).unwrap();
        let (_, near) =
            compute_constants(&p, TOL, Some(trace.x_max - 0.5), DEFAULT_BUDGET).unwrap();
        let d = far.max_diff(&near);
        let limit = far.err_est.max(near.err_est) + resolution_floor(&trace, &far);
        assert!(d < limit, "c={c}, alpha={a}: moved {d:e} > {limit:e}");
    }
}

#[test]
fn binormal_decays_like_the_envelope() {
    for (c, a) in [(0.5, 0.5), (1.0, 0.3), (2.0, 0.8)] {
        let p = Params::new(c, a).unwrap();
        let (trace, lc) = compute_constants(&p, TOL, None, DEFAULT_BUDGET).unwrap();
        let fit = decay_fit(&trace, &lc, 3.0, 0.25).unwrap();
        assert!(
            (fit.slope + 1.0).abs() < 0.15,
            "c={c}, alpha={a}: slope {}",
            fit.slope
        );
    }
}

/// At `α = 1` the profile is the planar circle `m = (cos cΦ₁, sin cΦ₁, 0)`.
#[test]
fn planar_constants() {
    let p = Params::new(1.3, 1.0).unwrap();
    let (trace, lc) = compute_constants(&p, TOL, Some(6.0), DEFAULT_BUDGET).unwrap();
    // b is exactly constant when β = 0; ρ and φ inherit the trace error.
    assert!(lc
        .b
        .iter()
        .zip([0.0, 0.0, 1.0])
        .all(|(a, b)| (a - b).abs() < 1e-12));
    let fl = resolution_floor(&trace, &lc);
    assert!(
        (lc.rho[0] - 1.0).abs() < fl && (lc.rho[1] - 1.0).abs() < fl,
        "rho = {:?}, floor {fl:e}",
        lc.rho
    );
    assert!(
        lc.phi[0].min(2.0 * PI - lc.phi[0]) < fl,
        "phi_1 = {}",
        lc.phi[0]
    );
    assert!((lc.phi[1] - PI / 2.0).abs() < fl, "phi_2 = {}", lc.phi[1]);
    assert!(lc.phi_defined[..2].iter().all(|&d| d) && !lc.phi_defined[2]);
}

#[test]
fn constants_vary_continuously_in_c() {
    let rows = continuity_scan(0.5, &[0.45, 0.5, 0.55], 1e-7, DEFAULT_BUDGET).unwrap();
    for r in &rows[1..] {
        assert!(
            r.delta_b.unwrap() < 0.15,
            "c={}: jump {}",
            r.c,
            r.delta_b.unwrap()
        );
    }
    assert!(
        rows.windows(2).all(|w| w[1].b[0] > w[0].b[0]),
        "B_1 increases with c here"
    );
}
