use llg_shrinker::asymptotics::resolution_floor;
use llg_shrinker::constants::compute_constants;
use llg_shrinker::frame::DEFAULT_BUDGET;
use llg_shrinker::geometry::build_geometry;
use llg_shrinker::selfsimilar::{circle_convergence_scan, gaussian_moments, ShrinkerSolution};
use llg_shrinker::Params;
use rand::{Rng, SeedableRng};

fn reference() -> (ShrinkerSolution, llg_shrinker::constants::LimitConstants) {
    let p = Params::new(0.5, 0.5).unwrap();
    let (trace, lc) = compute_constants(&p, 1e-8, None, DEFAULT_BUDGET).unwrap();
    (ShrinkerSolution::new(trace, 0.7), lc)
}

/// `m(λx, T − λ²(T − t)) = m(x, t)`.
#[test]
fn self_similar_scaling() {
    let (sol, _) = reference();
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    for _ in 0..100 {
        let s: f64 = rng.gen_range(0.05..4.0);
        let x = rng.gen_range(-1.0..1.0) * 0.9 * sol.trace.x_max * s.sqrt();
        let lambda: f64 = rng.gen_range(0.2..5.0);
        let a = sol.eval(x, sol.t_blow - s).unwrap();
        let b = sol
            .eval(lambda * x, sol.t_blow - lambda * lambda * s)
            .unwrap();
        let d = (0..3).map(|j| (a[j] - b[j]).abs()).fold(0.0, f64::max);
        assert!(d < 1e-9, "lambda={lambda}, x={x}, s={s}: {d:e}");
    }
}

#[test]
fn gradient_formula_matches_finite_differences() {
    let (sol, _) = reference();
    let mut rng = rand::rngs::StdRng::seed_from_u64(6);
    for _ in 0..50 {
        let s: f64 = rng.gen_range(0.01..2.0);
        let x = rng.gen_range(-1.0..1.0) * 0.8 * sol.trace.x_max * s.sqrt();
        let t = sol.t_blow - s;
        let exact = sol.grad_magnitude(x, t).unwrap();
        let fd = sol.grad_magnitude_fd(x, t).unwrap();
        assert!(
            (fd / exact - 1.0).abs() < 1e-4,
            "x={x}, s={s}: {fd} vs {exact}"
        );
    }
}

#[test]
fn pointwise_defect_follows_the_envelope() {
    let (sol, lc) = reference();
    let geom = build_geometry(&lc).unwrap();
    let floor = resolution_floor(&sol.trace, &lc);
    for x in [1.0, -1.0, 2.5] {
        let t_last = sol.max_usable_t(x);
        let ts: Vec<f64> = [0.5, 0.1, 0.05, 0.02]
            .iter()
            .map(|s| sol.t_blow - s)
            .filter(|&t| t <= t_last)
            .chain([t_last])
            .collect();
        let rows = circle_convergence_scan(&sol, &lc, &geom, x, &ts).unwrap();
        for r in &rows {
            if let Some(env) = r.pointwise_envelope {
                assert!(
                    r.pointwise_defect <= 10.0 * env + floor,
                    "x={x}, t={}: {:e} vs {env:e}",
                    r.t,
                    r.pointwise_defect
                );
            }
            assert!(r.dist_circle <= r.dist_envelope + floor, "x={x}, t={}", r.t);
        }
        assert!(rows.last().unwrap().dist_circle < rows[0].dist_circle);
    }
}

#[test]
fn gaussian_moments_match_closed_forms() {
    for alpha in [0.3, 0.5, 1.0] {
        for t in [1.0, 1e-2, 1e-4] {
            let g = gaussian_moments(alpha, t).unwrap();
            assert!((g.zeroth / g.zeroth_closed - 1.0).abs() < 1e-10);
            assert!((g.first / g.first_closed - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn evaluation_outside_the_profile_range_is_an_error() {
    let (sol, _) = reference();
    assert!(sol.eval(1.0, sol.t_blow).is_err());
    assert!(sol.eval(sol.trace.x_max * 2.0, sol.t_blow - 1.0).is_err());
}
