mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tsvolterra::{
    bernoulli_gap, certify_rassias, cumulative_integral, defect, delta_integral, march_solve,
    picard_solve, rassias_horizon_sweep, ts_exp, Expr, GridFunction, Link, PicardOptions,
    TimeScale, VolterraProblem,
};

fn scale(seed: u64) -> TimeScale {
    common::random_scale(&mut ChaCha8Rng::seed_from_u64(seed), false)
}

fn problem(seed: u64) -> VolterraProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ts = common::random_scale(&mut rng, false);
    common::random_problem(&mut rng, ts, common::UNIT / 4.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integral_is_additive_and_linear(seed: u64, i in 0usize..1000, j in 0usize..1000, k in 0usize..1000,
                                       alpha in -5.0..5.0f64, beta in -5.0..5.0f64) {
        let ts = scale(seed);
        let grid = Arc::new(ts.build_grid(common::UNIT / 4.0).unwrap());
        let n = grid.len();
        let mut idx = [i % n, j % n, k % n];
        idx.sort_unstable();
        let [a, b, c] = idx.map(|i| grid.points()[i]);
        let g = GridFunction::from_fn(grid.clone(), |t| (2.0 * t).cos() - t).unwrap();
        let h = GridFunction::from_fn(grid.clone(), |t| 1.0 / (1.0 + t * t)).unwrap();
        let whole = delta_integral(&g, a, c).unwrap();
        let split = delta_integral(&g, a, b).unwrap() + delta_integral(&g, b, c).unwrap();
        prop_assert!((whole - split).abs() <= 1e-12);
        let combo = g.zip_with(&h, |x, y| alpha * x + beta * y).unwrap();
        let lhs = delta_integral(&combo, a, c).unwrap();
        let rhs = alpha * whole + beta * delta_integral(&h, a, c).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn integral_of_nonnegative_is_monotone(seed: u64) {
        let grid = Arc::new(scale(seed).build_grid(common::UNIT / 4.0).unwrap());
        let g = GridFunction::from_fn(grid, |t| t * t + 0.1).unwrap();
        let cum = cumulative_integral(&g);
        prop_assert!(cum.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn exponential_semigroup_and_positivity(seed: u64, p in -3.0..3.0f64, i in 0usize..100, j in 0usize..100, k in 0usize..100) {
        let ts = scale(seed);
        let grid = ts.build_grid(common::UNIT).unwrap();
        let n = grid.len();
        let [s, r, t] = [i % n, j % n, k % n].map(|i| grid.points()[i]);
        let direct = ts_exp(&ts, p, t, s).unwrap();
        let composed = ts_exp(&ts, p, t, r).unwrap() * ts_exp(&ts, p, r, s).unwrap();
        prop_assert!(direct > 0.0);
        prop_assert!(((composed - direct) / direct).abs() <= 1e-10);
        prop_assert!(bernoulli_gap(&ts, p.abs(), t).unwrap() >= -1e-12);
    }

    #[test]
    fn scaled_integers_have_closed_form(h in 0.05..2.0f64, n in 1usize..30, p in 0.0..4.0f64) {
        let ts = TimeScale::uniform(h, n).unwrap();
        for k in 0..=n {
            let t = k as f64 * h;
            let e = ts_exp(&ts, p, t, 0.0).unwrap();
            let want = (1.0 + h * p).powi(k as i32);
            prop_assert!(((e - want) / want).abs() <= 1e-12);
        }
    }

    #[test]
    fn forward_jump_is_monotone(seed: u64) {
        let ts = scale(seed);
        let grid = ts.build_grid(common::UNIT / 2.0).unwrap();
        let sigmas: Vec<f64> = grid.points().iter().map(|&t| ts.sigma(t).unwrap()).collect();
        prop_assert!(sigmas.windows(2).all(|w| w[1] >= w[0]));
        for (&t, &s) in grid.points().iter().zip(&sigmas) {
            prop_assert!(s >= t);
        }
    }

    #[test]
    fn grid_links_follow_components(seed: u64) {
        let ts = scale(seed);
        let grid = ts.build_grid(common::UNIT / 2.0).unwrap();
        let p = grid.points();
        for (j, link) in grid.links().iter().enumerate() {
            prop_assert!(p[j + 1] > p[j]);
            let same = ts.components().iter().any(|c| {
                matches!(c, tsvolterra::Component::Interval { lo, hi } if *lo <= p[j] && p[j + 1] <= *hi)
            });
            prop_assert_eq!(*link == Link::Continuous, same);
        }
    }

    #[test]
    fn time_scale_json_round_trips(seed: u64) {
        let ts = scale(seed);
        let text = serde_json::to_string(&ts).unwrap();
        let back: TimeScale = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, ts);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn solvers_agree_and_gaps_obey_estimate(seed: u64) {
        let p = problem(seed);
        let march = march_solve(&p).unwrap().phi;
        let zero = GridFunction::zeros(p.grid().clone());
        let opts = PicardOptions::for_problem(&p);
        let (pic, report) = picard_solve(&p, &zero, opts).unwrap();
        let allowance = p.quadrature_allowance().unwrap();
        let scale = march.sup_norm().max(1.0);
        let diff = march.zip_with(&pic.phi, |x, y| (x - y).abs()).unwrap().sup_norm();
        prop_assert!(diff <= 2.0 * (opts.tol * scale + allowance), "diff {}", diff);
        prop_assert!(report.max_bound_excess() <= allowance + 1e-12 * scale);

        let (eps, _) = defect(&p, &pic.phi).unwrap();
        prop_assert!(eps <= opts.tol * (1.0 + p.m() * (p.b() - p.a())), "defect {}", eps);
    }

    #[test]
    fn rassias_constant_grows_with_horizon(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ts = common::random_scale(&mut rng, true);
        let p = VolterraProblem::from_strs(ts, common::UNIT / 4.0, "1", "0.3*cos(t - s)").unwrap();
        let omega: Expr = "exp(2*(t + 1))".parse().unwrap();
        let psi: Expr = "0".parse().unwrap();
        let (a, b) = (p.a(), p.b());
        let mut horizons: Vec<f64> = p.grid().points().iter().copied()
            .filter(|&t| t > a).step_by(3).collect();
        if horizons.last() != Some(&b) {
            horizons.push(b);
        }
        let full_omega = GridFunction::from_expr(p.grid().clone(), &omega).unwrap();
        let zero = GridFunction::zeros(p.grid().clone());
        let full = certify_rassias(&p, &zero, &full_omega, 1e-10).unwrap();
        let sweep = rassias_horizon_sweep(&p, &psi, &omega, &horizons, 1e-10).unwrap();
        for cert in sweep {
            prop_assert!(cert.c <= full.c + 1e-12);
        }
    }
}
