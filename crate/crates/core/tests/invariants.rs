use proptest::prelude::*;
use quarantine_core::final_size::final_size;
use quarantine_core::integrate::IntegratorConfig;
use quarantine_core::oracle::{grid_search, refine_with_value};
use quarantine_core::planner::{plan, plan_corollary_sigma1_zero, CaseId};
use quarantine_core::switching::{dj_deta, dj_dt1, gradient_terms, h_of, jtilde_derivative, w_of};
use quarantine_core::{
    conserved_residual, objective, x_infinity, x_infinity_partials, EpidemicState, ModelParams,
    Problem, Schedule,
};

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (0.005..0.05f64, 1.2..3.0f64, 0.0..0.9f64, 0.1..1.0f64, 300.0..3000.0f64, 0.05..0.5f64)
        .prop_map(|(gamma, sigma0, sigma1, frac, horizon, tau_frac)| {
            let sigma2 = sigma1 + 0.1 + frac * (sigma0 - sigma1 - 0.1);
            ModelParams::new(gamma, sigma0, sigma1, sigma2.min(sigma0), horizon, tau_frac * horizon, 0.0)
                .unwrap()
        })
}

fn state_strategy() -> impl Strategy<Value = EpidemicState> {
    (0.3..0.999f64, -6.0..-1.5f64).prop_map(|(x, ly)| {
        let y = 10f64.powf(ly).min(1.0 - x);
        EpidemicState::new(x, y).unwrap()
    })
}

fn schedule_in(p: &ModelParams, a: f64, b: f64) -> Schedule {
    let eta = a * p.tau;
    Schedule { t1: b * (p.horizon - eta), eta }
}

fn baseline(sigma1: f64, tau: f64) -> Problem {
    Problem::new(
        ModelParams::new(0.01, 1.5, sigma1, 1.5, 2600.0, tau, 0.0).unwrap(),
        EpidemicState::new(1.0 - 1e-6, 1e-6).unwrap(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn final_size_partials_match_differences(s in state_strategy(), sigma0 in 1.1..4.0f64) {
        let p = ModelParams::new(0.01, sigma0, 0.0, sigma0, 100.0, 10.0, 0.0).unwrap();
        let (dx, dy) = x_infinity_partials(&p, &s).unwrap();
        let (hx, hy) = (1e-6, 1e-4 * s.y);
        let fx = (final_size(sigma0, s.x + hx, s.y).unwrap() - final_size(sigma0, s.x - hx, s.y).unwrap()) / (2.0 * hx);
        let fy = (final_size(sigma0, s.x, s.y + hy).unwrap() - final_size(sigma0, s.x, s.y - hy).unwrap()) / (2.0 * hy);
        prop_assert!((dx - fx).abs() <= 1e-5 * dx.abs().max(1e-3), "{} {}", dx, fx);
        prop_assert!((dy - fy).abs() <= 1e-5 * dy.abs(), "{} {}", dy, fy);
    }

    #[test]
    fn final_size_below_threshold_and_state(s in state_strategy(), sigma0 in 1.1..4.0f64) {
        let p = ModelParams::new(0.01, sigma0, 0.0, sigma0, 100.0, 10.0, 0.0).unwrap();
        let xi = x_infinity(&p, &s).unwrap();
        prop_assert!(xi > 0.0 && xi < 1.0 / sigma0);
        prop_assert!(xi <= s.x);
        let more = final_size(sigma0, s.x, s.y * 1.01).unwrap();
        prop_assert!(more < xi);
    }

    #[test]
    fn first_integral_holds_per_segment(p in params_strategy(), s in state_strategy(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let prob = Problem::new(p, s).unwrap();
        let traj = prob.trajectory(&schedule_in(&p, a, b)).unwrap();
        for k in 0..traj.segments.len() {
            prop_assert!(conserved_residual(&traj, k) <= 1e-9);
        }
    }

    #[test]
    fn segment_integrals_match_reciprocal_infected(p in params_strategy(), s in state_strategy(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let prob = Problem::new(p, s).unwrap();
        let pass = prob.passage(&schedule_in(&p, a, b)).unwrap();
        for seg in &pass.segments {
            let i = seg.integrals.for_sigma(&p, seg.sigma).unwrap();
            let lhs = 1.0 / seg.entry.y - 1.0 / seg.exit.y;
            let scale = (1.0 / seg.entry.y).max(1.0 / seg.exit.y);
            prop_assert!((lhs - p.gamma * i).abs() <= 1e-8 * scale, "{} {}", lhs, p.gamma * i);
        }
    }

    #[test]
    fn no_quarantine_ignores_start(p in params_strategy(), s in state_strategy(), t in 0.0..1.0f64, kappa in 0.0..1e-3f64) {
        let prob = Problem::new(ModelParams { kappa, ..p }, s).unwrap();
        let a = objective(&prob, &Schedule { t1: 0.0, eta: 0.0 }).unwrap();
        let b = objective(&prob, &Schedule { t1: t * p.horizon, eta: 0.0 }).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rk4_converges_at_fourth_order(p in params_strategy(), s in state_strategy(), a in 0.1..0.9f64, b in 0.1..0.9f64) {
        let sched = schedule_in(&p, a, b);
        let at = |n: usize| {
            let cfg = IntegratorConfig { max_step: Some(p.horizon), min_steps_per_segment: n, tolerance: 1e-9 };
            Problem::with_integrator(p, s, cfg).unwrap().trajectory(&sched).unwrap().at_horizon()
        };
        let reference = at(3200);
        let e1 = (at(50).y - reference.y).abs();
        let e2 = (at(100).y - reference.y).abs();
        prop_assume!(e2 > 1e-13 * reference.y.max(1e-3));
        prop_assert!((e1 / e2).log2() >= 3.5, "order {}", (e1 / e2).log2());
    }

    #[test]
    fn gradient_matches_differences(p in params_strategy(), kappa in 0.0..1e-4f64, a in 0.1..0.9f64, b in 0.1..0.9f64) {
        let prob = Problem::new(ModelParams { kappa, ..p }, EpidemicState::new(0.99, 0.01).unwrap()).unwrap();
        let s = schedule_in(&p, a, b);
        let h = 1e-2 / p.gamma * 0.01;
        let j = |t1: f64, eta: f64| objective(&prob, &Schedule { t1, eta }).unwrap();
        let fd_t = (j(s.t1 + h, s.eta) - j(s.t1 - h, s.eta)) / (2.0 * h);
        let fd_e = (j(s.t1, s.eta + h) - j(s.t1, s.eta - h)) / (2.0 * h);
        let dt = dj_dt1(&prob, &s).unwrap();
        let de = dj_deta(&prob, &s).unwrap();
        prop_assert!((dt - fd_t).abs() <= 1e-4 * fd_t.abs() + 1e-11, "{} {}", dt, fd_t);
        prop_assert!((de - fd_e).abs() <= 1e-4 * fd_e.abs() + 1e-11, "{} {}", de, fd_e);
    }

    #[test]
    fn refine_never_decreases(a in 0.0..1.0f64, b in 0.0..1.0f64, r in 0.1..100.0f64) {
        let prob = baseline(0.3, 150.0);
        let seed = schedule_in(&prob.params, a, b);
        let j0 = objective(&prob, &seed).unwrap();
        let (s, j) = refine_with_value(&prob, seed, r).unwrap();
        prop_assert!(j >= j0);
        prop_assert!(s.validate(&prob.params).is_ok());
    }

    #[test]
    fn threshold_form_matches_plan(sigma0 in 1.3..2.5f64, tau in 10.0..500.0f64, x0 in 0.5..0.999f64) {
        let prob = Problem::new(
            ModelParams::new(0.01, sigma0, 0.0, sigma0, 2600.0, tau, 0.0).unwrap(),
            EpidemicState::new(x0, 1e-4).unwrap(),
        ).unwrap();
        let a = plan(&prob).unwrap();
        let b = plan_corollary_sigma1_zero(&prob).unwrap();
        prop_assert_eq!(a.case_id, b.case_id);
        prop_assert!((a.t_star - b.t_star).abs() <= 1e-3, "{} {}", a.t_star, b.t_star);
        prop_assert!((a.eta_star - b.eta_star).abs() <= 1e-3);
    }

    #[test]
    fn reciprocal_identity_on_last_stretch(sigma1 in 0.0..0.9f64, u in 0.0..1.0f64) {
        // σ2 = σ0, κ = 0: γ·y(T)·(w − 1/(γ·y(t))) = γ(σ0 − σ1)·h − 1
        let prob = baseline(sigma1, 200.0);
        let t = 2400.0 + 200.0 * u;
        let g = gradient_terms(&prob, &Schedule { t1: t, eta: 2600.0 - t }).unwrap();
        let lhs = 0.01 * g.y_end * (w_of(&prob, t).unwrap() - 1.0 / (0.01 * g.y1));
        let rhs = 0.01 * (1.5 - sigma1) * h_of(&prob, t).unwrap() - 1.0;
        prop_assert!((lhs - rhs).abs() <= 1e-8, "{} {}", lhs, rhs);
    }
}

#[test]
fn h_decreases_to_zero() {
    let prob = baseline(0.3, 200.0);
    let values: Vec<f64> = (0..=20).map(|k| h_of(&prob, 2400.0 + 10.0 * k as f64).unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(*values.last().unwrap(), 0.0);
}

#[test]
fn border_derivative_changes_sign_once() {
    let prob = baseline(0.0, 60.0);
    let signs: Vec<f64> = (0..=130)
        .map(|k| jtilde_derivative(&prob, 20.0 * k as f64).unwrap())
        .map(|d| {
            assert!(d.prefactor > 0.0);
            d.sign_carrier.signum()
        })
        .collect();
    let changes: Vec<usize> = (1..signs.len()).filter(|&k| signs[k] != signs[k - 1]).collect();
    assert_eq!(changes.len(), 1);
    let t = 20.0 * changes[0] as f64;
    assert!(t > 2527.1 && t - 20.0 < 2527.1);
}

#[test]
fn case_sequence_is_monotone_in_tau() {
    for sigma1 in [0.0, 0.3] {
        let cases: Vec<CaseId> = (1..=30)
            .map(|k| plan(&baseline(sigma1, 15.0 * k as f64)).unwrap().case_id)
            .collect();
        assert!(cases.windows(2).all(|w| w[0] <= w[1]), "{cases:?}");
        assert_eq!(cases[0], CaseId::Interior);
        assert_eq!(*cases.last().unwrap(), CaseId::Shortened);
    }
}

#[test]
fn shortened_start_does_not_depend_on_tau() {
    let starts: Vec<f64> = [240.0, 300.0, 400.0, 800.0, 2000.0]
        .iter()
        .map(|&tau| {
            let r = plan(&baseline(0.0, tau)).unwrap();
            assert_eq!(r.case_id, CaseId::Shortened);
            r.t_star
        })
        .collect();
    for t in &starts {
        assert!((t - starts[0]).abs() < 1e-6, "{starts:?}");
    }
}

#[test]
fn oracle_argmax_lies_on_upper_border() {
    for (sigma1, tau) in [(0.0, 50.0), (0.0, 150.0), (0.0, 300.0), (0.3, 40.0), (0.3, 200.0), (0.5, 100.0)] {
        let prob = baseline(sigma1, tau);
        let g = grid_search(&prob, 80, 16).unwrap();
        let on_border = g.best.eta == tau || (g.best.t1 + g.best.eta - 2600.0).abs() < 1e-9;
        assert!(on_border, "sigma1={sigma1} tau={tau}: {:?}", g.best);
    }
}

#[test]
fn grid_argmax_converges_with_resolution() {
    let prob = baseline(0.3, 100.0);
    let coarse = grid_search(&prob, 100, 25).unwrap();
    let fine = grid_search(&prob, 200, 50).unwrap();
    let opt = plan(&prob).unwrap().diagnostics["J*"];
    assert!(fine.best_value >= coarse.best_value - 1e-12);
    assert!(opt - fine.best_value <= opt - coarse.best_value + 1e-12);
    assert!(opt >= fine.best_value - 1e-12);
}
