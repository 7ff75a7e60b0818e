use quarantine_core::oracle::{maximize, refine_with_value};
use quarantine_core::planner::{
    check_kappa_condition, kappa_survey, plan, plan_corollary_sigma1_zero, CaseId, KappaCondition,
    PlanOptions, PlanPath,
};
use quarantine_core::pmp::{verify_necessary_conditions, Lambda3Rule};
use quarantine_core::switching::{alpha_of, dj_deta, dj_dt1, gradient_terms, kappa_bound, w_of};
use quarantine_core::{EpidemicState, Error, ModelParams, Problem, Schedule};

fn problem(sigma0: f64, sigma1: f64, sigma2: f64, horizon: f64, tau: f64, kappa: f64) -> Problem {
    Problem::new(
        ModelParams::new(0.01, sigma0, sigma1, sigma2, horizon, tau, kappa).unwrap(),
        EpidemicState::new(1.0 - 1e-6, 1e-6).unwrap(),
    )
    .unwrap()
}

fn baseline(tau: f64) -> Problem {
    problem(1.5, 0.0, 1.5, 2600.0, tau, 0.0)
}

#[test]
fn joint_value_at_tilde_duration_is_reciprocal_infected() {
    let p = baseline(212.2);
    let joint = p.params.joint();
    let w = w_of(&p, joint).unwrap();
    let y = gradient_terms(&p, &Schedule { t1: joint, eta: 212.2 }).unwrap().y1;
    let target = 1.0 / (0.01 * y);
    assert!((w - target).abs() <= 0.01 * target, "{w} vs {target}");
}

#[test]
fn costly_joint_values_cross_at_tilde_duration() {
    let p = problem(2.2, 0.3, 1.5, 3200.0, 285.4, 1e-5);
    let joint = p.params.joint();
    let w = w_of(&p, joint).unwrap();
    let a = alpha_of(&p, joint).unwrap();
    assert!((w - a).abs() <= 0.01 * a, "{w} vs {a}");
}

#[test]
fn t1_derivative_vanishes_at_interior_optimum() {
    let p = baseline(60.0);
    let r = plan(&p).unwrap();
    let at = dj_dt1(&p, &r.schedule()).unwrap();
    let off = dj_dt1(&p, &Schedule { t1: r.t_star - 20.0, eta: 60.0 }).unwrap();
    assert!(at.abs() < 1e-8 * off.abs(), "{at} {off}");
}

#[test]
fn cost_above_bound_makes_eta_derivative_negative() {
    let mut p = baseline(60.0);
    let s = Schedule { t1: 2000.0, eta: 30.0 };
    let bound = kappa_bound(&p, &s).unwrap();
    p.params.kappa = 1.5 * bound;
    assert!(dj_deta(&p, &s).unwrap() < 0.0);
    p.params.kappa = 0.5 * bound;
    assert!(dj_deta(&p, &s).unwrap() > 0.0);
}

#[test]
fn kappa_classification() {
    assert_eq!(check_kappa_condition(&baseline(60.0)).unwrap(), KappaCondition::AlwaysPositive);

    let mut p = problem(1.5, 0.3, 1.5, 2600.0, 100.0, 1e-12);
    assert_eq!(check_kappa_condition(&p).unwrap(), KappaCondition::AlwaysPositive);
    p.params.kappa = 10.0 * kappa_survey(&p, &PlanOptions::default()).unwrap().max_bound;
    assert_eq!(check_kappa_condition(&p).unwrap(), KappaCondition::AlwaysNegative);

    // published as satisfying the condition everywhere; the sign flips inside R
    let costly = problem(2.2, 0.3, 1.5, 3200.0, 50.0, 1e-5);
    assert_eq!(check_kappa_condition(&costly).unwrap(), KappaCondition::Mixed);
    assert!(dj_deta(&costly, &Schedule { t1: 1000.0, eta: 50.0 }).unwrap() < 0.0);
}

#[test]
fn costly_configuration_is_certified_on_the_border() {
    let p = problem(2.2, 0.3, 1.5, 3200.0, 180.0, 1e-5);
    let r = plan(&p).unwrap();
    assert_eq!(r.path, PlanPath::CertifiedBorder);
    assert_eq!(r.case_id, CaseId::Joint);
    assert_eq!(r.t_star, 3020.0);
    assert!(r.diagnostics["w(0)"] < 0.0);
}

#[test]
fn interior_optimum_is_refused() {
    let p = problem(1.5, 0.3, 1.5, 2600.0, 100.0, 5.6e-4);
    match plan(&p) {
        Err(Error::TheoremInapplicable(msg)) => assert!(msg.contains("interior")),
        other => panic!("expected refusal, got {other:?}"),
    }
    let o = maximize(&p, 100, 40).unwrap();
    assert!(o.refined.eta < 100.0 && o.refined.t1 + o.refined.eta < 2600.0 - 1e-3, "{:?}", o.refined);
}

#[test]
fn threshold_inclusion_at_joint() {
    // x(T−τ) just above 1/σ0: joint case on both paths
    let p = baseline(73.0);
    let a = plan(&p).unwrap();
    let b = plan_corollary_sigma1_zero(&p).unwrap();
    assert_eq!((a.case_id, a.t_star), (CaseId::Joint, 2527.0));
    assert_eq!((b.case_id, b.t_star), (CaseId::Joint, 2527.0));
    assert!(b.diagnostics["x(T-tau)"] > 1.0 / 1.5);
}

#[test]
fn refined_interior_seed_is_stationary_or_on_boundary() {
    let p = problem(1.5, 0.3, 1.5, 2600.0, 150.0, 0.0);
    let (s, _) = refine_with_value(&p, Schedule { t1: 1500.0, eta: 70.0 }, 100.0).unwrap();
    let on_boundary = s.eta >= 150.0 - 1e-9 || s.t1 + s.eta >= 2600.0 - 1e-9 || s.t1 <= 1e-9 || s.eta <= 1e-9;
    if !on_boundary {
        let scale = dj_dt1(&p, &Schedule { t1: 2000.0, eta: 70.0 }).unwrap().abs();
        assert!(dj_dt1(&p, &s).unwrap().abs() <= 1e-6 * scale);
    }
    assert!(on_boundary, "{s:?}");
}

#[test]
fn shortened_optimum_leaves_multiplier_at_zero() {
    let p = baseline(260.0);
    let r = plan(&p).unwrap();
    let rep = verify_necessary_conditions(&p, &r.schedule()).unwrap();
    assert!(!rep.duration_bound_active);
    assert_eq!(rep.lambda3_rule, Lambda3Rule::Inactive);
    assert!(rep.passed, "{rep:?}");
    assert_eq!(rep.complementarity_residual, 0.0);
}

#[test]
fn costly_optima_satisfy_necessary_conditions() {
    for tau in [50.0, 180.0, 340.0] {
        let p = problem(2.2, 0.3, 1.5, 3200.0, tau, 1e-5);
        let r = plan(&p).unwrap();
        let rep = verify_necessary_conditions(&p, &r.schedule()).unwrap();
        assert!(rep.passed && rep.singular_arc_free, "tau = {tau}: {rep:?}");
    }
}
