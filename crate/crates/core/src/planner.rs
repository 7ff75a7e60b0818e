//! Optimal `(t*, η)` from the signs and crossings of the switching functions.
//!
//! When `∂J/∂η > 0` on all of `R` the optimum lies on the upper border `P`
//! (`η = τ` up to `T−τ`, then `η = T − t1`). Along `P` the derivative of `J`
//! has the sign of `w` on `[0, T−τ)` and of `w − α` on `(T−τ, T]`, so every
//! local maximum of `J` on `P` is one of:
//!
//! 1. `t1 = 0` when `w(0) ≤ 0`,
//! 2. a downward zero `t̄` of `w` in `(0, T−τ]`,
//! 3. `t1 = T−τ` when `0 < w(T−τ) ≤ α(T−τ)`,
//! 4. a downward zero `t̃` of `w − α` in `(T−τ, T)`.
//!
//! In the classical regime exactly one of them exists. Otherwise the
//! candidate with the largest `J` is returned.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{run_constant, IntegratorConfig};
use crate::model::Schedule;
use crate::problem::{objective, Problem};
use crate::roots::bisect;
use crate::switching::{
    alpha_of, dj_deta, gradient_terms, jtilde_derivative, kappa_bound_from_terms, GradientTerms,
};

pub const DEAD_BAND: f64 = 1e-10;

/// Sign of `∂J/∂η` over `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KappaCondition {
    AlwaysPositive,
    AlwaysNegative,
    Mixed,
}

/// Grid survey of `∂J/∂η` over `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaSurvey {
    pub condition: KappaCondition,
    /// Extremes of the margin `κ̄(t1, η) − κ`, where `κ̄` is the bound at which `∂J/∂η` vanishes.
    pub min_margin: f64,
    pub max_margin: f64,
    /// Largest `κ̄` on the grid.
    pub max_bound: f64,
    /// Grid point with the largest `J`.
    pub best: Schedule,
    pub best_value: f64,
    /// `false` when the condition follows from the parameters alone.
    pub sampled: bool,
}

/// Case that produced a plan. Serialized as `"1"`..`"4"` or `"kappa-large"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseId {
    #[serde(rename = "1")]
    Immediate,
    #[serde(rename = "2")]
    Interior,
    #[serde(rename = "3")]
    Joint,
    #[serde(rename = "4")]
    Shortened,
    #[serde(rename = "kappa-large")]
    KappaLarge,
}

impl CaseId {
    pub fn number(self) -> Option<u8> {
        match self {
            CaseId::Immediate => Some(1),
            CaseId::Interior => Some(2),
            CaseId::Joint => Some(3),
            CaseId::Shortened => Some(4),
            CaseId::KappaLarge => None,
        }
    }

    /// Four-case rule on the values at `0` and `T−τ`, ties to the lower case.
    pub fn from_signs(w0: f64, w_joint: f64, alpha_joint: f64, dead_band: f64) -> CaseId {
        if w0 <= dead_band {
            CaseId::Immediate
        } else if w_joint <= dead_band {
            CaseId::Interior
        } else if w_joint - alpha_joint <= dead_band {
            CaseId::Joint
        } else {
            CaseId::Shortened
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.number() {
            Some(n) => write!(f, "{n}"),
            None => f.write_str("kappa-large"),
        }
    }
}

/// How a plan was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanPath {
    /// `∂J/∂η` has one sign on `R`.
    Theorem,
    /// `∂J/∂η` changes sign on `R`, but is non-negative at the border optimum
    /// and no survey grid point beats it.
    CertifiedBorder,
    /// Threshold form for `σ1 = 0`, `σ2 = σ0`, `κ = 0`.
    Corollary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub t_star: f64,
    pub eta_star: f64,
    pub case_id: CaseId,
    pub path: PlanPath,
    pub kappa_condition: KappaCondition,
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl PlanResult {
    pub fn schedule(&self) -> Schedule {
        Schedule {
            t1: self.t_star,
            eta: self.eta_star,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    pub survey_t1: usize,
    pub survey_eta: usize,
    /// Survey step bound in units of `1/γ`; sign classification needs less accuracy.
    pub survey_step_ratio: f64,
    pub survey_min_steps: usize,
    /// Scan points on `[0, T−τ]`; `(T−τ, T]` gets half as many.
    pub scan_points: usize,
    pub root_tolerance: f64,
    pub dead_band: f64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            survey_t1: 64,
            survey_eta: 64,
            survey_step_ratio: 0.05,
            survey_min_steps: 200,
            scan_points: 192,
            root_tolerance: 1e-7,
            dead_band: DEAD_BAND,
        }
    }
}

fn band(v: f64, dead_band: f64) -> f64 {
    if v.abs() <= dead_band {
        0.0
    } else {
        v
    }
}

/// Classifies the sign of `∂J/∂η` on `R`.
pub fn check_kappa_condition(problem: &Problem) -> Result<KappaCondition> {
    Ok(kappa_survey(problem, &PlanOptions::default())?.condition)
}

/// Samples `κ̄ − κ` and `J` on the uniform `survey_t1 × survey_eta` grid over `R`.
///
/// With `κ = 0` and `σ2 = σ0` the sign is positive for every schedule and no
/// sampling is done.
pub fn kappa_survey(problem: &Problem, opts: &PlanOptions) -> Result<KappaSurvey> {
    let p = &problem.params;
    if p.kappa == 0.0 && p.sigma2_is_sigma0() {
        return Ok(KappaSurvey {
            condition: KappaCondition::AlwaysPositive,
            min_margin: f64::NAN,
            max_margin: f64::NAN,
            max_bound: f64::NAN,
            best: Schedule::on_border(p, p.joint()),
            best_value: f64::NAN,
            sampled: false,
        });
    }
    let (n1, ne) = (opts.survey_t1.max(2), opts.survey_eta.max(2));
    let coarse = Problem {
        integrator: IntegratorConfig {
            max_step: Some(opts.survey_step_ratio / p.gamma),
            min_steps_per_segment: opts.survey_min_steps,
            ..problem.integrator
        },
        ..*problem
    };
    let points: Vec<Schedule> = (0..ne)
        .flat_map(|j| {
            let eta = p.tau * j as f64 / (ne - 1) as f64;
            (0..n1).map(move |i| Schedule {
                t1: (p.horizon - eta) * i as f64 / (n1 - 1) as f64,
                eta,
            })
        })
        .collect();
    let samples: Vec<(f64, f64)> = points
        .par_iter()
        .map(|s| {
            let g = gradient_terms(&coarse, s)?;
            let bound = kappa_bound_from_terms(&coarse, &g);
            Ok((bound, g.x_inf + p.running_cost(s.eta)))
        })
        .collect::<Result<_>>()?;

    let mut survey = KappaSurvey {
        condition: KappaCondition::Mixed,
        min_margin: f64::INFINITY,
        max_margin: f64::NEG_INFINITY,
        max_bound: f64::NEG_INFINITY,
        best: points[0],
        best_value: f64::NEG_INFINITY,
        sampled: true,
    };
    let (mut pos, mut neg) = (0usize, 0usize);
    for (s, &(bound, j)) in points.iter().zip(&samples) {
        let margin = bound - p.kappa;
        survey.min_margin = survey.min_margin.min(margin);
        survey.max_margin = survey.max_margin.max(margin);
        survey.max_bound = survey.max_bound.max(bound);
        match band(margin, opts.dead_band) {
            m if m > 0.0 => pos += 1,
            m if m < 0.0 => neg += 1,
            _ => {}
        }
        if j > survey.best_value {
            survey.best = *s;
            survey.best_value = j;
        }
    }
    survey.condition = if neg == 0 && pos > 0 {
        KappaCondition::AlwaysPositive
    } else if pos == 0 && neg > 0 {
        KappaCondition::AlwaysNegative
    } else {
        KappaCondition::Mixed
    };
    Ok(survey)
}

pub fn plan(problem: &Problem) -> Result<PlanResult> {
    plan_with(problem, &PlanOptions::default())
}

pub fn plan_with(problem: &Problem, opts: &PlanOptions) -> Result<PlanResult> {
    let survey = kappa_survey(problem, opts)?;
    let mut diagnostics = BTreeMap::new();
    if survey.sampled {
        diagnostics.insert("kappa_margin_min".to_string(), survey.min_margin);
        diagnostics.insert("kappa_margin_max".to_string(), survey.max_margin);
    }

    if survey.condition == KappaCondition::AlwaysNegative {
        let s = Schedule { t1: 0.0, eta: 0.0 };
        diagnostics.insert("J*".to_string(), objective(problem, &s)?);
        return Ok(PlanResult {
            t_star: 0.0,
            eta_star: 0.0,
            case_id: CaseId::KappaLarge,
            path: PlanPath::Theorem,
            kappa_condition: survey.condition,
            diagnostics,
            notes: vec!["dJ/deta < 0 on R: no hard quarantine".to_string()],
        });
    }

    let mut result = plan_border(problem, opts, diagnostics)?;
    result.kappa_condition = survey.condition;
    if !survey.sampled {
        result
            .notes
            .push("kappa = 0 and sigma2 = sigma0: dJ/deta > 0 on R without sampling".to_string());
    }
    if survey.condition == KappaCondition::Mixed {
        // moving off the border means shortening the quarantine
        let inward = dj_deta(problem, &result.schedule())?;
        result.diagnostics.insert("dJ/deta*".to_string(), inward);
        if inward < -opts.dead_band {
            return Err(Error::TheoremInapplicable(format!(
                "dJ/deta changes sign on R and is {inward:.3e} < 0 at the border optimum \
                 (t1 = {}, eta = {}), so J increases into the interior",
                result.t_star, result.eta_star
            )));
        }
        let border_value = result.diagnostics["J*"];
        let grid_value = objective(problem, &survey.best)?;
        result.diagnostics.insert("grid_best_J".to_string(), grid_value);
        if grid_value > border_value + 1e-10 {
            return Err(Error::TheoremInapplicable(format!(
                "dJ/deta changes sign on R and grid point (t1 = {}, eta = {}) has J = {grid_value} \
                 above the border optimum {border_value}",
                survey.best.t1, survey.best.eta
            )));
        }
        result.path = PlanPath::CertifiedBorder;
        result.notes.push(format!(
            "dJ/deta changes sign on R (margin in [{:.3e}, {:.3e}]); border optimum beats every survey grid point",
            survey.min_margin, survey.max_margin
        ));
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    t1: f64,
    eta: f64,
    case: CaseId,
}

/// Sign carrier of `dJ̃/dt1`, with the right-hand version at `T−τ` when `right`.
fn carrier(problem: &Problem, t: f64, right: bool) -> Result<f64> {
    let p = &problem.params;
    if right && t <= p.joint() {
        let g = gradient_terms(problem, &Schedule { t1: p.joint(), eta: p.tau })?;
        return Ok(w_minus_alpha(problem, &g));
    }
    Ok(jtilde_derivative(problem, t)?.sign_carrier)
}

fn w_minus_alpha(problem: &Problem, g: &GradientTerms) -> f64 {
    let p = &problem.params;
    let i0 = g.hard_integral(problem, p.sigma0);
    let i2 = g.hard_integral(problem, p.sigma2);
    let w = i0 - i2 + i2 * g.after_factor(problem);
    let correction = p.kappa * (1.0 - p.sigma0 * g.x_inf) / (p.gamma * g.y_end * g.x_inf);
    w - (1.0 - correction) / (p.gamma * g.y1)
}

/// Downward crossings of `f` on a sampled grid, refined by bisection.
fn downward_zeros(
    what: &str,
    f: &(dyn Fn(f64) -> Result<f64> + Sync),
    grid: &[f64],
    values: &[f64],
    tol: f64,
    dead_band: f64,
) -> Result<Vec<f64>> {
    let mut roots = Vec::new();
    for k in 1..grid.len() {
        if values[k - 1] > 0.0 && values[k] <= 0.0 {
            let g = |t: f64| Ok(band(f(t)?, dead_band));
            roots.push(bisect(what, g, grid[k - 1], grid[k], tol)?);
        }
    }
    Ok(roots)
}

fn sample(f: &(dyn Fn(f64) -> Result<f64> + Sync), grid: &[f64], dead_band: f64) -> Result<Vec<f64>> {
    grid.par_iter().map(|&t| Ok(band(f(t)?, dead_band))).collect()
}

fn sign_changes(values: &[f64]) -> usize {
    let signs: Vec<f64> = values.iter().filter(|v| **v != 0.0).map(|v| v.signum()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn plan_border(
    problem: &Problem,
    opts: &PlanOptions,
    mut diagnostics: BTreeMap<String, f64>,
) -> Result<PlanResult> {
    let p = &problem.params;
    let (joint, horizon) = (p.joint(), p.horizon);
    let n = opts.scan_points.max(4);
    let m = (n / 2).max(4);
    let left_grid: Vec<f64> = (0..=n).map(|i| joint * i as f64 / n as f64).collect();
    let right_grid: Vec<f64> = (0..=m).map(|k| joint + p.tau * k as f64 / m as f64).collect();
    let left_f = |t: f64| carrier(problem, t, false);
    let right_f = |t: f64| carrier(problem, t, true);
    let left = sample(&left_f, &left_grid, opts.dead_band)?;
    let right = sample(&right_f, &right_grid, opts.dead_band)?;

    let w0 = left[0];
    let w_joint = left[n];
    let alpha_joint = alpha_of(problem, joint)?;
    diagnostics.insert("w(0)".to_string(), w0);
    diagnostics.insert("w(T-tau)".to_string(), w_joint);
    diagnostics.insert("alpha(T-tau)".to_string(), alpha_joint);

    let mut candidates = Vec::new();
    if w0 <= 0.0 {
        candidates.push(Candidate { t1: 0.0, eta: p.tau, case: CaseId::Immediate });
    }
    for t in downward_zeros("w = 0", &left_f, &left_grid, &left, opts.root_tolerance, opts.dead_band)? {
        candidates.push(Candidate { t1: t, eta: p.tau, case: CaseId::Interior });
    }
    if w_joint > 0.0 && right[0] <= 0.0 {
        candidates.push(Candidate { t1: joint, eta: p.tau, case: CaseId::Joint });
    }
    for t in downward_zeros("w = alpha", &right_f, &right_grid, &right, opts.root_tolerance, opts.dead_band)? {
        candidates.push(Candidate { t1: t, eta: horizon - t, case: CaseId::Shortened });
    }
    if right[m] > 0.0 {
        candidates.push(Candidate { t1: horizon, eta: 0.0, case: CaseId::Shortened });
    }

    let mut best: Option<(Candidate, f64)> = None;
    for c in &candidates {
        let j = objective(problem, &Schedule { t1: c.t1, eta: c.eta })?;
        if best.map_or(true, |(_, bj)| j > bj) {
            best = Some((*c, j));
        }
    }
    let (chosen, j_star) = best.ok_or_else(|| {
        Error::Internal("no local maximum of J found along the border".to_string())
    })?;

    diagnostics.insert("J*".to_string(), j_star);
    diagnostics.insert("candidates".to_string(), candidates.len() as f64);
    match chosen.case {
        CaseId::Interior => {
            diagnostics.insert("t_bar".to_string(), chosen.t1);
        }
        CaseId::Shortened => {
            diagnostics.insert("t_tilde".to_string(), chosen.t1);
        }
        _ => {}
    }

    let mut notes = Vec::new();
    let changes = sign_changes(&left);
    if changes > 1 {
        notes.push(format!("w changes sign {changes} times on [0, T-tau]"));
    }
    if candidates.len() > 1 {
        notes.push(format!(
            "{} local maxima of J along the border; largest J kept",
            candidates.len()
        ));
    }
    let by_signs = CaseId::from_signs(w0, w_joint, alpha_joint, opts.dead_band);
    if by_signs != chosen.case {
        notes.push(format!(
            "four-case rule on w(0), w(T-tau), alpha(T-tau) gives case {by_signs}, border optimum is case {}",
            chosen.case
        ));
    }
    if chosen.eta == 0.0 {
        notes.push("J increases up to T along the border: no hard quarantine".to_string());
    }

    Ok(PlanResult {
        t_star: chosen.t1,
        eta_star: chosen.eta,
        case_id: chosen.case,
        path: PlanPath::Theorem,
        kappa_condition: KappaCondition::AlwaysPositive,
        diagnostics,
        notes,
    })
}

/// Threshold form of the plan for `σ1 = 0`, `σ2 = σ0`, `κ = 0`.
///
/// Before the quarantine the trajectory is uncontrolled, so the cases follow
/// from where the decreasing `x(t)` crosses `1/σ0` and
/// `1/(σ0(1 − e^{−γs}))` with `s` the remaining time.
pub fn plan_corollary_sigma1_zero(problem: &Problem) -> Result<PlanResult> {
    corollary(problem, problem.params.tau)
}

/// Same thresholds with the duration bound lifted to the whole horizon.
pub fn plan_corollary_full_horizon(problem: &Problem) -> Result<PlanResult> {
    corollary(problem, problem.params.horizon)
}

fn corollary(problem: &Problem, tau: f64) -> Result<PlanResult> {
    let p = &problem.params;
    if p.sigma1 != 0.0 {
        return Err(Error::domain("sigma1", "threshold form needs sigma1 = 0"));
    }
    if !p.sigma2_is_sigma0() {
        return Err(Error::domain("sigma2", "threshold form needs sigma2 = sigma0"));
    }
    if p.kappa != 0.0 {
        return Err(Error::domain("kappa", "threshold form needs kappa = 0"));
    }
    let tol = PlanOptions::default().root_tolerance;
    let joint = p.horizon - tau;
    let x_at = |t: f64| -> Result<f64> {
        Ok(run_constant(p.gamma, p.sigma0, &problem.initial, t, &problem.integrator)?.x)
    };
    let herd = 1.0 / p.sigma0;
    let shortened = |s: f64| 1.0 / (p.sigma0 * (1.0 - (-p.gamma * s).exp()));

    let x0 = problem.initial.x;
    let x_joint = x_at(joint)?;
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("x(T-tau)".to_string(), x_joint);
    diagnostics.insert("threshold_herd".to_string(), herd);
    diagnostics.insert("threshold_joint".to_string(), shortened(tau));

    let (t_star, eta_star, case_id) = if x0 <= herd {
        (0.0, tau, CaseId::Immediate)
    } else if x_joint <= herd {
        let t = bisect("x = 1/sigma0", |t| Ok(x_at(t)? - herd), 0.0, joint, tol)?;
        diagnostics.insert("t_bar".to_string(), t);
        (t, tau, CaseId::Interior)
    } else if x_joint <= shortened(tau) {
        (joint, tau, CaseId::Joint)
    } else {
        // x(t) − threshold(T − t) increases from negative near T
        let f = |t: f64| Ok(x_at(t)? - shortened(p.horizon - t));
        let hi = p.horizon * (1.0 - 1e-12);
        let t = bisect("x = 1/(sigma0(1 - exp(-gamma s)))", f, joint, hi, tol)?;
        diagnostics.insert("t_tilde".to_string(), t);
        (t, p.horizon - t, CaseId::Shortened)
    };
    if tau < p.horizon {
        let s = Schedule { t1: t_star, eta: eta_star };
        diagnostics.insert("J*".to_string(), objective(problem, &s)?);
    }
    Ok(PlanResult {
        t_star,
        eta_star,
        case_id,
        path: PlanPath::Corollary,
        kappa_condition: KappaCondition::AlwaysPositive,
        diagnostics,
        notes: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub tau: f64,
    pub case_id: CaseId,
    pub t_star: f64,
    pub eta_star: f64,
    pub j_star: f64,
    pub path: PlanPath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeTable {
    pub rows: Vec<RegimeRow>,
    /// Largest `τ` for which `w(T−τ) ≤ 0`.
    pub tau_bar: Option<f64>,
    /// Duration at which `w(T−τ) = α(T−τ)`.
    pub tau_tilde: Option<f64>,
    /// `T − τ̃`, the start time shared by all longer bounds.
    pub t_tilde: Option<f64>,
}

fn with_tau(problem: &Problem, tau: f64) -> Result<Problem> {
    let mut q = *problem;
    q.params.tau = tau;
    q.params.validate()?;
    Ok(q)
}

/// Plans every `τ` of the grid and locates the crossover durations.
pub fn regime_boundaries(problem: &Problem, tau_grid: &[f64]) -> Result<RegimeTable> {
    let rows = tau_grid
        .par_iter()
        .map(|&tau| {
            let q = with_tau(problem, tau)?;
            let r = plan(&q)?;
            Ok(RegimeRow {
                tau,
                case_id: r.case_id,
                t_star: r.t_star,
                eta_star: r.eta_star,
                j_star: r.diagnostics["J*"],
                path: r.path,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (tau_bar, tau_tilde) = crossover_durations(problem)?;
    Ok(RegimeTable {
        rows,
        tau_bar,
        tau_tilde,
        t_tilde: tau_tilde.map(|t| problem.params.horizon - t),
    })
}

/// `(τ̄, τ̃)` from the joint values as functions of `t = T − τ`.
///
/// Scans `t` downward from `T` for the first point where `w(t) > 0`
/// (schedule `(t, T−t)`), then for the first point where `w − α > 0`.
pub fn crossover_durations(problem: &Problem) -> Result<(Option<f64>, Option<f64>)> {
    let horizon = problem.params.horizon;
    let n = 400;
    let opts = PlanOptions::default();
    let values = |t: f64| -> Result<(f64, f64)> {
        let q = with_tau(problem, horizon - t)?;
        let d = jtilde_derivative(&q, t)?;
        let g = gradient_terms(&q, &Schedule { t1: t, eta: horizon - t })?;
        let w = d.sign_carrier;
        Ok((w, w_minus_alpha(&q, &g)))
    };
    let grid: Vec<f64> = (1..n).rev().map(|k| horizon * k as f64 / n as f64).collect();
    let sampled: Vec<(f64, f64)> = grid.par_iter().map(|&t| values(t)).collect::<Result<_>>()?;

    let locate = |pick: fn((f64, f64)) -> f64| -> Result<Option<f64>> {
        for k in 1..grid.len() {
            let (a, b) = (band(pick(sampled[k - 1]), opts.dead_band), band(pick(sampled[k]), opts.dead_band));
            if a <= 0.0 && b > 0.0 {
                let f = |t: f64| Ok(pick(values(t)?));
                let t = bisect("crossover", f, grid[k], grid[k - 1], opts.root_tolerance)?;
                return Ok(Some(horizon - t));
            }
        }
        Ok(None)
    };
    Ok((locate(|v| v.0)?, locate(|v| v.1)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EpidemicState, ModelParams};

    fn baseline(tau: f64) -> Problem {
        Problem::new(
            ModelParams::new(0.01, 1.5, 0.0, 1.5, 2600.0, tau, 0.0).unwrap(),
            EpidemicState::new(1.0 - 1e-6, 1e-6).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn baseline_cases() {
        let r = plan(&baseline(60.0)).unwrap();
        assert_eq!(r.case_id, CaseId::Interior);
        assert!((r.t_star - 2527.1).abs() < 0.1, "{}", r.t_star);
        assert_eq!(r.eta_star, 60.0);

        let r = plan(&baseline(120.0)).unwrap();
        assert_eq!(r.case_id, CaseId::Joint);
        assert_eq!((r.t_star, r.eta_star), (2480.0, 120.0));

        let r = plan(&baseline(260.0)).unwrap();
        assert_eq!(r.case_id, CaseId::Shortened);
        assert!((r.t_star - 2387.8).abs() < 0.1, "{}", r.t_star);
        assert!((r.eta_star - (2600.0 - r.t_star)).abs() < 1e-12);
        assert_eq!(r.diagnostics["candidates"], 1.0);
    }

    #[test]
    fn below_threshold_starts_immediately() {
        let p = Problem::new(baseline(60.0).params, EpidemicState::new(0.6, 1e-4).unwrap()).unwrap();
        let r = plan(&p).unwrap();
        assert_eq!((r.case_id, r.t_star, r.eta_star), (CaseId::Immediate, 0.0, 60.0));
        let c = plan_corollary_sigma1_zero(&p).unwrap();
        assert_eq!((c.case_id, c.t_star), (CaseId::Immediate, 0.0));
    }

    #[test]
    fn corollary_agrees_with_plan() {
        for tau in [40.0, 100.0, 250.0] {
            let p = baseline(tau);
            let a = plan(&p).unwrap();
            let b = plan_corollary_sigma1_zero(&p).unwrap();
            assert_eq!(a.case_id, b.case_id, "tau = {tau}");
            assert!((a.t_star - b.t_star).abs() < 1e-3, "tau = {tau}");
        }
    }

    #[test]
    fn corollary_rejects_other_configurations() {
        let mut p = baseline(60.0);
        p.params.sigma1 = 0.3;
        assert!(matches!(plan_corollary_sigma1_zero(&p), Err(Error::Domain { field: "sigma1", .. })));
    }

    #[test]
    fn full_horizon_split() {
        let p = baseline(60.0);
        let r = plan_corollary_full_horizon(&p).unwrap();
        let threshold = 1.0 / (1.5 * (1.0 - (-0.01f64 * 2600.0).exp()));
        assert!(p.initial.x > threshold);
        assert_eq!(r.case_id, CaseId::Shortened);
        assert!((r.t_star - 2387.8).abs() < 0.1);
    }

    #[test]
    fn large_cost_means_no_quarantine() {
        let mut p = baseline(60.0);
        p.params.kappa = 1e-12;
        let bound = kappa_survey(&p, &PlanOptions::default()).unwrap().max_bound;
        p.params.kappa = 10.0 * bound;
        assert_eq!(check_kappa_condition(&p).unwrap(), KappaCondition::AlwaysNegative);
        let r = plan(&p).unwrap();
        assert_eq!((r.case_id, r.eta_star), (CaseId::KappaLarge, 0.0));
    }

    #[test]
    fn case_serialization() {
        assert_eq!(CaseId::Joint.to_string(), "3");
        assert_eq!(CaseId::KappaLarge.to_string(), "kappa-large");
        assert_eq!(CaseId::from_signs(1.0, 0.0, 1.0, 1e-10), CaseId::Interior);
        assert_eq!(CaseId::from_signs(1.0, 1.0, 1.0, 1e-10), CaseId::Joint);
    }

    #[test]
    fn baseline_crossovers() {
        let (tau_bar, tau_tilde) = crossover_durations(&baseline(60.0)).unwrap();
        assert!((tau_bar.unwrap() - 72.9).abs() < 0.05);
        assert!((tau_tilde.unwrap() - 212.2).abs() < 0.05);
    }
}
