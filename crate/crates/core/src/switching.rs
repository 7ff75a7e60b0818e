//! Switching functions and the closed-form gradient of `J(t1, η)`.
//!
//! Every quantity here is assembled from one [`Passage`]: the states at the
//! jump times and the co-integrated segment integrals
//! `∫(σref·x − 1)/y` and `∫x/y`.
//!
//! Along the upper border `P` of the admissible region the sign of
//! `dJ̃/dt1` is carried by `w(t)` on `[0, T−τ)` and by `w(t) − α(t)` on
//! `(T−τ, T]`, with a strictly positive prefactor.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::final_size::final_size;
use crate::integrate::{Passage, SwitchIntegrals};
use crate::model::Schedule;
use crate::problem::Problem;
use crate::roots::bisect;

/// Scalars of one run that enter the derivative formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientTerms {
    pub x_inf: f64,
    /// `y(t1)`
    pub y1: f64,
    /// `y(t1 + η)`
    pub y2: f64,
    /// `y(T)`
    pub y_end: f64,
    pub x1: f64,
    pub hard: SwitchIntegrals,
    pub after: SwitchIntegrals,
}

impl GradientTerms {
    pub fn from_passage(problem: &Problem, pass: &Passage) -> Result<Self> {
        let end = pass.at_horizon();
        Ok(GradientTerms {
            x_inf: final_size(problem.params.sigma0, end.x, end.y)?,
            y1: pass.hard().entry.y,
            y2: pass.hard().exit.y,
            y_end: end.y,
            x1: pass.hard().entry.x,
            hard: pass.hard().integrals,
            after: pass.after().integrals,
        })
    }

    /// `x∞ / (1 − σ0·x∞)`, positive since `x∞ < 1/σ0`.
    fn ratio(&self, sigma0: f64) -> f64 {
        self.x_inf / (1.0 - sigma0 * self.x_inf)
    }

    // The signed integrals are rebuilt from `1/y(a) − 1/y(b) = γ∫(σseg·x − 1)/y`
    // and the positive `∫x/y`, which avoids cancellation in long segments.

    /// `∫_hard (σref·x − 1)/y`.
    pub fn hard_integral(&self, problem: &Problem, sigma_ref: f64) -> f64 {
        let p = &problem.params;
        (1.0 / self.y1 - 1.0 / self.y2) / p.gamma + (sigma_ref - p.sigma1) * self.hard.x_over_y
    }

    /// `1 − γ·y(t2)·∫_after (σ0·x − 1)/y`.
    pub fn after_factor(&self, problem: &Problem) -> f64 {
        let p = &problem.params;
        self.y2 / self.y_end - p.gamma * (p.sigma0 - p.sigma2) * self.y2 * self.after.x_over_y
    }
}

pub fn gradient_terms(problem: &Problem, schedule: &Schedule) -> Result<GradientTerms> {
    let pass = problem.passage(schedule)?;
    GradientTerms::from_passage(problem, &pass)
}

fn check_time(name: &'static str, t: f64, lo: f64, hi: f64) -> Result<()> {
    let slack = 1e-9 * hi.abs().max(1.0);
    if !(t >= lo - slack && t <= hi + slack) {
        return Err(Error::domain(name, format!("must lie in [{lo}, {hi}], got {t}")));
    }
    Ok(())
}

/// General two-term bracket shared by `w` and `∂J/∂t1`.
fn w_bracket(problem: &Problem, g: &GradientTerms) -> f64 {
    let p = &problem.params;
    let i0 = g.hard_integral(problem, p.sigma0);
    let i2 = g.hard_integral(problem, p.sigma2);
    i0 - i2 + i2 * g.after_factor(problem)
}

/// `z(t) = ∫_t^{t+τ} (σ0·x − 1)/y` along schedule `(t, τ)`.
pub fn z_of(problem: &Problem, t: f64) -> Result<f64> {
    let p = &problem.params;
    check_time("t", t, 0.0, p.joint())?;
    let s = Schedule { t1: t.min(p.joint()), eta: p.tau };
    Ok(problem.passage(&s)?.hard().integrals.sigma0)
}

/// Two-branch `w(t)` on `[0, T]`, evaluated along the border schedule.
///
/// For `t ≤ T−τ` the schedule is `(t, τ)`; beyond it `(t, T−t)`, where the
/// second term vanishes because the post-quarantine segment is empty.
pub fn w_of(problem: &Problem, t: f64) -> Result<f64> {
    let p = &problem.params;
    check_time("t", t, 0.0, p.horizon)?;
    let g = gradient_terms(problem, &Schedule::on_border(p, t))?;
    Ok(w_bracket(problem, &g))
}

/// Both branches of `w` at the joint `t = T−τ`: the general product form
/// and the single-integral form of the right branch.
pub fn w_branches_at_joint(problem: &Problem) -> Result<(f64, f64)> {
    let p = &problem.params;
    let g = gradient_terms(problem, &Schedule { t1: p.joint(), eta: p.tau })?;
    Ok((w_bracket(problem, &g), g.hard_integral(problem, p.sigma0)))
}

/// `w` through the single-integral form valid when `σ2 = σ0`:
/// `y(t+τ)/y(T) · ∫_t^{t+τ}(σ0·x − 1)/y`.
pub fn w_sigma2_eq_sigma0(problem: &Problem, t: f64) -> Result<f64> {
    let p = &problem.params;
    if !p.sigma2_is_sigma0() {
        return Err(Error::domain("sigma2", "single-integral form of w needs sigma2 = sigma0"));
    }
    check_time("t", t, 0.0, p.horizon)?;
    let g = gradient_terms(problem, &Schedule::on_border(p, t))?;
    Ok(g.y2 / g.y_end * g.hard_integral(problem, p.sigma0))
}

/// Closed form of `w` for `σ1 = 0`, `σ2 = σ0`, where the hard segment is
/// solvable: `x` is frozen and `y` decays at rate `γ`.
pub fn w_closed_form_sigma1_zero(problem: &Problem, t: f64) -> Result<f64> {
    let p = &problem.params;
    if p.sigma1 != 0.0 || !p.sigma2_is_sigma0() {
        return Err(Error::domain("sigma1", "closed form of w needs sigma1 = 0 and sigma2 = sigma0"));
    }
    check_time("t", t, 0.0, p.horizon)?;
    let s = Schedule::on_border(p, t);
    let g = gradient_terms(problem, &s)?;
    let lead = (p.sigma0 * g.x1 - 1.0) / (p.gamma * g.y1) * (p.gamma * s.eta).exp_m1();
    if t <= p.joint() {
        Ok(g.y2 / g.y_end * lead)
    } else {
        Ok(lead)
    }
}

/// `α(t)` on `[T−τ, T]` along schedule `(t, T−t)`.
pub fn alpha_of(problem: &Problem, t: f64) -> Result<f64> {
    let p = &problem.params;
    check_time("t", t, p.joint(), p.horizon)?;
    let t = t.max(p.joint());
    let g = gradient_terms(problem, &Schedule { t1: t, eta: p.horizon - t })?;
    Ok(alpha_from_terms(problem, &g))
}

fn alpha_from_terms(problem: &Problem, g: &GradientTerms) -> f64 {
    let p = &problem.params;
    let correction = p.kappa * (1.0 - p.sigma0 * g.x_inf) / (p.gamma * g.y_end * g.x_inf);
    (1.0 - correction) / (p.gamma * g.y1)
}

/// `h(t) = y(T)·∫_t^T x/y` along schedule `(t, T−t)`.
pub fn h_of(problem: &Problem, t: f64) -> Result<f64> {
    let p = &problem.params;
    check_time("t", t, p.joint(), p.horizon)?;
    let t = t.max(p.joint());
    let g = gradient_terms(problem, &Schedule { t1: t, eta: p.horizon - t })?;
    Ok(g.y_end * g.hard.x_over_y)
}

/// Closed-form `∂J/∂t1`.
pub fn dj_dt1(problem: &Problem, schedule: &Schedule) -> Result<f64> {
    let g = gradient_terms(problem, schedule)?;
    Ok(dj_dt1_from_terms(problem, &g))
}

fn dj_dt1_from_terms(problem: &Problem, g: &GradientTerms) -> f64 {
    let p = &problem.params;
    let pre = p.gamma * p.gamma * (p.sigma2 - p.sigma1) * g.y_end * g.y1 * g.ratio(p.sigma0);
    pre * w_bracket(problem, g)
}

/// `∂J/∂t1` through the single-integral form valid when `σ2 = σ0`.
pub fn dj_dt1_sigma2_eq_sigma0(problem: &Problem, schedule: &Schedule) -> Result<f64> {
    let p = &problem.params;
    if !p.sigma2_is_sigma0() {
        return Err(Error::domain("sigma2", "single-integral form of dJ/dt1 needs sigma2 = sigma0"));
    }
    let g = gradient_terms(problem, schedule)?;
    let i2 = g.hard_integral(problem, p.sigma2);
    Ok(g.ratio(p.sigma0) * p.gamma * p.gamma * (p.sigma2 - p.sigma1) * g.y1 * g.y2 * i2)
}

/// Closed-form `∂J/∂η`.
pub fn dj_deta(problem: &Problem, schedule: &Schedule) -> Result<f64> {
    let g = gradient_terms(problem, schedule)?;
    Ok(dj_deta_from_terms(problem, &g))
}

pub(crate) fn dj_deta_from_terms(problem: &Problem, g: &GradientTerms) -> f64 {
    let p = &problem.params;
    (p.sigma2 - p.sigma1) * (kappa_bound_from_terms(problem, g) - p.kappa)
}

/// Cost weight at which `∂J/∂η` vanishes: `∂J/∂η > 0` iff `κ` is below it.
pub fn kappa_bound(problem: &Problem, schedule: &Schedule) -> Result<f64> {
    let g = gradient_terms(problem, schedule)?;
    Ok(kappa_bound_from_terms(problem, &g))
}

pub(crate) fn kappa_bound_from_terms(problem: &Problem, g: &GradientTerms) -> f64 {
    let p = &problem.params;
    g.ratio(p.sigma0) * p.gamma * g.y_end * g.after_factor(problem)
}

/// `dJ̃/dt1` split into a positive prefactor and the factor carrying its sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JtildeDerivative {
    pub prefactor: f64,
    /// `w(t1)` on `[0, T−τ]`, `w(t1) − α(t1)` beyond.
    pub sign_carrier: f64,
}

impl JtildeDerivative {
    pub fn value(&self) -> f64 {
        self.prefactor * self.sign_carrier
    }
}

/// Derivative of `J` restricted to the upper border `P`.
///
/// At `t1 = T−τ` the left derivative is returned.
pub fn jtilde_derivative(problem: &Problem, t1: f64) -> Result<JtildeDerivative> {
    let p = &problem.params;
    check_time("t1", t1, 0.0, p.horizon)?;
    let g = gradient_terms(problem, &Schedule::on_border(p, t1))?;
    let prefactor = p.gamma * p.gamma * (p.sigma2 - p.sigma1) * g.ratio(p.sigma0) * g.y1 * g.y_end;
    let w = w_bracket(problem, &g);
    let sign_carrier = if t1 <= p.joint() {
        w
    } else {
        w - alpha_from_terms(problem, &g)
    };
    Ok(JtildeDerivative {
        prefactor,
        sign_carrier,
    })
}

/// Sampled `w`, `α` and `h` over a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchProfile {
    pub grid: Vec<f64>,
    pub w_values: Vec<f64>,
    /// `None` outside `[T−τ, T]`.
    pub alpha_values: Vec<Option<f64>>,
    pub h_values: Vec<Option<f64>>,
}

pub fn switch_profile(problem: &Problem, grid: &[f64]) -> Result<SwitchProfile> {
    let p = &problem.params;
    let rows: Vec<(f64, Option<f64>, Option<f64>)> = grid
        .par_iter()
        .map(|&t| {
            let w = w_of(problem, t)?;
            if t >= p.joint() {
                Ok((w, Some(alpha_of(problem, t)?), Some(h_of(problem, t)?)))
            } else {
                Ok((w, None, None))
            }
        })
        .collect::<Result<_>>()?;
    Ok(SwitchProfile {
        grid: grid.to_vec(),
        w_values: rows.iter().map(|r| r.0).collect(),
        alpha_values: rows.iter().map(|r| r.1).collect(),
        h_values: rows.iter().map(|r| r.2).collect(),
    })
}

/// Crossing times `(s0, s1)` of `x_{s,τ}(s+τ)` and `x_{s,τ}(s)` through `1/σ0`
/// on `[0, T−τ]`; `None` where no crossing exists.
pub fn crossing_times(problem: &Problem) -> Result<(Option<f64>, Option<f64>)> {
    let p = &problem.params;
    let threshold = 1.0 / p.sigma0;
    let at_start = |s: f64| -> Result<f64> {
        Ok(problem.passage(&Schedule { t1: s, eta: p.tau })?.hard().entry.x - threshold)
    };
    let at_end = |s: f64| -> Result<f64> {
        Ok(problem.passage(&Schedule { t1: s, eta: p.tau })?.hard().exit.x - threshold)
    };
    let s1 = first_downcrossing("s1", at_start, 0.0, p.joint(), 256)?;
    let s0 = first_downcrossing("s0", at_end, 0.0, p.joint(), 256)?;
    Ok((s0, s1))
}

/// First sign change from positive to non-positive of `f` on a uniform scan.
fn first_downcrossing(
    what: &str,
    f: impl Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<Option<f64>> {
    let mut prev_t = lo;
    let mut prev = f(lo)?;
    if prev <= 0.0 {
        return Ok(None);
    }
    for k in 1..=n {
        let t = lo + (hi - lo) * k as f64 / n as f64;
        let v = f(t)?;
        if v <= 0.0 {
            return bisect(what, &f, prev_t, t, 1e-9 * hi.max(1.0)).map(Some);
        }
        prev_t = t;
        prev = v;
    }
    let _ = prev;
    Ok(None)
}
