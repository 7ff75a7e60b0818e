//! Fixed-step RK4 integration of the controlled SIR system.
//!
//! The control is piecewise constant, so integration is split at every jump
//! time and each constant-σ segment is stepped with a uniform RK4 grid that
//! ends exactly on the next jump. Trajectory-coupled integrals of `1/y`-type
//! integrands are co-integrated as extra state components and reset at each
//! segment start.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EpidemicState, ModelParams, Schedule};

/// Default upper bound on the step, in units of `1/gamma`.
pub const DEFAULT_STEP_RATIO: f64 = 0.01;

/// Step-size policy and verification tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Upper bound on the step; `None` means `DEFAULT_STEP_RATIO / gamma`.
    pub max_step: Option<f64>,
    /// Lower bound on the number of steps in any non-empty segment.
    pub min_steps_per_segment: usize,
    /// Relative tolerance on the per-segment first integral.
    pub tolerance: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            max_step: None,
            min_steps_per_segment: 1000,
            tolerance: 1e-9,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.max_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::domain("integrator.step", format!("must be > 0, got {h}")));
            }
        }
        if self.min_steps_per_segment == 0 {
            return Err(Error::domain("integrator.min_steps", "must be >= 1"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::domain("integrator.tolerance", "must be > 0"));
        }
        Ok(())
    }

    /// Number of uniform steps used on a segment of length `len`.
    pub fn steps_for(&self, len: f64, gamma: f64) -> usize {
        if len <= 0.0 {
            return 0;
        }
        let h_max = self.max_step.unwrap_or(DEFAULT_STEP_RATIO / gamma);
        let n = (len / h_max).ceil() as usize;
        n.max(self.min_steps_per_segment)
    }
}

/// Role of a constant-σ segment within `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    /// `[0, t1)` under `sigma2`.
    Before,
    /// `[t1, t2)` under `sigma1`.
    Hard,
    /// `[t2, T]` under `sigma2`.
    After,
    /// Past `T` under `sigma0`.
    Free,
}

/// Segment totals of the trajectory-coupled integrals
/// `∫(σref·x - 1)/y` for `σref ∈ {σ0, σ1, σ2}` and `∫x/y`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SwitchIntegrals {
    pub sigma0: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub x_over_y: f64,
}

impl SwitchIntegrals {
    /// `∫(σ·x - 1)/y` for whichever model constant equals `sigma`.
    pub fn for_sigma(&self, params: &ModelParams, sigma: f64) -> Option<f64> {
        if sigma == params.sigma0 {
            Some(self.sigma0)
        } else if sigma == params.sigma2 {
            Some(self.sigma2)
        } else if sigma == params.sigma1 {
            Some(self.sigma1)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: f64,
    pub end: f64,
    pub sigma: f64,
    pub steps: usize,
    pub entry: EpidemicState,
    pub exit: EpidemicState,
    pub integrals: SwitchIntegrals,
    /// Sample indices covered by this segment, both boundary samples included.
    /// Empty for passages that store no samples.
    pub samples: Range<usize>,
}

impl Segment {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.steps == 0
    }
}

/// Segment-level summary of one controlled run; no dense samples.
///
/// Always holds the `Before`, `Hard` and `After` segments (possibly empty),
/// followed by a `Free` segment when integrated past `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Passage {
    pub segments: Vec<Segment>,
}

impl Passage {
    pub fn before(&self) -> &Segment {
        &self.segments[0]
    }

    pub fn hard(&self) -> &Segment {
        &self.segments[1]
    }

    pub fn after(&self) -> &Segment {
        &self.segments[2]
    }

    /// State at the end of the intervention, `(x(T), y(T))`.
    pub fn at_horizon(&self) -> EpidemicState {
        self.after().exit
    }
}

/// Dense solution of the controlled system.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<EpidemicState>,
    /// Right-continuous control value at each sample.
    pub sigma_of_t: Vec<f64>,
    /// Jump times `{t1, t1 + eta, T}`.
    pub segment_boundaries: Vec<f64>,
    pub segments: Vec<Segment>,
}

impl Trajectory {
    pub fn final_state(&self) -> EpidemicState {
        *self.states.last().expect("trajectory has at least one sample")
    }

    /// State at `T` (differs from `final_state` when integrated past `T`).
    pub fn at_horizon(&self) -> EpidemicState {
        self.segments[2].exit
    }
}

fn segment_plan(params: &ModelParams, schedule: &Schedule, horizon: f64) -> Vec<(SegmentKind, f64, f64, f64)> {
    let t1 = schedule.t1;
    let t2 = schedule.t2().min(params.horizon);
    let mut plan = vec![
        (SegmentKind::Before, 0.0, t1, params.sigma2),
        (SegmentKind::Hard, t1, t2, params.sigma1),
        (SegmentKind::After, t2, params.horizon, params.sigma2),
    ];
    if horizon > params.horizon {
        plan.push((SegmentKind::Free, params.horizon, horizon, params.sigma0));
    }
    plan
}

#[inline]
fn rk4_step<const N: usize>(rhs: &impl Fn(&[f64; N]) -> [f64; N], s: &[f64; N], h: f64) -> [f64; N] {
    let k1 = rhs(s);
    let mut tmp = [0.0; N];
    for i in 0..N {
        tmp[i] = s[i] + 0.5 * h * k1[i];
    }
    let k2 = rhs(&tmp);
    for i in 0..N {
        tmp[i] = s[i] + 0.5 * h * k2[i];
    }
    let k3 = rhs(&tmp);
    for i in 0..N {
        tmp[i] = s[i] + h * k3[i];
    }
    let k4 = rhs(&tmp);
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Steps one segment. Components 0 and 1 must be `x` and `y`.
fn run_segment<const N: usize>(
    rhs: impl Fn(&[f64; N]) -> [f64; N],
    mut s: [f64; N],
    start: f64,
    len: f64,
    steps: usize,
    mut on_node: impl FnMut(f64, &[f64; N]),
) -> Result<[f64; N]> {
    if steps == 0 {
        return Ok(s);
    }
    let h = len / steps as f64;
    for j in 1..=steps {
        s = rk4_step(&rhs, &s, h);
        let t = if j == steps {
            start + len
        } else {
            start + len * (j as f64 / steps as f64)
        };
        if !s.iter().all(|v| v.is_finite()) {
            return Err(Error::Integration {
                time: t,
                reason: "non-finite state".into(),
            });
        }
        if s[1] <= 0.0 || s[0] < 0.0 {
            return Err(Error::Integration {
                time: t,
                reason: format!("state left the positive quadrant (x = {}, y = {})", s[0], s[1]),
            });
        }
        on_node(t, &s);
    }
    Ok(s)
}

fn augmented_rhs(params: &ModelParams, sigma: f64) -> impl Fn(&[f64; 6]) -> [f64; 6] {
    let g = params.gamma;
    let (s0, s1, s2) = (params.sigma0, params.sigma1, params.sigma2);
    move |u: &[f64; 6]| {
        let (x, y) = (u[0], u[1]);
        let inf = g * sigma * x * y;
        let inv = 1.0 / y;
        [
            -inf,
            inf - g * y,
            (s0 * x - 1.0) * inv,
            (s1 * x - 1.0) * inv,
            (s2 * x - 1.0) * inv,
            x * inv,
        ]
    }
}

fn state_rhs(gamma: f64, sigma: f64) -> impl Fn(&[f64; 2]) -> [f64; 2] {
    move |u: &[f64; 2]| {
        let inf = gamma * sigma * u[0] * u[1];
        [-inf, inf - gamma * u[1]]
    }
}

fn check_inputs(
    params: &ModelParams,
    initial: &EpidemicState,
    schedule: &Schedule,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<()> {
    params.validate()?;
    initial.validate()?;
    schedule.validate(params)?;
    cfg.validate()?;
    if !(horizon >= params.horizon) {
        return Err(Error::domain("horizon", "must be >= T"));
    }
    Ok(())
}

fn integrate_impl(
    params: &ModelParams,
    initial: &EpidemicState,
    schedule: &Schedule,
    horizon: f64,
    cfg: &IntegratorConfig,
    dense: bool,
) -> Result<(Vec<Segment>, Vec<f64>, Vec<EpidemicState>, Vec<f64>)> {
    check_inputs(params, initial, schedule, horizon, cfg)?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut sigmas = Vec::new();
    if dense {
        times.push(0.0);
        states.push(*initial);
        sigmas.push(params.sigma2);
    }
    let mut segments = Vec::with_capacity(4);
    let mut cur = *initial;
    for (kind, a, b, sigma) in segment_plan(params, schedule, horizon) {
        let len = (b - a).max(0.0);
        let steps = cfg.steps_for(len, params.gamma);
        let first = times.len().saturating_sub(1);
        if dense {
            // right-continuous control at the shared boundary sample
            *sigmas.last_mut().unwrap() = sigma;
        }
        let u0 = [cur.x, cur.y, 0.0, 0.0, 0.0, 0.0];
        let u = run_segment(augmented_rhs(params, sigma), u0, a, len, steps, |t, u| {
            if dense {
                times.push(t);
                states.push(EpidemicState { x: u[0], y: u[1] });
                sigmas.push(sigma);
            }
        })?;
        let exit = EpidemicState { x: u[0], y: u[1] };
        segments.push(Segment {
            kind,
            start: a,
            end: a + len,
            sigma,
            steps,
            entry: cur,
            exit,
            integrals: SwitchIntegrals {
                sigma0: u[2],
                sigma1: u[3],
                sigma2: u[4],
                x_over_y: u[5],
            },
            samples: if dense { first..times.len() } else { 0..0 },
        });
        cur = exit;
    }
    Ok((segments, times, states, sigmas))
}

/// Dense trajectory of the controlled system on `[0, horizon]`.
///
/// `horizon` may exceed `T`; the control is `sigma0` there.
pub fn integrate(
    params: &ModelParams,
    initial: &EpidemicState,
    schedule: &Schedule,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let (segments, times, states, sigma_of_t) =
        integrate_impl(params, initial, schedule, horizon, cfg, true)?;
    Ok(Trajectory {
        times,
        states,
        sigma_of_t,
        segment_boundaries: vec![schedule.t1, schedule.t2(), params.horizon],
        segments,
    })
}

/// Segment summaries on `[0, T]` with co-integrated switching integrals.
pub fn propagate(
    params: &ModelParams,
    initial: &EpidemicState,
    schedule: &Schedule,
    cfg: &IntegratorConfig,
) -> Result<Passage> {
    let (segments, ..) = integrate_impl(params, initial, schedule, params.horizon, cfg, false)?;
    Ok(Passage { segments })
}

/// State at `T` only. Same step grid as `integrate`, two components.
pub fn state_at_horizon(
    params: &ModelParams,
    initial: &EpidemicState,
    schedule: &Schedule,
    cfg: &IntegratorConfig,
) -> Result<EpidemicState> {
    check_inputs(params, initial, schedule, params.horizon, cfg)?;
    let mut u = [initial.x, initial.y];
    for (_, a, b, sigma) in segment_plan(params, schedule, params.horizon) {
        let len = (b - a).max(0.0);
        let steps = cfg.steps_for(len, params.gamma);
        u = run_segment(state_rhs(params.gamma, sigma), u, a, len, steps, |_, _| {})?;
    }
    Ok(EpidemicState { x: u[0], y: u[1] })
}

/// Uncontrolled run at a single constant `sigma` from `start` for `len`.
pub fn run_constant(
    gamma: f64,
    sigma: f64,
    initial: &EpidemicState,
    len: f64,
    cfg: &IntegratorConfig,
) -> Result<EpidemicState> {
    let steps = cfg.steps_for(len, gamma);
    let u = run_segment(state_rhs(gamma, sigma), [initial.x, initial.y], 0.0, len, steps, |_, _| {})?;
    Ok(EpidemicState { x: u[0], y: u[1] })
}

/// Max relative drift of `x·exp(-σ(x+y))` over the samples of `segment`.
pub fn conserved_residual(traj: &Trajectory, segment: usize) -> f64 {
    let seg = &traj.segments[segment];
    if seg.samples.is_empty() {
        return 0.0;
    }
    let sigma = seg.sigma;
    let reference = seg.entry.conserved(sigma);
    traj.states[seg.samples.clone()]
        .iter()
        .map(|s| (s.conserved(sigma) - reference).abs())
        .fold(0.0, f64::max)
        / reference
}
