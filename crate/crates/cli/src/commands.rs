use std::collections::BTreeMap;

use quarantine_core::oracle::{self, GridSearch, OracleResult};
use quarantine_core::planner::{check_kappa_condition, crossover_durations, KappaCondition, PlanPath};
use quarantine_core::pmp::{verify_necessary_conditions, PmpReport, HAMILTONIAN_TOLERANCE};
use quarantine_core::{
    conserved_residual, objective, plan, x_infinity, CaseId, Error, Problem, Schedule, Trajectory,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Config, GridSpec};
use crate::error::{CliError, Result};
use crate::output::{num, OutDir};

/// Worst per-segment drift of the first integral along `traj`.
fn conservation(traj: &Trajectory) -> f64 {
    (0..traj.segments.len())
        .map(|k| conserved_residual(traj, k))
        .fold(0.0, f64::max)
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub schedule: Schedule,
    #[serde(rename = "x_T")]
    pub x_t: f64,
    #[serde(rename = "y_T")]
    pub y_t: f64,
    pub x_inf: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub conservation_residual: f64,
}

pub fn simulate(config: &Config, schedule: Option<(f64, f64)>, out: &OutDir) -> Result<SimulateSummary> {
    let problem = config.problem()?;
    let schedule = config
        .schedule(&problem, schedule)?
        .ok_or_else(|| CliError::Config("schedule: required for simulate (config or --schedule-override)".into()))?;
    let traj = problem.trajectory(&schedule)?;
    let end = traj.at_horizon();
    let x_inf = x_infinity(&problem.params, &end)?;
    out.csv(
        "trajectory.csv",
        &["t", "x", "y", "sigma"],
        traj.times
            .iter()
            .zip(&traj.states)
            .zip(&traj.sigma_of_t)
            .map(|((t, s), sigma)| [num(*t), num(s.x), num(s.y), num(*sigma)]),
    )?;
    let summary = SimulateSummary {
        schedule,
        x_t: end.x,
        y_t: end.y,
        x_inf,
        j: x_inf + problem.params.running_cost(schedule.eta),
        conservation_residual: conservation(&traj),
    };
    out.json("summary.json", &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanSource {
    Theorem,
    OracleFallback,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanOutput {
    pub source: PlanSource,
    pub t_star: f64,
    pub eta_star: f64,
    #[serde(rename = "J_star")]
    pub j_star: f64,
    pub case_id: Option<CaseId>,
    pub path: Option<PlanPath>,
    pub kappa_condition: Option<KappaCondition>,
    /// Why the theorem path was refused, when the oracle stepped in.
    pub fallback_reason: Option<String>,
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl PlanOutput {
    pub fn schedule(&self) -> Schedule {
        Schedule {
            t1: self.t_star,
            eta: self.eta_star,
        }
    }
}

fn plan_or_oracle(problem: &Problem, config: &Config) -> Result<PlanOutput> {
    match plan(problem) {
        Ok(r) => Ok(PlanOutput {
            source: PlanSource::Theorem,
            t_star: r.t_star,
            eta_star: r.eta_star,
            j_star: objective(problem, &r.schedule())?,
            case_id: Some(r.case_id),
            path: Some(r.path),
            kappa_condition: Some(r.kappa_condition),
            fallback_reason: None,
            diagnostics: r.diagnostics,
            notes: r.notes,
        }),
        Err(Error::TheoremInapplicable(reason)) => {
            let o = oracle::maximize(problem, config.oracle.n_t1, config.oracle.n_eta)?;
            let diagnostics = BTreeMap::from([
                ("grid_best_J".to_string(), o.grid.best_value),
                ("cell_size".to_string(), o.grid.cell_size(problem)),
            ]);
            Ok(PlanOutput {
                source: PlanSource::OracleFallback,
                t_star: o.refined.t1,
                eta_star: o.refined.eta,
                j_star: o.refined_value,
                case_id: None,
                path: None,
                kappa_condition: Some(check_kappa_condition(problem)?),
                fallback_reason: Some(reason),
                diagnostics,
                notes: vec![format!(
                    "oracle {}x{} grid with pattern-search refinement",
                    config.oracle.n_t1, config.oracle.n_eta
                )],
            })
        }
        Err(e) => Err(e.into()),
    }
}

pub fn plan_cmd(config: &Config, out: &OutDir) -> Result<PlanOutput> {
    let problem = config.problem()?;
    let result = plan_or_oracle(&problem, config)?;
    out.json("plan.json", &result)?;
    Ok(result)
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub taus: Vec<f64>,
    pub tau_bar: Option<f64>,
    pub tau_tilde: Option<f64>,
    pub t_tilde: Option<f64>,
    pub oracle_fallbacks: usize,
}

pub fn sweep(config: &Config, grid: GridSpec, out: &OutDir) -> Result<SweepSummary> {
    let problem = config.problem()?;
    let taus = grid.values();
    let rows: Vec<(f64, PlanOutput)> = taus
        .par_iter()
        .map(|&tau| {
            let mut q = problem;
            q.params.tau = tau;
            q.params.validate()?;
            Ok((tau, plan_or_oracle(&q, config)?))
        })
        .collect::<Result<_>>()?;
    let (tau_bar, tau_tilde) = crossover_durations(&problem)?;

    let case = |r: &PlanOutput| r.case_id.map_or("-".to_string(), |c| c.to_string());
    let source = |r: &PlanOutput| match r.source {
        PlanSource::Theorem => "theorem".to_string(),
        PlanSource::OracleFallback => "oracle-fallback".to_string(),
    };
    out.csv(
        "sweep.csv",
        &["tau", "t_star", "eta_star", "case_id", "J_star", "source"],
        rows.iter().map(|(tau, r)| {
            [num(*tau), num(r.t_star), num(r.eta_star), case(r), num(r.j_star), source(r)]
        }),
    )?;
    out.csv(
        "plot_t_star.csv",
        &["tau", "t_star"],
        rows.iter().map(|(tau, r)| [num(*tau), num(r.t_star)]),
    )?;
    out.csv(
        "plot_eta_star.csv",
        &["tau", "eta_star"],
        rows.iter().map(|(tau, r)| [num(*tau), num(r.eta_star)]),
    )?;
    let summary = SweepSummary {
        taus,
        tau_bar,
        tau_tilde,
        t_tilde: tau_tilde.map(|t| problem.params.horizon - t),
        oracle_fallbacks: rows.iter().filter(|(_, r)| r.source == PlanSource::OracleFallback).count(),
    };
    out.json("crossovers.json", &summary)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct OracleSummary {
    pub n_t1: usize,
    pub n_eta: usize,
    pub cell_size: f64,
    pub grid_best: Schedule,
    #[serde(rename = "grid_best_J")]
    pub grid_best_j: f64,
    pub refined: Schedule,
    #[serde(rename = "refined_J")]
    pub refined_j: f64,
}

impl OracleSummary {
    fn new(problem: &Problem, o: &OracleResult) -> Self {
        OracleSummary {
            n_t1: o.grid.n_t1,
            n_eta: o.grid.n_eta,
            cell_size: o.grid.cell_size(problem),
            grid_best: o.grid.best,
            grid_best_j: o.grid.best_value,
            refined: o.refined,
            refined_j: o.refined_value,
        }
    }
}

fn write_grid(out: &OutDir, grid: &GridSearch) -> Result<()> {
    out.csv(
        "oracle_grid.csv",
        &["t1", "eta", "J"],
        grid.cells.iter().map(|c| [num(c.t1), num(c.eta), num(c.value)]),
    )?;
    Ok(())
}

pub fn oracle_cmd(config: &Config, out: &OutDir) -> Result<OracleSummary> {
    let problem = config.problem()?;
    let o = oracle::maximize(&problem, config.oracle.n_t1, config.oracle.n_eta)?;
    write_grid(out, &o.grid)?;
    let summary = OracleSummary::new(&problem, &o);
    out.json("oracle.json", &summary)?;
    Ok(summary)
}

/// Objective tolerance between the verified schedule and the oracle optimum.
pub const OBJECTIVE_GAP_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub schedule: Schedule,
    pub schedule_overridden: bool,
    pub plan: PlanOutput,
    pub oracle: OracleSummary,
    #[serde(rename = "J")]
    pub j: f64,
    /// Oracle `J` minus the verified schedule's `J`.
    pub objective_gap: f64,
    /// Largest coordinate distance to the oracle optimum; `0` when both
    /// schedules have no hard window, since `t1` is then immaterial.
    pub schedule_gap: f64,
    pub conservation_residual: f64,
    pub pmp: PmpReport,
    pub checks: BTreeMap<String, bool>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failed_checks(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|(_, ok)| !**ok)
            .map(|(name, _)| name.clone())
            .collect()
    }
}

fn schedule_gap(a: &Schedule, b: &Schedule) -> f64 {
    if a.eta == 0.0 && b.eta == 0.0 {
        return 0.0;
    }
    (a.t1 - b.t1).abs().max((a.eta - b.eta).abs())
}

pub fn verify(config: &Config, schedule: Option<(f64, f64)>, out: &OutDir) -> Result<VerifyReport> {
    let problem = config.problem()?;
    let planned = plan_or_oracle(&problem, config)?;
    let overridden = schedule
        .map(|(t1, eta)| Schedule::new(&problem.params, t1, eta))
        .transpose()?;
    let candidate = overridden.unwrap_or_else(|| planned.schedule());

    let o = oracle::maximize(&problem, config.oracle.n_t1, config.oracle.n_eta)?;
    let oracle = OracleSummary::new(&problem, &o);
    let j = objective(&problem, &candidate)?;
    let objective_gap = o.refined_value - j;
    let gap = schedule_gap(&candidate, &o.refined);
    let residual = conservation(&problem.trajectory(&candidate)?);
    let pmp = verify_necessary_conditions(&problem, &candidate)?;

    let checks = BTreeMap::from([
        ("objective_gap".to_string(), objective_gap <= OBJECTIVE_GAP_TOLERANCE),
        ("schedule_gap".to_string(), gap <= oracle.cell_size),
        ("conservation".to_string(), residual <= problem.integrator.tolerance),
        ("pmp_sign_consistency".to_string(), pmp.sign_contradictions == 0),
        ("pmp_sign_changes".to_string(), pmp.sign_changes <= 2),
        ("pmp_hamiltonian".to_string(), pmp.hamiltonian_deviation <= HAMILTONIAN_TOLERANCE),
    ]);
    let report = VerifyReport {
        schedule: candidate,
        schedule_overridden: overridden.is_some(),
        plan: planned,
        oracle,
        j,
        objective_gap,
        schedule_gap: gap,
        conservation_residual: residual,
        pmp,
        passed: checks.values().all(|ok| *ok),
        checks,
    };
    out.json("verify.json", &report)?;
    Ok(report)
}
