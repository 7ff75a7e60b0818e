use std::path::Path;

use quarantine_core::integrate::IntegratorConfig;
use quarantine_core::oracle::{DEFAULT_N_ETA, DEFAULT_N_T1};
use quarantine_core::{EpidemicState, ModelParams, Problem, Schedule};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub gamma: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub tau: f64,
    pub kappa: f64,
    pub x0: f64,
    pub y0: f64,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub schedule: Option<ScheduleSection>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    /// Upper bound on the RK4 step; defaults to `0.01/gamma`.
    pub step: Option<f64>,
    pub tolerance: Option<f64>,
    pub min_steps: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub n_t1: usize,
    pub n_eta: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            n_t1: DEFAULT_N_T1,
            n_eta: DEFAULT_N_ETA,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub t1: f64,
    pub eta: f64,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn problem(&self) -> Result<Problem> {
        let params = ModelParams {
            gamma: self.gamma,
            sigma0: self.sigma0,
            sigma1: self.sigma1,
            sigma2: self.sigma2,
            horizon: self.horizon,
            tau: self.tau,
            kappa: self.kappa,
        };
        let initial = EpidemicState {
            x: self.x0,
            y: self.y0,
        };
        let defaults = IntegratorConfig::default();
        let integrator = IntegratorConfig {
            max_step: self.integrator.step,
            tolerance: self.integrator.tolerance.unwrap_or(defaults.tolerance),
            min_steps_per_segment: self.integrator.min_steps.unwrap_or(defaults.min_steps_per_segment),
        };
        Ok(Problem::with_integrator(params, initial, integrator)?)
    }

    /// `--schedule-override` wins over the config's `schedule`.
    pub fn schedule(&self, problem: &Problem, override_: Option<(f64, f64)>) -> Result<Option<Schedule>> {
        let pair = override_.or(self.schedule.map(|s| (s.t1, s.eta)));
        pair.map(|(t1, eta)| Ok(Schedule::new(&problem.params, t1, eta)?))
            .transpose()
    }
}

pub fn parse_schedule(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"t1,eta\", got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        (0..self.count)
            .map(|k| self.start + (self.stop - self.start) * k as f64 / (self.count - 1) as f64)
            .collect()
    }
}

pub fn parse_grid(s: &str) -> std::result::Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("expected \"start:stop:count\", got {s:?}"));
    };
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    let count = n.trim().parse::<usize>().map_err(|e| format!("{n:?}: {e}"))?;
    if count == 0 {
        return Err("grid count must be >= 1".to_string());
    }
    Ok(GridSpec {
        start: num(a)?,
        stop: num(b)?,
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"gamma":0.01,"sigma0":1.5,"sigma1":0,"sigma2":1.5,"T":2600,"tau":60,"kappa":0,"x0":0.999999,"y0":1e-6}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c: Config = serde_json::from_str(BASE).unwrap();
        assert_eq!(c.oracle.n_t1, 400);
        let p = c.problem().unwrap();
        assert_eq!(p.params.horizon, 2600.0);
        assert_eq!(p.integrator, IntegratorConfig::default());
        assert!(c.schedule(&p, None).unwrap().is_none());
    }

    #[test]
    fn invalid_infected_share_names_field() {
        let c: Config = serde_json::from_str(&BASE.replace("1e-6", "0")).unwrap();
        let msg = c.problem().unwrap_err().to_string();
        assert!(msg.contains("y0"), "{msg}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let bad = BASE.replace("\"kappa\"", "\"kapa\"");
        assert!(serde_json::from_str::<Config>(&bad).is_err());
    }

    #[test]
    fn override_wins() {
        let c: Config = serde_json::from_str(&BASE.replace("}", r#","schedule":{"t1":10,"eta":5}}"#)).unwrap();
        let p = c.problem().unwrap();
        assert_eq!(c.schedule(&p, None).unwrap().unwrap().t1, 10.0);
        assert_eq!(c.schedule(&p, Some((20.0, 6.0))).unwrap().unwrap().t1, 20.0);
        assert!(c.schedule(&p, Some((2590.0, 60.0))).is_err());
    }

    #[test]
    fn grid_and_schedule_syntax() {
        assert_eq!(parse_grid("10:400:40").unwrap().values().len(), 40);
        assert_eq!(parse_grid("50:50:1").unwrap().values(), vec![50.0]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("1:2:0").is_err());
        assert_eq!(parse_schedule("2527.1, 60").unwrap(), (2527.1, 60.0));
        assert!(parse_schedule("2527.1").is_err());
    }
}
