//! Domain types: model constants, epidemic states and two-switch schedules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Infected fractions below this are rejected instead of clamped.
pub const MIN_INFECTED: f64 = 1e-12;

/// Scalar constants of the controlled SIR problem.
///
/// The control takes the value `sigma2` (soft quarantine) or `sigma1` (hard
/// quarantine) on `[0, horizon]` and reverts to `sigma0` afterwards. The hard
/// quarantine may last at most `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub gamma: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub tau: f64,
    pub kappa: f64,
}

impl ModelParams {
    pub fn new(
        gamma: f64,
        sigma0: f64,
        sigma1: f64,
        sigma2: f64,
        horizon: f64,
        tau: f64,
        kappa: f64,
    ) -> Result<Self> {
        let p = ModelParams {
            gamma,
            sigma0,
            sigma1,
            sigma2,
            horizon,
            tau,
            kappa,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("gamma", self.gamma),
            ("sigma0", self.sigma0),
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
            ("T", self.horizon),
            ("tau", self.tau),
            ("kappa", self.kappa),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::domain(name, format!("must be finite, got {v}")));
            }
        }
        if self.gamma <= 0.0 {
            return Err(Error::domain("gamma", "must be > 0"));
        }
        if self.sigma1 < 0.0 {
            return Err(Error::domain("sigma1", "must be >= 0"));
        }
        if self.sigma1 >= self.sigma2 {
            return Err(Error::domain("sigma1", "must be < sigma2"));
        }
        if self.sigma2 > self.sigma0 {
            return Err(Error::domain("sigma2", "must be <= sigma0"));
        }
        if self.horizon <= 0.0 {
            return Err(Error::domain("T", "must be > 0"));
        }
        if !(self.tau > 0.0 && self.tau < self.horizon) {
            return Err(Error::domain("tau", "must satisfy 0 < tau < T"));
        }
        if self.kappa < 0.0 {
            return Err(Error::domain("kappa", "must be >= 0"));
        }
        Ok(())
    }

    /// Latest start of a full-length hard quarantine, `T - tau`.
    pub fn joint(&self) -> f64 {
        self.horizon - self.tau
    }

    /// Running cost `kappa * ∫σ` of a schedule with hard-quarantine length `eta`.
    pub fn running_cost(&self, eta: f64) -> f64 {
        self.kappa * (self.sigma1 * eta + self.sigma2 * (self.horizon - eta))
    }

    pub fn sigma2_is_sigma0(&self) -> bool {
        self.sigma2 == self.sigma0
    }
}

/// A point `(x, y)` of susceptible and infected fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpidemicState {
    pub x: f64,
    pub y: f64,
}

impl EpidemicState {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let s = EpidemicState { x, y };
        s.validate()?;
        Ok(s)
    }

    /// Checks membership of `{x > 0, y > 0, x + y <= 1}` with `y >= MIN_INFECTED`.
    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.x > 0.0) {
            return Err(Error::domain("x0", format!("must be > 0, got {}", self.x)));
        }
        if !self.y.is_finite() || self.y < MIN_INFECTED {
            return Err(Error::domain(
                "y0",
                format!("must be >= {MIN_INFECTED:e}, got {}", self.y),
            ));
        }
        if self.x + self.y > 1.0 {
            return Err(Error::domain(
                "x0",
                format!("x0 + y0 must be <= 1, got {}", self.x + self.y),
            ));
        }
        Ok(())
    }

    /// First integral `x·exp(-σ(x+y))` of the constant-σ system.
    pub fn conserved(&self, sigma: f64) -> f64 {
        self.x * (-sigma * (self.x + self.y)).exp()
    }
}

/// Hard quarantine on `[t1, t1 + eta)`, soft quarantine elsewhere on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub t1: f64,
    pub eta: f64,
}

impl Schedule {
    /// Builds a schedule and checks it lies in the admissible trapezoid.
    pub fn new(params: &ModelParams, t1: f64, eta: f64) -> Result<Self> {
        let s = Schedule { t1, eta };
        s.validate(params)?;
        Ok(s)
    }

    /// Admissible region: `0 <= eta <= tau`, `0 <= t1 <= T - eta`.
    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        // absorbs rounding in t1 + eta
        let slack = 1e-9 * params.horizon;
        if !(self.eta.is_finite() && self.eta >= 0.0 && self.eta <= params.tau + slack) {
            return Err(Error::domain(
                "eta",
                format!("must lie in [0, tau = {}], got {}", params.tau, self.eta),
            ));
        }
        if !(self.t1.is_finite() && self.t1 >= 0.0 && self.t1 + self.eta <= params.horizon + slack)
        {
            return Err(Error::domain(
                "t1",
                format!(
                    "must lie in [0, T - eta = {}], got {}",
                    params.horizon - self.eta,
                    self.t1
                ),
            ));
        }
        Ok(())
    }

    pub fn t2(&self) -> f64 {
        self.t1 + self.eta
    }

    /// Point of the upper border of the admissible region above `t1`.
    pub fn on_border(params: &ModelParams, t1: f64) -> Schedule {
        let t1 = t1.clamp(0.0, params.horizon);
        Schedule {
            t1,
            eta: params.tau.min(params.horizon - t1),
        }
    }

    /// Nearest admissible schedule (clamps `eta`, then `t1`).
    pub fn project(params: &ModelParams, t1: f64, eta: f64) -> Schedule {
        let eta = eta.clamp(0.0, params.tau);
        let t1 = t1.clamp(0.0, params.horizon - eta);
        Schedule { t1, eta }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ModelParams {
        ModelParams::new(0.01, 1.5, 0.0, 1.5, 2600.0, 60.0, 0.0).unwrap()
    }

    #[test]
    fn params_invariants() {
        assert!(ModelParams::new(0.01, 1.5, 0.3, 1.5, 2600.0, 60.0, 0.0).is_ok());
        let bad = [
            ModelParams::new(0.0, 1.5, 0.3, 1.5, 2600.0, 60.0, 0.0),
            ModelParams::new(0.01, 1.5, 1.5, 1.5, 2600.0, 60.0, 0.0),
            ModelParams::new(0.01, 1.5, 0.3, 1.6, 2600.0, 60.0, 0.0),
            ModelParams::new(0.01, 1.5, -0.1, 1.5, 2600.0, 60.0, 0.0),
            ModelParams::new(0.01, 1.5, 0.3, 1.5, 2600.0, 2600.0, 0.0),
            ModelParams::new(0.01, 1.5, 0.3, 1.5, 2600.0, 0.0, 0.0),
            ModelParams::new(0.01, 1.5, 0.3, 1.5, 2600.0, 60.0, -1.0),
            ModelParams::new(0.01, f64::NAN, 0.3, 1.5, 2600.0, 60.0, 0.0),
        ];
        for b in bad {
            assert!(matches!(b, Err(Error::Domain { .. })), "{b:?}");
        }
    }

    #[test]
    fn state_domain() {
        assert!(EpidemicState::new(1.0 - 1e-6, 1e-6).is_ok());
        // boundary x + y = 1 is accepted
        assert!(EpidemicState::new(0.5, 0.5).is_ok());
        match EpidemicState::new(0.9, 0.0) {
            Err(Error::Domain { field, .. }) => assert_eq!(field, "y0"),
            other => panic!("{other:?}"),
        }
        assert!(EpidemicState::new(0.9, 1e-13).is_err());
        assert!(EpidemicState::new(0.0, 0.1).is_err());
        assert!(EpidemicState::new(0.9, 0.2).is_err());
    }

    #[test]
    fn schedule_region() {
        let p = base();
        assert!(Schedule::new(&p, 0.0, 0.0).is_ok());
        assert!(Schedule::new(&p, 2540.0, 60.0).is_ok());
        assert!(Schedule::new(&p, 2541.0, 60.0).is_err());
        assert!(Schedule::new(&p, 10.0, 61.0).is_err());
        assert!(Schedule::new(&p, -1.0, 10.0).is_err());
        assert_eq!(Schedule::new(&p, 100.0, 60.0).unwrap().t2(), 160.0);
    }

    #[test]
    fn border_and_projection() {
        let p = base();
        assert_eq!(Schedule::on_border(&p, 100.0), Schedule { t1: 100.0, eta: 60.0 });
        assert_eq!(Schedule::on_border(&p, 2580.0), Schedule { t1: 2580.0, eta: 20.0 });
        let s = Schedule::project(&p, 2599.0, 80.0);
        assert_eq!(s, Schedule { t1: 2540.0, eta: 60.0 });
        assert!(s.validate(&p).is_ok());
    }
}
